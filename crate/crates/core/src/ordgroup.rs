//! Ordered abelian value groups: ℤⁿ with lexicographic order (n ≤ 3), the
//! trivial group, and an adjoined absorbing ∞.
//!
//! Segments (subsets closed under `x ∈ H, −x ≤ y ≤ x ⇒ y ∈ H`), isolated
//! subgroups (proper subgroups that are segments — for ℤⁿ-lex these form the
//! chain 0 ⊂ 0×ℤ ⊂ 0×ℤ² ⊂ …), and order-preserving homomorphisms given by
//! integer matrices.  ∞ + α = ∞ always; ∞ − ∞ and α − ∞ are rejected.
//!
//! The integer-lattice helpers at the bottom (column echelon form, kernels,
//! indices, Smith invariant factors) back the ramification and coarsening
//! computations elsewhere in the crate.

use std::cmp::Ordering;
use std::fmt;

use crate::{Error, Result};

/// Descriptor of a value group: ℤ^rank with lex order (rank 0 = trivial).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupDesc {
    pub rank: usize,
}

impl GroupDesc {
    pub const TRIVIAL: GroupDesc = GroupDesc { rank: 0 };

    pub fn new(rank: usize) -> Self {
        GroupDesc { rank }
    }
}

impl fmt::Display for GroupDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rank {
            0 => write!(f, "0"),
            1 => write!(f, "Z"),
            n => write!(f, "Z^{n}-lex"),
        }
    }
}

/// An element of a value group, or the adjoined ∞ (`value: None`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GValue {
    pub group: GroupDesc,
    pub value: Option<Vec<i64>>,
}

impl GValue {
    pub fn finite(group: GroupDesc, v: Vec<i64>) -> Self {
        assert_eq!(v.len(), group.rank, "payload length must match rank");
        GValue {
            group,
            value: Some(v),
        }
    }

    pub fn infinity(group: GroupDesc) -> Self {
        GValue { group, value: None }
    }

    pub fn zero(group: GroupDesc) -> Self {
        GValue::finite(group, vec![0; group.rank])
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.value.as_ref().map_or(false, |v| v.iter().all(|&x| x == 0))
    }

    /// `> 0` in the lex order (∞ counts as positive).
    pub fn is_positive(&self) -> bool {
        match &self.value {
            None => true,
            Some(v) => matches!(lex_vec(v, &vec![0; v.len()]), Ordering::Greater),
        }
    }

    /// `≥ 0` in the lex order.
    pub fn is_nonnegative(&self) -> bool {
        match &self.value {
            None => true,
            Some(v) => lex_vec(v, &vec![0; v.len()]) != Ordering::Less,
        }
    }
}

impl fmt::Display for GValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            None => write!(f, "inf"),
            Some(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn lex_vec(a: &[i64], b: &[i64]) -> Ordering {
    a.cmp(b)
}

/// Total lexicographic comparison; ∞ is strictly above every finite value.
pub fn lex_compare(a: &GValue, b: &GValue) -> Result<Ordering> {
    if a.group != b.group {
        return Err(Error::GroupMismatch(format!(
            "{} vs {}",
            a.group, b.group
        )));
    }
    Ok(match (&a.value, &b.value) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => lex_vec(x, y),
    })
}

/// Componentwise addition with absorbing ∞.
pub fn gadd(a: &GValue, b: &GValue) -> Result<GValue> {
    if a.group != b.group {
        return Err(Error::GroupMismatch(format!(
            "{} vs {}",
            a.group, b.group
        )));
    }
    Ok(match (&a.value, &b.value) {
        (Some(x), Some(y)) => GValue::finite(
            a.group,
            x.iter().zip(y).map(|(p, q)| p + q).collect(),
        ),
        _ => GValue::infinity(a.group),
    })
}

/// Negation of a finite value; −∞ is undefined.
pub fn gneg(a: &GValue) -> Result<GValue> {
    match &a.value {
        None => Err(Error::InfinityArithmetic),
        Some(v) => Ok(GValue::finite(a.group, v.iter().map(|x| -x).collect())),
    }
}

/// `a − b`; subtracting ∞ is undefined, ∞ − finite = ∞.
pub fn gsub(a: &GValue, b: &GValue) -> Result<GValue> {
    if b.is_infinite() {
        return Err(Error::InfinityArithmetic);
    }
    gadd(a, &gneg(b)?)
}

/// `k·a` for k ≥ 1 (∞ scales to ∞).
pub fn gscale(a: &GValue, k: i64) -> GValue {
    match &a.value {
        None => GValue::infinity(a.group),
        Some(v) => GValue::finite(a.group, v.iter().map(|x| x * k).collect()),
    }
}

/// The classes of subsets used as convexity data: ∅, a symmetric interval,
/// a subgroup given by generators, or the whole group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentKind {
    Empty,
    /// `{y : −bound ≤ y ≤ bound}` in the lex order.
    SymmetricInterval { bound: Vec<i64> },
    /// The subgroup generated by the listed vectors (empty list = {0}).
    Subgroup { basis: Vec<Vec<i64>> },
    Whole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub group: GroupDesc,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn empty(group: GroupDesc) -> Self {
        Segment {
            group,
            kind: SegmentKind::Empty,
        }
    }

    pub fn whole(group: GroupDesc) -> Self {
        Segment {
            group,
            kind: SegmentKind::Whole,
        }
    }

    pub fn zero_subgroup(group: GroupDesc) -> Self {
        Segment {
            group,
            kind: SegmentKind::Subgroup { basis: vec![] },
        }
    }

    pub fn interval(group: GroupDesc, bound: Vec<i64>) -> Self {
        assert_eq!(bound.len(), group.rank);
        Segment {
            group,
            kind: SegmentKind::SymmetricInterval { bound },
        }
    }

    pub fn subgroup(group: GroupDesc, basis: Vec<Vec<i64>>) -> Self {
        for b in &basis {
            assert_eq!(b.len(), group.rank);
        }
        Segment {
            group,
            kind: SegmentKind::Subgroup { basis },
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        assert_eq!(x.len(), self.group.rank);
        match &self.kind {
            SegmentKind::Empty => false,
            SegmentKind::Whole => true,
            SegmentKind::SymmetricInterval { bound } => {
                let neg: Vec<i64> = bound.iter().map(|v| -v).collect();
                lex_vec(&neg, x) != Ordering::Greater && lex_vec(x, bound) != Ordering::Greater
            }
            SegmentKind::Subgroup { basis } => {
                lattice_contains(self.group.rank, basis, x)
            }
        }
    }

    /// Does the subset satisfy the segment condition (`x` in, `−x ≤ y ≤ x`
    /// implies `y` in), exhaustively over the box `|coordᵢ| ≤ samples`?
    /// Subgroup data is additionally checked for closure under + and −
    /// within the box.  `Whole` and `Empty` hold vacuously.
    pub fn is_segment(&self, samples: i64) -> bool {
        assert!(samples >= 1);
        match self.kind {
            SegmentKind::Empty | SegmentKind::Whole => return true,
            _ => {}
        }
        let all = box_points(self.group.rank, samples);
        let members: Vec<&Vec<i64>> = all.iter().filter(|p| self.contains(p)).collect();
        for x in &members {
            let neg: Vec<i64> = x.iter().map(|v| -v).collect();
            for y in &all {
                if lex_vec(&neg, y) != Ordering::Greater
                    && lex_vec(y, x) != Ordering::Greater
                    && !self.contains(y)
                {
                    return false;
                }
            }
        }
        if let SegmentKind::Subgroup { .. } = self.kind {
            for a in &members {
                let neg: Vec<i64> = a.iter().map(|v| -v).collect();
                if !self.contains(&neg) {
                    return false;
                }
                for b in &members {
                    let sum: Vec<i64> = a.iter().zip(b.iter()).map(|(p, q)| p + q).collect();
                    if sum.iter().all(|v| v.abs() <= samples) && !self.contains(&sum) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SegmentKind::Empty => write!(f, "empty"),
            SegmentKind::Whole => write!(f, "whole"),
            SegmentKind::SymmetricInterval { bound } => {
                write!(f, "interval[-{b},{b}]", b = fmt_vec(bound))
            }
            SegmentKind::Subgroup { basis } => {
                if basis.is_empty() {
                    write!(f, "{{0}}")
                } else {
                    let parts: Vec<String> = basis.iter().map(|b| fmt_vec(b)).collect();
                    write!(f, "<{}>", parts.join(","))
                }
            }
        }
    }
}

fn fmt_vec(v: &[i64]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

/// All points of the box `|coordᵢ| ≤ bound` in ℤ^rank.
pub fn box_points(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        let mut next = Vec::with_capacity(out.len() * (2 * bound as usize + 1));
        for p in &out {
            for c in -bound..=bound {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// The full increasing chain of proper isolated subgroups of ℤ^rank-lex:
/// {0} ⊂ 0×ℤ ⊂ 0×ℤ² ⊂ … (rank entries; empty for the trivial group).
pub fn isolated_subgroups(g: GroupDesc) -> Result<Vec<Segment>> {
    if g.rank > 3 {
        return Err(Error::RankTooLarge(g.rank));
    }
    let mut out = Vec::with_capacity(g.rank);
    for k in 0..g.rank {
        let basis: Vec<Vec<i64>> = (g.rank - k..g.rank)
            .map(|i| {
                let mut e = vec![0; g.rank];
                e[i] = 1;
                e
            })
            .collect();
        out.push(Segment::subgroup(g, basis));
    }
    Ok(out)
}

/// An additive map ℤ^source → ℤ^target given by an integer matrix
/// (`target.rank` rows × `source.rank` columns), sending ∞ to ∞.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderHom {
    pub source: GroupDesc,
    pub target: GroupDesc,
    pub matrix: Vec<Vec<i64>>,
}

impl OrderHom {
    pub fn new(source: GroupDesc, target: GroupDesc, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if matrix.len() != target.rank || matrix.iter().any(|r| r.len() != source.rank) {
            return Err(Error::GroupMismatch(format!(
                "matrix shape {}x{} does not map {source} into {target}",
                matrix.len(),
                matrix.first().map_or(0, Vec::len),
            )));
        }
        Ok(OrderHom {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(g: GroupDesc) -> Self {
        let matrix = (0..g.rank)
            .map(|i| {
                let mut row = vec![0; g.rank];
                row[i] = 1;
                row
            })
            .collect();
        OrderHom {
            source: g,
            target: g,
            matrix,
        }
    }

    /// Projection of ℤ^n-lex onto its first `keep` coordinates.
    pub fn projection_first(source: GroupDesc, keep: usize) -> Self {
        assert!(keep <= source.rank);
        let matrix = (0..keep)
            .map(|i| {
                let mut row = vec![0; source.rank];
                row[i] = 1;
                row
            })
            .collect();
        OrderHom {
            source,
            target: GroupDesc::new(keep),
            matrix,
        }
    }

    pub fn apply(&self, a: &GValue) -> Result<GValue> {
        if a.group != self.source {
            return Err(Error::GroupMismatch(format!(
                "{} is not in {}",
                a, self.source
            )));
        }
        Ok(match &a.value {
            None => GValue::infinity(self.target),
            Some(v) => GValue::finite(
                self.target,
                self.matrix
                    .iter()
                    .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
                    .collect(),
            ),
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &OrderHom) -> Result<OrderHom> {
        if inner.target != self.source {
            return Err(Error::GroupMismatch(format!(
                "cannot compose {}→{} after {}→{}",
                self.source, self.target, inner.source, inner.target
            )));
        }
        let mut matrix = vec![vec![0i64; inner.source.rank]; self.target.rank];
        for i in 0..self.target.rank {
            for j in 0..inner.source.rank {
                for (k, inner_row) in inner.matrix.iter().enumerate() {
                    matrix[i][j] += self.matrix[i][k] * inner_row[j];
                }
            }
        }
        OrderHom::new(inner.source, self.target, matrix)
    }

    /// Exact order-preservation test for lex orders.
    ///
    /// Writing the columns cⱼ = h(eⱼ): h is order-preserving iff once a zero
    /// column appears every later column is zero, and the nonzero columns
    /// have strictly increasing leading indices with positive leading
    /// entries.  (Later coordinates can be arbitrarily negative, so each
    /// column must act strictly below the ones before it.)
    pub fn is_order_preserving(&self) -> bool {
        let mut prev_lead: Option<usize> = None;
        let mut zero_seen = false;
        for j in 0..self.source.rank {
            let col: Vec<i64> = self.matrix.iter().map(|row| row[j]).collect();
            match col.iter().position(|&x| x != 0) {
                None => zero_seen = true,
                Some(lead) => {
                    if zero_seen || col[lead] < 0 {
                        return false;
                    }
                    if let Some(p) = prev_lead {
                        if lead <= p {
                            return false;
                        }
                    }
                    prev_lead = Some(lead);
                }
            }
        }
        true
    }

    /// `ker h` as a subgroup segment of the source (an isolated subgroup
    /// whenever `h` is order-preserving).
    pub fn kernel(&self) -> Segment {
        let cols: Vec<Vec<i64>> = (0..self.source.rank)
            .map(|j| self.matrix.iter().map(|row| row[j]).collect())
            .collect();
        let basis = integer_kernel(self.target.rank, &cols);
        Segment::subgroup(self.source, basis)
    }

    /// Echelon basis of the image lattice h(ℤ^source) ⊆ ℤ^target.
    pub fn image_lattice(&self) -> Vec<Vec<i64>> {
        let cols: Vec<Vec<i64>> = (0..self.source.rank)
            .map(|j| self.matrix.iter().map(|row| row[j]).collect())
            .collect();
        lattice_echelon(self.target.rank, &cols)
    }
}

/// Kernel of an order homomorphism, as required by the coarsening
/// correspondence: always a subgroup segment.
pub fn hom_kernel(h: &OrderHom) -> Segment {
    h.kernel()
}

// ---- integer lattice utilities -------------------------------------------

/// Column echelon reduction with unimodular column operations.  Returns
/// `(echelon columns of the input span, transform columns, rank)`; the
/// transform columns beyond `rank` form a basis of the integer kernel.
fn column_reduce(rows: usize, cols: &[Vec<i64>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, usize) {
    let n = cols.len();
    let mut m: Vec<Vec<i128>> = cols
        .iter()
        .map(|c| {
            assert_eq!(c.len(), rows);
            c.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            let mut e = vec![0i128; n];
            e[i] = 1;
            e
        })
        .collect();
    let mut next = 0usize;
    for r in 0..rows {
        // gcd-eliminate row r across columns next..
        loop {
            let nz: Vec<usize> = (next..n).filter(|&j| m[j][r] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            // pick the column with the smallest nonzero |entry| as pivot
            let &jp = nz
                .iter()
                .min_by_key(|&&j| m[j][r].unsigned_abs())
                .unwrap();
            for &j in &nz {
                if j == jp {
                    continue;
                }
                let q = m[j][r] / m[jp][r];
                if q != 0 {
                    for i in 0..rows {
                        m[j][i] -= q * m[jp][i];
                    }
                    for i in 0..n {
                        u[j][i] -= q * u[jp][i];
                    }
                }
            }
        }
        if let Some(j) = (next..n).find(|&j| m[j][r] != 0) {
            m.swap(j, next);
            u.swap(j, next);
            if m[next][r] < 0 {
                for x in m[next].iter_mut() {
                    *x = -*x;
                }
                for x in u[next].iter_mut() {
                    *x = -*x;
                }
            }
            next += 1;
        }
    }
    (m, u, next)
}

fn narrow(v: &[i128]) -> Vec<i64> {
    v.iter()
        .map(|&x| i64::try_from(x).expect("lattice coordinate overflow"))
        .collect()
}

/// Canonical echelon generating set of the lattice spanned by `vectors`.
pub fn lattice_echelon(rank: usize, vectors: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (m, _, r) = column_reduce(rank, vectors);
    m[..r].iter().map(|c| narrow(c)).collect()
}

/// Basis of `{x : Ax = 0}` over ℤ, where `cols` are the columns of A.
pub fn integer_kernel(rows: usize, cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (_, u, r) = column_reduce(rows, cols);
    u[r..].iter().map(|c| narrow(c)).collect()
}

/// Integer coordinates of `x` in the lattice spanned by `vectors`, if any.
pub fn lattice_coords(rank: usize, vectors: &[Vec<i64>], x: &[i64]) -> Option<Vec<i64>> {
    assert_eq!(x.len(), rank);
    let (m, u, r) = column_reduce(rank, vectors);
    // echelon columns have strictly increasing leading rows: solve greedily
    let mut rem: Vec<i128> = x.iter().map(|&v| v as i128).collect();
    let mut coeffs = vec![0i128; r];
    for (j, col) in m[..r].iter().enumerate() {
        let lead = col.iter().position(|&v| v != 0).unwrap();
        if rem[..lead].iter().any(|&v| v != 0) {
            return None;
        }
        if rem[lead] % col[lead] != 0 {
            return None;
        }
        let c = rem[lead] / col[lead];
        for i in 0..rank {
            rem[i] -= c * col[i];
        }
        coeffs[j] = c;
    }
    if rem.iter().any(|&v| v != 0) {
        return None;
    }
    // convert echelon coordinates back to coordinates w.r.t. the input
    // vectors via the transform: echelon = input · U, so input-coords = U · c
    let n = vectors.len();
    let mut out = vec![0i128; n];
    for (j, c) in coeffs.iter().enumerate() {
        for i in 0..n {
            out[i] += c * u[j][i];
        }
    }
    Some(narrow(&out))
}

/// Does `x` lie in the lattice spanned by `vectors`?
pub fn lattice_contains(rank: usize, vectors: &[Vec<i64>], x: &[i64]) -> bool {
    lattice_coords(rank, vectors, x).is_some()
}

/// Index `[sup : sub]` of one lattice inside another (both given by spanning
/// sets in ℤ^rank).  `None` when the index is infinite (rank drop), an error
/// when `sub` is not contained in `sup`.
pub fn lattice_index(rank: usize, sup: &[Vec<i64>], sub: &[Vec<i64>]) -> Result<Option<u64>> {
    let sup_ech = lattice_echelon(rank, sup);
    let mut coords = Vec::new();
    for v in sub {
        match lattice_coords(rank, &sup_ech, v) {
            Some(c) => coords.push(c),
            None => {
                return Err(Error::GroupMismatch(format!(
                    "{} is not in the ambient lattice",
                    fmt_vec(v)
                )))
            }
        }
    }
    let r_sup = sup_ech.len();
    let sub_in_sup = lattice_echelon(r_sup, &coords);
    if sub_in_sup.len() < r_sup {
        return Ok(None);
    }
    // echelon columns are triangular: the index is the product of leads
    let mut det: i128 = 1;
    for col in &sub_in_sup {
        let lead = col.iter().find(|&&v| v != 0).unwrap();
        det *= *lead as i128;
    }
    Ok(Some(det.unsigned_abs() as u64))
}

/// Smith invariant factors d₁ | d₂ | … of an integer matrix (row-major).
/// The quotient ℤ^rows / column-span is ⊕ ℤ/dᵢ ⊕ ℤ^(rows − #factors).
pub fn smith_invariants(matrix: &[Vec<i64>]) -> Vec<u64> {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    let mut a: Vec<Vec<i128>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut out = Vec::new();
    let mut t = 0usize;
    while t < rows.min(cols) {
        // find a nonzero pivot in the trailing submatrix
        let mut pivot = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 {
                    match pivot {
                        None => pivot = Some((i, j)),
                        Some((pi, pj)) => {
                            if a[i][j].unsigned_abs() < a[pi][pj].unsigned_abs() {
                                pivot = Some((i, j));
                            }
                        }
                    }
                }
            }
        }
        let (pi, pj) = match pivot {
            None => break,
            Some(p) => p,
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / a[t][t];
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    a.swap(t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / a[t][t];
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        // enforce the divisibility chain
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if a[i][j] % a[t][t] != 0 {
                    for jj in t..cols {
                        a[t][jj] += a[i][jj];
                    }
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            out.push(a[t][t].unsigned_abs() as u64);
            t += 1;
        }
    }
    out
}
