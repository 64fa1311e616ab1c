//! Pairs `(A, 𝔭)` and the order-theoretic structure around a valuation.
//!
//! A *valuation pair* of `R` is a subsuperring `A` with a prime ideal `𝔭`
//! (containing the canonical nil ideal) such that every `x ∈ R ∖ A` admits
//! an even `x′ ∈ 𝔭` with `x·x′ ∈ A ∖ 𝔭`. Pairs here come in two flavors:
//! read off a valuation as `({v ≥ 0}, {v > 0})`, or declared by a
//! normal-form membership family. Since the witness quantifier ranges over
//! an infinite ring, the checks are bounded searches and say so in their
//! verdicts.
//!
//! The rest of the module is the order side of the theory: v-convex ideals
//! and their two-way correspondence with proper segments of the value
//! group, dominance `w = h∘v` with the containment chain as the failure
//! diagnostics, the chain of dominating valuations indexed by the proper
//! isolated subgroups, and the valuation induced on `A_w/𝔭_w` by a
//! dominated `v`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use crate::ordgroup::{
    box_points, gneg, isolated_subgroups, lex_compare, GroupDesc, GValue, OrderHom, Segment,
    SegmentKind,
};
use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::sample;
use crate::scalar::{big_mod, Scalar};
use crate::superalg::{BaseRing, RingDesc, SuperElem, VarKind};
use crate::valuation::{small_prime, solve_hom, PlaceDatum, Rule, Valuation};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// pair data
// ---------------------------------------------------------------------------

/// Declared pair families, each with a decidable normal-form membership
/// test on its host ring.
#[derive(Debug, Clone, PartialEq)]
pub enum DeclaredPair {
    /// On `ℤ[x,x⁻¹ | θ…]`: the θ-free part may use negative powers of
    /// `var` only with coefficients divisible by `p`; membership in the
    /// ideal additionally requires the constant term to be divisible.
    /// This is the subring `ℤ[x] + p·R̄` paired with `x·A + p·R̄`.
    ModPResidueOrder { var: usize, p: u64 },
    /// On `ℤ[x,x⁻¹ | θ…]`: the θ-free part is an honest polynomial in
    /// `var` (the subring `ℤ[x]` plus the nil part); the ideal kills the
    /// constant term too.
    LaurentNonnegOrder { var: usize },
    /// On `K(x)[θ…]`: the θ-free part must be a polynomial, the nil part
    /// is unconstrained — `K[x] + J` with the ideal `var·K[x] + J`. The
    /// standard *non*-example — the witness search exhausts every bound
    /// on `1/(var + 1)`.
    PolynomialSubring { var: usize },
}

impl DeclaredPair {
    fn a_member(&self, x: &SuperElem) -> Result<bool> {
        let r = x.theta_free();
        match self {
            DeclaredPair::ModPResidueOrder { var, p } => {
                if r.is_zero() {
                    return Ok(true);
                }
                Ok(laurent(&r, *var)?
                    .iter()
                    .all(|(k, c)| *k >= 0 || divisible(c, *p)))
            }
            DeclaredPair::LaurentNonnegOrder { var } => {
                if r.is_zero() {
                    return Ok(true);
                }
                Ok(laurent(&r, *var)?.keys().all(|k| *k >= 0))
            }
            DeclaredPair::PolynomialSubring { .. } => {
                Ok(r.is_zero() || r.as_poly().is_some())
            }
        }
    }

    fn p_member(&self, x: &SuperElem) -> Result<bool> {
        let r = x.theta_free();
        match self {
            DeclaredPair::ModPResidueOrder { var, p } => {
                if r.is_zero() {
                    return Ok(true);
                }
                Ok(laurent(&r, *var)?
                    .iter()
                    .all(|(k, c)| *k > 0 || divisible(c, *p)))
            }
            DeclaredPair::LaurentNonnegOrder { var } => {
                if r.is_zero() {
                    return Ok(true);
                }
                Ok(laurent(&r, *var)?.keys().all(|k| *k > 0))
            }
            DeclaredPair::PolynomialSubring { var } => {
                if !self.a_member(x)? {
                    return Ok(false);
                }
                if r.is_zero() {
                    return Ok(true);
                }
                let p = r.as_poly().expect("polynomial by the membership test");
                Ok(p.min_exp_in(*var).is_none_or(|e| e >= 1))
            }
        }
    }
}

fn laurent(r: &RatFn, var: usize) -> Result<BTreeMap<i32, Scalar>> {
    r.laurent_coeffs(var).ok_or_else(|| {
        Error::Unsupported("the θ-free part is not Laurent in the declared variable".into())
    })
}

fn divisible(c: &Scalar, p: u64) -> bool {
    match c.as_rational() {
        Some(q) => q.is_integer() && big_mod(q.numer(), p) == 0,
        None => false,
    }
}

#[derive(Debug, Clone)]
enum PairSource {
    FromValuation(Box<Valuation>),
    Declared(DeclaredPair),
}

/// A candidate pair `(A, 𝔭)` on a host ring, with membership predicates
/// for both components.
#[derive(Debug, Clone)]
pub struct ValuationPair {
    pub ring: RingDesc,
    source: PairSource,
}

/// The pair `(A_v, 𝔭_v)` read off a valuation.
pub fn pair_of(v: &Valuation) -> ValuationPair {
    ValuationPair {
        ring: v.ring.clone(),
        source: PairSource::FromValuation(Box::new(v.clone())),
    }
}

impl ValuationPair {
    pub fn declared(ring: RingDesc, family: DeclaredPair) -> Result<ValuationPair> {
        match &family {
            DeclaredPair::ModPResidueOrder { var, p } => {
                if *var >= ring.nvars()
                    || ring.even_vars[*var].kind != VarKind::Laurent
                    || !matches!(ring.base, BaseRing::Z)
                {
                    return Err(Error::RingMismatch(
                        "the family lives on a ℤ-Laurent variable".into(),
                    ));
                }
                if !small_prime(*p) {
                    return Err(Error::NotPrime(format!("{p} is not prime")));
                }
            }
            DeclaredPair::LaurentNonnegOrder { var } => {
                if *var >= ring.nvars() || ring.even_vars[*var].kind != VarKind::Laurent {
                    return Err(Error::RingMismatch(
                        "the family lives on a Laurent variable".into(),
                    ));
                }
            }
            DeclaredPair::PolynomialSubring { var } => {
                if *var >= ring.nvars() || ring.even_vars[*var].kind != VarKind::Rational {
                    return Err(Error::RingMismatch(
                        "the family needs a rational-function variable".into(),
                    ));
                }
            }
        }
        Ok(ValuationPair {
            ring,
            source: PairSource::Declared(family),
        })
    }

    /// `x ∈ A`.
    pub fn a_member(&self, x: &SuperElem) -> Result<bool> {
        self.admit(x)?;
        match &self.source {
            PairSource::FromValuation(v) => v.in_valuation_pair_ring(x),
            PairSource::Declared(d) => d.a_member(x),
        }
    }

    /// `x ∈ 𝔭`.
    pub fn p_member(&self, x: &SuperElem) -> Result<bool> {
        self.admit(x)?;
        match &self.source {
            PairSource::FromValuation(v) => v.in_positive_ideal(x),
            PairSource::Declared(d) => d.p_member(x),
        }
    }

    fn admit(&self, x: &SuperElem) -> Result<()> {
        if x.ring != self.ring {
            return Err(Error::RingMismatch(format!(
                "element of {} tested against a pair on {}",
                x.ring, self.ring
            )));
        }
        if !x.in_ring() {
            return Err(Error::NotInRing(format!("{x} lies outside {}", self.ring)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// the bounded pair check
// ---------------------------------------------------------------------------

/// Outcome of the bounded pair check.
#[derive(Debug, Clone)]
pub enum PairVerdict {
    /// Every sampled element outside `A` produced its witness; the log
    /// pairs each with the even ideal element that multiplied it into
    /// `A ∖ 𝔭`.
    Pass {
        bound: u32,
        witnesses: Vec<(SuperElem, SuperElem)>,
    },
    /// Some element outside `A` exhausted the degree-bounded witness pool.
    /// This is a semi-decision: a larger bound can still rescue the pair,
    /// a smaller one never will.
    FailWithinBound { bound: u32, outside: SuperElem },
    /// A sampled violation of the subring / prime-ideal axioms — definite.
    Fail {
        reason: String,
        counterexample: SuperElem,
    },
}

impl PairVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, PairVerdict::Pass { .. })
    }
}

/// A deterministic panel of ring elements plus random fill, all inside the
/// host ring, mixing units, ideal members, and nilpotents.
pub(crate) fn membership_samples(ring: &RingDesc, rng: &mut ChaCha8Rng, n: usize) -> Vec<SuperElem> {
    let mut out = vec![ring.one_elem(), ring.int_elem(2), ring.int_elem(6)];
    for i in 0..ring.nvars() {
        let x = ring.var_elem(i);
        out.push(x.clone());
        out.push(x.pow(2));
        out.push(x.sub(&ring.one_elem()));
        out.push(x.mul(&ring.int_elem(5)));
        if ring.odd > 0 {
            out.push(x.mul(&ring.theta_elem(0)));
            out.push(x.add(&ring.theta_elem(0)));
        }
    }
    for k in 0..ring.odd {
        out.push(ring.theta_elem(k));
    }
    for _ in 0..n {
        out.push(sample::sample_elem(rng, ring));
    }
    out.retain(|x| x.in_ring());
    out
}

/// Peel any matrix layers off a rule and expose the finite place
/// polynomial, if that is what drives the valuation.
fn place_poly_of(rule: &Rule) -> Option<&MPoly> {
    match rule {
        Rule::Place {
            datum: PlaceDatum::FiniteIrreducible(q),
            ..
        } => Some(q),
        Rule::Mapped { inner, .. } => place_poly_of(inner),
        _ => None,
    }
}

/// Simple even atoms of the host ring: small constants, variables and
/// shifts, in-ring inverses, and the pair's distinguished irreducible when
/// one is visible. Products of these make up the bounded search pools.
fn atom_pool(pair: &ValuationPair) -> Vec<SuperElem> {
    let ring = &pair.ring;
    let mut atoms: Vec<SuperElem> = Vec::new();
    if let PairSource::FromValuation(v) = &pair.source {
        if let Some(q) = place_poly_of(&v.rule) {
            atoms.push(ring.from_even(RatFn::from_poly(q.clone())));
        }
    }
    for i in 0..ring.nvars() {
        let x = ring.var_elem(i);
        atoms.push(x.clone());
        for c in [1i64, -1, 2, -2] {
            atoms.push(x.sub(&ring.int_elem(c)));
        }
    }
    for c in [2i64, 3, 5, 7] {
        atoms.push(ring.int_elem(c));
    }
    for a in atoms.clone() {
        if let Ok(i) = a.inv() {
            atoms.push(i);
        }
    }
    atoms.retain(|a| a.in_ring() && !a.is_zero());
    atoms.dedup_by(|a, b| a == b);
    atoms
}

/// All products `a^j` and `a^j·b^k` of distinct atoms with `j + k ≤ bound`,
/// capped. Powers are precomputed so the pool is cheap to build.
fn product_pool(atoms: &[SuperElem], bound: u32, cap: usize) -> Vec<SuperElem> {
    let b = bound.clamp(1, 6) as usize;
    let powers: Vec<Vec<SuperElem>> = atoms
        .iter()
        .map(|a| {
            let mut p = Vec::with_capacity(b);
            let mut acc = a.clone();
            for _ in 0..b {
                p.push(acc.clone());
                acc = acc.mul(a);
            }
            p
        })
        .collect();
    let mut out = Vec::new();
    for p in &powers {
        out.extend(p.iter().cloned());
    }
    'outer: for (i, p) in powers.iter().enumerate() {
        for q in powers.iter().skip(i + 1) {
            for (j, pj) in p.iter().enumerate().take(b - 1) {
                for qk in q.iter().take(b - 1 - j) {
                    out.push(pj.mul(qk));
                    if out.len() >= cap {
                        break 'outer;
                    }
                }
            }
        }
    }
    out
}

fn witness_pool(pair: &ValuationPair, bound: u32) -> Result<Vec<SuperElem>> {
    let mut pool = Vec::new();
    for cand in product_pool(&atom_pool(pair), bound, 4000) {
        if pair.p_member(&cand)? {
            pool.push(cand);
        }
    }
    Ok(pool)
}

/// Bounded search for the witness of a single element `x ∉ A`: an even
/// `x′ ∈ 𝔭` with `x·x′ ∈ A ∖ 𝔭`. `None` means the degree-`bound` pool is
/// exhausted, not that no witness exists.
pub fn find_pair_witness(
    pair: &ValuationPair,
    x: &SuperElem,
    bound: u32,
) -> Result<Option<SuperElem>> {
    let pool = witness_pool(pair, bound)?;
    find_witness_in(&pool, pair, x)
}

fn find_witness_in(
    pool: &[SuperElem],
    pair: &ValuationPair,
    x: &SuperElem,
) -> Result<Option<SuperElem>> {
    for xp in pool {
        let prod = x.mul(xp);
        if !prod.in_ring() {
            continue;
        }
        if pair.a_member(&prod)? && !pair.p_member(&prod)? {
            return Ok(Some(xp.clone()));
        }
    }
    Ok(None)
}

/// Elements of the host ring outside `A`: inverse powers of the variables,
/// inverted shifts, plain variables (for pairs bounded at infinity), and
/// random fill.
fn outside_samples(pair: &ValuationPair, rng: &mut ChaCha8Rng, bound: u32) -> Result<Vec<SuperElem>> {
    let ring = &pair.ring;
    let mut cands: Vec<SuperElem> = Vec::new();
    for i in 0..ring.nvars() {
        for k in 1..=bound.min(3) as i32 {
            cands.push(ring.from_even(RatFn::var_pow(ring.field(), ring.nvars(), i, -k)));
        }
        let x = ring.var_elem(i);
        for c in [1i64, -1, 2, -2] {
            if let Ok(inv) = x.sub(&ring.int_elem(c)).inv() {
                cands.push(inv);
            }
        }
        cands.push(x.clone());
        cands.push(x.pow(2));
    }
    for _ in 0..40 {
        cands.push(sample::sample_elem(rng, ring));
    }
    let mut out = Vec::new();
    for x in cands {
        if !x.in_ring() || x.is_zero() {
            continue;
        }
        if !pair.a_member(&x)? {
            out.push(x);
            if out.len() >= 20 {
                break;
            }
        }
    }
    Ok(out)
}

/// The bounded pair check: graded subring/prime-ideal axioms on a sample
/// panel, then a witness for every sampled element outside `A`.
pub fn is_valuation_pair(
    pair: &ValuationPair,
    bound: u32,
    rng: &mut ChaCha8Rng,
) -> Result<PairVerdict> {
    let ring = &pair.ring;
    let fail = |reason: &str, x: SuperElem| PairVerdict::Fail {
        reason: reason.into(),
        counterexample: x,
    };

    let mut in_a = Vec::new();
    let mut in_p = Vec::new();
    let mut units = Vec::new();
    for x in membership_samples(ring, rng, 40) {
        if pair.p_member(&x)? {
            if !pair.a_member(&x)? {
                return Ok(fail("𝔭 ⊄ A", x));
            }
            let (ev, od) = x.homogeneous_parts();
            for part in [ev, od] {
                if !pair.p_member(&part)? {
                    return Ok(fail("a graded part of an ideal member escapes 𝔭", part));
                }
            }
            in_p.push(x.clone());
            in_a.push(x);
        } else if pair.a_member(&x)? {
            units.push(x.clone());
            in_a.push(x);
        }
    }
    for _ in 0..10 {
        let n = sample::sample_nil(rng, ring);
        if n.in_ring() && !pair.p_member(&n)? {
            return Ok(fail("the canonical nil ideal escapes 𝔭", n));
        }
    }
    for a in in_a.iter().take(6) {
        for b in in_a.iter().take(6) {
            let s = a.add(b);
            if !pair.a_member(&s)? {
                return Ok(fail("A not closed under +", s));
            }
            let m = a.mul(b);
            if !pair.a_member(&m)? {
                return Ok(fail("A not closed under ·", m));
            }
        }
    }
    for m in in_p.iter().take(6) {
        for n in in_p.iter().take(6) {
            let s = m.add(n);
            if !pair.p_member(&s)? {
                return Ok(fail("𝔭 not closed under +", s));
            }
        }
        for a in in_a.iter().take(6) {
            let t = a.mul(m);
            if !pair.p_member(&t)? {
                return Ok(fail("A·𝔭 ⊄ 𝔭", t));
            }
        }
    }
    for u in units.iter().take(8) {
        for w in units.iter().take(8) {
            let prod = u.mul(w);
            if pair.p_member(&prod)? {
                return Ok(fail("𝔭 not prime: a product from A ∖ 𝔭 fell in", prod));
            }
        }
    }

    let pool = witness_pool(pair, bound)?;
    let mut witnesses = Vec::new();
    for x in outside_samples(pair, rng, bound)? {
        match find_witness_in(&pool, pair, &x)? {
            Some(xp) => witnesses.push((x, xp)),
            None => return Ok(PairVerdict::FailWithinBound { bound, outside: x }),
        }
    }
    Ok(PairVerdict::Pass { bound, witnesses })
}

// ---------------------------------------------------------------------------
// pair → valuation
// ---------------------------------------------------------------------------

/// Reconstruct the valuation determined by a pair. The order is defined by
/// witness comparison — `v(x) > v(y)` iff some even `z` has `z·x ∈ 𝔭` and
/// `z·y ∈ A ∖ 𝔭` — and the result is the structural valuation from the
/// pair's family, cross-validated against that comparison and against the
/// membership predicates on samples.
pub fn valuation_from_pair(
    pair: &ValuationPair,
    bound: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Valuation> {
    match is_valuation_pair(pair, bound, rng)? {
        PairVerdict::Pass { .. } => {}
        PairVerdict::FailWithinBound { outside, .. } => {
            return Err(Error::Unsupported(format!(
                "not a valuation pair within bound {bound}: no witness for {outside}"
            )));
        }
        PairVerdict::Fail { reason, .. } => {
            return Err(Error::Unsupported(format!("not a valuation pair: {reason}")));
        }
    }
    let v = match &pair.source {
        PairSource::FromValuation(v) => (**v).clone(),
        PairSource::Declared(DeclaredPair::ModPResidueOrder { var, p }) => {
            Valuation::mod_p_ord(pair.ring.clone(), *var, *p, false)?
        }
        PairSource::Declared(DeclaredPair::LaurentNonnegOrder { var }) => {
            Valuation::monomial_lex(pair.ring.clone(), vec![*var])?
        }
        PairSource::Declared(DeclaredPair::PolynomialSubring { .. }) => {
            unreachable!("rejected by the witness search above")
        }
    };

    let zpool = product_pool(&atom_pool(pair), bound.min(3), 600);
    let panel = membership_samples(&pair.ring, rng, 10);
    let mut checked = 0usize;
    'compare: for x in panel.iter().take(8) {
        for y in panel.iter().take(8) {
            if comparison_witness(pair, &zpool, x, y)?.is_some() {
                // a witness certifies v(x) > v(y); the candidate must agree
                if lex_compare(&v.eval(x)?, &v.eval(y)?)? != Ordering::Greater {
                    return Err(Error::GroupUnrecognized);
                }
                checked += 1;
                if checked >= 15 {
                    break 'compare;
                }
            }
        }
    }
    for x in membership_samples(&pair.ring, rng, 30) {
        if pair.a_member(&x)? != v.in_valuation_pair_ring(&x)?
            || pair.p_member(&x)? != v.in_positive_ideal(&x)?
        {
            return Err(Error::GroupUnrecognized);
        }
    }
    Ok(v)
}

fn comparison_witness(
    pair: &ValuationPair,
    zpool: &[SuperElem],
    x: &SuperElem,
    y: &SuperElem,
) -> Result<Option<SuperElem>> {
    for z in zpool {
        let zx = z.mul(x);
        let zy = z.mul(y);
        if !zx.in_ring() || !zy.in_ring() {
            continue;
        }
        if pair.p_member(&zx)? && pair.a_member(&zy)? && !pair.p_member(&zy)? {
            return Ok(Some(z.clone()));
        }
    }
    Ok(None)
}

/// For invertible `x ∉ A_v` the inverse lands back in `A_v`; returns
/// `(v(x), v(x⁻¹))`.
pub fn invertible_outside(v: &Valuation, x: &SuperElem) -> Result<(GValue, GValue)> {
    let a = v.eval(x)?;
    if a.is_nonnegative() {
        return Err(Error::AlreadyInA);
    }
    // bound 0: non-invertibility here is structural, not a search limit
    let inv = x.inv().map_err(|_| Error::NotInvertible { bound: 0 })?;
    if !inv.in_ring() {
        return Err(Error::NotInvertible { bound: 0 });
    }
    let b = v.eval(&inv)?;
    if b != gneg(&a)? || !b.is_nonnegative() {
        return Err(Error::Unsupported(
            "the inverse escaped the pair ring — evaluation inconsistency".into(),
        ));
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// v-convex ideals and segments
// ---------------------------------------------------------------------------

/// A v-convex ideal presented through its value data: members are exactly
/// the elements with `v(x) = ∞` or `v(x) ∈ 𝔾₊ ∖ H` for a proper segment
/// `H`. The empty segment yields all of `A_v`, `{0}` yields `𝔭_v`, the
/// interval `[−k, k]` the (k+1)-st power of the positive part.
#[derive(Debug, Clone)]
pub struct ConvexIdeal {
    pub valuation: Valuation,
    pub segment: Segment,
}

impl ConvexIdeal {
    /// `v(x) = ∞` always belongs: the support sits inside every ideal cut
    /// out by a proper segment, because ∞ beats every achieved value.
    pub fn member(&self, x: &SuperElem) -> Result<bool> {
        let a = self.valuation.eval(x)?;
        if a.is_infinite() {
            return Ok(true);
        }
        let val = a.value.as_ref().expect("finite value");
        Ok(a.is_nonnegative() && !self.segment.contains(val))
    }
}

/// `H ↦ 𝔞_H = {x ∈ A_v : v(x) ∈ 𝔾₊ ∖ H}`.
pub fn ideal_of_segment(v: &Valuation, h: &Segment) -> Result<ConvexIdeal> {
    if v.is_trivial() {
        return Err(Error::TrivialValuation);
    }
    if h.group != v.group {
        return Err(Error::GroupMismatch(format!(
            "segment of {} against a valuation into {}",
            h.group, v.group
        )));
    }
    if matches!(h.kind, SegmentKind::Whole) {
        return Err(Error::Unsupported(
            "the whole group is not a proper segment".into(),
        ));
    }
    if !h.is_segment(3) {
        return Err(Error::Unsupported(
            "the datum violates the segment condition".into(),
        ));
    }
    Ok(ConvexIdeal {
        valuation: v.clone(),
        segment: h.clone(),
    })
}

/// `𝔞 ↦ 𝔾_𝔞`: reconstruct the segment from achieved values. Probes are
/// products of witness powers — their values cover a box around 0 because
/// witness values generate the group — and the observed membership pattern
/// is matched against the expressible segment shapes.
pub fn segment_of_ideal(a: &ConvexIdeal) -> Result<Segment> {
    let v = &a.valuation;
    if v.is_trivial() {
        return Err(Error::TrivialValuation);
    }
    let rank = v.group.rank;
    let radius: i64 = 3;
    let mut seen: BTreeMap<Vec<i64>, bool> = BTreeMap::new();
    for (elem, val) in witness_power_probes(v, radius)? {
        if let Some(alpha) = val.value {
            let is_member = a.member(&elem)?;
            seen.entry(alpha).or_insert(is_member);
        }
    }
    let mut cands = vec![Segment::empty(v.group)];
    cands.extend(isolated_subgroups(v.group)?);
    for b in box_points(rank, radius - 1) {
        if lex_nonneg(&b) {
            cands.push(Segment::interval(v.group, b));
        }
    }
    'cand: for cand in cands {
        for (alpha, member) in &seen {
            let expect = lex_nonneg(alpha) && !cand.contains(alpha);
            if *member != expect {
                continue 'cand;
            }
        }
        return Ok(cand);
    }
    Err(Error::Unsupported(
        "the achieved membership pattern matches no expressible segment".into(),
    ))
}

fn lex_nonneg(xs: &[i64]) -> bool {
    for &c in xs {
        match c.cmp(&0) {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    true
}

/// Two segments cut the same subset of a probe box.
pub fn same_segment_set(a: &Segment, b: &Segment, radius: i64) -> bool {
    a.group == b.group
        && box_points(a.group.rank, radius)
            .iter()
            .all(|p| a.contains(p) == b.contains(p))
}

fn witness_power_probes(v: &Valuation, radius: i64) -> Result<Vec<(SuperElem, GValue)>> {
    let gens: Vec<SuperElem> = v
        .witnesses
        .iter()
        .filter(|(_, val)| val.value.is_some())
        .map(|(e, _)| e.clone())
        .take(3)
        .collect();
    let one = v.ring.one_elem();
    let mut out = vec![(one.clone(), v.eval(&one)?)];
    for c in box_points(gens.len(), radius) {
        let mut elem = one.clone();
        let mut ok = true;
        for (g, &k) in gens.iter().zip(&c) {
            match signed_pow(g, k) {
                Some(p) => elem = elem.mul(&p),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || !elem.in_ring() {
            continue;
        }
        let val = v.eval(&elem)?;
        out.push((elem, val));
    }
    Ok(out)
}

fn signed_pow(e: &SuperElem, k: i64) -> Option<SuperElem> {
    if k >= 0 {
        Some(e.pow(k as u32))
    } else {
        e.inv().ok().map(|i| i.pow((-k) as u32)).filter(|i| i.in_ring())
    }
}

/// Sampled convexity and gradedness check for any membership predicate
/// claiming to cut a v-convex ideal. Returns a counterexample `(x, y)` —
/// `x` a member, `y` the element that should have joined it — or `None`.
pub fn convexity_spotcheck<F>(
    v: &Valuation,
    member: F,
    rng: &mut ChaCha8Rng,
    rounds: usize,
) -> Result<Option<(SuperElem, SuperElem)>>
where
    F: Fn(&SuperElem) -> Result<bool>,
{
    for _ in 0..rounds {
        let x = sample::sample_elem(rng, &v.ring);
        if !x.in_ring() || !member(&x)? {
            continue;
        }
        let (ev, od) = x.homogeneous_parts();
        if !member(&ev)? {
            return Ok(Some((x, ev)));
        }
        if !member(&od)? {
            return Ok(Some((x, od)));
        }
        let y = sample::sample_elem(rng, &v.ring);
        if y.in_ring()
            && lex_compare(&v.eval(&y)?, &v.eval(&x)?)? != Ordering::Less
            && !member(&y)?
        {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// dominance
// ---------------------------------------------------------------------------

/// Dominance verdict: the order matrix with `w = h∘v`, or the reason the
/// containment chain broke.
#[derive(Debug, Clone)]
pub enum Dominance {
    Yes(OrderHom),
    No(String),
}

impl Dominance {
    pub fn holds(&self) -> bool {
        matches!(self, Dominance::Yes(_))
    }
}

/// Does `w` dominate `v`, i.e. `w = h∘v` for an order homomorphism `h`?
/// Equivalently the supports agree and `𝔭_w ⊆ 𝔭_v ⊆ A_v ⊆ A_w`; the
/// containments are spot-checked first so a refusal names the containment
/// and its counterexample, then the matrix is solved on the combined
/// witness panel and re-verified.
pub fn dominates(w: &Valuation, v: &Valuation, rng: &mut ChaCha8Rng) -> Result<Dominance> {
    if w.ring != v.ring {
        return Err(Error::RingMismatch(format!(
            "dominance compares valuations on one ring: {} vs {}",
            w.ring, v.ring
        )));
    }
    let mut panel = membership_samples(&v.ring, rng, 30);
    panel.extend(v.witnesses.iter().map(|(e, _)| e.clone()));
    panel.extend(w.witnesses.iter().map(|(e, _)| e.clone()));
    let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
    for x in &panel {
        let a = v.eval(x)?;
        let b = w.eval(x)?;
        match (&a.value, &b.value) {
            (None, Some(_)) => {
                return Ok(Dominance::No(format!("supp(v) ⊄ supp(w) at {x}")));
            }
            (Some(_), None) => {
                return Ok(Dominance::No(format!("supp(w) ⊄ supp(v) at {x}")));
            }
            (Some(av), Some(bv)) => {
                if a.is_nonnegative() && !b.is_nonnegative() {
                    return Ok(Dominance::No(format!("A_v ⊄ A_w at {x}")));
                }
                if b.is_positive() && !a.is_positive() {
                    return Ok(Dominance::No(format!("𝔭_w ⊄ 𝔭_v at {x}")));
                }
                pairs.push((av.clone(), bv.clone()));
            }
            (None, None) => {}
        }
    }
    let h = if w.group.rank == 0 {
        // the zero matrix: a trivial w rides on top of everything with
        // matching support
        OrderHom::new(v.group, w.group, vec![])?
    } else {
        match solve_hom(v.group, w.group, &pairs)? {
            Some(h) => h,
            None => {
                return Ok(Dominance::No(
                    "no integer matrix carries the v-values to the w-values".into(),
                ))
            }
        }
    };
    if !h.is_order_preserving() {
        return Ok(Dominance::No(
            "the solved matrix does not preserve the order".into(),
        ));
    }
    for x in &panel {
        if w.eval(x)? != h.apply(&v.eval(x)?)? {
            return Ok(Dominance::No(format!("h∘v ≠ w at {x}")));
        }
    }
    Ok(Dominance::Yes(h))
}

/// The dominating valuations of `v`, one per proper isolated subgroup of
/// its value group, listed with growing kernel: `v` itself first (kernel
/// `{0}`), the coarsest rank-1 quotient last.
pub fn psi_v(v: &Valuation) -> Result<Vec<(Segment, Valuation)>> {
    let g = v.group;
    let isos = isolated_subgroups(g)?;
    let mut out = Vec::with_capacity(isos.len());
    for iso in isos {
        let k = match &iso.kind {
            SegmentKind::Subgroup { basis } => basis.len(),
            _ => 0,
        };
        let w = if k == 0 {
            v.clone()
        } else {
            v.mapped(OrderHom::projection_first(g, g.rank - k))?
        };
        out.push((iso, w));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// the valuation induced on A_w/𝔭_w
// ---------------------------------------------------------------------------

/// The valuation induced on `A_w/𝔭_w` by a dominated `v`, packaged with
/// the order matrix, the quotient descriptor, and the projection map the
/// sampled checks run through.
///
/// The induced valuation sends `x + 𝔭_w` to `v(x)`; its values stay inside
/// `ker h ∪ {∞}`, its pair is `(A_v/𝔭_w, 𝔭_v/𝔭_w)`, and its support is the
/// image of `𝔭_w` — the zero class.
#[derive(Debug, Clone)]
pub struct QuotientValuation {
    /// `h` with `w = h∘v`.
    pub hom: OrderHom,
    /// The dominating valuation, kept for the projection.
    pub dominating: Valuation,
    /// Descriptor of `A_w/𝔭_w`.
    pub quotient: RingDesc,
    /// The induced valuation. For an injective `h` it is the trivial
    /// valuation on the residue ring (presented with its canonical rank-0
    /// group); otherwise its values live in `v`'s group, inside `ker h`.
    pub induced: Valuation,
    proj: ProjKind,
}

#[derive(Debug, Clone)]
enum ProjKind {
    /// `h` injective: classes are only tracked as zero (inside `𝔭_w`) or a
    /// unit residue — enough for the support and triviality checks.
    ZeroOrUnit,
    /// Lexicographic center with a leading-block projection: classes are
    /// leading forms in the killed variables.
    LeadingBlock { killed: Vec<usize>, keep: Vec<usize> },
}

impl QuotientValuation {
    /// `π(x)` for `x ∈ A_w`; `None` outside `A_w`. Sends `𝔭_w` to zero.
    /// On `A_w ∖ 𝔭_w` the defining identity `(w,v)(π(x)) = v(x)` holds.
    pub fn project(&self, x: &SuperElem) -> Result<Option<SuperElem>> {
        let wval = self.dominating.eval(x)?;
        if !wval.is_nonnegative() {
            return Ok(None);
        }
        if wval.is_positive() {
            return Ok(Some(self.quotient.zero_elem()));
        }
        match &self.proj {
            ProjKind::ZeroOrUnit => Ok(Some(self.quotient.one_elem())),
            ProjKind::LeadingBlock { killed, keep } => {
                // the θ-part dies: the nil ideal sits inside 𝔭_w
                let r = x.theta_free();
                let num = leading_form(&r.num, killed, keep, &self.quotient);
                let den = leading_form(&r.den, killed, keep, &self.quotient);
                Ok(Some(self.quotient.from_even(RatFn::new(num, den)?)))
            }
        }
    }
}

/// Terms attaining the lexicographically minimal exponent pattern on the
/// killed block, with that block stripped and the survivors re-indexed.
fn leading_form(p: &MPoly, killed: &[usize], keep: &[usize], target: &RingDesc) -> MPoly {
    let min = p.lex_min_exponent(killed).expect("nonzero polynomial");
    let mut out = MPoly::zero(target.field(), target.nvars());
    for (e, c) in &p.terms {
        let pat: Vec<i64> = killed.iter().map(|&i| e[i] as i64).collect();
        if pat != min {
            continue;
        }
        let mut mono = MPoly::constant(target.field(), target.nvars(), c.clone());
        for (j, &i) in keep.iter().enumerate() {
            mono = mono.mul(&MPoly::var_pow(target.field(), target.nvars(), j, e[i]));
        }
        out = out.add(&mono);
    }
    out
}

/// Build the induced valuation for `w ≫ v`. Supported quotients: any pair
/// with an injective matrix (the induced valuation is trivial on the
/// residue ring), and lexicographic centers coarsened by a leading-block
/// projection (the induced valuation is the trailing-block lexicographic
/// valuation, embedded back into `v`'s group).
pub fn induced_on_quotient(
    w: &Valuation,
    v: &Valuation,
    rng: &mut ChaCha8Rng,
) -> Result<QuotientValuation> {
    let h = match dominates(w, v, rng)? {
        Dominance::Yes(h) => h,
        Dominance::No(reason) => return Err(Error::NotDominating(reason)),
    };
    let kbasis = match h.kernel().kind {
        SegmentKind::Subgroup { basis } => basis,
        _ => vec![],
    };
    let k = kbasis.len();
    if k == 0 {
        let quotient = residue_ring_desc(w)?;
        let induced = Valuation::trivial(quotient.clone());
        return Ok(QuotientValuation {
            hom: h,
            dominating: w.clone(),
            quotient,
            induced,
            proj: ProjKind::ZeroOrUnit,
        });
    }
    let Rule::MonomialLex { vars } = &v.rule else {
        return Err(Error::Unsupported(
            "computable quotients need a lexicographic center or an injective matrix".into(),
        ));
    };
    let m = v.group.rank - k;
    let is_leading_proj = h.target.rank == m
        && h.matrix
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &e)| e == i64::from(i == j)));
    if !is_leading_proj {
        return Err(Error::Unsupported(
            "computable quotients need a leading-block projection".into(),
        ));
    }
    let killed: Vec<usize> = vars[..m].to_vec();
    let keep: Vec<usize> = (0..v.ring.nvars()).filter(|i| !killed.contains(i)).collect();
    let quotient = quotient_ring_removing(&v.ring, &killed)?;
    let new_center: Vec<usize> = vars[m..]
        .iter()
        .map(|&i| keep.iter().position(|&j| j == i).expect("kept variable"))
        .collect();
    let inner = Valuation::monomial_lex(quotient.clone(), new_center)?;
    let mut embed = vec![vec![0i64; k]; v.group.rank];
    for (j, row) in embed.iter_mut().skip(m).enumerate() {
        row[j] = 1;
    }
    let embed = OrderHom::new(GroupDesc::new(k), v.group, embed)?;
    let induced = inner.mapped(embed)?;
    Ok(QuotientValuation {
        hom: h,
        dominating: w.clone(),
        quotient,
        induced,
        proj: ProjKind::LeadingBlock { killed, keep },
    })
}

/// `A_w/𝔭_w` as a descriptor, for the families where the residue ring has
/// one: places at a linear polynomial or at infinity drop their variable,
/// Gauss p-adic keeps the variables over `𝔽_p`, lexicographic centers drop
/// their whole block, the mod-p orders collapse to `𝔽_p`, and the trivial
/// valuation keeps everything (mod the nil part).
fn residue_ring_desc(w: &Valuation) -> Result<RingDesc> {
    let mut rule = &w.rule;
    while let Rule::Mapped { inner, .. } = rule {
        rule = inner;
    }
    let ring = &w.ring;
    let drop_vars = |dropped: &[usize]| -> RingDesc {
        let vars = ring
            .even_vars
            .iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, v)| v.clone())
            .collect();
        RingDesc::new(ring.base.clone(), vars, 0)
    };
    match rule {
        Rule::Trivial => {
            let mut q = ring.clone();
            q.odd = 0;
            Ok(q)
        }
        Rule::Place { var, datum } => match datum {
            PlaceDatum::FiniteIrreducible(q) => {
                let uni = q.to_univariate(*var).ok_or_else(|| {
                    Error::Unsupported("multivariate place polynomial".into())
                })?;
                if uni.deg() != Some(1) {
                    return Err(Error::Unsupported(
                        "the residue ring of a higher-degree place is not a descriptor".into(),
                    ));
                }
                Ok(drop_vars(&[*var]))
            }
            PlaceDatum::AtInfinity => Ok(drop_vars(&[*var])),
            PlaceDatum::PAdic(p) => {
                let vars = ring.even_vars.to_vec();
                Ok(RingDesc::new(BaseRing::Fp(*p), vars, 0))
            }
        },
        Rule::MonomialLex { vars } => Ok(drop_vars(vars)),
        Rule::OrdThenCoeffPAdic { var, p } => {
            let mut q = drop_vars(&[*var]);
            q.base = BaseRing::Fp(*p);
            Ok(q)
        }
        Rule::ModPOrd { p, .. } => Ok(RingDesc::new(BaseRing::Fp(*p), vec![], 0)),
        Rule::Mapped { .. } => unreachable!("matrix layers peeled above"),
    }
}

fn quotient_ring_removing(ring: &RingDesc, killed: &[usize]) -> Result<RingDesc> {
    if ring.localized.is_some() {
        return Err(Error::Unsupported(
            "quotients of localized hosts are not descriptors".into(),
        ));
    }
    let vars: Vec<_> = ring
        .even_vars
        .iter()
        .enumerate()
        .filter(|(i, _)| !killed.contains(i))
        .map(|(_, v)| v.clone())
        .collect();
    Ok(RingDesc::new(ring.base.clone(), vars, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_even_poly, parse_expr, parse_ring};
    use crate::sample::rng_from_seed;

    fn order_at_zero(ring: &RingDesc) -> Valuation {
        let q = parse_even_poly("x", ring).unwrap();
        Valuation::place(ring.clone(), 0, PlaceDatum::FiniteIrreducible(q)).unwrap()
    }

    #[test]
    fn pair_witness_search_passes_on_a_place_pair() {
        let r = parse_ring("Q(x)[t1]").unwrap();
        let v = order_at_zero(&r);
        let pair = pair_of(&v);
        let mut rng = rng_from_seed(11);

        let xinv = parse_expr("1/x", &r).unwrap();
        assert!(!pair.a_member(&xinv).unwrap());
        let xp = find_pair_witness(&pair, &xinv, 3)
            .unwrap()
            .expect("1/x has a degree-3 witness");
        assert!(pair.p_member(&xp).unwrap());
        let prod = xinv.mul(&xp);
        assert!(pair.a_member(&prod).unwrap() && !pair.p_member(&prod).unwrap());

        match is_valuation_pair(&pair, 4, &mut rng).unwrap() {
            PairVerdict::Pass { bound, witnesses } => {
                assert_eq!(bound, 4);
                for (x, xp) in &witnesses {
                    assert!(pair.p_member(xp).unwrap());
                    let prod = x.mul(xp);
                    assert!(pair.a_member(&prod).unwrap() && !pair.p_member(&prod).unwrap());
                }
            }
            other => panic!("expected a pass, got {other:?}"),
        }
    }

    #[test]
    fn the_integer_laurent_pair_with_residues_mod_p() {
        let r = parse_ring("Z[x,x^-1][t1..t3]").unwrap();
        let pair =
            ValuationPair::declared(r.clone(), DeclaredPair::ModPResidueOrder { var: 0, p: 5 })
                .unwrap();
        let mut rng = rng_from_seed(12);

        // A = ℤ[x] + 5·(Laurent) + nil, 𝔭 = x·A + 5·(Laurent) + nil.
        let e = |s: &str| parse_expr(s, &r).unwrap();
        assert!(pair.a_member(&e("x^2 + 3*x")).unwrap());
        assert!(pair.a_member(&e("5/x + 1")).unwrap());
        assert!(!pair.a_member(&e("1/x")).unwrap());
        assert!(pair.p_member(&e("5")).unwrap());
        assert!(pair.p_member(&e("x + 10/x")).unwrap());
        assert!(!pair.p_member(&e("3")).unwrap());
        assert!(pair.p_member(&e("t1 + x*t2")).unwrap());

        assert!(is_valuation_pair(&pair, 6, &mut rng).unwrap().passed());

        let v = valuation_from_pair(&pair, 6, &mut rng).unwrap();
        assert_eq!(v.eval(&e("x")).unwrap(), GValue::finite(v.group, vec![1]));
        assert_eq!(v.eval(&e("3")).unwrap(), GValue::zero(v.group));
        assert_eq!(
            v.eval(&e("7/x^2")).unwrap(),
            GValue::finite(v.group, vec![-2])
        );
        // The support swallows both 5·(Laurent) and the nil ideal.
        assert!(v.eval(&e("10/x^2")).unwrap().is_infinite());
        assert!(v.eval(&e("t1*t2")).unwrap().is_infinite());
        assert!(v.eval(&e("x*t3")).unwrap().is_infinite());

        // Family preconditions.
        assert!(matches!(
            ValuationPair::declared(r.clone(), DeclaredPair::ModPResidueOrder { var: 0, p: 6 }),
            Err(Error::NotPrime(_))
        ));
        let q = parse_ring("Q(x)").unwrap();
        assert!(matches!(
            ValuationPair::declared(q, DeclaredPair::ModPResidueOrder { var: 0, p: 5 }),
            Err(Error::RingMismatch(_))
        ));
    }

    #[test]
    fn a_polynomial_subring_of_the_rational_functions_is_not_a_pair() {
        let r = parse_ring("Q(x)[t1,t2]").unwrap();
        let pair =
            ValuationPair::declared(r.clone(), DeclaredPair::PolynomialSubring { var: 0 })
                .unwrap();
        let mut rng = rng_from_seed(13);

        let e = |s: &str| parse_expr(s, &r).unwrap();
        assert!(pair.a_member(&e("x^2 - 3")).unwrap());
        assert!(pair.a_member(&e("t1/(x+1)")).unwrap()); // nil part is free
        assert!(!pair.a_member(&e("1/(x+1)")).unwrap());
        assert!(pair.p_member(&e("x^2 + x")).unwrap());
        assert!(!pair.p_member(&e("x + 1")).unwrap());

        // 1/x still has its witness — the defect is away from the center.
        assert!(find_pair_witness(&pair, &e("1/x"), 3).unwrap().is_some());
        // 1/(x+1) has none at any bound: a witness would need the factor
        // x+1, and stripping it leaves a multiple of x — back in the ideal.
        assert!(find_pair_witness(&pair, &e("1/(x+1)"), 4).unwrap().is_none());

        assert!(matches!(
            is_valuation_pair(&pair, 3, &mut rng).unwrap(),
            PairVerdict::FailWithinBound { bound: 3, .. }
        ));
        assert!(valuation_from_pair(&pair, 3, &mut rng).is_err());
    }

    #[test]
    fn pairs_round_trip_through_their_valuations() {
        let mut rng = rng_from_seed(14);
        let rf = parse_ring("Q(x)[t1]").unwrap();
        let r2 = parse_ring("Q(x,y)").unwrap();
        let fixtures = vec![
            order_at_zero(&rf),
            Valuation::place(rf.clone(), 0, PlaceDatum::AtInfinity).unwrap(),
            Valuation::monomial_lex(r2, vec![0, 1]).unwrap(),
        ];
        for v in fixtures {
            let back = valuation_from_pair(&pair_of(&v), 4, &mut rng).unwrap();
            assert!(
                v.equivalent(&back).unwrap().is_some(),
                "round trip drifted for {:?}",
                v.rule
            );
        }
    }

    #[test]
    fn trivial_pair_returns_the_trivial_valuation() {
        let r = parse_ring("Q(x)[t1]").unwrap();
        let v = Valuation::trivial(r);
        let mut rng = rng_from_seed(15);
        let pair = pair_of(&v);
        // A = R: nothing is outside, so the pass carries no witnesses.
        match is_valuation_pair(&pair, 2, &mut rng).unwrap() {
            PairVerdict::Pass { witnesses, .. } => assert!(witnesses.is_empty()),
            other => panic!("expected a pass, got {other:?}"),
        }
        assert!(valuation_from_pair(&pair, 2, &mut rng).unwrap().is_trivial());
    }

    #[test]
    fn inverses_of_elements_outside_the_pair_ring_fall_inside() {
        let r = parse_ring("Q(x)[t1]").unwrap();
        let v = order_at_zero(&r);
        let e = |s: &str| parse_expr(s, &r).unwrap();

        let (a, b) = invertible_outside(&v, &e("1/x")).unwrap();
        assert_eq!(a, GValue::finite(v.group, vec![-1]));
        assert_eq!(b, GValue::finite(v.group, vec![1]));

        // A unit plus a nilpotent stays invertible, and the θ-part rides
        // along: (1/x + t1)⁻¹ = x − x²t1.
        let (a, _) = invertible_outside(&v, &e("1/x + t1")).unwrap();
        assert_eq!(a, GValue::finite(v.group, vec![-1]));

        assert!(matches!(
            invertible_outside(&v, &e("x + 1")),
            Err(Error::AlreadyInA)
        ));

        // In the integer Laurent ring, 3 + 1/x sits outside A but its
        // inverse x/(3x+1) leaves the ring.
        let z = parse_ring("Z[x,x^-1]").unwrap();
        let w = Valuation::monomial_lex(z.clone(), vec![0]).unwrap();
        assert!(matches!(
            invertible_outside(&w, &parse_expr("3 + 1/x", &z).unwrap()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn segments_and_convex_ideals_correspond() {
        let r = parse_ring("Q(x)[t1]").unwrap();
        let v = order_at_zero(&r);
        let e = |s: &str| parse_expr(s, &r).unwrap();
        let g = v.group;

        // ∅ cuts out A_v, {0} cuts out 𝔭_v, [−1,1] the square of 𝔪_v.
        let a_v = ideal_of_segment(&v, &Segment::empty(g)).unwrap();
        let p_v = ideal_of_segment(&v, &Segment::zero_subgroup(g)).unwrap();
        let m2 = ideal_of_segment(&v, &Segment::interval(g, vec![1])).unwrap();

        assert!(a_v.member(&e("1")).unwrap());
        assert!(!p_v.member(&e("1")).unwrap());
        assert!(p_v.member(&e("x")).unwrap());
        assert!(!m2.member(&e("x")).unwrap());
        assert!(m2.member(&e("x^2")).unwrap());
        assert!(m2.member(&e("x^3/(x-1)")).unwrap());
        // The support belongs to every one of them.
        for ideal in [&a_v, &p_v, &m2] {
            assert!(ideal.member(&e("t1")).unwrap());
            assert!(!ideal.member(&e("1/x")).unwrap());
        }

        // Round trips recover the segment as a set.
        for ideal in [&a_v, &p_v, &m2] {
            let back = segment_of_ideal(ideal).unwrap();
            assert!(same_segment_set(&back, &ideal.segment, 3));
        }

        // Refusals.
        let t = Valuation::trivial(r.clone());
        assert!(matches!(
            ideal_of_segment(&t, &Segment::empty(t.group)),
            Err(Error::TrivialValuation)
        ));
        assert!(ideal_of_segment(&v, &Segment::whole(g)).is_err());

        // Convex ideals of one valuation are inclusion-comparable: on a
        // sample panel, membership sets form a chain.
        let mut rng = rng_from_seed(16);
        let panel = membership_samples(&r, &mut rng, 60);
        let ideals = [&a_v, &p_v, &m2];
        for i in ideals {
            for j in ideals {
                let i_in_j = panel
                    .iter()
                    .all(|x| !i.member(x).unwrap() || j.member(x).unwrap());
                let j_in_i = panel
                    .iter()
                    .all(|x| !j.member(x).unwrap() || i.member(x).unwrap());
                assert!(i_in_j || j_in_i);
            }
        }
    }

    #[test]
    fn convexity_spotcheck_accepts_the_distinguished_primes() {
        let r = parse_ring("Q(x)[t1]").unwrap();
        let v = order_at_zero(&r);
        let mut rng = rng_from_seed(17);

        let ok = convexity_spotcheck(&v, |x| v.in_positive_ideal(x), &mut rng, 150).unwrap();
        assert!(ok.is_none(), "𝔭_v flagged: {ok:?}");
        let ok = convexity_spotcheck(&v, |x| Ok(v.eval(x)?.is_infinite()), &mut rng, 150).unwrap();
        assert!(ok.is_none(), "supp(v) flagged: {ok:?}");

        // "θ-free members of A_v" is not convex: it misses elements of
        // equal value with a nil tail.
        let bad = convexity_spotcheck(
            &v,
            |x| Ok(v.eval(x)?.is_nonnegative() && x.theta_free().is_zero() == x.is_zero() && x.parity() == Some(0)),
            &mut rng,
            400,
        )
        .unwrap();
        assert!(bad.is_some());
    }

    #[test]
    fn dominance_by_projection_and_its_refusals() {
        let mut rng = rng_from_seed(18);

        // ord_x = (first lex coordinate) ∘ lex on Q(x,y).
        let r2 = parse_ring("Q(x,y)").unwrap();
        let lex = Valuation::monomial_lex(r2.clone(), vec![0, 1]).unwrap();
        let ordx = order_at_zero(&r2);
        match dominates(&ordx, &lex, &mut rng).unwrap() {
            Dominance::Yes(h) => assert_eq!(h.matrix, vec![vec![1, 0]]),
            Dominance::No(why) => panic!("projection refused: {why}"),
        }
        // ...but not the other way around.
        assert!(!dominates(&lex, &ordx, &mut rng).unwrap().holds());

        // Every valuation dominates itself through the identity.
        match dominates(&lex, &lex, &mut rng).unwrap() {
            Dominance::Yes(h) => assert_eq!(h.matrix, vec![vec![1, 0], vec![0, 1]]),
            Dominance::No(why) => panic!("self-dominance refused: {why}"),
        }

        // Different centers break the containment chain, and the refusal
        // names the broken inclusion.
        let rf = parse_ring("Q(x)[t1]").unwrap();
        let at0 = order_at_zero(&rf);
        let q = parse_even_poly("x - 1", &rf).unwrap();
        let at1 = Valuation::place(rf.clone(), 0, PlaceDatum::FiniteIrreducible(q)).unwrap();
        match dominates(&at0, &at1, &mut rng).unwrap() {
            Dominance::No(why) => assert!(why.contains("𝔭_w"), "unexpected reason: {why}"),
            Dominance::Yes(_) => panic!("distinct places cannot dominate"),
        }

        // Scaling the group is dominance both ways (an equivalence).
        let double = at0
            .mapped(OrderHom::new(at0.group, at0.group, vec![vec![2]]).unwrap())
            .unwrap();
        match dominates(&double, &at0, &mut rng).unwrap() {
            Dominance::Yes(h) => assert_eq!(h.matrix, vec![vec![2]]),
            Dominance::No(why) => panic!("scaling refused: {why}"),
        }

        // The trivial valuation tops the order through the zero matrix.
        let triv = Valuation::trivial(rf.clone());
        match dominates(&triv, &at0, &mut rng).unwrap() {
            Dominance::Yes(h) => assert!(h.matrix.is_empty()),
            Dominance::No(why) => panic!("trivial refused: {why}"),
        }
        assert!(!dominates(&at0, &triv, &mut rng).unwrap().holds());

        // Hosts must match.
        assert!(matches!(
            dominates(&at0, &lex, &mut rng),
            Err(Error::RingMismatch(_))
        ));
    }

    #[test]
    fn the_dominating_chain_by_isolated_subgroups() {
        let mut rng = rng_from_seed(19);
        let r2 = parse_ring("Q(x,y)").unwrap();
        let lex = Valuation::monomial_lex(r2.clone(), vec![0, 1]).unwrap();

        let chain = psi_v(&lex).unwrap();
        assert_eq!(chain.len(), 2);
        for (iso, w) in &chain {
            match dominates(w, &lex, &mut rng).unwrap() {
                Dominance::Yes(h) => {
                    assert!(same_segment_set(&h.kernel(), iso, 3));
                }
                Dominance::No(why) => panic!("chain member refused: {why}"),
            }
        }
        // The chain is itself ordered by dominance.
        assert!(dominates(&chain[1].1, &chain[0].1, &mut rng).unwrap().holds());

        let rf = parse_ring("Q(x)[t1]").unwrap();
        assert_eq!(psi_v(&order_at_zero(&rf)).unwrap().len(), 1);
        assert!(psi_v(&Valuation::trivial(rf)).unwrap().is_empty());

        let r4 = parse_ring("Q(x,y,z,u)").unwrap();
        let big = Valuation::monomial_lex(r4, vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(psi_v(&big), Err(Error::RankTooLarge(4))));
    }

    #[test]
    fn induced_valuation_on_the_dominance_quotient() {
        let mut rng = rng_from_seed(20);
        let r = parse_ring("Q(x,y)[t1]").unwrap();
        let v = Valuation::monomial_lex(r.clone(), vec![0, 1]).unwrap();
        let w = v
            .mapped(OrderHom::projection_first(v.group, 1))
            .unwrap();

        let q = induced_on_quotient(&w, &v, &mut rng).unwrap();
        assert_eq!(q.quotient.to_string(), "Q(y)");

        let e = |s: &str| parse_expr(s, &r).unwrap();
        let val = |s: &str| {
            let img = q.project(&e(s)).unwrap().expect("inside A_w");
            q.induced.eval(&img).unwrap()
        };
        // Classes carry the trailing block of the original value.
        assert_eq!(val("y"), GValue::finite(v.group, vec![0, 1]));
        assert_eq!(val("y^2 + x*y^5"), GValue::finite(v.group, vec![0, 2]));
        assert_eq!(val("1/y"), GValue::finite(v.group, vec![0, -1]));
        assert_eq!(val("3 - x/y"), GValue::zero(v.group));
        // 𝔭_w collapses to zero, and outside A_w there is no class.
        assert!(q.project(&e("x")).unwrap().unwrap().is_zero());
        assert!(val("x*y - x").is_infinite());
        assert!(q.project(&e("1/x")).unwrap().is_none());
        assert!(q.project(&e("t1")).unwrap().unwrap().is_zero());

        // On A_w ∖ 𝔭_w the class keeps the original value, and the image
        // stays inside ker(h) ∪ {∞}.
        let mut checked = 0;
        for _ in 0..200 {
            let f = sample::sample_elem(&mut rng, &r);
            let wf = w.eval(&f).unwrap();
            if !wf.is_nonnegative() || wf.is_positive() {
                continue;
            }
            let img = q.project(&f).unwrap().expect("w(f) = 0 puts f in A_w");
            let got = q.induced.eval(&img).unwrap();
            assert_eq!(got, v.eval(&f).unwrap());
            assert_eq!(got.value.as_ref().map(|c| c[0]), Some(0));
            checked += 1;
        }
        assert!(checked > 20, "the sampler starved the compatibility check");

        // Self-dominance induces the trivial valuation on the residue ring.
        let qq = induced_on_quotient(&v, &v, &mut rng).unwrap();
        assert_eq!(qq.quotient.to_string(), "Q");
        assert!(qq.induced.is_trivial());
        assert!(qq.project(&e("3 - x/y")).unwrap().unwrap().is_one());

        // Non-dominating inputs are refused with the broken inclusion.
        let ordx = order_at_zero(&r);
        let aty = Valuation::place(
            r.clone(),
            1,
            PlaceDatum::FiniteIrreducible(parse_even_poly("y", &r).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            induced_on_quotient(&ordx, &aty, &mut rng),
            Err(Error::NotDominating(_))
        ));
    }

    #[test]
    fn declared_laurent_polynomial_pair() {
        let r = parse_ring("Z[x,x^-1][t1,t2]").unwrap();
        let pair =
            ValuationPair::declared(r.clone(), DeclaredPair::LaurentNonnegOrder { var: 0 })
                .unwrap();
        let mut rng = rng_from_seed(21);

        let e = |s: &str| parse_expr(s, &r).unwrap();
        assert!(pair.a_member(&e("x^3 - 7")).unwrap());
        assert!(!pair.a_member(&e("1/x")).unwrap());
        assert!(pair.p_member(&e("x^2 + 2*x")).unwrap());
        assert!(!pair.p_member(&e("x + 5")).unwrap());
        assert!(pair.p_member(&e("t1*t2 + x*t1")).unwrap());

        assert!(is_valuation_pair(&pair, 4, &mut rng).unwrap().passed());
        let v = valuation_from_pair(&pair, 4, &mut rng).unwrap();
        assert_eq!(v.eval(&e("x")).unwrap(), GValue::finite(v.group, vec![1]));
        assert_eq!(
            v.eval(&e("5 + x")).unwrap(),
            GValue::zero(v.group)
        );
        assert_eq!(
            v.eval(&e("1/x")).unwrap(),
            GValue::finite(v.group, vec![-1])
        );
        assert!(v.eval(&e("t1*t2")).unwrap().is_infinite());
    }
}
