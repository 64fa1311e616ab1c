//! The space of valuation superrings of a superfield extension.
//!
//! For a split superfield `L` with even reduction `k(x)` and a ground
//! superring `K ⊆ k[θ…]`, the points are the valuation superrings `A_v`
//! of nontrivial valuations nonnegative on `K`, together with the
//! trivial point `L` itself. The desk model enumerates the points that
//! are trivial on `k` — the place at infinity and the finite places at
//! monic irreducible centers — up to an explicit degree bound, because
//! the full space is infinite. Topology comes from basic opens
//! `U(x₁,…,xₙ) = {A_v : v(xᵢ) ≥ 0}`; sections of the structure sheaf
//! over a cofinite open are the functions with poles confined to the
//! complement, plus the entire odd ideal, which every valuation ring
//! absorbs. Reducing mod the odd ideal is a homeomorphism onto the
//! classical space of `k(x) ⊇ k̄`, and the same machinery with the
//! trivial point removed is the arithmetically non-singular supercurve.
//!
//! Two honest divergences from the idealized picture are recorded on
//! every output: the ground field is ℚ or 𝔽_p rather than algebraically
//! closed (so closed points are monic irreducibles, not just linear
//! centers), and every enumeration carries its degree bound.

use crate::ordgroup::GValue;
use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::scalar::FieldTag;
use crate::superalg::{BaseRing, RingDesc, SuperElem};
use crate::valuation::{PlaceDatum, Valuation};
use crate::{Error, Result};

/// Carried on every enumeration and section basis.
pub const DESK_MODEL_NOTE: &str = "ground field taken as Q or F_p (not algebraically \
closed): closed points are monic irreducible centers; lists are truncated at the \
stated degree bound and, over Q, at coefficient height 3 for linear centers and 2 \
beyond";

/// Coefficient height caps for the enumeration over ℚ.
const LINEAR_HEIGHT: i64 = 3;
const HIGHER_HEIGHT: i64 = 2;

// ---------------------------------------------------------------------------
// The space and its points
// ---------------------------------------------------------------------------

/// `ZR(L, K)`: valuation superrings of `L` containing `K`, plus the
/// trivial point.
#[derive(Debug, Clone, PartialEq)]
pub struct ZRSpace {
    /// the split superfield, even reduction `k(x)`
    pub field: RingDesc,
    /// the ground superring, `x`-free: a sub-superring of `k[θ…]`
    pub base: RingDesc,
}

/// A point of the space: the trivial valuation superring `L`, or a
/// discrete place. Distinct place data give distinct valuation
/// superrings — a valuation superring determines its maximal pair.
#[derive(Debug, Clone, PartialEq)]
pub enum ZRPoint {
    Trivial,
    Place(PlaceDatum),
}

impl ZRPoint {
    pub fn is_trivial(&self) -> bool {
        matches!(self, ZRPoint::Trivial)
    }

    /// The valuation this point is the pair ring of.
    pub fn valuation(&self, space: &ZRSpace) -> Result<Valuation> {
        match self {
            ZRPoint::Trivial => Ok(Valuation::trivial(space.field.clone())),
            ZRPoint::Place(d) => Valuation::place(space.field.clone(), 0, d.clone()),
        }
    }

    pub fn describe(&self, space: &ZRSpace) -> String {
        match self {
            ZRPoint::Trivial => "trivial".to_string(),
            ZRPoint::Place(PlaceDatum::AtInfinity) => "infinity".to_string(),
            ZRPoint::Place(PlaceDatum::FiniteIrreducible(q)) => {
                q.display_with(&[&space.field.even_vars[0].name])
            }
            ZRPoint::Place(PlaceDatum::PAdic(p)) => format!("{p}-adic"),
        }
    }
}

/// One run of the point generator. Enumeration is pure: every call
/// rebuilds the same list for the same bound, so independent consumers
/// never share state.
#[derive(Debug, Clone)]
pub struct PointEnumeration {
    pub points: Vec<ZRPoint>,
    /// monic candidates whose irreducibility the certificate could not
    /// settle; they are neither listed nor declared reducible
    pub undetermined: Vec<MPoly>,
    pub note: &'static str,
}

impl ZRSpace {
    /// Check the desk-model shape: `L` a one-variable rational function
    /// superfield, `K` an `x`-free sub-superring of the ground field
    /// with matching coefficients.
    pub fn new(field: RingDesc, base: RingDesc) -> Result<ZRSpace> {
        if !field.is_superfield() || field.nvars() != 1 {
            return Err(Error::UnsupportedField(format!(
                "{field} is not a one-variable rational function superfield"
            )));
        }
        if base.nvars() != 0 {
            return Err(Error::UnsupportedField(format!(
                "{base} contains the transcendental: the reduced extension is algebraic \
                 and the space degenerates to the single trivial point"
            )));
        }
        if base.odd > field.odd {
            return Err(Error::RingMismatch(format!(
                "{base} has more odd generators than {field}"
            )));
        }
        match (base.base, field.base) {
            (BaseRing::Q, BaseRing::Q) => {}
            (BaseRing::Fp(p), BaseRing::Fp(q)) if p == q => {}
            _ => {
                return Err(Error::UnsupportedField(format!(
                    "the points listed here are trivial on the ground field; take the \
                     base of {field} itself, not {base}"
                )))
            }
        }
        Ok(ZRSpace { field, base })
    }

    /// The even reduction of the space: same centers, no θ generators.
    pub fn reduction(&self) -> ZRSpace {
        ZRSpace {
            field: RingDesc {
                odd: 0,
                ..self.field.clone()
            },
            base: RingDesc {
                odd: 0,
                ..self.base.clone()
            },
        }
    }

    /// The trivial point, the place at infinity, and every finite place
    /// with a monic irreducible center of degree ≤ `degree_bound`
    /// (coefficients exhausted over 𝔽_p, height-capped over ℚ). Every
    /// listed place is verified nonnegative on the ground generators.
    pub fn points(&self, degree_bound: u32) -> Result<PointEnumeration> {
        let field = self.field.field();
        let mut points = vec![ZRPoint::Trivial, ZRPoint::Place(PlaceDatum::AtInfinity)];
        let mut undetermined = Vec::new();
        for d in 1..=degree_bound {
            for coeffs in monic_candidates(field, d)? {
                let q = MPoly::from_coeffs_i64(field, &coeffs);
                match q.is_irreducible() {
                    Ok(true) => points.push(ZRPoint::Place(PlaceDatum::FiniteIrreducible(q))),
                    Ok(false) => {}
                    Err(Error::IrreducibilityUnknown(_)) => undetermined.push(q),
                    Err(e) => return Err(e),
                }
            }
        }
        // Every point must contain the ground superring; its generators
        // are units of k and the θ's, which land in the support.
        let gens: Vec<SuperElem> = (1..=3)
            .map(|n| self.field.int_elem(n))
            .chain((0..self.base.odd).map(|k| self.field.theta_elem(k)))
            .collect();
        for p in &points {
            let v = p.valuation(self)?;
            for g in &gens {
                if !v.eval(g)?.is_nonnegative() {
                    return Err(Error::UnsupportedField(format!(
                        "the point {} is negative on the ground generator {g}",
                        p.describe(self)
                    )));
                }
            }
        }
        Ok(PointEnumeration {
            points,
            undetermined,
            note: DESK_MODEL_NOTE,
        })
    }
}

/// Coefficient vectors (constant first, leading 1 last) of the monic
/// degree-`d` candidates.
fn monic_candidates(field: FieldTag, d: u32) -> Result<Vec<Vec<i64>>> {
    let d = d as usize;
    let (lo, hi): (i64, i64) = match field {
        FieldTag::Q => {
            let h = if d == 1 { LINEAR_HEIGHT } else { HIGHER_HEIGHT };
            (-h, h)
        }
        FieldTag::Fp(p) => (0, p as i64 - 1),
    };
    let span = (hi - lo + 1) as u64;
    let total = span.checked_pow(d as u32).filter(|&t| t <= 100_000);
    if total.is_none() {
        return Err(Error::UnsupportedField(format!(
            "a degree-{d} enumeration over this field is too large to list"
        )));
    }
    let mut out = Vec::new();
    let mut cur = vec![lo; d];
    loop {
        let mut coeffs = cur.clone();
        coeffs.push(1);
        out.push(coeffs);
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out);
            }
            cur[i] += 1;
            if cur[i] <= hi {
                break;
            }
            cur[i] = lo;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Basic opens
// ---------------------------------------------------------------------------

/// `U(x₁,…,xₙ)`: the points whose valuation is nonnegative on every
/// generator. Odd generators impose nothing — every valuation ring
/// contains the odd ideal — so they are dropped and counted.
#[derive(Debug, Clone)]
pub struct BasicOpen {
    pub space: ZRSpace,
    pub gens: Vec<SuperElem>,
    pub dropped_odd: usize,
}

pub fn basic_open(space: &ZRSpace, gens: Vec<SuperElem>) -> Result<BasicOpen> {
    let mut kept = Vec::new();
    let mut dropped_odd = 0usize;
    for g in gens {
        if g.ring != space.field {
            return Err(Error::RingMismatch(format!(
                "the generator {g} is not written over {}",
                space.field
            )));
        }
        match g.parity() {
            Some(1) => dropped_odd += 1,
            Some(_) => kept.push(g),
            None => {
                return Err(Error::Unsupported(format!(
                    "the generator {g} mixes parities; pass its homogeneous parts"
                )))
            }
        }
    }
    Ok(BasicOpen {
        space: space.clone(),
        gens: kept,
        dropped_odd,
    })
}

impl BasicOpen {
    /// Redundant-generator notice, when odd inputs were discarded.
    pub fn notice(&self) -> Option<String> {
        (self.dropped_odd > 0).then(|| {
            format!(
                "{} odd generator(s) dropped: they hold on every point",
                self.dropped_odd
            )
        })
    }

    pub fn member(&self, point: &ZRPoint) -> Result<bool> {
        if point.is_trivial() {
            // The trivial ring is all of L and contains any K[x₁,…,xₙ].
            return Ok(true);
        }
        let v = point.valuation(&self.space)?;
        for g in &self.gens {
            if !v.eval(g)?.is_nonnegative() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `U(X) ∩ U(X′) = U(X, X′)`: intersection is list concatenation.
    pub fn intersect(&self, other: &BasicOpen) -> Result<BasicOpen> {
        if self.space != other.space {
            return Err(Error::RingMismatch(
                "the two opens live on different spaces".into(),
            ));
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ok(BasicOpen {
            space: self.space.clone(),
            gens,
            dropped_odd: self.dropped_odd + other.dropped_odd,
        })
    }
}

// ---------------------------------------------------------------------------
// The even reduction is a homeomorphism
// ---------------------------------------------------------------------------

/// The bijection `A_v ↦ A_v̂` between the super space and the space of
/// its even reduction, tabulated on an enumeration. Membership in basic
/// opens transfers along it in both directions, generator by generator:
/// `x ↦ x + J_L`.
#[derive(Debug, Clone)]
pub struct EvenHomeomorphism {
    pub space: ZRSpace,
    pub even_space: ZRSpace,
    /// matched points, super side first
    pub table: Vec<(ZRPoint, ZRPoint)>,
}

pub fn even_homeomorphism(space: &ZRSpace, degree_bound: u32) -> Result<EvenHomeomorphism> {
    let even_space = space.reduction();
    let here = space.points(degree_bound)?.points;
    let there = even_space.points(degree_bound)?.points;
    // Place data depend only on the even reduction, so the enumerations
    // match index by index; this is the bijectivity check.
    if here.len() != there.len() {
        return Err(Error::Unsupported(
            "the two enumerations differ in size".into(),
        ));
    }
    let mut table = Vec::new();
    for (p, q) in here.into_iter().zip(there) {
        if p != q {
            return Err(Error::Unsupported(
                "the reduction failed to match a point".into(),
            ));
        }
        table.push((p.clone(), q));
    }
    Ok(EvenHomeomorphism {
        space: space.clone(),
        even_space,
        table,
    })
}

impl EvenHomeomorphism {
    /// Image of a point: the same center, read in the reduced field.
    pub fn map_point(&self, p: &ZRPoint) -> ZRPoint {
        p.clone()
    }

    /// Image of a basic-open generator: kill the θ part.
    pub fn map_gen(&self, g: &SuperElem) -> Result<SuperElem> {
        if g.ring != self.space.field {
            return Err(Error::RingMismatch(format!(
                "{g} is not written over {}",
                self.space.field
            )));
        }
        Ok(self.even_space.field.from_even(g.theta_free()))
    }
}

// ---------------------------------------------------------------------------
// Sections over cofinite opens
// ---------------------------------------------------------------------------

/// An open of the cofinite topology, named by its complement.
#[derive(Debug, Clone)]
pub enum CurveOpen {
    /// all places except the listed ones
    Cofinite(Vec<ZRPoint>),
    Empty,
}

/// One generator of the coordinate superring of a cofinite open.
#[derive(Debug, Clone)]
pub struct SheafSection {
    /// the open, by its excluded places
    pub excluded: Vec<ZRPoint>,
    /// a function with poles confined to the excluded places
    pub even_part: RatFn,
    /// the full odd ideal rides along with every section module
    pub with_odd_part: bool,
}

/// Generating description of `⋂_{A_v ∈ U} A_v` for a cofinite `U`.
#[derive(Debug, Clone)]
pub struct CoordinateRing {
    pub excluded: Vec<ZRPoint>,
    pub basis: Vec<SheafSection>,
    /// the odd ideal of `L` is contained in every valuation superring,
    /// hence in the intersection, whenever there are θ generators
    pub odd_part_included: bool,
    pub description: String,
    /// how many enumerated places of the open each generator was
    /// verified nonnegative at
    pub checked_places: usize,
    pub note: &'static str,
}

/// Sections of the structure sheaf over a cofinite open: the constants,
/// polynomial parts when the place at infinity is excluded, and pole
/// pieces `xʳ/qʲ` (r < deg q, j ≤ `degree_bound`) for each excluded
/// finite center — plus the odd ideal. The empty open has the zero ring
/// and is reported as such.
pub fn sections(
    space: &ZRSpace,
    open: &CurveOpen,
    degree_bound: u32,
) -> Result<CoordinateRing> {
    let excluded = match open {
        CurveOpen::Empty => return Err(Error::EmptyOpen),
        CurveOpen::Cofinite(e) => e,
    };
    let mut finite_centers: Vec<MPoly> = Vec::new();
    let mut infinity_out = false;
    let mut dedup: Vec<ZRPoint> = Vec::new();
    for p in excluded {
        if dedup.contains(p) {
            continue;
        }
        match p {
            ZRPoint::Trivial => {
                return Err(Error::Unsupported(
                    "the trivial point belongs to every nonempty open".into(),
                ))
            }
            ZRPoint::Place(PlaceDatum::AtInfinity) => infinity_out = true,
            ZRPoint::Place(PlaceDatum::FiniteIrreducible(q)) => finite_centers.push(q.clone()),
            ZRPoint::Place(PlaceDatum::PAdic(_)) => {
                return Err(Error::Unsupported(
                    "only places of the function field bound cofinite opens".into(),
                ))
            }
        }
        dedup.push(p.clone());
    }
    let field = space.field.field();
    let nv = space.field.nvars();
    let mut evens = vec![RatFn::one(field, nv)];
    if infinity_out {
        for k in 1..=degree_bound {
            evens.push(RatFn::var_pow(field, nv, 0, k as i32));
        }
    }
    for q in &finite_centers {
        let d = q.deg_in(0).unwrap_or(1);
        for j in 1..=degree_bound {
            let qinv = RatFn::from_poly(q.clone()).pow(-(j as i64))?;
            for r in 0..d {
                evens.push(RatFn::var_pow(field, nv, 0, r).mul(&qinv));
            }
        }
    }

    // Verify each generator on an enumerated panel of the open.
    let enough = degree_bound.max(2);
    let panel: Vec<ZRPoint> = space
        .points(enough)?
        .points
        .into_iter()
        .filter(|p| !p.is_trivial() && !dedup.contains(p))
        .take(20)
        .collect();
    for s in &evens {
        let elem = space.field.from_even(s.clone());
        for p in &panel {
            let v = p.valuation(space)?;
            if !v.eval(&elem)?.is_nonnegative() {
                return Err(Error::Unsupported(format!(
                    "a proposed section has a pole inside the open, at {}",
                    p.describe(space)
                )));
            }
        }
    }
    let odd = space.field.odd > 0;
    let description = {
        let mut parts = vec!["constants".to_string()];
        if infinity_out {
            parts.push(format!("polynomials of degree ≤ {degree_bound}"));
        }
        if !finite_centers.is_empty() {
            parts.push(format!(
                "pole pieces of order ≤ {degree_bound} at {} finite center(s)",
                finite_centers.len()
            ));
        }
        if odd {
            parts.push("the whole odd ideal".to_string());
        }
        parts.join(", ")
    };
    let checked_places = panel.len();
    let basis = evens
        .into_iter()
        .map(|even_part| SheafSection {
            excluded: dedup.clone(),
            even_part,
            with_odd_part: odd,
        })
        .collect();
    Ok(CoordinateRing {
        excluded: dedup,
        basis,
        odd_part_included: odd,
        description,
        checked_places,
        note: DESK_MODEL_NOTE,
    })
}

/// Is `x` a section over the cofinite open excluding `excluded` —
/// nonnegative at every enumerated place of the open?
pub fn is_section(
    space: &ZRSpace,
    x: &SuperElem,
    excluded: &[ZRPoint],
    degree_bound: u32,
) -> Result<bool> {
    for p in space.points(degree_bound)?.points {
        if p.is_trivial() || excluded.contains(&p) {
            continue;
        }
        let v = p.valuation(space)?;
        if !v.eval(x)?.is_nonnegative() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The arithmetically non-singular supercurve
// ---------------------------------------------------------------------------

/// The locally ringed structure on the discrete places (trivial point
/// removed, cofinite topology): stalks are the valuation pair rings
/// `𝔬_{v₀} ⊕ J_L`, and the superfield of functions is `L` itself —
/// every element is a section somewhere. Mod the odd ideal two sections
/// give the same *function* on points; the superring keeps them apart,
/// and both views are exposed rather than collapsed.
#[derive(Debug, Clone)]
pub struct Supercurve {
    pub space: ZRSpace,
    pub note: &'static str,
}

pub fn supercurve(space: &ZRSpace) -> Result<Supercurve> {
    // The shape constraints were enforced when the space was built.
    Ok(Supercurve {
        space: space.clone(),
        note: DESK_MODEL_NOTE,
    })
}

impl Supercurve {
    /// The enumerated discrete points; the trivial point is not one.
    pub fn points(&self, degree_bound: u32) -> Result<Vec<ZRPoint>> {
        Ok(self
            .space
            .points(degree_bound)?
            .points
            .into_iter()
            .filter(|p| !p.is_trivial())
            .collect())
    }

    /// The stalk at a point, presented by the valuation it is the pair
    /// ring of: membership and locality questions go through it.
    pub fn stalk(&self, p: &ZRPoint) -> Result<Valuation> {
        if p.is_trivial() {
            return Err(Error::Unsupported(
                "the trivial point is not on the curve".into(),
            ));
        }
        p.valuation(&self.space)
    }

    /// The places where `f` fails to be regular, within the enumeration:
    /// the smallest excluded set putting `f` among the sections.
    pub fn open_of_definition(
        &self,
        f: &SuperElem,
        degree_bound: u32,
    ) -> Result<Vec<ZRPoint>> {
        let mut excluded = Vec::new();
        for p in self.points(degree_bound)? {
            let v = p.valuation(&self.space)?;
            if !v.eval(f)?.is_nonnegative() {
                excluded.push(p);
            }
        }
        Ok(excluded)
    }

    /// The superring of functions: `L`, with its nilpotents.
    pub fn function_superring(&self) -> &RingDesc {
        &self.space.field
    }

    /// Functions-as-point-values: sections differing by an odd-ideal
    /// element agree at every point, so this view is the even reduction.
    pub fn function_field_of_points(&self) -> RingDesc {
        self.space.reduction().field
    }

    /// A section of the odd ideal is nonzero yet evaluates to zero at
    /// every point: its value is past every finite one.
    pub fn vanishes_pointwise(&self, f: &SuperElem, degree_bound: u32) -> Result<bool> {
        for p in self.points(degree_bound)? {
            let v = p.valuation(&self.space)?;
            if !v.eval(f)?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Shared scaffolding for membership checks: the value of `x` at a
/// point, used by callers that only hold the space.
pub fn value_at(space: &ZRSpace, p: &ZRPoint, x: &SuperElem) -> Result<GValue> {
    p.valuation(space)?.eval(x)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_ring};
    use crate::sample::rng_from_seed;

    fn desk() -> ZRSpace {
        ZRSpace::new(
            parse_ring("Q(x)[t1,t2]").unwrap(),
            parse_ring("Q").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn desk_spaces_validate_their_input() {
        desk();
        // a base containing the transcendental degenerates the space
        assert!(matches!(
            ZRSpace::new(
                parse_ring("Q(x)[t1]").unwrap(),
                parse_ring("Q[x]").unwrap()
            ),
            Err(Error::UnsupportedField(_))
        ));
        // hosts must be one-variable rational function superfields
        assert!(matches!(
            ZRSpace::new(
                parse_ring("Z[x,x^-1][t1]").unwrap(),
                parse_ring("Q").unwrap()
            ),
            Err(Error::UnsupportedField(_))
        ));
        assert!(matches!(
            ZRSpace::new(
                parse_ring("Q(x,y)[t1]").unwrap(),
                parse_ring("Q").unwrap()
            ),
            Err(Error::UnsupportedField(_))
        ));
        // coefficient mismatch
        assert!(matches!(
            ZRSpace::new(
                parse_ring("Fp5(x)[t1]").unwrap(),
                parse_ring("Q").unwrap()
            ),
            Err(Error::UnsupportedField(_))
        ));
        // more ground θ's than the host has
        assert!(matches!(
            ZRSpace::new(
                parse_ring("Q(x)[t1]").unwrap(),
                parse_ring("Q[t1,t2]").unwrap()
            ),
            Err(Error::RingMismatch(_))
        ));
        // ground θ's within range are fine
        ZRSpace::new(
            parse_ring("Q(x)[t1,t2]").unwrap(),
            parse_ring("Q[t1]").unwrap(),
        )
        .unwrap();
    }

    #[test]
    fn points_enumerate_by_degree_and_height() {
        let space = desk();

        // Bound 1 over Q: trivial, infinity, and x − c for |c| ≤ 3.
        let run = space.points(1).unwrap();
        assert_eq!(run.points.len(), 2 + 7);
        assert!(run.points.contains(&ZRPoint::Trivial));
        assert!(run.points.contains(&ZRPoint::Place(PlaceDatum::AtInfinity)));
        let ring = &space.field;
        let linear = |c: i64| {
            ZRPoint::Place(PlaceDatum::FiniteIrreducible(MPoly::from_coeffs_i64(
                ring.field(),
                &[-c, 1],
            )))
        };
        for c in -3..=3 {
            assert!(run.points.contains(&linear(c)), "missing x - ({c})");
        }
        assert!(run.undetermined.is_empty());
        assert!(!run.note.is_empty());

        // Bound 2 adds the quadratics without rational roots: a monic
        // x² + bx + c with |b|, |c| ≤ 2 is reducible over Q exactly when
        // b² − 4c is a perfect square, which leaves 15 of the 25.
        let run = space.points(2).unwrap();
        assert_eq!(run.points.len(), 9 + 15);
        let quad = |b: i64, c: i64| {
            ZRPoint::Place(PlaceDatum::FiniteIrreducible(MPoly::from_coeffs_i64(
                ring.field(),
                &[c, b, 1],
            )))
        };
        assert!(run.points.contains(&quad(0, 1)), "x^2 + 1 is a point");
        assert!(!run.points.contains(&quad(0, -1)), "x^2 - 1 splits");
        assert!(!run.points.contains(&quad(1, 0)), "x^2 + x splits");

        // Degree 4 hits the certificate's blind spot: x⁴ + 1 is listed
        // as undetermined, not silently classified.
        let run = space.points(4).unwrap();
        let x4 = MPoly::from_coeffs_i64(ring.field(), &[1, 0, 0, 0, 1]);
        assert!(run.undetermined.contains(&x4));
        assert!(!run
            .points
            .contains(&ZRPoint::Place(PlaceDatum::FiniteIrreducible(x4))));

        // Over F5 the coefficients are exhausted: 5 linear centers, and
        // (25 − 5)/2 = 10 irreducible quadratics.
        let fp = ZRSpace::new(
            parse_ring("Fp5(x)[t1]").unwrap(),
            parse_ring("Fp5").unwrap(),
        )
        .unwrap();
        assert_eq!(fp.points(1).unwrap().points.len(), 2 + 5);
        let run = fp.points(2).unwrap();
        assert_eq!(run.points.len(), 2 + 5 + 10);
        assert!(run.undetermined.is_empty());

        // Two calls are two independent cursors over the same list.
        assert_eq!(space.points(2).unwrap().points, space.points(2).unwrap().points);
    }

    #[test]
    fn basic_opens_follow_value_signs() {
        let space = desk();
        let x = parse_expr("x", &space.field).unwrap();
        let xinv = parse_expr("1/x", &space.field).unwrap();
        let pts = space.points(2).unwrap().points;
        let infinity = ZRPoint::Place(PlaceDatum::AtInfinity);
        let origin = ZRPoint::Place(PlaceDatum::FiniteIrreducible(
            MPoly::from_coeffs_i64(space.field.field(), &[0, 1]),
        ));

        // U(x): all finite places, not the place at infinity.
        let u_x = basic_open(&space, vec![x.clone()]).unwrap();
        for p in &pts {
            let expect = *p != infinity;
            assert_eq!(u_x.member(p).unwrap(), expect, "at {}", p.describe(&space));
        }

        // U(1/x): everything but the origin.
        let u_xi = basic_open(&space, vec![xinv.clone()]).unwrap();
        for p in &pts {
            let expect = *p != origin;
            assert_eq!(u_xi.member(p).unwrap(), expect, "at {}", p.describe(&space));
        }

        // U() is the whole space; the trivial point is everywhere.
        let whole = basic_open(&space, vec![]).unwrap();
        for p in &pts {
            assert!(whole.member(p).unwrap());
        }
        assert!(u_x.member(&ZRPoint::Trivial).unwrap());
        assert!(u_xi.member(&ZRPoint::Trivial).unwrap());

        // Odd generators are dropped with a notice and impose nothing.
        let theta = parse_expr("t1", &space.field).unwrap();
        let u_theta = basic_open(&space, vec![theta]).unwrap();
        assert!(u_theta.gens.is_empty());
        assert_eq!(u_theta.dropped_odd, 1);
        assert!(u_theta.notice().unwrap().contains("dropped"));
        for p in &pts {
            assert!(u_theta.member(p).unwrap());
        }
        // Mixed parities are refused, not guessed at.
        let mixed = parse_expr("x + t1", &space.field).unwrap();
        assert!(matches!(
            basic_open(&space, vec![mixed]),
            Err(Error::Unsupported(_))
        ));

        // U(a) ∩ U(b) = U(a, b) pointwise on the enumeration.
        let both = u_x.intersect(&u_xi).unwrap();
        let concat = basic_open(&space, vec![x, xinv]).unwrap();
        for p in &pts {
            let lhs = u_x.member(p).unwrap() && u_xi.member(p).unwrap();
            assert_eq!(both.member(p).unwrap(), lhs);
            assert_eq!(concat.member(p).unwrap(), lhs);
        }
    }

    #[test]
    fn the_even_reduction_is_a_homeomorphism() {
        let space = desk();
        let h = even_homeomorphism(&space, 2).unwrap();
        assert_eq!(h.even_space.field.odd, 0);
        assert_eq!(h.table.len(), space.points(2).unwrap().points.len());

        // The trivial point and each place map to themselves, read in
        // the reduced field.
        for (p, q) in &h.table {
            assert_eq!(p, q);
            assert_eq!(&h.map_point(p), q);
        }

        // Membership transfers along x ↦ x + J, both ways, including
        // for a generator with a nilpotent even part.
        let g = parse_expr("x + t1*t2", &space.field).unwrap();
        assert_eq!(g.parity(), Some(0));
        let g_red = h.map_gen(&g).unwrap();
        assert_eq!(g_red, parse_expr("x", &h.even_space.field).unwrap());
        let u = basic_open(&space, vec![g]).unwrap();
        let u_red = basic_open(&h.even_space, vec![g_red]).unwrap();
        for (p, q) in &h.table {
            assert_eq!(u.member(p).unwrap(), u_red.member(q).unwrap());
        }
    }

    #[test]
    fn cofinite_sections_have_confined_poles() {
        let space = desk();
        let field = space.field.field();
        let origin = ZRPoint::Place(PlaceDatum::FiniteIrreducible(
            MPoly::from_coeffs_i64(field, &[0, 1]),
        ));
        let infinity = ZRPoint::Place(PlaceDatum::AtInfinity);

        // Excluding only infinity leaves the polynomials.
        let ring = sections(&space, &CurveOpen::Cofinite(vec![infinity.clone()]), 3).unwrap();
        let evens: Vec<RatFn> = ring.basis.iter().map(|s| s.even_part.clone()).collect();
        assert_eq!(
            evens,
            vec![
                RatFn::one(field, 1),
                RatFn::var_pow(field, 1, 0, 1),
                RatFn::var_pow(field, 1, 0, 2),
                RatFn::var_pow(field, 1, 0, 3),
            ]
        );
        assert!(ring.odd_part_included);
        assert!(ring.checked_places >= 20);

        // Excluding the origin (infinity stays in) leaves 1/x powers.
        let ring = sections(&space, &CurveOpen::Cofinite(vec![origin.clone()]), 3).unwrap();
        let evens: Vec<RatFn> = ring.basis.iter().map(|s| s.even_part.clone()).collect();
        assert_eq!(
            evens,
            vec![
                RatFn::one(field, 1),
                RatFn::var_pow(field, 1, 0, -1),
                RatFn::var_pow(field, 1, 0, -2),
                RatFn::var_pow(field, 1, 0, -3),
            ]
        );

        // The whole space keeps only constants and the odd ideal.
        let ring = sections(&space, &CurveOpen::Cofinite(vec![]), 3).unwrap();
        assert_eq!(ring.basis.len(), 1);
        assert!(ring.basis[0].even_part.is_one());
        assert!(ring.odd_part_included);
        assert!(ring.description.contains("odd"));

        // Both out: Laurent pieces, and a quadratic center contributes
        // x^r/q^j pieces with r < 2.
        let ring = sections(
            &space,
            &CurveOpen::Cofinite(vec![origin.clone(), infinity.clone()]),
            2,
        )
        .unwrap();
        let evens: Vec<RatFn> = ring.basis.iter().map(|s| s.even_part.clone()).collect();
        assert_eq!(evens.len(), 1 + 2 + 2);
        let q = MPoly::from_coeffs_i64(field, &[1, 0, 1]); // x² + 1
        let ring = sections(
            &space,
            &CurveOpen::Cofinite(vec![ZRPoint::Place(PlaceDatum::FiniteIrreducible(
                q.clone(),
            ))]),
            2,
        )
        .unwrap();
        assert_eq!(ring.basis.len(), 1 + 4);
        let piece = RatFn::var_pow(field, 1, 0, 1)
            .mul(&RatFn::from_poly(q).pow(-2).unwrap());
        assert!(ring.basis.iter().any(|s| s.even_part == piece));

        // Sections are closed under sum and product (spot-checked), and
        // shrinking the open keeps every section a section.
        let poly_ring = sections(&space, &CurveOpen::Cofinite(vec![infinity.clone()]), 3).unwrap();
        let smaller = vec![infinity.clone(), origin.clone()];
        for a in &poly_ring.basis {
            for b in &poly_ring.basis {
                let sum = space.field.from_even(a.even_part.add(&b.even_part));
                let prod = space.field.from_even(a.even_part.mul(&b.even_part));
                assert!(is_section(&space, &sum, &[infinity.clone()], 2).unwrap());
                assert!(is_section(&space, &prod, &[infinity.clone()], 2).unwrap());
                assert!(is_section(&space, &sum, &smaller, 2).unwrap());
            }
        }

        // 1/x is not a section of the polynomial open.
        let xinv = parse_expr("1/x", &space.field).unwrap();
        assert!(!is_section(&space, &xinv, &[infinity.clone()], 2).unwrap());

        // The empty open is the zero ring.
        assert!(matches!(
            sections(&space, &CurveOpen::Empty, 2),
            Err(Error::EmptyOpen)
        ));
        // Excluding the trivial point is meaningless.
        assert!(matches!(
            sections(&space, &CurveOpen::Cofinite(vec![ZRPoint::Trivial]), 2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn supercurve_stalks_are_local() {
        let mut rng = rng_from_seed(67);
        let space = desk();
        let curve = supercurve(&space).unwrap();
        let field = space.field.field();
        let origin = ZRPoint::Place(PlaceDatum::FiniteIrreducible(
            MPoly::from_coeffs_i64(field, &[0, 1]),
        ));

        // The trivial point is off the curve.
        assert!(curve.points(2).unwrap().iter().all(|p| !p.is_trivial()));
        assert!(curve.stalk(&ZRPoint::Trivial).is_err());

        // The stalk at the origin is the local ring of the center plus
        // the whole odd ideal.
        let stalk = curve.stalk(&origin).unwrap();
        let inside = [
            parse_expr("x/(x + 1)", &space.field).unwrap(),
            parse_expr("t1", &space.field).unwrap(),
            parse_expr("t1*t2/x", &space.field).unwrap(), // odd ideal over any center
            parse_expr("5 + x^2", &space.field).unwrap(),
        ];
        for f in &inside {
            assert!(stalk.in_valuation_pair_ring(f).unwrap(), "{f}");
        }
        let outside = parse_expr("1/x", &space.field).unwrap();
        assert!(!stalk.in_valuation_pair_ring(&outside).unwrap());
        assert!(stalk.is_local(&mut rng).unwrap().is_local());

        // Every stalk on the enumeration is local.
        for p in curve.points(1).unwrap() {
            assert!(curve.stalk(&p).unwrap().is_local(&mut rng).unwrap().is_local());
        }

        // Odd-ideal sections vanish at every point but are not zero.
        let t = parse_expr("t1*t2", &space.field).unwrap();
        assert!(!t.is_zero());
        assert!(curve.vanishes_pointwise(&t, 2).unwrap());
        assert!(curve.vanishes_pointwise(&parse_expr("t1", &space.field).unwrap(), 2).unwrap());
        assert!(!curve.vanishes_pointwise(&parse_expr("x", &space.field).unwrap(), 2).unwrap());

        // Functions are defined away from their poles: 1/(x − 1) needs
        // exactly the place x = 1 removed, and is a section there.
        let f = parse_expr("1/(x - 1)", &space.field).unwrap();
        let excluded = curve.open_of_definition(&f, 2).unwrap();
        assert_eq!(
            excluded,
            vec![ZRPoint::Place(PlaceDatum::FiniteIrreducible(
                MPoly::from_coeffs_i64(field, &[-1, 1])
            ))]
        );
        assert!(is_section(&space, &f, &excluded, 2).unwrap());

        // Sampled field elements all live in some section ring — the
        // superfield of functions is L itself, in both of its views.
        for _ in 0..25 {
            let f = crate::sample::sample_elem(&mut rng, &space.field);
            let excluded = curve.open_of_definition(&f, 2).unwrap();
            assert!(is_section(&space, &f, &excluded, 2).unwrap());
        }
        assert_eq!(curve.function_superring(), &space.field);
        assert_eq!(curve.function_field_of_points().odd, 0);
        assert_eq!(
            curve.function_field_of_points().even_vars,
            space.field.even_vars
        );
    }
}
