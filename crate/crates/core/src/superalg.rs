//! Supercommutative superrings with exact arithmetic.
//!
//! A ring here is `R = R₀ ⊕ R₁` built from a commutative coefficient ring
//! (polynomials, Laurent polynomials, or rational functions over ℚ, ℤ, or
//! 𝔽_p) by adjoining finitely many odd generators θ₁, …, θ_N subject to
//!
//! ```text
//!     θᵢθⱼ = -θⱼθᵢ,   θᵢ² = 0,
//! ```
//!
//! so every element has a canonical form Σ_S c_S·θ_S with even coefficients
//! c_S and strictly increasing index words S. The odd part generates the
//! canonical nil ideal `J_R = R·R₁`, and `R/J_R` is the ordinary coefficient
//! ring — the *superreduction* `R̄`.
//!
//! Elements carry their ring descriptor; mixed-ring arithmetic panics rather
//! than coercing, since descriptors double as membership predicates for
//! subrings of a common fraction superfield.

use std::collections::BTreeMap;
use std::fmt;

use crate::linalg;
use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::scalar::{FieldTag, Scalar};
use crate::{Error, Result};

/// Coefficient base: ℚ, ℤ, or a prime field.
///
/// ℤ shares ℚ's scalar arithmetic; integrality is enforced only when asking
/// whether an element lies in the ring (see [`RingDesc::admits_even`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRing {
    Q,
    Z,
    Fp(u64),
}

impl BaseRing {
    pub fn field(&self) -> FieldTag {
        match self {
            BaseRing::Q | BaseRing::Z => FieldTag::Q,
            BaseRing::Fp(p) => FieldTag::Fp(*p),
        }
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseRing::Q => write!(f, "Q"),
            BaseRing::Z => write!(f, "Z"),
            BaseRing::Fp(p) => write!(f, "Fp{p}"),
        }
    }
}

/// How an even variable sits in the ring: `x` polynomial, `x, x⁻¹` Laurent,
/// or fully invertible (a rational function field variable).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Poly,
    Laurent,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenVar {
    pub name: String,
    pub kind: VarKind,
}

/// Which multiplicative set to invert in [`RingDesc::localize`].
#[derive(Debug, Clone, PartialEq)]
pub enum PrimeDatum {
    /// The even prime generated by an irreducible polynomial.
    EvenPrime(MPoly),
    /// The canonical nil ideal `J_R`; inverting its complement inverts every
    /// even element with nonzero reduction.
    JIdeal,
    /// All nonzerodivisors — this gives the total fraction superring, which
    /// coincides with localization at `J_R`.
    NonzeroDivisors,
}

/// Descriptor of a superring: base, even variables, odd rank, and an
/// optional even prime at which the coefficient ring has been localized.
#[derive(Debug, Clone, PartialEq)]
pub struct RingDesc {
    pub base: BaseRing,
    pub even_vars: Vec<EvenVar>,
    pub odd: usize,
    pub localized: Option<MPoly>,
}

impl RingDesc {
    pub fn new(base: BaseRing, even_vars: Vec<EvenVar>, odd: usize) -> Self {
        assert!(odd <= 16, "odd rank limited to 16 generators");
        RingDesc {
            base,
            even_vars,
            odd,
            localized: None,
        }
    }

    /// Shorthand: `Q(x₁,…)[θ₁..θ_N]` — every even variable invertible.
    pub fn superfield(base: BaseRing, var_names: &[&str], odd: usize) -> Self {
        let vars = var_names
            .iter()
            .map(|n| EvenVar {
                name: n.to_string(),
                kind: VarKind::Rational,
            })
            .collect();
        RingDesc::new(base, vars, odd)
    }

    /// Shorthand: polynomial even part `base[x₁,…][θ₁..θ_N]`.
    pub fn poly_ring(base: BaseRing, var_names: &[&str], odd: usize) -> Self {
        let vars = var_names
            .iter()
            .map(|n| EvenVar {
                name: n.to_string(),
                kind: VarKind::Poly,
            })
            .collect();
        RingDesc::new(base, vars, odd)
    }

    /// Shorthand: Laurent even part `base[x,x⁻¹][θ₁..θ_N]`.
    pub fn laurent_ring(base: BaseRing, var_names: &[&str], odd: usize) -> Self {
        let vars = var_names
            .iter()
            .map(|n| EvenVar {
                name: n.to_string(),
                kind: VarKind::Laurent,
            })
            .collect();
        RingDesc::new(base, vars, odd)
    }

    pub fn nvars(&self) -> usize {
        self.even_vars.len()
    }

    pub fn field(&self) -> FieldTag {
        self.base.field()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.even_vars.iter().position(|v| v.name == name)
    }

    pub fn theta_name(&self, i: usize) -> String {
        format!("t{}", i + 1)
    }

    /// A superfield: every nonzero even coefficient is invertible, so the
    /// only obstruction to inverting an element is a vanishing reduction.
    pub fn is_superfield(&self) -> bool {
        !matches!(self.base, BaseRing::Z)
            && self.localized.is_none()
            && self.even_vars.iter().all(|v| v.kind == VarKind::Rational)
    }

    /// The total fraction superring `K(R)`: all even variables become
    /// invertible and ℤ widens to ℚ.
    pub fn fraction_field(&self) -> RingDesc {
        let base = match self.base {
            BaseRing::Z => BaseRing::Q,
            b => b,
        };
        RingDesc {
            base,
            even_vars: self
                .even_vars
                .iter()
                .map(|v| EvenVar {
                    name: v.name.clone(),
                    kind: VarKind::Rational,
                })
                .collect(),
            odd: self.odd,
            localized: None,
        }
    }

    /// Does this rational function lie in the even part of the ring?
    ///
    /// Denominator discipline by variable kind — polynomial variables may
    /// not appear in denominators, Laurent variables only as monomial
    /// factors — plus coefficient integrality over ℤ, or coprimality of the
    /// denominator to the localizing prime.
    pub fn admits_even(&self, f: &RatFn) -> bool {
        if f.field() != self.field() || f.nvars() != self.nvars() {
            return false;
        }
        if f.is_zero() {
            return true;
        }
        if let Some(p) = &self.localized {
            if f.den.multiplicity_of(p) > 0 {
                return false;
            }
        } else {
            for (i, v) in self.even_vars.iter().enumerate() {
                match v.kind {
                    VarKind::Rational => {}
                    VarKind::Poly => {
                        if f.den.deg_in(i).unwrap_or(0) > 0 {
                            return false;
                        }
                    }
                    VarKind::Laurent => {
                        // The denominator must be a monomial in this
                        // variable: every term with the same exponent.
                        if f.den.deg_in(i) != f.den.min_exp_in(i) {
                            return false;
                        }
                    }
                }
            }
        }
        if matches!(self.base, BaseRing::Z) {
            // Numerator coefficients must be integers and the denominator a
            // monomial with unit content (its Laurent-variable content was
            // already forced monomial above; any remaining scalar would have
            // been normalized into the numerator).
            if !f.num.terms.values().all(Scalar::is_integer) {
                return false;
            }
            if f.den.terms.len() != 1 {
                return false;
            }
        }
        true
    }

    /// Localize the even part at a prime. `EvenPrime(p)` requires `p`
    /// univariate irreducible over a field base; `JIdeal` and
    /// `NonzeroDivisors` both give the fraction superfield.
    pub fn localize(&self, at: &PrimeDatum) -> Result<RingDesc> {
        match at {
            PrimeDatum::JIdeal | PrimeDatum::NonzeroDivisors => Ok(self.fraction_field()),
            PrimeDatum::EvenPrime(p) => {
                if self.localized.is_some() {
                    return Err(Error::NotPrime("the ring is already localized".into()));
                }
                if matches!(self.base, BaseRing::Z) {
                    return Err(Error::Unsupported(
                        "localization at an even prime needs a field base".into(),
                    ));
                }
                if p.field != self.field() || p.nvars != self.nvars() {
                    return Err(Error::RingMismatch("prime from a different ring".into()));
                }
                let used: Vec<usize> = (0..self.nvars()).filter(|&i| p.uses_var(i)).collect();
                let i = match used.as_slice() {
                    [] => return Err(Error::NotPrime("a constant generates (0) or (1)".into())),
                    [i] => *i,
                    _ => {
                        return Err(Error::NotPrime(
                            "only univariate prime generators are supported".into(),
                        ))
                    }
                };
                match self.even_vars[i].kind {
                    VarKind::Rational => {
                        return Err(Error::NotPrime(format!(
                            "{} is already invertible",
                            self.even_vars[i].name
                        )))
                    }
                    VarKind::Laurent => {
                        if p.is_monomial() {
                            return Err(Error::NotPrime(format!(
                                "{} is a unit in a Laurent ring",
                                self.even_vars[i].name
                            )));
                        }
                    }
                    VarKind::Poly => {}
                }
                let uni = p
                    .to_univariate(i)
                    .expect("single-variable polynomial after the usage check");
                if !uni.is_irreducible()? {
                    let names: Vec<&str> =
                        self.even_vars.iter().map(|v| v.name.as_str()).collect();
                    return Err(Error::NotPrime(format!("{} factors", p.display_with(&names))));
                }
                let monic = p.normalize_lead();
                Ok(RingDesc {
                    localized: Some(monic),
                    ..self.clone()
                })
            }
        }
    }

    // ---- element constructors -------------------------------------------

    pub fn zero_elem(&self) -> SuperElem {
        SuperElem {
            ring: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn int_elem(&self, n: i64) -> SuperElem {
        self.from_even(RatFn::from_int(self.field(), self.nvars(), n))
    }

    pub fn one_elem(&self) -> SuperElem {
        self.int_elem(1)
    }

    pub fn var_elem(&self, i: usize) -> SuperElem {
        self.from_even(RatFn::var(self.field(), self.nvars(), i))
    }

    /// θ_{i+1} as an element (0-based index).
    pub fn theta_elem(&self, i: usize) -> SuperElem {
        assert!(i < self.odd, "theta index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(1u32 << i, RatFn::one(self.field(), self.nvars()));
        SuperElem {
            ring: self.clone(),
            terms,
        }
    }

    pub fn from_even(&self, f: RatFn) -> SuperElem {
        assert_eq!(f.field(), self.field());
        assert_eq!(f.nvars(), self.nvars());
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(0u32, f);
        }
        SuperElem {
            ring: self.clone(),
            terms,
        }
    }
}

impl fmt::Display for RingDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let rational: Vec<&EvenVar> = self
            .even_vars
            .iter()
            .filter(|v| v.kind == VarKind::Rational)
            .collect();
        if !rational.is_empty() {
            let names: Vec<&str> = rational.iter().map(|v| v.name.as_str()).collect();
            write!(f, "({})", names.join(","))?;
        }
        let adjoined: Vec<&EvenVar> = self
            .even_vars
            .iter()
            .filter(|v| v.kind != VarKind::Rational)
            .collect();
        if !adjoined.is_empty() {
            let mut parts = Vec::new();
            for v in adjoined {
                match v.kind {
                    VarKind::Poly => parts.push(v.name.clone()),
                    VarKind::Laurent => parts.push(format!("{0},{0}^-1", v.name)),
                    VarKind::Rational => unreachable!(),
                }
            }
            write!(f, "[{}]", parts.join(","))?;
        }
        if let Some(p) = &self.localized {
            let names: Vec<&str> = self.even_vars.iter().map(|v| v.name.as_str()).collect();
            write!(f, "@({})", p.display_with(&names))?;
        }
        if self.odd > 0 {
            if self.odd >= 3 {
                write!(f, "[t1..t{}]", self.odd)?;
            } else {
                let names: Vec<String> = (0..self.odd).map(|i| self.theta_name(i)).collect();
                write!(f, "[{}]", names.join(","))?;
            }
        }
        Ok(())
    }
}

/// Sign and combined index word of `θ_A · θ_B`, or `None` when a generator
/// repeats. The sign counts the transpositions needed to interleave the two
/// ascending words.
fn merge_sign(a: u32, b: u32) -> Option<(u32, i32)> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut b_below = 0u32;
    for pos in 0..32 {
        let bit = 1u32 << pos;
        if a & bit != 0 {
            inversions += b_below;
        }
        if b & bit != 0 {
            b_below += 1;
        }
    }
    Some((a | b, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// An element in canonical form: odd index word (bitmask) → even coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperElem {
    pub ring: RingDesc,
    pub terms: BTreeMap<u32, RatFn>,
}

impl SuperElem {
    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(RatFn::is_one)
    }

    fn check_ring(&self, other: &SuperElem) {
        assert_eq!(
            self.ring, other.ring,
            "arithmetic across different superrings"
        );
    }

    pub fn add(&self, other: &SuperElem) -> SuperElem {
        self.check_ring(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms
                .entry(*m)
                .or_insert_with(|| RatFn::zero(self.ring.field(), self.ring.nvars()));
            *entry = entry.add(c);
        }
        SuperElem {
            ring: self.ring.clone(),
            terms,
        }
        .normalized()
    }

    pub fn neg(&self) -> SuperElem {
        SuperElem {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &SuperElem) -> SuperElem {
        self.add(&other.neg())
    }

    /// Product under the sign rule: `θ_A·θ_B = ±θ_{A∪B}`, zero on overlap.
    pub fn mul(&self, other: &SuperElem) -> SuperElem {
        self.check_ring(other);
        let mut terms: BTreeMap<u32, RatFn> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let Some((m, sign)) = merge_sign(*ma, *mb) else {
                    continue;
                };
                let mut c = ca.mul(cb);
                if sign < 0 {
                    c = c.neg();
                }
                let entry = terms
                    .entry(m)
                    .or_insert_with(|| RatFn::zero(self.ring.field(), self.ring.nvars()));
                *entry = entry.add(&c);
            }
        }
        SuperElem {
            ring: self.ring.clone(),
            terms,
        }
        .normalized()
    }

    pub fn mul_even(&self, f: &RatFn) -> SuperElem {
        SuperElem {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.mul(f))).collect(),
        }
        .normalized()
    }

    pub fn pow(&self, n: u32) -> SuperElem {
        let mut acc = self.ring.one_elem();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// The θ-free coefficient — the image of this element in the
    /// superreduction `R̄ = R/J_R`.
    pub fn theta_free(&self) -> RatFn {
        self.terms
            .get(&0)
            .cloned()
            .unwrap_or_else(|| RatFn::zero(self.ring.field(), self.ring.nvars()))
    }

    /// Superreduction map `R → R̄`; a ring homomorphism killing every θ.
    pub fn superreduce(&self) -> RatFn {
        self.theta_free()
    }

    /// Parity of a homogeneous element: `Some(0)` even, `Some(1)` odd,
    /// `None` for mixed elements (and `Some(0)` for zero).
    pub fn parity(&self) -> Option<u8> {
        let mut seen: Option<u8> = if self.is_zero() { Some(0) } else { None };
        for m in self.terms.keys() {
            let p = (m.count_ones() % 2) as u8;
            match seen {
                None => seen = Some(p),
                Some(q) if q == p => {}
                Some(_) => return None,
            }
        }
        seen
    }

    pub fn is_homogeneous(&self) -> bool {
        self.parity().is_some()
    }

    /// Split into the even and odd homogeneous parts, `x = x₀ + x₁`.
    pub fn homogeneous_parts(&self) -> (SuperElem, SuperElem) {
        let mut even = BTreeMap::new();
        let mut odd = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.count_ones() % 2 == 0 {
                even.insert(*m, c.clone());
            } else {
                odd.insert(*m, c.clone());
            }
        }
        (
            SuperElem {
                ring: self.ring.clone(),
                terms: even,
            },
            SuperElem {
                ring: self.ring.clone(),
                terms: odd,
            },
        )
    }

    /// Membership in the ring the descriptor names (coefficients may stray
    /// into the fraction field during arithmetic).
    pub fn in_ring(&self) -> bool {
        self.terms.values().all(|c| self.ring.admits_even(c))
    }

    /// Inverse in the total fraction superring. An element is invertible
    /// there iff its reduction is nonzero; the nil part is peeled off with a
    /// finite geometric series. The result may leave the nominal ring — use
    /// [`SuperElem::in_ring`] on it when that matters.
    pub fn inv(&self) -> Result<SuperElem> {
        let a0 = self.theta_free();
        if a0.is_zero() {
            return Err(Error::OddDenominator(
                "the reduction vanishes, so the element is a zerodivisor".into(),
            ));
        }
        let a0_inv = a0.inv().expect("nonzero reduction");
        // self = a0(1 + n) with n nilpotent; (1+n)⁻¹ = Σ (-n)^k.
        let n = self.mul_even(&a0_inv).sub(&self.ring.one_elem());
        let mut acc = self.ring.one_elem();
        let mut power = self.ring.one_elem();
        loop {
            power = power.mul(&n).neg();
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.mul_even(&a0_inv))
    }

    /// Push the element along an even-variable substitution into another
    /// ring (θ's map identically). Used to embed subrings. Fails only when
    /// a denominator collapses to zero under the substitution.
    pub fn map_even(&self, target: &RingDesc, images: &[RatFn]) -> Result<SuperElem> {
        assert_eq!(images.len(), self.ring.nvars());
        assert!(target.odd >= self.ring.odd);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(*m, c.subst(images)?);
        }
        Ok(SuperElem {
            ring: target.clone(),
            terms,
        }
        .normalized())
    }

    fn var_names(&self) -> Vec<&str> {
        self.ring.even_vars.iter().map(|v| v.name.as_str()).collect()
    }
}

impl fmt::Display for SuperElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.var_names();
        let mut out = String::new();
        for (m, c) in &self.terms {
            let theta: Vec<String> = (0..self.ring.odd)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| self.ring.theta_name(i))
                .collect();
            let coeff = c.display_with(&names);
            let piece = if theta.is_empty() {
                coeff
            } else {
                let word = theta.join("*");
                if c.is_one() {
                    word
                } else if c.neg().is_one() {
                    format!("-{word}")
                } else if c.as_poly().is_some_and(|p| p.terms.len() == 1) {
                    format!("{coeff}*{word}")
                } else {
                    format!("({coeff})*{word}")
                }
            };
            if out.is_empty() {
                out = piece;
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        write!(f, "{out}")
    }
}

/// Which canonical family an ideal belongs to; membership is exact for the
/// recognized families and refused otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealTag {
    Generic,
    /// `J_R`, the ideal generated by the odd part.
    CanonicalJ,
    /// The support `{v = ∞}` of a valuation; generators are stored
    /// explicitly, so membership runs through the generic machinery.
    SupportOf,
    /// The intersection with `R` of a valuation's positive ideal.
    POf,
}

/// A finitely generated (two-sided) homogeneous ideal of a superring.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperIdeal {
    pub ring: RingDesc,
    pub gens: Vec<SuperElem>,
    pub tag: IdealTag,
}

/// `J_R = R·R₁`, generated by the θ's.
pub fn canonical_ideal(ring: &RingDesc) -> SuperIdeal {
    let gens = (0..ring.odd).map(|i| ring.theta_elem(i)).collect();
    SuperIdeal {
        ring: ring.clone(),
        gens,
        tag: IdealTag::CanonicalJ,
    }
}

impl SuperIdeal {
    pub fn generic(ring: &RingDesc, gens: Vec<SuperElem>) -> SuperIdeal {
        for g in &gens {
            assert!(g.is_homogeneous(), "ideal generators must be homogeneous");
        }
        SuperIdeal {
            ring: ring.clone(),
            gens,
            tag: IdealTag::Generic,
        }
    }

    /// Exact membership for the decidable families:
    ///
    /// * `J_R` — the reduction must vanish;
    /// * a single generator concentrated in one θ-word — divide through;
    /// * several single-term generators — a monomial ideal, where
    ///   membership is term-by-term divisibility.
    ///
    /// Anything else is refused rather than approximated.
    pub fn member(&self, x: &SuperElem) -> Result<bool> {
        if x.ring != self.ring {
            return Err(Error::RingMismatch(
                "element and ideal live in different rings".into(),
            ));
        }
        if self.tag == IdealTag::CanonicalJ {
            return Ok(x.theta_free().is_zero());
        }
        let gens: Vec<&SuperElem> = self.gens.iter().filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            return Ok(x.is_zero());
        }
        if x.is_zero() {
            return Ok(true);
        }
        if gens.len() == 1 && gens[0].terms.len() == 1 {
            let (gm, gc) = gens[0].terms.iter().next().expect("single term");
            return Ok(x.terms.iter().all(|(m, c)| {
                m & gm == *gm
                    && self
                        .ring
                        .admits_even(&c.div(gc).expect("nonzero generator"))
            }));
        }
        // Monomial family: every generator is a single term whose even
        // coefficient is a monomial.
        let monomial_gens: Option<Vec<(u32, &RatFn)>> = gens
            .iter()
            .map(|g| {
                if g.terms.len() != 1 {
                    return None;
                }
                let (m, c) = g.terms.iter().next().expect("single term");
                let mono = c.as_poly()?;
                if mono.terms.len() == 1 {
                    Some((*m, c))
                } else {
                    None
                }
            })
            .collect();
        let Some(mono_gens) = monomial_gens else {
            return Err(Error::UnsupportedIdeal(
                "membership is only decided for J_R, principal single-word, \
                 and monomial-generated ideals"
                    .into(),
            ));
        };
        // Term-by-term: split each even coefficient's numerator into its
        // monomials — the denominator of an in-ring coefficient is a unit or
        // a Laurent monomial, so it rides along — and ask for a dividing
        // generator.
        for (m, c) in &x.terms {
            for (exp, coef) in &c.num.terms {
                let single = MPoly {
                    field: c.num.field,
                    nvars: c.num.nvars,
                    terms: [(exp.clone(), coef.clone())].into_iter().collect(),
                };
                let piece =
                    RatFn::new(single, c.den.clone()).expect("denominator is nonzero");
                let term_ok = mono_gens.iter().any(|(gm, gc)| {
                    m & gm == *gm
                        && self
                            .ring
                            .admits_even(&piece.div(gc).expect("nonzero generator"))
                });
                if !term_ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Integral dependence
// ---------------------------------------------------------------------------

/// A subring `R ⊆ S` presented by where the even variables of `R` land in
/// `S`; odd generators are shared and map identically.
#[derive(Debug, Clone)]
pub struct SubringEmbedding {
    pub small: RingDesc,
    pub images: Vec<RatFn>,
}

impl SubringEmbedding {
    /// The identity embedding of a descriptor into a larger ring with the
    /// same variable names (e.g. a polynomial ring into its superfield).
    pub fn identity(small: &RingDesc, big: &RingDesc) -> SubringEmbedding {
        let images = (0..small.nvars())
            .map(|i| RatFn::var(big.field(), big.nvars(), i))
            .collect();
        SubringEmbedding {
            small: small.clone(),
            images,
        }
    }

    /// All monomials in the images of total degree ≤ `bound`, as elements
    /// of the big ring — the coefficient search space for integral
    /// relations.
    fn monomial_images(&self, big: &RingDesc, bound: usize) -> Vec<(Vec<usize>, RatFn)> {
        let n = self.small.nvars();
        let mut out = Vec::new();
        let mut exps = vec![0usize; n.max(1)];
        loop {
            let total: usize = exps[..n].iter().sum();
            if total <= bound {
                let mut m = RatFn::one(big.field(), big.nvars());
                for (i, &e) in exps[..n].iter().enumerate() {
                    for _ in 0..e {
                        m = m.mul(&self.images[i]);
                    }
                }
                out.push((exps[..n].to_vec(), m));
            }
            // Odometer over exponent vectors bounded coordinatewise.
            let mut i = 0;
            loop {
                if n == 0 || i == n {
                    return out;
                }
                exps[i] += 1;
                if exps[i] > bound {
                    exps[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
            if n == 0 {
                return out;
            }
        }
    }
}

/// Outcome of the bounded search for a monic relation.
#[derive(Debug, Clone)]
pub enum IntegralityVerdict {
    /// `x^n + a_{n-1}x^{n-1} + … + a_0 = 0` with the `a_i` in the embedded
    /// subring, verified by exact substitution. Coefficients are listed from
    /// `a_0` upward.
    Yes { relation: Vec<SuperElem> },
    NoWithinBound { bound: usize },
}

/// Search for a monic polynomial relation of degree ≤ `bound` for `x` over
/// the embedded subring, with coefficients drawn from the θ-free span of
/// subring monomials (degree ≤ `bound` in the subring variables).
///
/// Odd elements are integral outright (`x² = 0`). A mixed element is
/// handled through its even part: if `g` is monic for `x₀`, then `g(x)` is
/// a nil element, so a power of `g` is monic for `x`.
pub fn is_integral(
    x: &SuperElem,
    over: &SubringEmbedding,
    bound: usize,
) -> Result<IntegralityVerdict> {
    assert!(bound >= 1 && bound <= 8, "relation degree bound must be 1..=8");
    let ring = &x.ring;
    let (x0, x1) = x.homogeneous_parts();
    if x0.is_zero() && !x1.is_zero() {
        if bound < 2 {
            return Ok(IntegralityVerdict::NoWithinBound { bound });
        }
        let zero = ring.zero_elem();
        return Ok(IntegralityVerdict::Yes {
            relation: vec![zero.clone(), zero],
        });
    }
    if !x1.is_zero() {
        // Mixed: find a relation g for the even part, then raise g(x) to
        // the power that kills its nil value.
        let even_verdict = is_integral(&x0, over, bound)?;
        let IntegralityVerdict::Yes { relation } = even_verdict else {
            return Ok(IntegralityVerdict::NoWithinBound { bound });
        };
        // g as coefficient list with leading 1 appended.
        let mut g: Vec<SuperElem> = relation;
        g.push(ring.one_elem());
        let eval = |coeffs: &[SuperElem], at: &SuperElem| -> SuperElem {
            let mut acc = ring.zero_elem();
            for c in coeffs.iter().rev() {
                acc = acc.mul(at).add(c);
            }
            acc
        };
        let mut power = g.clone();
        loop {
            if eval(&power, x).is_zero() {
                power.pop();
                return Ok(IntegralityVerdict::Yes { relation: power });
            }
            // Multiply the coefficient polynomial by g.
            let mut next = vec![ring.zero_elem(); power.len() + g.len() - 1];
            for (i, a) in power.iter().enumerate() {
                for (j, b) in g.iter().enumerate() {
                    next[i + j] = next[i + j].add(&a.mul(b));
                }
            }
            power = next;
            if power.len() > 64 {
                return Ok(IntegralityVerdict::NoWithinBound { bound });
            }
        }
    }

    // Even element: linear algebra over the scalar field. Unknown
    // coefficients a_i = Σ_m λ_{i,m}·(monomial image m).
    let monomials = over.monomial_images(ring, bound);
    for n in 1..=bound {
        let mut powers = Vec::with_capacity(n + 1);
        let mut acc = ring.one_elem();
        powers.push(acc.clone());
        for _ in 0..n {
            acc = acc.mul(x);
            powers.push(acc.clone());
        }
        let mut basis_elems = Vec::new();
        for power in powers.iter().take(n) {
            for (_, m) in &monomials {
                basis_elems.push(power.mul_even(m));
            }
        }
        let target = powers[n].neg();
        let mut all = basis_elems.clone();
        all.push(target.clone());
        let coords = linearize(&all);
        let (basis_vecs, target_vec) = coords.split_at(basis_elems.len());
        if let Some(lambda) = linalg::in_span(basis_vecs, &target_vec[0]) {
            // Rebuild the coefficients and verify the relation exactly.
            let mut relation = Vec::with_capacity(n);
            for i in 0..n {
                let mut a = ring.zero_elem();
                for (j, (_, m)) in monomials.iter().enumerate() {
                    let l = &lambda[i * monomials.len() + j];
                    if !l.is_zero() {
                        let scaled = RatFn::constant(ring.field(), ring.nvars(), l.clone()).mul(m);
                        a = a.add(&ring.from_even(scaled));
                    }
                }
                relation.push(a);
            }
            let mut check = powers[n].clone();
            for (i, a) in relation.iter().enumerate() {
                check = check.add(&a.mul(&powers[i]));
            }
            assert!(check.is_zero(), "solver produced a non-relation");
            return Ok(IntegralityVerdict::Yes { relation });
        }
    }
    Ok(IntegralityVerdict::NoWithinBound { bound })
}

/// Exact coordinates for a family of elements: clear denominators globally,
/// then read off coefficients on the union of (θ-word, monomial) supports.
fn linearize(elems: &[SuperElem]) -> Vec<Vec<Scalar>> {
    assert!(!elems.is_empty());
    let field = elems[0].ring.field();
    let nvars = elems[0].ring.nvars();
    let mut den = MPoly::one(field, nvars);
    for e in elems {
        for c in e.terms.values() {
            let g = MPoly::gcd(&den, &c.den);
            den = den.mul(&c.den.exact_div(&g).expect("gcd divides"));
        }
    }
    // Support of the cleared numerators.
    let mut support: BTreeMap<(u32, Vec<i32>), usize> = BTreeMap::new();
    let mut cleared: Vec<BTreeMap<u32, MPoly>> = Vec::with_capacity(elems.len());
    for e in elems {
        let mut map = BTreeMap::new();
        for (m, c) in &e.terms {
            let factor = den.exact_div(&c.den).expect("den divides the lcm");
            let p = c.num.mul(&factor);
            for exp in p.terms.keys() {
                let k = (*m, exp.clone());
                let next = support.len();
                support.entry(k).or_insert(next);
            }
            map.insert(*m, p);
        }
        cleared.push(map);
    }
    let dim = support.len();
    cleared
        .into_iter()
        .map(|map| {
            let mut v = vec![Scalar::zero(field); dim.max(1)];
            for (m, p) in map {
                for (exp, c) in p.terms {
                    let idx = support[&(m, exp)];
                    v[idx] = c;
                }
            }
            v
        })
        .collect()
}
