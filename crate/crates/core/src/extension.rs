//! Carrying valuations across embeddings of superrings.
//!
//! An embedding `R → S` is presented by where the even variables of `R`
//! land in `S`; odd generators map index to index. A valuation `w` on `S`
//! *extends* `v` on `R` when one injective order-embedding `h` of the
//! value groups satisfies `w(ι(x)) = h(v(x))` for every `x ∈ R` —
//! equivalently, when the valuation pairs are nested compatibly and no
//! new support appears inside `R`. This module decides that relation on
//! sampled panels, provides the support-ideal criterion for extensions
//! to exist at all, the integral-closure characterizations, the inverse
//! property for sets of valuations, approximation solvers for
//! independent discrete places of a rational function superfield, and
//! the ramification numbers e, f, n with their inequality.
//!
//! Everything is a bounded exact computation: searches are capped, the
//! caps are reported, and constructive answers are re-verified by
//! evaluation before they are returned.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ordgroup::{
    gadd, gscale, lattice_index, lex_compare, smith_invariants, GValue, OrderHom, SegmentKind,
};
use crate::pairs::membership_samples;
use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::sample;
use crate::superalg::{
    is_integral, BaseRing, IntegralityVerdict, RingDesc, SubringEmbedding, SuperElem, SuperIdeal,
};
use crate::valuation::{mod_p_of, solve_hom, PlaceDatum, Rule, Valuation};
use crate::{Error, Result};

/// Degree cap shared by the rank searches; reported when a computation
/// fails to stabilize below it.
const RANK_DEGREE_BOUND: u32 = 8;

// ---------------------------------------------------------------------------
// Ring extensions
// ---------------------------------------------------------------------------

/// A superring `R` sitting inside a superring `S`.
///
/// The even variables of `R` are sent to explicit elements of `S` (a
/// renaming, or an algebraic relation like `x ↦ t²`); the θ generators of
/// `R` are a prefix of those of `S` and map identically, so the gradings
/// agree: `Rᵢ = R ∩ Sᵢ`.
#[derive(Debug, Clone)]
pub struct RingExtension {
    pub small: RingDesc,
    pub big: RingDesc,
    pub embedding: SubringEmbedding,
}

impl RingExtension {
    pub fn new(small: RingDesc, big: RingDesc, images: Vec<RatFn>) -> Result<RingExtension> {
        if images.len() != small.nvars() {
            return Err(Error::RingMismatch(format!(
                "{} images given for the {} even variables of {small}",
                images.len(),
                small.nvars()
            )));
        }
        if small.odd > big.odd {
            return Err(Error::RingMismatch(format!(
                "{small} has more odd generators than {big}"
            )));
        }
        match (small.base, big.base) {
            (BaseRing::Z, BaseRing::Z | BaseRing::Q) | (BaseRing::Q, BaseRing::Q) => {}
            (BaseRing::Fp(p), BaseRing::Fp(q)) if p == q => {}
            _ => {
                return Err(Error::RingMismatch(format!(
                    "no coefficient embedding of {small} into {big}"
                )))
            }
        }
        for (i, img) in images.iter().enumerate() {
            if img.is_zero() {
                return Err(Error::RingMismatch(format!("variable #{i} maps to zero")));
            }
            if img.field() != big.field() || img.nvars() != big.nvars() {
                return Err(Error::RingMismatch(format!(
                    "the image of variable #{i} is not written over {big}"
                )));
            }
            let as_elem = big.from_even(img.clone());
            if !as_elem.in_ring() {
                return Err(Error::NotInRing(format!(
                    "the image of variable #{i} falls outside {big}"
                )));
            }
        }
        let embedding = SubringEmbedding {
            small: small.clone(),
            images,
        };
        Ok(RingExtension {
            small,
            big,
            embedding,
        })
    }

    /// Variable-for-variable inclusion (same names, bigger ring).
    pub fn inclusion(small: RingDesc, big: RingDesc) -> Result<RingExtension> {
        if small.nvars() > big.nvars() {
            return Err(Error::RingMismatch(format!(
                "{small} has more even variables than {big}"
            )));
        }
        let images = (0..small.nvars())
            .map(|i| RatFn::var(big.field(), big.nvars(), i))
            .collect();
        RingExtension::new(small, big, images)
    }

    /// Push an element of the small ring through the embedding.
    pub fn embed(&self, x: &SuperElem) -> Result<SuperElem> {
        if x.ring != self.small {
            return Err(Error::RingMismatch(format!(
                "cannot embed an element of {} via {}",
                x.ring, self.small
            )));
        }
        let mut terms = BTreeMap::new();
        for (mask, c) in &x.terms {
            let img = if self.small.nvars() == 0 {
                // A constant coefficient: re-express it over the big
                // variable set rather than substituting into nothing.
                let n = c.num.constant_value().expect("constant numerator");
                let d = c.den.constant_value().expect("constant denominator");
                RatFn::constant(self.big.field(), self.big.nvars(), n.div(&d)?)
            } else {
                c.subst(&self.embedding.images)?
            };
            // Algebraically dependent images can cancel a coefficient.
            if !img.is_zero() {
                terms.insert(*mask, img);
            }
        }
        Ok(SuperElem {
            ring: self.big.clone(),
            terms,
        })
    }
}

// ---------------------------------------------------------------------------
// The extension relation
// ---------------------------------------------------------------------------

/// The three conditions making up the extension relation, each sampled.
#[derive(Debug, Clone)]
pub struct ExtensionChecks {
    /// `(A_v, 𝔭_v) ⪯ (A_w, 𝔭_w)`: `A_v ⊆ A_w` and `𝔭_v = A_v ∩ 𝔭_w`.
    pub pair_compatible: bool,
    /// `supp(v) ⊆ supp(w)` under the embedding.
    pub support_contained: bool,
    /// one injective order-embedding carries every `v`-value to the
    /// `w`-value of the image.
    pub values_factor: bool,
    /// first panel element that broke a condition, with the reason.
    pub witness: Option<String>,
}

impl ExtensionChecks {
    fn all(&self) -> bool {
        self.pair_compatible && self.support_contained && self.values_factor
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionVerdict {
    pub extends: bool,
    /// The order-embedding `h` onto a subgroup of the big value group,
    /// present exactly when `extends` holds.
    pub iso_witness: Option<OrderHom>,
    pub checks: ExtensionChecks,
}

/// Which inclusion of the pair order `(A_v,𝔭_v) ⪯ (A_w,𝔭_w)` a value pair
/// breaks, if any. `a` is the value under `v`, `b` under `w` of the image.
fn pair_breach(a: &GValue, b: &GValue) -> Option<&'static str> {
    if a.is_nonnegative() && !b.is_nonnegative() {
        return Some("A_v ⊄ A_w");
    }
    if a.is_positive() && !b.is_positive() {
        return Some("𝔭_v ⊄ 𝔭_w");
    }
    if a.is_nonnegative() && !a.is_positive() && b.is_positive() {
        return Some("A_v ∩ 𝔭_w ⊄ 𝔭_v");
    }
    None
}

/// Decide on a sampled panel whether `w` (on the big ring) extends `v`
/// (on the small ring) along `ext`, and exhibit the order-embedding.
pub fn check_extension(
    ext: &RingExtension,
    v: &Valuation,
    w: &Valuation,
    rng: &mut ChaCha8Rng,
) -> Result<ExtensionVerdict> {
    if v.ring != ext.small {
        return Err(Error::RingMismatch(format!(
            "the first valuation lives on {}, not on {}",
            v.ring, ext.small
        )));
    }
    if w.ring != ext.big {
        return Err(Error::RingMismatch(format!(
            "the second valuation lives on {}, not on {}",
            w.ring, ext.big
        )));
    }
    let mut panel = membership_samples(&ext.small, rng, 40);
    panel.extend(v.witnesses.iter().map(|(x, _)| x.clone()));
    let mut checks = ExtensionChecks {
        pair_compatible: true,
        support_contained: true,
        values_factor: true,
        witness: None,
    };
    let mut seen: Vec<(GValue, GValue)> = Vec::new();
    for x in &panel {
        let a = v.eval(x)?;
        let b = w.eval(&ext.embed(x)?)?;
        if a.is_infinite() {
            if !b.is_infinite() && checks.support_contained {
                checks.support_contained = false;
                checks
                    .witness
                    .get_or_insert_with(|| format!("supp(v) ∌ image of {x}"));
            }
            continue;
        }
        if let Some(why) = pair_breach(&a, &b) {
            if checks.pair_compatible {
                checks.pair_compatible = false;
                checks.witness.get_or_insert_with(|| format!("{why} at {x}"));
            }
            continue;
        }
        if b.is_infinite() {
            // A finite value can never be carried to ∞ by a group map.
            if checks.values_factor {
                checks.values_factor = false;
                checks
                    .witness
                    .get_or_insert_with(|| format!("{x} has a finite value but its image does not"));
            }
            continue;
        }
        seen.push((a, b));
    }
    if !checks.all() {
        return Ok(ExtensionVerdict {
            extends: false,
            iso_witness: None,
            checks,
        });
    }
    let hom = if v.group.rank == 0 {
        // The trivial group embeds by the empty map; every finite image
        // value must then be zero, which the verification below checks.
        Some(OrderHom::new(v.group, w.group, vec![vec![]; w.group.rank])?)
    } else {
        let pairs: Vec<(Vec<i64>, Vec<i64>)> = seen
            .iter()
            .map(|(a, b)| {
                (
                    a.value.clone().expect("finite"),
                    b.value.clone().expect("finite"),
                )
            })
            .collect();
        solve_hom(v.group, w.group, &pairs)?
    };
    let Some(h) = hom else {
        checks.values_factor = false;
        checks.witness.get_or_insert_with(|| {
            "no integer matrix carries the v-values to the w-values".to_string()
        });
        return Ok(ExtensionVerdict {
            extends: false,
            iso_witness: None,
            checks,
        });
    };
    let injective = matches!(h.kernel().kind, SegmentKind::Subgroup { ref basis } if basis.is_empty())
        || v.group.rank == 0;
    if !h.is_order_preserving() || !injective {
        checks.values_factor = false;
        checks.witness.get_or_insert_with(|| {
            "the matched matrix is not an injective order-embedding".to_string()
        });
        return Ok(ExtensionVerdict {
            extends: false,
            iso_witness: None,
            checks,
        });
    }
    for (a, b) in &seen {
        if h.apply(a)? != *b {
            checks.values_factor = false;
            checks
                .witness
                .get_or_insert_with(|| format!("h({a}) ≠ {b} on a panel value"));
            return Ok(ExtensionVerdict {
                extends: false,
                iso_witness: None,
                checks,
            });
        }
    }
    Ok(ExtensionVerdict {
        extends: true,
        iso_witness: Some(h),
        checks,
    })
}

// ---------------------------------------------------------------------------
// When do extensions exist at all?
// ---------------------------------------------------------------------------

/// Extensions of `v` to the big ring exist iff the ideal generated by the
/// support inside the big ring contracts back to exactly the support.
/// Decided by membership sampling over the small ring; an extended ideal
/// that fails to swallow the image of the support is reported as
/// structurally unusable rather than guessed at.
pub fn extension_criterion(
    ext: &RingExtension,
    v: &Valuation,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    if v.ring != ext.small {
        return Err(Error::RingMismatch(format!(
            "the valuation lives on {}, not on {}",
            v.ring, ext.small
        )));
    }
    let supp = v.support();
    let gens: Vec<SuperElem> = supp
        .gens
        .iter()
        .map(|g| ext.embed(g))
        .collect::<Result<_>>()?;
    let extended = SuperIdeal::generic(&ext.big, gens);
    let panel = membership_samples(&ext.small, rng, 40);
    for x in &panel {
        let in_support = v.eval(x)?.is_infinite();
        let in_contraction = extended.member(&ext.embed(x)?)?;
        if in_support && !in_contraction {
            return Err(Error::UnsupportedIdeal(format!(
                "the extended ideal misses the image of {x}"
            )));
        }
        if in_contraction && !in_support {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Integral closure
// ---------------------------------------------------------------------------

/// Tally from [`integrally_closed_spotcheck`].
#[derive(Debug, Clone, Default)]
pub struct ClosureReport {
    /// elements with negative value: confirmed to satisfy no sampled
    /// monic relation, by the value-comparison argument
    pub below_confirmed: usize,
    /// elements of the valuation pair ring (or nilpotents): membership
    /// confirmed directly
    pub inside_confirmed: usize,
    pub violations: Vec<String>,
}

/// `A_v` is integrally closed in its host ring. Numerically: for any `x`
/// with `v(x) < 0` and any monic polynomial with coefficients in `A_v`,
/// the lone term `xⁿ` has strictly smaller value than every other term,
/// so the sum has value `n·v(x) ≠ ∞` and cannot vanish. Elements with
/// `v(x) ≥ 0` (and nilpotents, which square to zero) are simply members.
pub fn integrally_closed_spotcheck(
    v: &Valuation,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ClosureReport> {
    assert!(trials >= 1, "at least one trial");
    let ring = &v.ring;
    let mut report = ClosureReport::default();
    // Coefficient pool: panel members that lie in A_v.
    let mut pool = Vec::new();
    for c in membership_samples(ring, rng, 25) {
        if v.in_valuation_pair_ring(&c)? {
            pool.push(c);
        }
    }
    assert!(!pool.is_empty(), "1 is always in the pair ring");

    // Deterministic probes first: inverted variables have negative value
    // at the usual centers, θ generators are nilpotent members.
    let mut subjects = Vec::new();
    for i in 0..ring.nvars() {
        if let Ok(inv) = ring.var_elem(i).inv() {
            if inv.in_ring() {
                subjects.push(inv);
            }
        }
    }
    for k in 0..ring.odd {
        subjects.push(ring.theta_elem(k));
    }
    for _ in 0..trials {
        subjects.push(sample::sample_elem(rng, ring));
    }

    for x in &subjects {
        let a = v.eval(x)?;
        if a.is_nonnegative() {
            // Covers ∞ (nilpotents and other support members) and the
            // pair ring itself.
            if v.in_valuation_pair_ring(x)? {
                report.inside_confirmed += 1;
            } else {
                report
                    .violations
                    .push(format!("{x} has value {a} yet is outside A_v"));
            }
            continue;
        }
        // v(x) < 0: minimality of the leading term for degrees 2..=5.
        let mut ok = true;
        for n in 2..=5usize {
            let mut s = x.pow(n as u32);
            let target = gscale(&a, n as i64);
            for i in 0..n {
                let c = pool[rng.gen_range(0..pool.len())].clone();
                let term_value = gadd(&v.eval(&c)?, &gscale(&a, i as i64))?;
                if !(term_value.is_infinite()
                    || lex_compare(&term_value, &target)? == Ordering::Greater)
                {
                    ok = false;
                    report.violations.push(format!(
                        "coefficient {c} at degree {i} does not dominate {x}^{n}"
                    ));
                    break;
                }
                s = s.add(&c.mul(&x.pow(i as u32)));
            }
            if !ok {
                break;
            }
            if v.eval(&s)? != target {
                ok = false;
                report.violations.push(format!(
                    "a monic sample in {x} of degree {n} lost its leading value"
                ));
                break;
            }
        }
        if ok {
            report.below_confirmed += 1;
        }
    }
    Ok(report)
}

/// Extension via integrality: when every generator of the big ring is
/// integral over the embedded small ring and the valuation pairs are
/// nested, the support containment comes for free and `w` extends `v`.
///
/// The integrality of each declared generator is verified by a bounded
/// relation search; the pair nesting is sampled. Both are preconditions —
/// their failure is an error, not a negative verdict.
pub fn extend_over_integral(
    ext: &RingExtension,
    v: &Valuation,
    w: &Valuation,
    rng: &mut ChaCha8Rng,
) -> Result<ExtensionVerdict> {
    const RELATION_BOUND: usize = 4;
    for i in 0..ext.big.nvars() {
        let g = ext.big.var_elem(i);
        match is_integral(&g, &ext.embedding, RELATION_BOUND)? {
            IntegralityVerdict::Yes { .. } => {}
            IntegralityVerdict::NoWithinBound { .. } => {
                return Err(Error::NotIntegral {
                    bound: RELATION_BOUND as u32,
                })
            }
        }
    }
    // θ generators square to zero and are integral outright.

    let mut panel = membership_samples(&ext.small, rng, 40);
    panel.extend(v.witnesses.iter().map(|(x, _)| x.clone()));
    for x in &panel {
        let a = v.eval(x)?;
        let b = w.eval(&ext.embed(x)?)?;
        if a.is_infinite() {
            if !b.is_positive() {
                return Err(Error::NotDominating(format!("𝔭_v ⊄ 𝔭_w at {x}")));
            }
            continue;
        }
        if let Some(why) = pair_breach(&a, &b) {
            return Err(Error::NotDominating(format!("{why} at {x}")));
        }
    }
    // With integrality granted, support containment is forced; a breach
    // here means the fixture itself is inconsistent.
    for x in &panel {
        if v.eval(x)?.is_infinite() && !w.eval(&ext.embed(x)?)?.is_infinite() {
            return Err(Error::Unsupported(format!(
                "integral extension lost the support at {x}"
            )));
        }
    }
    check_extension(ext, v, w, rng)
}

/// Tally from [`closure_as_intersection`].
#[derive(Debug, Clone, Default)]
pub struct IntersectionReport {
    pub agreements: usize,
    /// elements inside every listed pair ring for which the bounded
    /// relation search stayed silent — the honest "don't know" bucket
    pub indeterminates: usize,
    pub disagreements: Vec<String>,
    pub places_used: usize,
    pub places_skipped: usize,
}

/// The integral closure of the embedded small ring inside a superfield
/// is the intersection of the valuation pair rings containing it. For
/// sampled elements, membership in every listed pair ring is compared
/// against a bounded integrality search; valuations whose pair ring does
/// not contain the small ring are set aside first.
pub fn closure_as_intersection(
    ext: &RingExtension,
    places: &[Valuation],
    samples: usize,
    bound: usize,
    rng: &mut ChaCha8Rng,
) -> Result<IntersectionReport> {
    if !ext.big.is_superfield() {
        return Err(Error::Unsupported(
            "the intersection decomposition needs a superfield host".into(),
        ));
    }
    let mut report = IntersectionReport::default();
    // Generators of the embedded ring, for the containment filter.
    let mut ring_gens = vec![ext.small.one_elem(), ext.small.int_elem(2), ext.small.int_elem(3)];
    for i in 0..ext.small.nvars() {
        ring_gens.push(ext.small.var_elem(i));
    }
    for k in 0..ext.small.odd {
        ring_gens.push(ext.small.theta_elem(k));
    }
    let mut used = Vec::new();
    'place: for p in places {
        if p.ring != ext.big {
            return Err(Error::RingMismatch(format!(
                "a listed valuation lives on {}, not on {}",
                p.ring, ext.big
            )));
        }
        for g in &ring_gens {
            if !p.in_valuation_pair_ring(&ext.embed(g)?)? {
                report.places_skipped += 1;
                continue 'place;
            }
        }
        used.push(p);
    }
    report.places_used = used.len();

    let mut zs = Vec::new();
    for i in 0..ext.big.nvars() {
        let u = ext.big.var_elem(i);
        zs.push(u.pow(2));
        if let Ok(ui) = u.inv() {
            zs.push(ui);
        }
    }
    for k in 0..ext.big.odd {
        zs.push(ext.big.theta_elem(k));
    }
    for _ in 0..samples {
        zs.push(ext.big.from_even(sample::sample_even(rng, &ext.big)));
    }
    for z in &zs {
        let everywhere = {
            let mut all = true;
            for p in &used {
                if !p.in_valuation_pair_ring(z)? {
                    all = false;
                    break;
                }
            }
            all
        };
        match is_integral(z, &ext.embedding, bound)? {
            IntegralityVerdict::Yes { .. } => {
                if everywhere {
                    report.agreements += 1;
                } else {
                    report
                        .disagreements
                        .push(format!("{z} is integral yet escapes a listed pair ring"));
                }
            }
            IntegralityVerdict::NoWithinBound { .. } => {
                if everywhere {
                    report.indeterminates += 1;
                } else {
                    report.agreements += 1;
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The inverse property
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum InverseVerdict {
    /// every sampled element received a partner, recorded here
    Pass {
        witnesses: Vec<(SuperElem, SuperElem)>,
    },
    /// no partner for `stuck` among products of up to `bound` pool atoms
    FailWithinBound { bound: u32, stuck: SuperElem },
}

impl InverseVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, InverseVerdict::Pass { .. })
    }
}

/// A set of valuations has the inverse property when every `x` admits a
/// partner `x′` with `v(xx′) = 0` for each listed `v` that is finite on
/// `x`. On superfields the inverse of the even part always works; on
/// other rings a bounded pool of monomial-and-shift products is searched
/// and the first element the pool cannot serve is returned.
pub fn inverse_property(
    vals: &[Valuation],
    bound: u32,
    extra_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<InverseVerdict> {
    assert!(!vals.is_empty(), "at least one valuation");
    let ring = &vals[0].ring;
    for v in vals {
        if v.ring != *ring {
            return Err(Error::RingMismatch(
                "the inverse property concerns valuations on one ring".into(),
            ));
        }
    }
    let primes: Vec<u64> = {
        let mut ps: Vec<u64> = vals.iter().filter_map(|v| mod_p_of(&v.rule)).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    };

    let mut panel = membership_samples(ring, rng, extra_samples);
    for i in 0..ring.nvars() {
        let x = ring.var_elem(i);
        panel.push(ring.one_elem().add(&x));
        if let Ok(xi) = x.inv() {
            if xi.in_ring() {
                panel.push(ring.one_elem().add(&xi));
                for &p in &primes {
                    panel.push(ring.one_elem().add(&xi.mul(&ring.int_elem(p as i64))));
                }
            }
        }
    }

    if ring.is_superfield() {
        let mut witnesses = Vec::new();
        for x in &panel {
            let x0 = x.theta_free();
            let partner = if x0.is_zero() {
                // everything in the list is ∞ on x: no constraint
                ring.one_elem()
            } else {
                ring.from_even(x0.inv()?)
            };
            for v in vals {
                let val = v.eval(&x.mul(&partner))?;
                if !val.is_infinite() && !val.is_zero() {
                    return Err(Error::Unsupported(format!(
                        "the even-part inverse failed at {x}"
                    )));
                }
            }
            witnesses.push((x.clone(), partner));
        }
        return Ok(InverseVerdict::Pass { witnesses });
    }

    let pool = partner_pool(ring, &primes, bound);
    let mut witnesses = Vec::new();
    'next: for x in &panel {
        let mut active = Vec::new();
        for v in vals {
            if !v.eval(x)?.is_infinite() {
                active.push(v);
            }
        }
        if active.is_empty() {
            witnesses.push((x.clone(), ring.one_elem()));
            continue;
        }
        'cand: for cand in &pool {
            let prod = x.mul(cand);
            for v in &active {
                if !v.eval(&prod)?.is_zero() {
                    continue 'cand;
                }
            }
            witnesses.push((x.clone(), cand.clone()));
            continue 'next;
        }
        return Ok(InverseVerdict::FailWithinBound {
            bound,
            stuck: x.clone(),
        });
    }
    Ok(InverseVerdict::Pass { witnesses })
}

/// Candidate partners: shifts, variables and primes with their in-ring
/// inverses, closed under powers and two-factor products up to `bound`.
fn partner_pool(ring: &RingDesc, primes: &[u64], bound: u32) -> Vec<SuperElem> {
    let bound = bound.clamp(1, 8);
    let mut atoms = vec![ring.one_elem()];
    let mut ints: Vec<i64> = vec![2, 3, 5, 7];
    for &p in primes {
        if !ints.contains(&(p as i64)) {
            ints.push(p as i64);
        }
    }
    for i in 0..ring.nvars() {
        let x = ring.var_elem(i);
        atoms.push(x.clone());
        for d in [1i64, 2] {
            atoms.push(x.add(&ring.int_elem(d)));
            atoms.push(x.sub(&ring.int_elem(d)));
        }
        for &p in primes {
            atoms.push(x.add(&ring.int_elem(p as i64)));
            atoms.push(x.sub(&ring.int_elem(p as i64)));
        }
        if let Ok(xi) = x.inv() {
            atoms.push(xi);
        }
    }
    for n in ints {
        atoms.push(ring.int_elem(n));
        if let Ok(ni) = ring.int_elem(n).inv() {
            atoms.push(ni);
        }
    }
    atoms.retain(|a| a.in_ring() && !a.is_zero());

    let mut pool = vec![ring.one_elem()];
    for a in &atoms {
        let mut acc = a.clone();
        for _ in 1..=bound {
            pool.push(acc.clone());
            acc = acc.mul(a);
            if !acc.in_ring() {
                break;
            }
        }
    }
    'outer: for a in &atoms {
        for b in &atoms {
            if std::ptr::eq(a, b) {
                continue;
            }
            for j in 1..bound {
                for k in 1..=(bound - j) {
                    let c = a.pow(j).mul(&b.pow(k));
                    if c.in_ring() {
                        pool.push(c);
                    }
                    if pool.len() > 6000 {
                        break 'outer;
                    }
                }
            }
        }
    }
    pool
}

/// For a pair `{v, w}` with `𝔭_v ⊆ 𝔭_w`, the inverse property holds iff
/// `A_w ⊆ A_v ∪ supp(w)`. Returns `None` when the prime containment
/// fails on the panel — the criterion then simply does not apply.
pub fn inverse_pair_criterion(
    v: &Valuation,
    w: &Valuation,
    rng: &mut ChaCha8Rng,
) -> Result<Option<bool>> {
    if v.ring != w.ring {
        return Err(Error::RingMismatch(
            "the pair criterion concerns one ring".into(),
        ));
    }
    let panel = membership_samples(&v.ring, rng, 60);
    for x in &panel {
        if v.eval(x)?.is_positive() && !w.eval(x)?.is_positive() {
            return Ok(None);
        }
    }
    for x in &panel {
        let b = w.eval(x)?;
        if b.is_nonnegative() && !b.is_infinite() && !v.eval(x)?.is_nonnegative() {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

// ---------------------------------------------------------------------------
// Approximation at independent discrete places
// ---------------------------------------------------------------------------

/// The places usable by the approximation solvers: finite monic
/// irreducible centers and the degree place of a one-variable rational
/// function superfield over ℚ, pairwise distinct.
fn discrete_places<'a>(places: &'a [Valuation]) -> Result<(RingDesc, usize, Vec<&'a PlaceDatum>)> {
    let Some(first) = places.first() else {
        return Err(Error::Unsupported("no places given".into()));
    };
    let ring = first.ring.clone();
    if !ring.is_superfield()
        || ring.nvars() != 1
        || ring.field() != crate::scalar::FieldTag::Q
    {
        return Err(Error::Unsupported(
            "approximation runs on one-variable rational function superfields".into(),
        ));
    }
    let mut var = 0;
    let mut data = Vec::new();
    for p in places {
        if p.ring != ring {
            return Err(Error::RingMismatch(
                "all places must live on one superfield".into(),
            ));
        }
        match &p.rule {
            Rule::Place {
                var: pv,
                datum: d @ (PlaceDatum::FiniteIrreducible(_) | PlaceDatum::AtInfinity),
            } => {
                var = *pv;
                data.push(d);
            }
            _ => {
                return Err(Error::Unsupported(
                    "only finite places and the degree place are usable here".into(),
                ))
            }
        }
    }
    for i in 0..data.len() {
        for j in i + 1..data.len() {
            if data[i] == data[j] {
                return Err(Error::DependentPlaces(format!(
                    "places #{i} and #{j} coincide"
                )));
            }
        }
    }
    Ok((ring, var, data))
}

/// Build an element with prescribed values at pairwise independent
/// discrete places: a product of powers of the finite centers, with one
/// extra linear factor balancing the degree when the value at infinity
/// is also prescribed. The result is re-verified before being returned.
pub fn approximate(places: &[Valuation], targets: &[GValue]) -> Result<SuperElem> {
    let (ring, var, data) = discrete_places(places)?;
    if targets.len() != places.len() {
        return Err(Error::Unsupported(format!(
            "{} targets for {} places",
            targets.len(),
            places.len()
        )));
    }
    let field = ring.field();
    let n = ring.nvars();
    let mut h = RatFn::one(field, n);
    let mut inf_target = None;
    let mut deg_sum: i64 = 0;
    for (d, t) in data.iter().zip(targets) {
        let Some(val) = &t.value else {
            return Err(Error::InfiniteTarget);
        };
        let a = val[0];
        match d {
            PlaceDatum::FiniteIrreducible(q) => {
                h = h.mul(&RatFn::from_poly(q.clone()).pow(a)?);
                deg_sum += a * q.deg_in(var).unwrap_or(0) as i64;
            }
            PlaceDatum::AtInfinity => inf_target = Some(a),
            PlaceDatum::PAdic(_) => unreachable!("filtered by discrete_places"),
        }
    }
    if let Some(alpha) = inf_target {
        let c = -alpha - deg_sum;
        if c != 0 {
            let q0 = free_linear_center(field, n, var, &data);
            h = h.mul(&RatFn::from_poly(q0).pow(c)?);
        }
    }
    let out = ring.from_even(h);
    for (p, t) in places.iter().zip(targets) {
        if p.eval(&out)? != *t {
            return Err(Error::Unsupported(format!(
                "the constructed element missed its target at place {}",
                places.iter().position(|q| std::ptr::eq(q, p)).unwrap_or(0)
            )));
        }
    }
    Ok(out)
}

/// First monic linear polynomial in `var` that is not among the given
/// centers — its place is independent of all of them.
fn free_linear_center(
    field: crate::scalar::FieldTag,
    nvars: usize,
    var: usize,
    data: &[&PlaceDatum],
) -> MPoly {
    for s in 0.. {
        for shift in [s, -s] {
            let q = MPoly::var_pow(field, nvars, var, 1).sub(&MPoly::from_int(
                field,
                nvars,
                shift,
            ));
            let taken = data
                .iter()
                .any(|d| matches!(d, PlaceDatum::FiniteIrreducible(p) if *p == q));
            if !taken {
                return q;
            }
            if s == 0 {
                break;
            }
        }
    }
    unreachable!("finitely many centers cannot cover all shifts")
}

/// Find `x` matching each anchor to first order: `wᵢ(x) = wᵢ(aᵢ)` and
/// `wᵢ(x − aᵢ) > wᵢ(aᵢ)`. Built by a polynomial Chinese-remainder
/// partition of unity at a congruence depth derived from the anchor
/// values; only finite centers participate (a single place needs no
/// construction at all: its own anchor answers). Verified by evaluation.
pub fn strong_approximate(places: &[Valuation], anchors: &[SuperElem]) -> Result<SuperElem> {
    let (ring, var, data) = discrete_places(places)?;
    if anchors.len() != places.len() {
        return Err(Error::Unsupported(format!(
            "{} anchors for {} places",
            anchors.len(),
            places.len()
        )));
    }
    for a in anchors {
        if a.ring != ring {
            return Err(Error::RingMismatch(
                "anchors must live on the superfield of the places".into(),
            ));
        }
    }
    let mut ms = Vec::new();
    for (p, a) in places.iter().zip(anchors) {
        let m = p.eval(a)?;
        if m.is_infinite() {
            return Err(Error::AnchorInSupport);
        }
        ms.push(m);
    }
    if places.len() == 1 {
        return Ok(anchors[0].clone());
    }
    let centers: Vec<&MPoly> = data
        .iter()
        .map(|d| match d {
            PlaceDatum::FiniteIrreducible(q) => Ok(q),
            _ => Err(Error::Unsupported(
                "the degree place joins no congruence construction".into(),
            )),
        })
        .collect::<Result<_>>()?;

    // Congruence depth: deep enough that every cross term lands strictly
    // above the anchor value at each place.
    let mut need: i64 = 1;
    for (i, p) in places.iter().enumerate() {
        let mi = ms[i].value.as_ref().expect("finite")[0];
        for (j, a) in anchors.iter().enumerate() {
            if i == j {
                continue;
            }
            let cross = p.eval(a)?;
            if let Some(cv) = &cross.value {
                need = need.max(mi - cv[0] + 1);
            }
        }
    }
    let mut k = need.max(1) as u32;
    for _attempt in 0..2 {
        let xs = crt_blend(&ring, var, &centers, anchors, k)?;
        let mut good = true;
        for (i, p) in places.iter().enumerate() {
            if p.eval(&xs)? != ms[i] {
                good = false;
                break;
            }
            let diff = p.eval(&xs.sub(&anchors[i]))?;
            if !diff.is_infinite() && lex_compare(&diff, &ms[i])? != Ordering::Greater {
                good = false;
                break;
            }
        }
        if good {
            return Ok(xs);
        }
        k = 2 * k + 2;
    }
    Err(Error::Unsupported(
        "the congruence construction failed verification".into(),
    ))
}

/// `Σ aᵢ·Fᵢ` where `Fᵢ ≡ 1 mod qᵢᵏ` and `≡ 0 mod qⱼᵏ` for `j ≠ i`.
fn crt_blend(
    ring: &RingDesc,
    var: usize,
    centers: &[&MPoly],
    anchors: &[SuperElem],
    k: u32,
) -> Result<SuperElem> {
    let field = ring.field();
    let moduli: Vec<MPoly> = centers
        .iter()
        .map(|q| {
            let u = q.to_univariate(var).expect("validated univariate center");
            poly_pow(&u, k)
        })
        .collect();
    let mut acc = RatFn::zero(field, ring.nvars());
    for (i, a) in anchors.iter().enumerate() {
        let mut p_i = MPoly::one(field, 1);
        for (j, m) in moduli.iter().enumerate() {
            if j != i {
                p_i = p_i.mul(m);
            }
        }
        let (g, s, _) = ext_gcd_uni(&p_i, &moduli[i])?;
        if !g.is_one() {
            return Err(Error::DependentPlaces(
                "two centers share a factor".into(),
            ));
        }
        let f_i = p_i.mul(&s); // ≡ 1 mod qᵢᵏ, ≡ 0 mod the others
        let f_i_full = promote_univariate(&f_i, ring.nvars(), var);
        acc = acc.add(&a.theta_free().mul(&RatFn::from_poly(f_i_full)));
    }
    Ok(ring.from_even(acc))
}

fn poly_pow(p: &MPoly, k: u32) -> MPoly {
    let mut acc = MPoly::one(p.field, p.nvars);
    for _ in 0..k {
        acc = acc.mul(p);
    }
    acc
}

/// Rewrite a univariate polynomial as an `nvars`-variable one living in
/// position `var`.
fn promote_univariate(p: &MPoly, nvars: usize, var: usize) -> MPoly {
    let mut out = MPoly::zero(p.field, nvars);
    for (e, c) in &p.terms {
        let mut exps = vec![0i32; nvars];
        exps[var] = e[0];
        out = out.add(&MPoly::monomial(p.field, nvars, exps, c.clone()));
    }
    out
}

/// Extended euclidean algorithm for univariate polynomials:
/// `(g, s, t)` with `s·a + t·b = g` and `g` monic (or zero).
fn ext_gcd_uni(a: &MPoly, b: &MPoly) -> Result<(MPoly, MPoly, MPoly)> {
    let f = a.field;
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (MPoly::one(f, 1), MPoly::zero(f, 1));
    let (mut t0, mut t1) = (MPoly::zero(f, 1), MPoly::one(f, 1));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1)?;
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    if let Some(lc) = r0.leading_coeff() {
        let inv = MPoly::constant(f, 1, lc.inv()?);
        Ok((r0.mul(&inv), s0.mul(&inv), t0.mul(&inv)))
    } else {
        Ok((r0, s0, t0))
    }
}

// ---------------------------------------------------------------------------
// Ramification: e, f, n
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RamificationData {
    /// cosets of the embedded value group inside the extension's group
    pub e: u64,
    /// degree of the residue extension
    pub f: u64,
    /// generators of the embedded value group inside the big one
    pub value_lattice: Vec<Vec<i64>>,
    /// cyclic invariants (> 1) of the quotient of the groups
    pub torsion: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct RamificationTable {
    pub rows: Vec<RamificationData>,
    /// degree of the even fraction-field extension
    pub n: u64,
    pub sum_ef: u64,
    pub holds: bool,
    pub equality: bool,
    /// convention notice carried with every table
    pub note: &'static str,
}

const INDEX_NOTE: &str = "e counts the cosets of the embedded value group inside the \
extension's group; classical sources sometimes write this index with the two groups \
in the opposite order";

/// Residue-size classification for the rule families whose residue rings
/// we can compare.
enum ResidueKind {
    /// the residue is the whole even fraction field (trivial valuation)
    FullField,
    /// the residue is an algebraic extension of the ground field of the
    /// stated degree
    Algebraic(u64),
}

fn residue_kind(rule: &Rule) -> Result<ResidueKind> {
    match rule {
        Rule::Trivial => Ok(ResidueKind::FullField),
        Rule::Place {
            var,
            datum: PlaceDatum::FiniteIrreducible(q),
        } => {
            let d = q
                .to_univariate(*var)
                .and_then(|u| u.deg())
                .unwrap_or(1) as u64;
            Ok(ResidueKind::Algebraic(d))
        }
        Rule::Place {
            datum: PlaceDatum::AtInfinity,
            ..
        } => Ok(ResidueKind::Algebraic(1)),
        Rule::ModPOrd { .. } => Ok(ResidueKind::Algebraic(1)),
        Rule::Mapped { inner, .. } => residue_kind(inner),
        _ => Err(Error::Unsupported(
            "the residue degree of this rule family is not computed".into(),
        )),
    }
}

/// Degree of the even fraction-field extension cut out by the embedding:
/// for a single-variable image `g = p/q` in lowest terms this is
/// `max(deg p, deg q)`; renamings give 1; a constant image (or a plain
/// enlargement by a fresh variable) has no finite degree.
fn even_function_degree(ext: &RingExtension) -> Result<u64> {
    let s = ext.small.nvars();
    let b = ext.big.nvars();
    match (s, b) {
        (0, 0) => Ok(1),
        (0, _) => Err(Error::InfiniteRank {
            bound: RANK_DEGREE_BOUND,
        }),
        (1, 1) => {
            let g = &ext.embedding.images[0];
            let d = g
                .num
                .deg_in(0)
                .unwrap_or(0)
                .max(g.den.deg_in(0).unwrap_or(0));
            if d <= 0 {
                return Err(Error::InfiniteRank {
                    bound: RANK_DEGREE_BOUND,
                });
            }
            Ok(d as u64)
        }
        _ => {
            // Only variable-for-variable renamings are recognized in
            // several variables.
            let mut seen = vec![false; b];
            for img in &ext.embedding.images {
                let Some(p) = img.as_poly() else {
                    return Err(Error::Unsupported(
                        "several-variable images must be a renaming".into(),
                    ));
                };
                let single = p.terms.len() == 1
                    && p.terms.iter().next().is_some_and(|(e, c)| {
                        c.is_one() && e.iter().filter(|&&x| x == 1).count() == 1
                            && e.iter().all(|&x| x == 0 || x == 1)
                    });
                if !single {
                    return Err(Error::Unsupported(
                        "several-variable images must be a renaming".into(),
                    ));
                }
                let idx = p
                    .terms
                    .keys()
                    .next()
                    .unwrap()
                    .iter()
                    .position(|&x| x == 1)
                    .unwrap();
                if seen[idx] {
                    return Err(Error::Unsupported(
                        "several-variable images must be a renaming".into(),
                    ));
                }
                seen[idx] = true;
            }
            if seen.iter().all(|&x| x) && s == b {
                Ok(1)
            } else {
                Err(Error::InfiniteRank {
                    bound: RANK_DEGREE_BOUND,
                })
            }
        }
    }
}

/// The ramification numbers of a family of extensions of `v`: per
/// extension the group index `e` and residue degree `f`, plus the total
/// degree `n`, with `Σ eᵢfᵢ ≤ n` asserted and equality flagged.
pub fn ramification_table(
    ext: &RingExtension,
    v: &Valuation,
    extensions: &[Valuation],
    rng: &mut ChaCha8Rng,
) -> Result<RamificationTable> {
    let n = even_function_degree(ext)?;
    let v_res = residue_kind(&v.rule)?;
    let mut rows = Vec::new();
    for (i, w) in extensions.iter().enumerate() {
        let verdict = check_extension(ext, v, w, rng)?;
        let Some(h) = verdict.iso_witness else {
            return Err(Error::Unsupported(format!(
                "entry #{i} does not extend the base valuation ({})",
                verdict
                    .checks
                    .witness
                    .unwrap_or_else(|| "no witness recorded".into())
            )));
        };
        let t = w.group.rank;
        let (e, torsion) = if t == 0 {
            (1, Vec::new())
        } else {
            let sup: Vec<Vec<i64>> = (0..t)
                .map(|r| {
                    let mut u = vec![0i64; t];
                    u[r] = 1;
                    u
                })
                .collect();
            let image = h.image_lattice();
            let Some(e) = lattice_index(t, &sup, &image)? else {
                return Err(Error::InfiniteRank {
                    bound: RANK_DEGREE_BOUND,
                });
            };
            let mut m = vec![vec![0i64; image.len()]; t];
            for (c, g) in image.iter().enumerate() {
                for (r, &x) in g.iter().enumerate() {
                    m[r][c] = x;
                }
            }
            let torsion: Vec<u64> = smith_invariants(&m).into_iter().filter(|&d| d > 1).collect();
            (e, torsion)
        };
        let f = match (&v_res, residue_kind(&w.rule)?) {
            (ResidueKind::Algebraic(dv), ResidueKind::Algebraic(dw)) => {
                if dw % dv != 0 {
                    return Err(Error::Unsupported(format!(
                        "residue degree {dw} is not a multiple of {dv}"
                    )));
                }
                dw / dv
            }
            (ResidueKind::FullField, ResidueKind::FullField) => n,
            _ => {
                return Err(Error::Unsupported(
                    "the residue rings of the two valuations are not comparable".into(),
                ))
            }
        };
        rows.push(RamificationData {
            e,
            f,
            value_lattice: h.image_lattice(),
            torsion,
        });
    }
    let sum_ef: u64 = rows.iter().map(|r| r.e * r.f).sum();
    Ok(RamificationTable {
        rows,
        n,
        sum_ef,
        holds: sum_ef <= n,
        equality: sum_ef == n,
        note: INDEX_NOTE,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordgroup::GroupDesc;
    use crate::parser::{parse_even_poly, parse_expr, parse_ring};
    use crate::sample::rng_from_seed;

    fn sqrt_fixture() -> (RingExtension, Valuation, Valuation) {
        let small = parse_ring("Q(x)[t1]").unwrap();
        let big = parse_ring("Q(t)[t1]").unwrap();
        let image = RatFn::var_pow(big.field(), 1, 0, 2); // x ↦ t²
        let ext = RingExtension::new(small.clone(), big.clone(), vec![image]).unwrap();
        let v = Valuation::place(
            small.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("x", &small).unwrap()),
        )
        .unwrap();
        let w = Valuation::place(
            big.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("t", &big).unwrap()),
        )
        .unwrap();
        (ext, v, w)
    }

    #[test]
    fn square_root_embedding_extends_the_base_order() {
        let mut rng = rng_from_seed(11);
        let (ext, v, w) = sqrt_fixture();

        let verdict = check_extension(&ext, &v, &w, &mut rng).unwrap();
        assert!(verdict.extends, "witness: {:?}", verdict.checks.witness);
        let h = verdict.iso_witness.unwrap();
        assert_eq!(h.image_lattice(), vec![vec![2]], "the value group doubles");

        // A different center does not restrict to the x-order.
        let v1 = Valuation::place(
            ext.small.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("x - 1", &ext.small).unwrap()),
        )
        .unwrap();
        let refused = check_extension(&ext, &v1, &w, &mut rng).unwrap();
        assert!(!refused.extends);
        assert!(!refused.checks.pair_compatible);
        assert!(refused.checks.witness.is_some());
        assert!(refused.iso_witness.is_none());

        // Trivial over trivial: the zero group embeds by the empty map.
        let tv = Valuation::trivial(ext.small.clone());
        let tw = Valuation::trivial(ext.big.clone());
        let degenerate = check_extension(&ext, &tv, &tw, &mut rng).unwrap();
        assert!(degenerate.extends);
        let h0 = degenerate.iso_witness.unwrap();
        assert!(h0.image_lattice().is_empty(), "the embedded group is 0");
    }

    #[test]
    fn embeddings_validate_their_data() {
        let small = parse_ring("Q(x)[t1]").unwrap();
        let big = parse_ring("Q(t)[t1]").unwrap();
        // wrong arity
        assert!(matches!(
            RingExtension::new(small.clone(), big.clone(), vec![]),
            Err(Error::RingMismatch(_))
        ));
        // zero image
        assert!(matches!(
            RingExtension::new(
                small.clone(),
                big.clone(),
                vec![RatFn::zero(big.field(), 1)]
            ),
            Err(Error::RingMismatch(_))
        ));
        // more odd generators than the host
        let fat = parse_ring("Q(x)[t1..t3]").unwrap();
        assert!(matches!(
            RingExtension::new(fat, big.clone(), vec![RatFn::var(big.field(), 1, 0)]),
            Err(Error::RingMismatch(_))
        ));
        // a Laurent host refuses fractional images
        let zl = parse_ring("Z[x,x^-1][t1]").unwrap();
        let inv = RatFn::var_pow(zl.field(), 1, 0, 1)
            .add(&RatFn::one(zl.field(), 1))
            .inv()
            .unwrap();
        assert!(matches!(
            RingExtension::new(parse_ring("Z[y][t1]").unwrap(), zl, vec![inv]),
            Err(Error::NotInRing(_))
        ));

        // embedding arithmetic: x² + θ goes to t⁴ + θ
        let (ext, _, w) = sqrt_fixture();
        let x = parse_expr("x^2 + t1", &ext.small).unwrap();
        let y = ext.embed(&x).unwrap();
        assert_eq!(y, parse_expr("t^4 + t1", &ext.big).unwrap());
        assert_eq!(w.eval(&y).unwrap(), GValue::finite(GroupDesc::new(1), vec![4]));
    }

    #[test]
    fn support_criterion_detects_collapsing_ideals() {
        let mut rng = rng_from_seed(23);

        // Trivial valuation on the reduction of a split superfield:
        // support {0} stays {0}.
        let plain = parse_ring("Q").unwrap();
        let split = parse_ring("Q[t1]").unwrap();
        let ext0 = RingExtension::new(plain.clone(), split, vec![]).unwrap();
        let v0 = Valuation::trivial(plain);
        assert!(extension_criterion(&ext0, &v0, &mut rng).unwrap());

        // θ-generated support contracts to itself.
        let (ext, v, _) = sqrt_fixture();
        assert!(extension_criterion(&ext, &v, &mut rng).unwrap());

        // A prime that becomes invertible swallows the ring: the
        // contraction strictly exceeds the support, so no extensions.
        let zl = parse_ring("Z[x,x^-1][t1..t3]").unwrap();
        let ql = parse_ring("Q[x,x^-1][t1..t3]").unwrap();
        let ext_bad = RingExtension::inclusion(zl.clone(), ql).unwrap();
        let vm = Valuation::mod_p_ord(zl, 0, 5, false).unwrap();
        assert!(!extension_criterion(&ext_bad, &vm, &mut rng).unwrap());
    }

    #[test]
    fn integral_closedness_holds_on_sampled_relations() {
        let mut rng = rng_from_seed(37);
        let ring = parse_ring("Q(x)[t1]").unwrap();
        let v = Valuation::place(
            ring.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("x", &ring).unwrap()),
        )
        .unwrap();
        let report = integrally_closed_spotcheck(&v, 60, &mut rng).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        // 1/x is probed deterministically and has negative value.
        assert!(report.below_confirmed >= 1);
        // θ and the members land inside.
        assert!(report.inside_confirmed >= 1);

        // The individual examples behind the tallies.
        let inv_x = parse_expr("1/x", &ring).unwrap();
        assert_eq!(
            v.eval(&inv_x).unwrap(),
            GValue::finite(GroupDesc::new(1), vec![-1])
        );
        let theta = ring.theta_elem(0);
        assert!(theta.pow(2).is_zero());
        assert!(v.in_valuation_pair_ring(&theta).unwrap());
        let shifted = parse_expr("x + 1", &ring).unwrap();
        assert!(v.eval(&shifted).unwrap().is_zero());
        assert!(v.in_valuation_pair_ring(&shifted).unwrap());
    }

    #[test]
    fn integral_generators_force_extensions() {
        let mut rng = rng_from_seed(41);
        let (ext, v, w) = sqrt_fixture();

        // t² = x is integral, pairs nest: the verdict comes out positive.
        let verdict = extend_over_integral(&ext, &v, &w, &mut rng).unwrap();
        assert!(verdict.extends);

        // A place at t = 1 restricts to the x−1 order, not to v.
        let w1 = Valuation::place(
            ext.big.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("t - 1", &ext.big).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            extend_over_integral(&ext, &v, &w1, &mut rng),
            Err(Error::NotDominating(_))
        ));

        // u = 1/x is not integral over Q[x].
        let small = parse_ring("Q[x][t1]").unwrap();
        let big = parse_ring("Q(u)[t1]").unwrap();
        let x_to_inv_u = RatFn::var_pow(big.field(), 1, 0, -1);
        let ext_frac = RingExtension::new(small.clone(), big.clone(), vec![x_to_inv_u]).unwrap();
        let tv = Valuation::trivial(small);
        let tw = Valuation::trivial(big);
        assert!(matches!(
            extend_over_integral(&ext_frac, &tv, &tw, &mut rng),
            Err(Error::NotIntegral { bound: 4 })
        ));
    }

    #[test]
    fn the_closure_is_cut_out_by_the_listed_places() {
        let mut rng = rng_from_seed(43);
        let small = parse_ring("Q[x][t1]").unwrap();
        let big = parse_ring("Q(x)[t1]").unwrap();
        let ext = RingExtension::inclusion(small, big.clone()).unwrap();

        let mut places = Vec::new();
        for src in ["x", "x - 1", "x + 1", "x - 2", "x + 2", "x^2 + 1"] {
            places.push(
                Valuation::place(
                    big.clone(),
                    0,
                    PlaceDatum::FiniteIrreducible(parse_even_poly(src, &big).unwrap()),
                )
                .unwrap(),
            );
        }
        // The degree place does not contain Q[x]; the filter must drop it.
        places.push(Valuation::place(big.clone(), 0, PlaceDatum::AtInfinity).unwrap());

        let report = closure_as_intersection(&ext, &places, 40, 4, &mut rng).unwrap();
        assert_eq!(report.places_used, 6);
        assert_eq!(report.places_skipped, 1);
        assert!(report.disagreements.is_empty(), "{:?}", report.disagreements);
        assert!(report.agreements > 0);

        // Specific elements behind the report: x² is integral and inside
        // everything; 1/x escapes the x-place and is not integral; θ is
        // everywhere and nil.
        let x2 = parse_expr("x^2", &big).unwrap();
        assert!(matches!(
            is_integral(&x2, &ext.embedding, 4).unwrap(),
            IntegralityVerdict::Yes { .. }
        ));
        let invx = parse_expr("1/x", &big).unwrap();
        assert!(!places[0].in_valuation_pair_ring(&invx).unwrap());
        assert!(matches!(
            is_integral(&invx, &ext.embedding, 4).unwrap(),
            IntegralityVerdict::NoWithinBound { .. }
        ));

        // An element whose only pole sits at an unlisted place is the
        // honest indeterminate: inside every listed ring, yet no bounded
        // relation can appear.
        let hidden_pole = parse_expr("x/(x + 5)", &big).unwrap();
        for p in &places[..6] {
            assert!(p.in_valuation_pair_ring(&hidden_pole).unwrap());
        }
        assert!(matches!(
            is_integral(&hidden_pole, &ext.embedding, 4).unwrap(),
            IntegralityVerdict::NoWithinBound { .. }
        ));
    }

    #[test]
    fn inverse_partners_exist_or_fail_structurally() {
        let mut rng = rng_from_seed(47);

        // Superfields always pass: the even-part inverse is the partner.
        let field = parse_ring("Q(x)[t1,t2]").unwrap();
        let vs = vec![
            Valuation::place(
                field.clone(),
                0,
                PlaceDatum::FiniteIrreducible(parse_even_poly("x", &field).unwrap()),
            )
            .unwrap(),
            Valuation::place(field.clone(), 0, PlaceDatum::AtInfinity).unwrap(),
        ];
        let verdict = inverse_property(&vs, 3, 10, &mut rng).unwrap();
        assert!(verdict.passed());

        // Two residue orders at different primes on the Laurent ring:
        // partners exist, found by the shifted-monomial pool.
        let zl = parse_ring("Z[x,x^-1][t1..t3]").unwrap();
        let v3 = Valuation::mod_p_ord(zl.clone(), 0, 3, false).unwrap();
        let v5 = Valuation::mod_p_ord(zl.clone(), 0, 5, false).unwrap();
        let verdict = inverse_property(&[v3.clone(), v5], 6, 8, &mut rng).unwrap();
        assert!(verdict.passed(), "{verdict:?}");

        // Order at 0 against order at ∞: any element with both values
        // finite and distinct lower/upper exponents is stuck — a partner
        // would need its lowest exponent above its highest.
        let ord0 = Valuation::monomial_lex(zl.clone(), vec![0]).unwrap();
        let ordinf = Valuation::place(zl.clone(), 0, PlaceDatum::AtInfinity).unwrap();
        let verdict = inverse_property(&[ord0.clone(), ordinf], 3, 8, &mut rng).unwrap();
        assert!(
            matches!(verdict, InverseVerdict::FailWithinBound { .. }),
            "{verdict:?}"
        );

        // Order at 0 against a residue order: 1 + 3/x is stuck (the
        // partner would need order 1 at x and order 0 mod 3 at once).
        let verdict = inverse_property(&[ord0, v3], 4, 8, &mut rng).unwrap();
        assert!(
            matches!(verdict, InverseVerdict::FailWithinBound { .. }),
            "{verdict:?}"
        );
    }

    #[test]
    fn the_pairwise_criterion_matches_the_searches() {
        let mut rng = rng_from_seed(53);
        let zl = parse_ring("Z[x,x^-1][t1..t3]").unwrap();
        let trivial = Valuation::trivial(zl.clone());
        let ord0 = Valuation::monomial_lex(zl.clone(), vec![0]).unwrap();
        let ordinf = Valuation::place(zl.clone(), 0, PlaceDatum::AtInfinity).unwrap();
        let v3 = Valuation::mod_p_ord(zl.clone(), 0, 3, false).unwrap();
        let v5 = Valuation::mod_p_ord(zl.clone(), 0, 5, false).unwrap();

        // 𝔭_trivial = J ⊆ 𝔭_w always; A_w ⊆ R = A_trivial: criterion
        // says yes, and the search passes.
        assert_eq!(
            inverse_pair_criterion(&trivial, &ord0, &mut rng).unwrap(),
            Some(true)
        );
        assert!(inverse_property(&[trivial, ord0.clone()], 3, 8, &mut rng)
            .unwrap()
            .passed());

        // x · Z[x] sits inside the mod-3 positive ideal, so the
        // criterion applies — and rejects: 1 + 3/x is in the mod-3 pair
        // ring but neither in A_ord nor in the support.
        assert_eq!(
            inverse_pair_criterion(&ord0, &v3, &mut rng).unwrap(),
            Some(false)
        );

        // Neither prime ideal of the two residue orders contains the
        // other: the criterion withdraws in both orders, and indeed the
        // pair passes the search anyway.
        assert_eq!(inverse_pair_criterion(&v3, &v5, &mut rng).unwrap(), None);
        assert_eq!(inverse_pair_criterion(&v5, &v3, &mut rng).unwrap(), None);

        // Same for the failing pair of opposite orders.
        assert_eq!(inverse_pair_criterion(&ord0, &ordinf, &mut rng).unwrap(), None);
        assert_eq!(inverse_pair_criterion(&ordinf, &ord0, &mut rng).unwrap(), None);
    }

    #[test]
    fn targets_are_hit_exactly_by_constructed_functions() {
        let ring = parse_ring("Q(x)[t1]").unwrap();
        let g1 = GroupDesc::new(1);
        let at = |src: &str| {
            Valuation::place(
                ring.clone(),
                0,
                PlaceDatum::FiniteIrreducible(parse_even_poly(src, &ring).unwrap()),
            )
            .unwrap()
        };
        let p0 = at("x");
        let p1 = at("x - 1");
        let pinf = Valuation::place(ring.clone(), 0, PlaceDatum::AtInfinity).unwrap();

        // x²/(x−1) hits (2, −1).
        let h = approximate(
            &[p0.clone(), p1.clone()],
            &[
                GValue::finite(g1, vec![2]),
                GValue::finite(g1, vec![-1]),
            ],
        )
        .unwrap();
        assert_eq!(h, parse_expr("x^2/(x - 1)", &ring).unwrap());

        // A single place with target 0 needs only a unit.
        let one = approximate(&[p0.clone()], &[GValue::zero(g1)]).unwrap();
        assert!(one.is_one());
        // Two zero targets likewise.
        let unit = approximate(
            &[p0.clone(), p1.clone()],
            &[GValue::zero(g1), GValue::zero(g1)],
        )
        .unwrap();
        assert!(p0.eval(&unit).unwrap().is_zero());
        assert!(p1.eval(&unit).unwrap().is_zero());

        // Prescribing the degree place costs an extra linear factor.
        let h = approximate(
            &[p0.clone(), pinf.clone()],
            &[GValue::finite(g1, vec![2]), GValue::finite(g1, vec![-5])],
        )
        .unwrap();
        assert!(p0.eval(&h).unwrap() == GValue::finite(g1, vec![2]));
        assert!(pinf.eval(&h).unwrap() == GValue::finite(g1, vec![-5]));
        assert!(p1.eval(&h).unwrap().is_zero() || p1.eval(&h).unwrap().is_positive());

        // Refusals: duplicated places, infinite targets.
        assert!(matches!(
            approximate(
                &[p0.clone(), at("x")],
                &[GValue::zero(g1), GValue::zero(g1)]
            ),
            Err(Error::DependentPlaces(_))
        ));
        assert!(matches!(
            approximate(&[p0.clone()], &[GValue::infinity(g1)]),
            Err(Error::InfiniteTarget)
        ));
    }

    #[test]
    fn congruence_solutions_dominate_their_anchors() {
        let ring = parse_ring("Q(x)[t1]").unwrap();
        let g1 = GroupDesc::new(1);
        let at = |src: &str| {
            Valuation::place(
                ring.clone(),
                0,
                PlaceDatum::FiniteIrreducible(parse_even_poly(src, &ring).unwrap()),
            )
            .unwrap()
        };
        let p0 = at("x");
        let p1 = at("x - 1");

        let a0 = parse_expr("x", &ring).unwrap();
        let a1 = parse_expr("1", &ring).unwrap();
        let xs = strong_approximate(&[p0.clone(), p1.clone()], &[a0.clone(), a1.clone()]).unwrap();
        assert_eq!(p0.eval(&xs).unwrap(), GValue::finite(g1, vec![1]));
        assert_eq!(p1.eval(&xs).unwrap(), GValue::zero(g1));
        let d0 = p0.eval(&xs.sub(&a0)).unwrap();
        assert!(d0.is_infinite() || lex_compare(&d0, &GValue::finite(g1, vec![1])).unwrap() == Ordering::Greater);
        let d1 = p1.eval(&xs.sub(&a1)).unwrap();
        assert!(d1.is_infinite() || lex_compare(&d1, &GValue::zero(g1)).unwrap() == Ordering::Greater);

        // Anchors may carry poles and θ parts.
        let a0 = parse_expr("1/x + t1", &ring).unwrap();
        let a1 = parse_expr("2 + x", &ring).unwrap();
        let xs = strong_approximate(&[p0.clone(), p1.clone()], &[a0.clone(), a1.clone()]).unwrap();
        assert_eq!(p0.eval(&xs).unwrap(), GValue::finite(g1, vec![-1]));
        assert_eq!(p1.eval(&xs).unwrap(), GValue::zero(g1));
        let d0 = p0.eval(&xs.sub(&a0)).unwrap();
        assert!(d0.is_infinite() || lex_compare(&d0, &GValue::finite(g1, vec![-1])).unwrap() == Ordering::Greater);

        // A single place hands back its anchor.
        let back = strong_approximate(&[p0.clone()], &[a1.clone()]).unwrap();
        assert_eq!(back, a1);

        // θ anchors sit in every support.
        assert!(matches!(
            strong_approximate(&[p0.clone(), p1.clone()], &[ring.theta_elem(0), a1]),
            Err(Error::AnchorInSupport)
        ));
    }

    #[test]
    fn ramification_numbers_respect_the_degree_bound() {
        let mut rng = rng_from_seed(59);

        // x = t²: the group index doubles, residues stay rational.
        let (ext, v, w) = sqrt_fixture();
        let table = ramification_table(&ext, &v, &[w], &mut rng).unwrap();
        assert_eq!(table.n, 2);
        assert_eq!(table.rows.len(), 1);
        assert_eq!((table.rows[0].e, table.rows[0].f), (2, 1));
        assert_eq!(table.rows[0].value_lattice, vec![vec![2]]);
        assert_eq!(table.rows[0].torsion, vec![2]);
        assert!(table.holds && table.equality);
        assert!(!table.note.is_empty());

        // x = t² + 1 at the center x = 0: one place upstairs, with a
        // quadratic residue extension and no ramification.
        let small = parse_ring("Q(x)[t1]").unwrap();
        let big = parse_ring("Q(t)[t1]").unwrap();
        let image = RatFn::from_poly(parse_even_poly("t^2 + 1", &big).unwrap());
        let ext2 = RingExtension::new(small.clone(), big.clone(), vec![image]).unwrap();
        let v0 = Valuation::place(
            small.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("x", &small).unwrap()),
        )
        .unwrap();
        let w0 = Valuation::place(
            big.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("t^2 + 1", &big).unwrap()),
        )
        .unwrap();
        let table = ramification_table(&ext2, &v0, &[w0], &mut rng).unwrap();
        assert_eq!(table.n, 2);
        assert_eq!((table.rows[0].e, table.rows[0].f), (1, 2));
        assert!(table.rows[0].torsion.is_empty());
        assert!(table.holds && table.equality);

        // Trivial over trivial on the same superfield: everything is 1.
        let idext = RingExtension::inclusion(small.clone(), small.clone()).unwrap();
        let tv = Valuation::trivial(small.clone());
        let table = ramification_table(&idext, &tv, &[tv.clone()], &mut rng).unwrap();
        assert_eq!((table.rows[0].e, table.rows[0].f, table.n), (1, 1, 1));
        assert!(table.equality);

        // Trivial valuations across x = t²: the residue extension is the
        // whole quadratic function-field extension.
        let tw = Valuation::trivial(ext.big.clone());
        let tv2 = Valuation::trivial(ext.small.clone());
        let table = ramification_table(&ext, &tv2, &[tw], &mut rng).unwrap();
        assert_eq!((table.rows[0].e, table.rows[0].f, table.n), (1, 2, 2));
        assert!(table.equality);

        // A fresh transcendental has no finite degree.
        let ext_fresh =
            RingExtension::new(parse_ring("Q[t1]").unwrap(), big.clone(), vec![]).unwrap();
        assert!(matches!(
            ramification_table(
                &ext_fresh,
                &Valuation::trivial(parse_ring("Q[t1]").unwrap()),
                &[Valuation::trivial(big.clone())],
                &mut rng
            ),
            Err(Error::InfiniteRank { .. })
        ));

        // A non-extension in the list is refused.
        let w1 = Valuation::place(
            ext.big.clone(),
            0,
            PlaceDatum::FiniteIrreducible(parse_even_poly("t - 1", &ext.big).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            ramification_table(&ext, &v, &[w1], &mut rng),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn extensions_compose_with_dominance_quotients() {
        use crate::pairs::{dominates, Dominance};

        let mut rng = rng_from_seed(61);
        let small = parse_ring("Q(x,y)[t1]").unwrap();
        let big = parse_ring("Q(t,y)[t1]").unwrap();
        let images = vec![
            RatFn::var_pow(big.field(), 2, 0, 2), // x ↦ t²
            RatFn::var(big.field(), 2, 1),        // y ↦ y
        ];
        let ext = RingExtension::new(small.clone(), big.clone(), images).unwrap();

        let v = Valuation::monomial_lex(small.clone(), vec![0, 1]).unwrap();
        let u = Valuation::monomial_lex(big.clone(), vec![0, 1]).unwrap();
        let verdict = check_extension(&ext, &v, &u, &mut rng).unwrap();
        assert!(verdict.extends);
        let h = verdict.iso_witness.unwrap();
        assert_eq!(h.image_lattice(), vec![vec![2, 0], vec![0, 1]]);

        // Coarsen both sides by the first coordinate: the quotients keep
        // the extension relation, and the coarse valuation upstairs still
        // dominates the fine one.
        let g2 = GroupDesc::new(2);
        let w = v.mapped(OrderHom::projection_first(g2, 1)).unwrap();
        let t = u.mapped(OrderHom::projection_first(g2, 1)).unwrap();
        assert!(matches!(dominates(&t, &u, &mut rng).unwrap(), Dominance::Yes(_)));
        let coarse = check_extension(&ext, &w, &t, &mut rng).unwrap();
        assert!(coarse.extends);
        assert_eq!(coarse.iso_witness.unwrap().image_lattice(), vec![vec![2]]);

        // The group quotient along h is finite cyclic of order 2,
        // matching the uniqueness bookkeeping for torsion quotients.
        let m = vec![vec![2, 0], vec![0, 1]];
        let inv: Vec<u64> = smith_invariants(&m).into_iter().filter(|&d| d > 1).collect();
        assert_eq!(inv, vec![2]);
    }
}
