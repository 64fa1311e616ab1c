//! Seeded random sampling of ring elements.
//!
//! Property checks sample thousands of elements; everything flows through a
//! ChaCha8 generator seeded either explicitly or from `SVAL_SEED`, so runs
//! are reproducible bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::scalar::{FieldTag, Scalar};
use crate::superalg::{RingDesc, SuperElem, VarKind};

pub const DEFAULT_SEED: u64 = 0x5f3759df;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed from the `SVAL_SEED` environment variable, or the fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var("SVAL_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn sample_scalar(rng: &mut ChaCha8Rng, field: FieldTag, integral: bool) -> Scalar {
    match field {
        FieldTag::Q => {
            let n = rng.gen_range(-9i64..=9);
            if integral {
                Scalar::from_i64(field, n)
            } else {
                let d = rng.gen_range(1i64..=4);
                Scalar::from_ratio(n, d)
            }
        }
        FieldTag::Fp(p) => Scalar::Fp {
            p,
            val: rng.gen_range(0..p),
        },
    }
}

/// A sparse random polynomial: up to `terms` monomials of degree ≤ `deg`
/// per variable.
pub fn sample_poly(
    rng: &mut ChaCha8Rng,
    field: FieldTag,
    nvars: usize,
    deg: i32,
    terms: usize,
    integral: bool,
) -> MPoly {
    let mut out = MPoly::zero(field, nvars);
    for _ in 0..terms {
        let exp: Vec<i32> = (0..nvars).map(|_| rng.gen_range(0..=deg)).collect();
        let c = sample_scalar(rng, field, integral);
        let mut mono = MPoly::constant(field, nvars, c);
        for (i, &e) in exp.iter().enumerate() {
            mono = mono.mul(&MPoly::var_pow(field, nvars, i, e));
        }
        out = out.add(&mono);
    }
    out
}

/// A random element that genuinely lies in the ring the descriptor names:
/// numerators follow the base-ring coefficient discipline, denominators the
/// per-variable kind discipline. Falls back to a plain polynomial if a
/// random candidate strays outside.
pub fn sample_even(rng: &mut ChaCha8Rng, ring: &RingDesc) -> RatFn {
    let field = ring.field();
    let n = ring.nvars();
    let integral = matches!(ring.base, crate::superalg::BaseRing::Z);
    for _ in 0..20 {
        let nterms = rng.gen_range(1..=3);
        let num = sample_poly(rng, field, n, 2, nterms, integral);
        let mut f = RatFn::from_poly(num);
        // Optionally divide by something the ring allows.
        match rng.gen_range(0..3u8) {
            0 => {}
            1 => {
                // Laurent variables admit monomial denominators.
                for (i, v) in ring.even_vars.iter().enumerate() {
                    if v.kind != VarKind::Poly && rng.gen_bool(0.5) {
                        let k = rng.gen_range(1..=2);
                        f = f.mul(&RatFn::var_pow(field, n, i, -k));
                    }
                }
            }
            _ => {
                // Rational variables (or a localized prime's complement)
                // admit polynomial denominators.
                let den = sample_poly(rng, field, n, 2, 2, integral);
                if !den.is_zero() {
                    if let Ok(g) = f.div(&RatFn::from_poly(den)) {
                        f = g;
                    }
                }
            }
        }
        if ring.admits_even(&f) {
            return f;
        }
    }
    RatFn::from_poly(sample_poly(rng, field, n, 2, 2, integral))
}

/// A random superring element (always in-ring): a θ-free part plus a few
/// random θ-words with admissible coefficients.
pub fn sample_elem(rng: &mut ChaCha8Rng, ring: &RingDesc) -> SuperElem {
    let mut out = ring.from_even(sample_even(rng, ring));
    let words = rng.gen_range(0..=ring.odd.min(2));
    for _ in 0..words {
        let mask = rng.gen_range(1..(1u32 << ring.odd));
        let mut word = ring.one_elem();
        for i in 0..ring.odd {
            if mask & (1 << i) != 0 {
                word = word.mul(&ring.theta_elem(i));
            }
        }
        out = out.add(&word.mul_even(&sample_even(rng, ring)));
    }
    out
}

/// A random element with zero reduction (a member of `J_R`), possibly zero.
pub fn sample_nil(rng: &mut ChaCha8Rng, ring: &RingDesc) -> SuperElem {
    let e = sample_elem(rng, ring);
    e.sub(&ring.from_even(e.theta_free()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::BaseRing;

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let ring = RingDesc::superfield(BaseRing::Q, &["x", "y"], 2);
        let a: Vec<SuperElem> = {
            let mut rng = rng_from_seed(7);
            (0..10).map(|_| sample_elem(&mut rng, &ring)).collect()
        };
        let b: Vec<SuperElem> = {
            let mut rng = rng_from_seed(7);
            (0..10).map(|_| sample_elem(&mut rng, &ring)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn samples_respect_ring_membership() {
        for ring in [
            RingDesc::laurent_ring(BaseRing::Z, &["x"], 2),
            RingDesc::poly_ring(BaseRing::Q, &["x"], 1),
            RingDesc::superfield(BaseRing::Fp(5), &["x"], 2),
        ] {
            let mut rng = rng_from_seed(11);
            for _ in 0..200 {
                let e = sample_elem(&mut rng, &ring);
                assert!(e.in_ring(), "sampled {} outside {}", e, ring);
            }
        }
    }

    #[test]
    fn nil_samples_have_zero_reduction() {
        let ring = RingDesc::superfield(BaseRing::Q, &["x"], 3);
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            assert!(sample_nil(&mut rng, &ring).theta_free().is_zero());
        }
    }
}
