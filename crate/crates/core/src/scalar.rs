//! Ground-field scalars: exact rationals and prime fields 𝔽ₚ.
//!
//! Every polynomial coefficient in the crate is a [`Scalar`].  The two
//! variants never mix: operations on scalars from different fields panic,
//! since the public constructors validate field agreement up front.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::{Error, Result};

/// Identifies the coefficient field of a polynomial or rational function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldTag {
    /// The rationals ℚ (also used for arithmetic over ℤ; integrality is a
    /// membership condition, not a different arithmetic).
    Q,
    /// The prime field 𝔽ₚ.
    Fp(u64),
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Q => write!(f, "Q"),
            FieldTag::Fp(p) => write!(f, "F{p}"),
        }
    }
}

/// An exact scalar in ℚ or 𝔽ₚ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, val: u64 },
}

impl Scalar {
    pub fn zero(field: FieldTag) -> Self {
        match field {
            FieldTag::Q => Scalar::Q(BigRational::zero()),
            FieldTag::Fp(p) => Scalar::Fp { p, val: 0 },
        }
    }

    pub fn one(field: FieldTag) -> Self {
        match field {
            FieldTag::Q => Scalar::Q(BigRational::one()),
            FieldTag::Fp(p) => Scalar::Fp { p, val: 1 % p },
        }
    }

    pub fn from_i64(field: FieldTag, n: i64) -> Self {
        match field {
            FieldTag::Q => Scalar::Q(BigRational::from(BigInt::from(n))),
            FieldTag::Fp(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, val: r }
            }
        }
    }

    /// Exact rational `num/den` in ℚ.  Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn field(&self) -> FieldTag {
        match self {
            Scalar::Q(_) => FieldTag::Q,
            Scalar::Fp { p, .. } => FieldTag::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_zero(),
            Scalar::Fp { val, .. } => *val == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_one(),
            Scalar::Fp { p, val } => *val == 1 % p,
        }
    }

    /// True for rationals that are in fact integers (always true in 𝔽ₚ).
    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_integer(),
            Scalar::Fp { .. } => true,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, val: a }, Scalar::Fp { p: q, val: b }) => {
                assert_eq!(p, q, "scalar field mismatch");
                Scalar::Fp {
                    p: *p,
                    val: ((*a as u128 + *b as u128) % *p as u128) as u64,
                }
            }
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, val } => Scalar::Fp {
                p: *p,
                val: if *val == 0 { 0 } else { p - val },
            },
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, val: a }, Scalar::Fp { p: q, val: b }) => {
                assert_eq!(p, q, "scalar field mismatch");
                Scalar::Fp {
                    p: *p,
                    val: ((*a as u128 * *b as u128) % *p as u128) as u64,
                }
            }
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { p, val } => Scalar::Fp {
                p: *p,
                val: fp_pow(*val, p - 2, *p),
            },
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// `self^k` for integer `k` (negative powers require `self != 0`).
    pub fn pow(&self, k: i64) -> Result<Scalar> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = Scalar::one(self.field());
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// The underlying rational, for ℚ scalars only.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Q(q) => Some(q),
            Scalar::Fp { .. } => None,
        }
    }

    /// Reduce a rational scalar mod a prime, failing when p divides the
    /// denominator.  𝔽ₚ scalars pass through unchanged when p matches.
    pub fn reduce_mod(&self, p: u64) -> Result<Scalar> {
        match self {
            Scalar::Q(q) => {
                let pb = BigInt::from(p);
                let den = q.denom();
                if (den % &pb).is_zero() {
                    return Err(Error::DivisionByZero);
                }
                let n = big_mod(q.numer(), p);
                let d = big_mod(den, p);
                let dinv = fp_pow(d, p - 2, p);
                Ok(Scalar::Fp {
                    p,
                    val: ((n as u128 * dinv as u128) % p as u128) as u64,
                })
            }
            Scalar::Fp { p: q, .. } => {
                if *q == p {
                    Ok(self.clone())
                } else {
                    Err(Error::Unsupported(format!(
                        "cannot reduce an F{q} scalar mod {p}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Fp { val, .. } => write!(f, "{val}"),
        }
    }
}

/// The p-adic order of a nonzero rational: the exponent of `p` in the
/// numerator minus the exponent in the denominator.
pub fn padic_val(s: &Scalar, p: u64) -> i64 {
    let Scalar::Q(q) = s else {
        panic!("p-adic order is defined for rational scalars");
    };
    assert!(!q.is_zero(), "p-adic order of zero");
    let pb = BigInt::from(p);
    let count = |n: &BigInt| -> i64 {
        let mut n = n.clone();
        let mut k = 0;
        while !n.is_zero() && (&n % &pb).is_zero() {
            n /= &pb;
            k += 1;
        }
        k
    };
    count(q.numer()) - count(q.denom())
}

/// `base^exp mod p` by square-and-multiply.
pub fn fp_pow(base: u64, exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = (base % p) as u128;
    let mut e = exp;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Canonical representative of a big integer mod p, in `0..p`.
pub fn big_mod(n: &BigInt, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    let pb = BigInt::from(p);
    let mut r = n % &pb;
    if r.is_negative() {
        r += &pb;
    }
    r.to_u64().expect("residue fits in u64")
}
