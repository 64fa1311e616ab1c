//! Rational functions `num/den` over ℚ or 𝔽ₚ, kept in reduced form.
//!
//! Invariants: `den` is nonzero, `gcd(num, den) = 1`, and the lex-greatest
//! term of `den` has coefficient 1.  Laurent elements such as `x⁻³` are
//! represented with a monomial denominator, so "is this a Laurent polynomial
//! in x" is the question "is the denominator a power of x".

use std::collections::BTreeMap;

use crate::poly::MPoly;
use crate::scalar::{FieldTag, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatFn {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFn {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut out = RatFn { num, den };
        out.reduce();
        Ok(out)
    }

    pub fn from_poly(num: MPoly) -> Self {
        let den = MPoly::one(num.field, num.nvars);
        RatFn { num, den }
    }

    pub fn zero(field: FieldTag, nvars: usize) -> Self {
        RatFn::from_poly(MPoly::zero(field, nvars))
    }

    pub fn one(field: FieldTag, nvars: usize) -> Self {
        RatFn::from_poly(MPoly::one(field, nvars))
    }

    pub fn from_int(field: FieldTag, nvars: usize, n: i64) -> Self {
        RatFn::from_poly(MPoly::from_int(field, nvars, n))
    }

    pub fn constant(field: FieldTag, nvars: usize, c: Scalar) -> Self {
        RatFn::from_poly(MPoly::constant(field, nvars, c))
    }

    pub fn var(field: FieldTag, nvars: usize, idx: usize) -> Self {
        RatFn::from_poly(MPoly::var(field, nvars, idx))
    }

    /// `x_idx^e`, negative exponents allowed.
    pub fn var_pow(field: FieldTag, nvars: usize, idx: usize, e: i32) -> Self {
        if e >= 0 {
            RatFn::from_poly(MPoly::var_pow(field, nvars, idx, e))
        } else {
            RatFn {
                num: MPoly::one(field, nvars),
                den: MPoly::var_pow(field, nvars, idx, -e),
            }
        }
    }

    pub fn field(&self) -> FieldTag {
        self.num.field
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = MPoly::one(self.den.field, self.den.nvars);
            return;
        }
        if !self.den.is_one() {
            let g = MPoly::gcd(&self.num, &self.den);
            if !g.is_one() {
                self.num = self.num.exact_div(&g).expect("gcd divides");
                self.den = self.den.exact_div(&g).expect("gcd divides");
            }
            let lc = self.den.leading_term_lex().unwrap().1.clone();
            if !lc.is_one() {
                let inv = lc.inv().expect("nonzero leading coefficient");
                self.num = self.num.mul_scalar(&inv);
                self.den = self.den.mul_scalar(&inv);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// `Some(num)` when the denominator is 1.
    pub fn as_poly(&self) -> Option<&MPoly> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        self.as_poly().and_then(|p| p.constant_value())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den.is_one() && other.den.is_one() {
            return RatFn::from_poly(self.num.add(&other.num));
        }
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFn::new(num, den).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Self {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.den.is_one() && other.den.is_one() {
            return RatFn::from_poly(self.num.mul(&other.num));
        }
        if self.is_zero() || other.is_zero() {
            return RatFn::zero(self.field(), self.nvars());
        }
        // cross-cancel first: reduced inputs make the result reduced
        let g1 = MPoly::gcd(&self.num, &other.den);
        let g2 = MPoly::gcd(&other.num, &self.den);
        let n1 = self.num.exact_div(&g1).expect("gcd divides");
        let d2 = other.den.exact_div(&g1).expect("gcd divides");
        let n2 = other.num.exact_div(&g2).expect("gcd divides");
        let d1 = self.den.exact_div(&g2).expect("gcd divides");
        let mut out = RatFn {
            num: n1.mul(&n2),
            den: d1.mul(&d2),
        };
        let lc = out.den.leading_term_lex().unwrap().1.clone();
        if !lc.is_one() {
            let inv = lc.inv().expect("nonzero leading coefficient");
            out.num = out.num.mul_scalar(&inv);
            out.den = out.den.mul_scalar(&inv);
        }
        out
    }

    pub fn mul_scalar(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return RatFn::zero(self.field(), self.nvars());
        }
        RatFn {
            num: self.num.mul_scalar(s),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = RatFn::one(self.field(), self.nvars());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Order of vanishing along `var = 0`: min exponent of `var` in the
    /// numerator minus the same for the denominator.  `None` for 0.
    pub fn ord_in(&self, var: usize) -> Option<i64> {
        let n = self.num.min_exp_in(var)?;
        let d = self.den.min_exp_in(var).unwrap();
        Some(n as i64 - d as i64)
    }

    /// Degree in `var` of the function (deg num − deg den).  `None` for 0.
    pub fn deg_in(&self, var: usize) -> Option<i64> {
        let n = self.num.deg_in(var)?;
        let d = self.den.deg_in(var).unwrap();
        Some(n as i64 - d as i64)
    }

    /// If the denominator is `var^k` (k ≥ 0), return `k`; this is what it
    /// means for the element to be a Laurent polynomial in `var`.
    pub fn monomial_den_in(&self, var: usize) -> Option<i32> {
        if self.den.is_one() {
            return Some(0);
        }
        if !self.den.is_monomial() {
            return None;
        }
        let (e, c) = self.den.leading_term_lex().unwrap();
        if !c.is_one() {
            return None; // cannot happen for a normalized monomial, defensive
        }
        for (i, &ei) in e.iter().enumerate() {
            if i != var && ei != 0 {
                return None;
            }
        }
        Some(e[var])
    }

    /// Coefficients of a univariate Laurent polynomial in `var`, keyed by
    /// (possibly negative) exponent.  `None` when the element is not a
    /// Laurent polynomial in `var` or involves other variables.
    pub fn laurent_coeffs(&self, var: usize) -> Option<BTreeMap<i32, Scalar>> {
        let k = self.monomial_den_in(var)?;
        let mut out = BTreeMap::new();
        for (e, c) in &self.num.terms {
            for (i, &ei) in e.iter().enumerate() {
                if i != var && ei != 0 {
                    return None;
                }
            }
            out.insert(e[var] - k, c.clone());
        }
        Some(out)
    }

    /// Reduce all coefficients mod p (the denominator must stay nonzero).
    pub fn reduce_mod(&self, p: u64) -> Result<Self> {
        let num = self.num.reduce_mod(p)?;
        let den = self.den.reduce_mod(p)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFn::new(num, den)
    }

    /// Substitute rational functions for the variables (all images must live
    /// in a common ambient ring).
    pub fn subst(&self, images: &[RatFn]) -> Result<Self> {
        let num = eval_poly_at_ratfns(&self.num, images);
        let den = eval_poly_at_ratfns(&self.den, images);
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        num.div(&den)
    }

    /// Evaluate at a scalar point; `None` when the denominator vanishes.
    pub fn eval_all(&self, vals: &[Scalar]) -> Option<Scalar> {
        let d = self.den.eval_all(vals);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_all(vals).div(&d).unwrap())
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        if self.den.is_one() {
            return self.num.display_with(names);
        }
        let n = if self.num.terms.len() > 1 {
            format!("({})", self.num.display_with(names))
        } else {
            self.num.display_with(names)
        };
        // A bare denominator must reparse as one tight factor — a power of a
        // single variable. `1/x*y` would rebind as `(1/x)*y`.
        let single_power = self.den.terms.len() == 1
            && self
                .den
                .terms
                .keys()
                .next()
                .is_some_and(|e| e.iter().filter(|&&x| x != 0).count() <= 1);
        let d = if single_power {
            self.den.display_with(names)
        } else {
            format!("({})", self.den.display_with(names))
        };
        format!("{n}/{d}")
    }
}

impl std::fmt::Display for RatFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = (0..self.nvars()).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        write!(f, "{}", self.display_with(&refs))
    }
}

/// Evaluate a polynomial at rational-function arguments.
pub fn eval_poly_at_ratfns(p: &MPoly, images: &[RatFn]) -> RatFn {
    assert_eq!(images.len(), p.nvars);
    let (field, nvars) = if images.is_empty() {
        (p.field, 0)
    } else {
        (images[0].field(), images[0].nvars())
    };
    let mut acc = RatFn::zero(field, nvars);
    for (e, c) in &p.terms {
        let mut term = RatFn::constant(field, nvars, coerce_scalar(c, field));
        for (i, &ei) in e.iter().enumerate() {
            if ei > 0 {
                term = term.mul(&images[i].pow(ei as i64).unwrap());
            }
        }
        acc = acc.add(&term);
    }
    acc
}

fn coerce_scalar(c: &Scalar, field: FieldTag) -> Scalar {
    assert_eq!(c.field(), field, "scalar field mismatch in substitution");
    c.clone()
}

/// `p(φ)` for univariate `p` by Horner's rule.
pub fn compose_poly_ratfn(p: &MPoly, phi: &RatFn) -> RatFn {
    assert_eq!(p.nvars, 1);
    let field = phi.field();
    let nvars = phi.nvars();
    let mut acc = RatFn::zero(field, nvars);
    for c in p.to_dense().iter().rev() {
        acc = acc
            .mul(phi)
            .add(&RatFn::constant(field, nvars, c.clone()));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldTag {
        FieldTag::Q
    }

    fn xpoly(coeffs: &[i64]) -> MPoly {
        MPoly::from_coeffs_i64(FieldTag::Q, coeffs)
    }

    #[test]
    fn quotients_reduce() {
        // (x² - 1)/(x - 1) = x + 1
        let f = RatFn::new(xpoly(&[-1, 0, 1]), xpoly(&[-1, 1])).unwrap();
        assert_eq!(f, RatFn::from_poly(xpoly(&[1, 1])));
        // denominators are normalized to lead coefficient 1
        let g = RatFn::new(xpoly(&[1]), xpoly(&[0, 2])).unwrap();
        assert_eq!(g.den, xpoly(&[0, 1]));
        assert_eq!(g.num, xpoly(&[1]).mul_scalar(&Scalar::from_ratio(1, 2)));
    }

    #[test]
    fn sum_over_distinct_denominators() {
        // 1/x + 1/y = (x + y)/(x·y)
        let x = RatFn::var_pow(q(), 2, 0, -1);
        let y = RatFn::var_pow(q(), 2, 1, -1);
        let s = x.add(&y);
        let xy = MPoly::var(q(), 2, 0).mul(&MPoly::var(q(), 2, 1));
        let xpy = MPoly::var(q(), 2, 0).add(&MPoly::var(q(), 2, 1));
        assert_eq!(s, RatFn::new(xpy, xy).unwrap());
    }

    #[test]
    fn negative_powers() {
        let f = RatFn::new(xpoly(&[0, 1]), xpoly(&[1, 1])).unwrap(); // x/(x+1)
        let g = f.pow(-2).unwrap(); // (x+1)²/x²
        assert_eq!(g, RatFn::new(xpoly(&[1, 2, 1]), xpoly(&[0, 0, 1])).unwrap());
    }

    #[test]
    fn orders_and_degrees() {
        // (x³ + 2x)/x² has ord 1 - 2 = -1 and degree 3 - 2 = 1
        let f = RatFn::new(xpoly(&[0, 2, 0, 1]), xpoly(&[0, 0, 1])).unwrap();
        assert_eq!(f.ord_in(0), Some(-1));
        assert_eq!(f.deg_in(0), Some(1));
        let coeffs = f.laurent_coeffs(0).unwrap();
        assert_eq!(
            coeffs.into_iter().collect::<Vec<_>>(),
            vec![
                (-1, Scalar::from_i64(q(), 2)),
                (1, Scalar::from_i64(q(), 1))
            ]
        );
    }

    #[test]
    fn laurent_detection_rejects_true_fractions() {
        let f = RatFn::new(xpoly(&[1]), xpoly(&[1, 1])).unwrap(); // 1/(x+1)
        assert_eq!(f.monomial_den_in(0), None);
        assert_eq!(f.laurent_coeffs(0), None);
    }

    #[test]
    fn composition_with_a_quadratic() {
        // p = t² - 2 at φ = (x + 1)/x gives (x² + 2x + 1 - 2x²)/x²
        let p = xpoly(&[-2, 0, 1]);
        let phi = RatFn::new(xpoly(&[1, 1]), xpoly(&[0, 1])).unwrap();
        let got = compose_poly_ratfn(&p, &phi);
        assert_eq!(
            got,
            RatFn::new(xpoly(&[1, 2, -1]), xpoly(&[0, 0, 1])).unwrap()
        );
    }

    #[test]
    fn substitution_into_two_variables() {
        // f(x, y) = x + y² at x ↦ 1/t, y ↦ t: (1 + t³)/t
        let f = MPoly::var(q(), 2, 0).add(&MPoly::var_pow(q(), 2, 1, 2));
        let rf = RatFn::from_poly(f);
        let t_inv = RatFn::var_pow(q(), 1, 0, -1);
        let t = RatFn::var(q(), 1, 0);
        let got = rf.subst(&[t_inv, t]).unwrap();
        assert_eq!(got, RatFn::new(xpoly(&[1, 0, 0, 1]), xpoly(&[0, 1])).unwrap());
    }

    #[test]
    fn evaluation_avoids_poles() {
        let f = RatFn::new(xpoly(&[1]), xpoly(&[0, 1])).unwrap(); // 1/x
        assert_eq!(f.eval_all(&[Scalar::from_i64(q(), 0)]), None);
        assert_eq!(
            f.eval_all(&[Scalar::from_i64(q(), 4)]),
            Some(Scalar::from_ratio(1, 4))
        );
    }

    #[test]
    fn display() {
        let f = RatFn::new(xpoly(&[1, 1]), xpoly(&[0, 0, 1])).unwrap();
        assert_eq!(f.display_with(&["x"]), "(x + 1)/x^2");
    }
}
