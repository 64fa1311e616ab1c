//! Sparse multivariate polynomials with exact coefficients.
//!
//! Exponent vectors are stored in a `BTreeMap` keyed by the exponent tuple;
//! the derived ordering on `Vec<i32>` is exactly the lexicographic order on
//! monomials, so the first key is the lex-minimal monomial and the last key
//! the lex-maximal one.  Exponents are always ≥ 0 here — Laurent and rational
//! elements are quotients of these (see [`crate::ratfn`]).
//!
//! Univariate polynomials get the full toolbox needed elsewhere: euclidean
//! division, (extended) gcd, rational roots, factorization over ℚ and 𝔽ₚ,
//! irreducibility certificates, and a polynomial Chinese remainder routine.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::scalar::{FieldTag, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MPoly {
    pub field: FieldTag,
    pub nvars: usize,
    /// exponent vector (len == nvars, entries ≥ 0) → nonzero coefficient
    pub terms: BTreeMap<Vec<i32>, Scalar>,
}

impl MPoly {
    pub fn zero(field: FieldTag, nvars: usize) -> Self {
        MPoly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: FieldTag, nvars: usize, c: Scalar) -> Self {
        assert_eq!(c.field(), field, "scalar field mismatch");
        let mut p = MPoly::zero(field, nvars);
        p.insert(vec![0; nvars], c);
        p
    }

    pub fn from_int(field: FieldTag, nvars: usize, n: i64) -> Self {
        MPoly::constant(field, nvars, Scalar::from_i64(field, n))
    }

    pub fn one(field: FieldTag, nvars: usize) -> Self {
        MPoly::from_int(field, nvars, 1)
    }

    pub fn var(field: FieldTag, nvars: usize, idx: usize) -> Self {
        MPoly::var_pow(field, nvars, idx, 1)
    }

    pub fn var_pow(field: FieldTag, nvars: usize, idx: usize, e: i32) -> Self {
        assert!(idx < nvars, "variable index out of range");
        assert!(e >= 0, "negative exponent in a polynomial");
        let mut exps = vec![0; nvars];
        exps[idx] = e;
        MPoly::monomial(field, nvars, exps, Scalar::one(field))
    }

    pub fn monomial(field: FieldTag, nvars: usize, exps: Vec<i32>, c: Scalar) -> Self {
        assert_eq!(exps.len(), nvars);
        assert!(exps.iter().all(|&e| e >= 0), "negative exponent");
        let mut p = MPoly::zero(field, nvars);
        p.insert(exps, c);
        p
    }

    /// Add `c · x^exps` into the polynomial, dropping the term if it cancels.
    fn insert(&mut self, exps: Vec<i32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(old) => {
                let sum = old.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().map_or(false, |c| c.is_one())
    }

    /// `Some(c)` iff the polynomial is the constant `c` (including zero).
    pub fn constant_value(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero(self.field));
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    fn assert_compat(&self, other: &Self) {
        assert_eq!(self.field, other.field, "coefficient field mismatch");
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compat(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = MPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_compat(other);
        let mut out = MPoly::zero(self.field, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca.mul(cb));
            }
        }
        out
    }

    pub fn mul_scalar(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return MPoly::zero(self.field, self.nvars);
        }
        let mut out = MPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.mul(s));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = MPoly::one(self.field, self.nvars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Highest exponent of `var` appearing, or `None` for the zero polynomial.
    pub fn deg_in(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn min_exp_in(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).min()
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] != 0)
    }

    /// Repack as a one-variable polynomial in `var`, if no other variable
    /// appears.
    pub fn to_univariate(&self, var: usize) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, &x)| i != var && x != 0) {
                return None;
            }
            terms.insert(vec![e[var]], c.clone());
        }
        Some(MPoly {
            field: self.field,
            nvars: 1,
            terms,
        })
    }

    pub fn total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Lexicographic minimum, over all monomials, of the exponent tuple
    /// projected onto `vars` (in the given order).
    pub fn lex_min_exponent(&self, vars: &[usize]) -> Option<Vec<i64>> {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v] as i64).collect::<Vec<i64>>())
            .min()
    }

    /// The coefficient of `var^k`, as a polynomial with `var` eliminated
    /// (exponent forced to zero, same variable count).
    pub fn coeff_of_power(&self, var: usize, k: i32) -> Self {
        let mut out = MPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            if e[var] == k {
                let mut e2 = e.clone();
                e2[var] = 0;
                out.insert(e2, c.clone());
            }
        }
        out
    }

    /// Substitute a scalar for one variable.
    pub fn eval_var(&self, var: usize, val: &Scalar) -> Self {
        assert_eq!(val.field(), self.field);
        let mut out = MPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] = 0;
            let pw = val.pow(e[var] as i64).expect("nonneg power");
            out.insert(e2, c.mul(&pw));
        }
        out
    }

    /// Full evaluation at a point.
    pub fn eval_all(&self, vals: &[Scalar]) -> Scalar {
        assert_eq!(vals.len(), self.nvars);
        let mut acc = Scalar::zero(self.field);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &ei) in e.iter().enumerate() {
                t = t.mul(&vals[i].pow(ei as i64).expect("nonneg power"));
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Reduce all coefficients mod p.  Fails if p divides any denominator.
    pub fn reduce_mod(&self, p: u64) -> Result<Self> {
        let mut out = MPoly::zero(FieldTag::Fp(p), self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.reduce_mod(p)?);
        }
        Ok(out)
    }

    /// Lex-greatest term (exponent tuple, coefficient).
    pub fn leading_term_lex(&self) -> Option<(&Vec<i32>, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Scale so the lex-greatest term has coefficient 1.
    pub fn normalize_lead(&self) -> Self {
        match self.leading_term_lex() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.inv().expect("nonzero leading coefficient");
                self.mul_scalar(&inv)
            }
        }
    }

    /// Exact multivariate division: `Some(q)` with `self == q * d`, else `None`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        self.assert_compat(d);
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = MPoly::zero(self.field, self.nvars);
        let (de, dc) = {
            let (e, c) = d.leading_term_lex().unwrap();
            (e.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (re, rc) = {
                let (e, c) = rem.leading_term_lex().unwrap();
                (e.clone(), c.clone())
            };
            let mut qe = Vec::with_capacity(self.nvars);
            for (a, b) in re.iter().zip(&de) {
                let diff = a - b;
                if diff < 0 {
                    return None;
                }
                qe.push(diff);
            }
            let qc = rc.div(&dc).expect("nonzero leading coefficient");
            let t = MPoly::monomial(self.field, self.nvars, qe, qc);
            rem = rem.sub(&t.mul(d));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Gcd of the `var`-coefficients (the content with respect to `var`).
    pub fn content_in(&self, var: usize) -> Self {
        let mut g = MPoly::zero(self.field, self.nvars);
        let degs: Vec<i32> = {
            let mut d: Vec<i32> = self.terms.keys().map(|e| e[var]).collect();
            d.sort_unstable();
            d.dedup();
            d
        };
        for k in degs {
            g = MPoly::gcd(&g, &self.coeff_of_power(var, k));
        }
        g
    }

    /// Multivariate gcd over the coefficient field, normalized so the
    /// lex-greatest term has coefficient 1.  Uses a primitive polynomial
    /// remainder sequence in the highest variable that actually occurs.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            return b.normalize_lead();
        }
        if b.is_zero() {
            return a.normalize_lead();
        }
        a.assert_compat(b);
        if a.constant_value().is_some() || b.constant_value().is_some() {
            return MPoly::one(a.field, a.nvars);
        }
        // main variable: the highest-index variable occurring in either
        let var = (0..a.nvars)
            .rev()
            .find(|&v| a.uses_var(v) || b.uses_var(v))
            .expect("nonconstant operands");
        if !a.uses_var(var) || !b.uses_var(var) {
            // one operand is constant in the main variable: gcd divides it,
            // so recurse through the content
            let (flat, other) = if a.uses_var(var) { (b, a) } else { (a, b) };
            return MPoly::gcd(flat, &other.content_in(var));
        }

        let ca = a.content_in(var);
        let cb = b.content_in(var);
        let cg = MPoly::gcd(&ca, &cb);
        let mut f = a
            .exact_div(&ca)
            .expect("content divides")
            .rational_primitive();
        let mut g = b
            .exact_div(&cb)
            .expect("content divides")
            .rational_primitive();
        if f.deg_in(var) < g.deg_in(var) {
            std::mem::swap(&mut f, &mut g);
        }
        loop {
            let r = pseudo_rem(&f, &g, var);
            if r.is_zero() {
                let pp = g
                    .exact_div(&g.content_in(var))
                    .expect("content divides");
                return cg.mul(&pp).normalize_lead();
            }
            f = g;
            g = r
                .exact_div(&r.content_in(var))
                .expect("content divides")
                .rational_primitive();
        }
    }

    /// Scale by a positive rational so the coefficients become coprime
    /// integers (identity over 𝔽ₚ and on zero).  Without this rescaling the
    /// pseudo-remainder sequence in [`MPoly::gcd`] doubles its coefficient
    /// bit-size at every step.
    fn rational_primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let FieldTag::Q = self.field else {
            return self.clone();
        };
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            let q = c.as_rational().expect("rational coefficients");
            lcm = num_integer::lcm(lcm, q.denom().clone());
        }
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            let q = c.as_rational().expect("rational coefficients");
            let z = (q * BigRational::from(lcm.clone())).to_integer();
            gcd = num_integer::gcd(gcd, z);
        }
        self.mul_scalar(&Scalar::Q(BigRational::new(lcm, gcd)))
    }

    // ---- univariate helpers ----------------------------------------------

    fn assert_uni(&self) {
        assert_eq!(self.nvars, 1, "univariate operation on multivariate input");
    }

    /// Dense coefficient vector, index = exponent (univariate only).
    pub fn to_dense(&self) -> Vec<Scalar> {
        self.assert_uni();
        let d = self.deg_in(0).unwrap_or(-1);
        let mut out = vec![Scalar::zero(self.field); (d + 1).max(0) as usize];
        for (e, c) in &self.terms {
            out[e[0] as usize] = c.clone();
        }
        out
    }

    pub fn from_dense(field: FieldTag, coeffs: &[Scalar]) -> Self {
        let mut p = MPoly::zero(field, 1);
        for (i, c) in coeffs.iter().enumerate() {
            p.insert(vec![i as i32], c.clone());
        }
        p
    }

    pub fn from_coeffs_i64(field: FieldTag, coeffs: &[i64]) -> Self {
        let v: Vec<Scalar> = coeffs.iter().map(|&n| Scalar::from_i64(field, n)).collect();
        MPoly::from_dense(field, &v)
    }

    pub fn deg(&self) -> Option<usize> {
        self.assert_uni();
        self.deg_in(0).map(|d| d as usize)
    }

    pub fn leading_coeff(&self) -> Option<Scalar> {
        self.assert_uni();
        let d = self.deg_in(0)?;
        Some(self.terms[&vec![d]].clone())
    }

    pub fn monic(&self) -> Result<Self> {
        let lc = self.leading_coeff().ok_or(Error::DivisionByZero)?;
        Ok(self.mul_scalar(&lc.inv()?))
    }

    /// Euclidean division of univariate polynomials over the field.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        self.assert_uni();
        d.assert_uni();
        self.assert_compat(d);
        let dd = d.deg().ok_or(Error::DivisionByZero)?;
        let dlc = d.leading_coeff().unwrap();
        let mut rem = self.clone();
        let mut quo = MPoly::zero(self.field, 1);
        while let Some(rd) = rem.deg() {
            if rd < dd {
                break;
            }
            let rlc = rem.leading_coeff().unwrap();
            let t = MPoly::monomial(
                self.field,
                1,
                vec![(rd - dd) as i32],
                rlc.div(&dlc)?,
            );
            rem = rem.sub(&t.mul(d));
            quo = quo.add(&t);
        }
        Ok((quo, rem))
    }

    /// Monic univariate gcd by the euclidean algorithm.
    pub fn gcd_uni(a: &Self, b: &Self) -> Self {
        let mut f = a.clone();
        let mut g = b.clone();
        while !g.is_zero() {
            let (_, r) = f.div_rem(&g).expect("nonzero divisor");
            f = g;
            g = r;
        }
        if f.is_zero() {
            f
        } else {
            f.monic().unwrap()
        }
    }

    /// Extended gcd: returns monic `g` and `(s, t)` with `s·a + t·b = g`.
    pub fn ext_gcd(a: &Self, b: &Self) -> (Self, Self, Self) {
        let one = MPoly::one(a.field, 1);
        let zero = MPoly::zero(a.field, 1);
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (one.clone(), zero.clone());
        let (mut t0, mut t1) = (zero, one);
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1).expect("nonzero divisor");
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let lc = r0.leading_coeff().unwrap();
        let inv = lc.inv().unwrap();
        (
            r0.mul_scalar(&inv),
            s0.mul_scalar(&inv),
            t0.mul_scalar(&inv),
        )
    }

    pub fn derivative(&self) -> Self {
        self.assert_uni();
        let mut out = MPoly::zero(self.field, 1);
        for (e, c) in &self.terms {
            if e[0] > 0 {
                let k = Scalar::from_i64(self.field, e[0] as i64);
                out.insert(vec![e[0] - 1], c.mul(&k));
            }
        }
        out
    }

    pub fn eval_scalar(&self, x: &Scalar) -> Scalar {
        self.assert_uni();
        self.eval_all(std::slice::from_ref(x))
    }

    /// Univariate composition `self(g)`.
    pub fn compose_uni(&self, g: &Self) -> Self {
        self.assert_uni();
        g.assert_uni();
        let mut acc = MPoly::zero(self.field, 1);
        for c in self.to_dense().iter().rev() {
            acc = acc.mul(g).add(&MPoly::constant(self.field, 1, c.clone()));
        }
        acc
    }

    /// All rational roots with multiplicities (univariate over ℚ).
    pub fn rational_roots(&self) -> Vec<(BigRational, u32)> {
        self.assert_uni();
        assert_eq!(self.field, FieldTag::Q);
        let mut f = self.clone();
        let mut out: Vec<(BigRational, u32)> = Vec::new();
        if f.deg().is_none() {
            return out;
        }
        // strip a power of x first
        let v = f.min_exp_in(0).unwrap();
        if v > 0 {
            f = f.exact_div(&MPoly::var_pow(FieldTag::Q, 1, 0, v)).unwrap();
            out.push((BigRational::zero(), v as u32));
        }
        let (lead, tail) = match integer_form(&f) {
            Some(z) => z,
            None => return out,
        };
        let lead_divs = match small_divisors(&lead) {
            Some(d) => d,
            None => return out,
        };
        let tail_divs = match small_divisors(&tail) {
            Some(d) => d,
            None => return out,
        };
        let mut candidates: Vec<BigRational> = Vec::new();
        for p in &tail_divs {
            for q in &lead_divs {
                let r = BigRational::new(BigInt::from(*p), BigInt::from(*q));
                if !candidates.contains(&r) {
                    candidates.push(r.clone());
                    candidates.push(-r);
                }
            }
        }
        for r in candidates {
            let mut mult = 0u32;
            loop {
                let at = f.eval_scalar(&Scalar::Q(r.clone()));
                if !at.is_zero() {
                    break;
                }
                let lin = MPoly::from_dense(
                    FieldTag::Q,
                    &[Scalar::Q(-r.clone()), Scalar::one(FieldTag::Q)],
                );
                f = f.div_rem(&lin).unwrap().0;
                mult += 1;
            }
            if mult > 0 {
                out.push((r, mult));
            }
        }
        out
    }

    /// Irreducibility of a univariate polynomial over its coefficient field.
    ///
    /// Over 𝔽ₚ this is decided exactly (trial division).  Over ℚ, degrees
    /// ≤ 3 are decided by the rational root theorem; higher degrees fall back
    /// to a quadratic-factor search plus a factor-degree certificate modulo
    /// several primes, and return [`Error::IrreducibilityUnknown`] when that
    /// certificate is inconclusive (e.g. x⁴ + 1, which splits modulo every
    /// prime yet is irreducible over ℚ).
    pub fn is_irreducible(&self) -> Result<bool> {
        self.assert_uni();
        let d = match self.deg() {
            None | Some(0) => return Ok(false),
            Some(d) => d,
        };
        if d == 1 {
            return Ok(true);
        }
        match self.field {
            FieldTag::Fp(_) => {
                let factors = fp_factor(self);
                Ok(factors.len() == 1 && factors[0].1 == 1 && factors[0].0.deg() == Some(d))
            }
            FieldTag::Q => {
                if self.min_exp_in(0).unwrap() > 0 {
                    return Ok(false); // divisible by x with degree ≥ 2
                }
                if !self.rational_roots().is_empty() {
                    return Ok(false);
                }
                if MPoly::gcd_uni(self, &self.derivative()).deg() != Some(0) {
                    return Ok(false); // repeated factor
                }
                if d <= 3 {
                    return Ok(true);
                }
                if d == 4 {
                    if quartic_quadratic_split(self)?.is_some() {
                        return Ok(false);
                    }
                }
                if degree_pattern_certificate(self) {
                    return Ok(true);
                }
                Err(Error::IrreducibilityUnknown(format!("{self}")))
            }
        }
    }

    /// Full factorization of a univariate polynomial into monic irreducibles,
    /// returned as `(leading unit, [(factor, multiplicity)])`.
    ///
    /// Complete over 𝔽ₚ.  Over ℚ the same caveat as [`MPoly::is_irreducible`]
    /// applies for degrees ≥ 4.
    pub fn factor(&self) -> Result<(Scalar, Vec<(MPoly, u32)>)> {
        self.assert_uni();
        let lc = self.leading_coeff().ok_or(Error::DivisionByZero)?;
        if let FieldTag::Fp(_) = self.field {
            return Ok((lc, fp_factor(self)));
        }
        let mut f = self.monic()?;
        let mut out: Vec<(MPoly, u32)> = Vec::new();
        for (root, mult) in self.rational_roots() {
            let lin = MPoly::from_dense(
                FieldTag::Q,
                &[Scalar::Q(-root.clone()), Scalar::one(FieldTag::Q)],
            );
            for _ in 0..mult {
                f = f.div_rem(&lin).unwrap().0;
            }
            out.push((lin, mult));
        }
        let mut queue = vec![f];
        while let Some(g) = queue.pop() {
            let d = match g.deg() {
                None | Some(0) => continue,
                Some(d) => d,
            };
            match d {
                1 | 2 | 3 => push_factor(&mut out, g.monic()?),
                4 => match quartic_quadratic_split(&g)? {
                    Some((a, b)) => {
                        queue.push(a);
                        queue.push(b);
                    }
                    None => {
                        if degree_pattern_certificate(&g) {
                            push_factor(&mut out, g.monic()?);
                        } else {
                            return Err(Error::IrreducibilityUnknown(format!("{g}")));
                        }
                    }
                },
                _ => {
                    if degree_pattern_certificate(&g) {
                        push_factor(&mut out, g.monic()?);
                    } else {
                        return Err(Error::IrreducibilityUnknown(format!("{g}")));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok((lc, out))
    }

    /// Chinese remainder in the univariate polynomial ring: find the unique
    /// `y` with `y ≡ rᵢ (mod mᵢ)` and `deg y < Σ deg mᵢ`, for pairwise
    /// coprime moduli.
    pub fn crt(pairs: &[(MPoly, MPoly)]) -> Result<MPoly> {
        assert!(!pairs.is_empty());
        let mut acc = pairs[0].0.clone();
        let mut modulus = pairs[0].1.clone();
        acc = acc.div_rem(&modulus)?.1;
        for (r, m) in &pairs[1..] {
            let (g, s, _) = MPoly::ext_gcd(&modulus, m);
            if g.deg() != Some(0) {
                return Err(Error::DependentPlaces(format!(
                    "moduli {modulus} and {m} share a factor"
                )));
            }
            // acc + modulus·s·(r − acc) ≡ acc (mod modulus), ≡ r (mod m)
            let delta = r.sub(&acc);
            let lift = modulus.mul(&s).mul(&delta);
            modulus = modulus.mul(m);
            acc = acc.add(&lift).div_rem(&modulus)?.1;
        }
        Ok(acc)
    }

    /// Multiplicity of the (nonconstant) divisor `d` in `self`.
    pub fn multiplicity_of(&self, d: &Self) -> u32 {
        assert!(d.constant_value().is_none(), "constant divisor");
        let mut rest = self.clone();
        let mut m = 0;
        while !rest.is_zero() {
            match rest.exact_div(d) {
                Some(q) => {
                    rest = q;
                    m += 1;
                }
                None => break,
            }
        }
        m
    }

    /// Render with the given variable names (index i ↦ names[i]).
    pub fn display_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mut mon: Vec<String> = Vec::new();
            for (i, &ei) in e.iter().enumerate() {
                if ei == 1 {
                    mon.push(names[i].to_string());
                } else if ei != 0 {
                    mon.push(format!("{}^{}", names[i], ei));
                }
            }
            let piece = if mon.is_empty() {
                format!("{c}")
            } else if c.is_one() {
                mon.join("*")
            } else if c.neg().is_one() && self.field == FieldTag::Q {
                format!("-{}", mon.join("*"))
            } else {
                format!("{}*{}", c, mon.join("*"))
            };
            parts.push(piece);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

impl std::fmt::Display for MPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        write!(f, "{}", self.display_with(&refs))
    }
}

/// Pseudo-remainder of `a` by `b` with respect to `var` (deg_var a ≥ deg_var b).
fn pseudo_rem(a: &MPoly, b: &MPoly, var: usize) -> MPoly {
    let db = b.deg_in(var).expect("nonzero divisor");
    let lcb = b.coeff_of_power(var, db);
    let mut r = a.clone();
    while let Some(dr) = r.deg_in(var) {
        if dr < db {
            break;
        }
        let lcr = r.coeff_of_power(var, dr);
        let shift = MPoly::var_pow(a.field, a.nvars, var, dr - db);
        r = r.mul(&lcb).sub(&lcr.mul(&shift).mul(b));
    }
    r
}

/// Clear denominators and content: returns `(leading, trailing)` integer
/// coefficients of the primitive integer form, or `None` for empty input.
fn integer_form(f: &MPoly) -> Option<(BigInt, BigInt)> {
    let dense = f.to_dense();
    if dense.is_empty() {
        return None;
    }
    let mut lcm = BigInt::one();
    for c in &dense {
        if let Some(q) = c.as_rational() {
            lcm = num_integer::lcm(lcm, q.denom().clone());
        }
    }
    let ints: Vec<BigInt> = dense
        .iter()
        .map(|c| {
            let q = c.as_rational().expect("rational coefficients");
            (q * BigRational::from(lcm.clone())).to_integer()
        })
        .collect();
    let mut g = BigInt::zero();
    for z in &ints {
        g = num_integer::gcd(g, z.clone());
    }
    let prim: Vec<BigInt> = ints.iter().map(|z| z / &g).collect();
    let lead = prim.last().unwrap().clone();
    let tail = prim.iter().find(|z| !z.is_zero()).unwrap().clone();
    Some((lead.abs(), tail.abs()))
}

/// Positive divisors of |n|, or `None` when |n| exceeds u64 (search bound).
fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let m = n.abs().to_u64()?;
    if m == 0 {
        return Some(vec![1]);
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            out.push(d);
            if d != m / d {
                out.push(m / d);
            }
        }
        d += 1;
    }
    Some(out)
}

fn push_factor(out: &mut Vec<(MPoly, u32)>, f: MPoly) {
    for (g, m) in out.iter_mut() {
        if *g == f {
            *m += 1;
            return;
        }
    }
    out.push((f, 1));
}

/// Dense primitive integer coefficients of a ℚ-polynomial.
fn dense_integer_coeffs(f: &MPoly) -> Vec<BigInt> {
    let dense = f.to_dense();
    let mut lcm = BigInt::one();
    for c in &dense {
        if let Some(q) = c.as_rational() {
            lcm = num_integer::lcm(lcm, q.denom().clone());
        }
    }
    let ints: Vec<BigInt> = dense
        .iter()
        .map(|c| (c.as_rational().unwrap() * BigRational::from(lcm.clone())).to_integer())
        .collect();
    let mut g = BigInt::zero();
    for z in &ints {
        g = num_integer::gcd(g, z.clone());
    }
    if g.is_zero() {
        return ints;
    }
    ints.iter().map(|z| z / &g).collect()
}

/// Try to split a rational quartic with no rational roots into two monic
/// quadratics with integer coefficients (after passing to the primitive
/// integer form).  Returns the two monic rational quadratic factors.
fn quartic_quadratic_split(f: &MPoly) -> Result<Option<(MPoly, MPoly)>> {
    let z = dense_integer_coeffs(f);
    assert_eq!(z.len(), 5);
    let f0 = &z[0];
    let f1 = &z[1];
    let f2 = &z[2];
    let f3 = &z[3];
    let lead = &z[4];
    if f0.is_zero() {
        return Ok(None); // rational root 0 was supposed to be stripped
    }
    let lead_divs = match small_divisors(lead) {
        Some(d) => d,
        None => return Ok(None),
    };
    let f0_divs = match small_divisors(f0) {
        Some(d) => d,
        None => return Ok(None),
    };
    // (u x² + a x + b)(w x² + c x + d) with u·w = lead, b·d = f0
    for &up in &lead_divs {
        let u = BigInt::from(up);
        let w = lead / &u;
        for &bp in &f0_divs {
            for bsign in [1i64, -1] {
                let b = BigInt::from(bp) * BigInt::from(bsign);
                let d = f0 / &b;
                // from x³: w·a + u·c = f3 ; from x¹: d·a + b·c = f1
                let det = &w * &b - &u * &d;
                let (a, c);
                if det.is_zero() {
                    // degenerate system; handle the monic symmetric case
                    if !u.is_one() || !w.is_one() || b != d {
                        continue;
                    }
                    if f1 != &(&b * f3) {
                        continue;
                    }
                    // a + c = f3, a·c = f2 − 2b: roots of z² − f3·z + (f2 − 2b)
                    let s = f3.clone();
                    let prod = f2 - BigInt::from(2) * &b;
                    let disc = &s * &s - BigInt::from(4) * &prod;
                    let r = match integer_sqrt(&disc) {
                        Some(r) => r,
                        None => continue,
                    };
                    let two = BigInt::from(2);
                    if (&s + &r).clone() % &two != BigInt::zero() {
                        continue;
                    }
                    a = (&s + &r) / &two;
                    c = (&s - &r) / &two;
                } else {
                    let a_num = f3 * &b - &u * f1;
                    let c_num = &w * f1 - f3 * &d;
                    if (&a_num % &det).is_zero() && (&c_num % &det).is_zero() {
                        a = a_num / &det;
                        c = c_num / &det;
                    } else {
                        continue;
                    }
                }
                // check the x² coefficient
                if &u * &d + &w * &b + &a * &c != *f2 {
                    continue;
                }
                let mk = |lead: &BigInt, mid: &BigInt, low: &BigInt| {
                    MPoly::from_dense(
                        FieldTag::Q,
                        &[
                            Scalar::Q(BigRational::from(low.clone())),
                            Scalar::Q(BigRational::from(mid.clone())),
                            Scalar::Q(BigRational::from(lead.clone())),
                        ],
                    )
                    .monic()
                    .unwrap()
                };
                return Ok(Some((mk(&u, &a, &b), mk(&w, &c, &d))));
            }
        }
    }
    Ok(None)
}

fn integer_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

const CERT_PRIMES: [u64; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

/// Prove irreducibility over ℚ by intersecting the possible proper factor
/// degrees of the reductions modulo several primes.  `true` means proven;
/// `false` means inconclusive (NOT a proof of reducibility).
fn degree_pattern_certificate(f: &MPoly) -> bool {
    let d = match f.deg() {
        Some(d) if d >= 2 => d,
        _ => return false,
    };
    let ints = dense_integer_coeffs(f);
    let fz = MPoly::from_dense(
        FieldTag::Q,
        &ints
            .iter()
            .map(|z| Scalar::Q(BigRational::from(z.clone())))
            .collect::<Vec<_>>(),
    );
    let mut possible: Option<std::collections::BTreeSet<usize>> = None;
    for &p in &CERT_PRIMES {
        let fp = match fz.reduce_mod(p) {
            Ok(g) => g,
            Err(_) => continue,
        };
        if fp.deg() != Some(d) {
            continue; // leading coefficient vanished
        }
        // only squarefree reductions give reliable degree patterns
        if MPoly::gcd_uni(&fp, &fp.derivative()).deg() != Some(0) {
            continue;
        }
        let mut degs: Vec<usize> = Vec::new();
        for (g, m) in fp_factor(&fp) {
            for _ in 0..m {
                degs.push(g.deg().unwrap());
            }
        }
        // all subset sums strictly between 0 and d
        let mut sums = std::collections::BTreeSet::new();
        sums.insert(0usize);
        for k in degs {
            let snapshot: Vec<usize> = sums.iter().copied().collect();
            for s in snapshot {
                sums.insert(s + k);
            }
        }
        sums.remove(&0);
        sums.remove(&d);
        possible = Some(match possible {
            None => sums,
            Some(prev) => prev.intersection(&sums).copied().collect(),
        });
        if let Some(ref s) = possible {
            if s.is_empty() {
                return true;
            }
        }
    }
    false
}

/// Factor a univariate polynomial over 𝔽ₚ into monic irreducibles by trial
/// division against all monic polynomials of ascending degree.
pub fn fp_factor(f: &MPoly) -> Vec<(MPoly, u32)> {
    let p = match f.field {
        FieldTag::Fp(p) => p,
        FieldTag::Q => panic!("fp_factor needs an F_p polynomial"),
    };
    let mut rest = f.monic().expect("nonzero polynomial");
    let mut out: Vec<(MPoly, u32)> = Vec::new();
    let mut k = 1usize;
    while let Some(d) = rest.deg() {
        if d == 0 {
            break;
        }
        // no factor of degree < k remains, so if 2k exceeds the degree the
        // rest is irreducible
        if 2 * k > d {
            push_factor(&mut out, rest);
            break;
        }
        for cand in monic_polys_fp(p, k) {
            loop {
                if rest.deg().map_or(true, |dd| dd < k) {
                    break;
                }
                let (q, r) = rest.div_rem(&cand).unwrap();
                if r.is_zero() {
                    push_factor(&mut out, cand.clone());
                    rest = q;
                } else {
                    break;
                }
            }
        }
        k += 1;
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// All monic univariate polynomials of exact degree `k` over 𝔽ₚ.
pub fn monic_polys_fp(p: u64, k: usize) -> Vec<MPoly> {
    let field = FieldTag::Fp(p);
    let total = (p as u128).pow(k as u32);
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let mut coeffs = vec![Scalar::zero(field); k + 1];
        coeffs[k] = Scalar::one(field);
        let mut n = idx;
        for c in coeffs.iter_mut().take(k) {
            *c = Scalar::Fp {
                p,
                val: (n % p as u128) as u64,
            };
            n /= p as u128;
        }
        out.push(MPoly::from_dense(field, &coeffs));
    }
    out
}

/// All monic irreducible univariate polynomials of exact degree `k` over 𝔽ₚ.
pub fn monic_irreducibles_fp(p: u64, k: usize) -> Vec<MPoly> {
    monic_polys_fp(p, k)
        .into_iter()
        .filter(|f| f.is_irreducible().unwrap_or(false))
        .collect()
}
