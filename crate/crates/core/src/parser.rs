//! Recursive-descent parsers for element expressions and ring descriptors.
//!
//! Expression grammar (loosest to tightest):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := '-' term | factor (('*' | '/') factor)*
//! factor := atom ('^' ['-'] digits)?
//! atom   := digits | ident | '(' expr ')'
//! ```
//!
//! Implicit multiplication is not allowed. Odd generators are spelled
//! `t1..tN`; the Unicode spellings `θ1` / `θ₁` are accepted as aliases.
//! A division (or a negative power) demands an even, invertible
//! denominator — `1/t1` is rejected, not formally inverted.
//!
//! Ring descriptors follow the printed form of [`RingDesc`]:
//! `Q(x)[t1,t2]`, `Z[x,x^-1][t1..t3]`, `Fp5(x)[t1]`, `Q[x]@(x)[t1]`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::poly::MPoly;
use crate::ratfn::RatFn;
use crate::scalar::{big_mod, FieldTag, Scalar};
use crate::superalg::{BaseRing, EvenVar, RingDesc, SuperElem, VarKind};
use crate::{Error, Result};

/// Parse tree of an element expression. Binary subtraction is sugar:
/// `a - b` parses to `Add(a, Neg(b))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Var(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i32),
}

/// Parse an expression into a canonical element of `ring`.
pub fn parse_expr(src: &str, ring: &RingDesc) -> Result<SuperElem> {
    elaborate(&parse_ast(src)?, ring)
}

/// Parse an expression into its tree without naming a ring.
pub fn parse_ast(src: &str) -> Result<Ast> {
    let mut p = Lexer::new(src);
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(ast)
}

/// Parse an expression that must elaborate to a polynomial in the even
/// variables of `ring` — the shape places and localization targets take.
pub fn parse_even_poly(src: &str, ring: &RingDesc) -> Result<MPoly> {
    let e = parse_expr(src, ring)?;
    let r = e.theta_free();
    if e.terms.len() > usize::from(!r.is_zero()) {
        return Err(Error::Unsupported(
            "expected a purely even polynomial, found odd terms".into(),
        ));
    }
    match r.as_poly() {
        Some(p) => Ok(p.clone()),
        None => Err(Error::Unsupported(
            "expected a polynomial, found a proper fraction".into(),
        )),
    }
}

/// Elaborate a parse tree in a ring, canonicalizing via superalgebra
/// arithmetic.
pub fn elaborate(ast: &Ast, ring: &RingDesc) -> Result<SuperElem> {
    match ast {
        Ast::Num(n) => Ok(ring.from_even(RatFn::constant(
            ring.field(),
            ring.nvars(),
            scalar_from_big(ring.field(), n),
        ))),
        Ast::Var(name) => {
            if let Some(k) = theta_index(name) {
                if k < ring.odd {
                    return Ok(ring.theta_elem(k));
                }
            }
            if let Some(i) = ring.var_index(name) {
                return Ok(ring.var_elem(i));
            }
            Err(Error::UnknownVariable(name.clone()))
        }
        Ast::Neg(a) => Ok(elaborate(a, ring)?.neg()),
        Ast::Add(a, b) => Ok(elaborate(a, ring)?.add(&elaborate(b, ring)?)),
        Ast::Mul(a, b) => Ok(elaborate(a, ring)?.mul(&elaborate(b, ring)?)),
        Ast::Div(a, b) => {
            let den = elaborate(b, ring)?;
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(elaborate(a, ring)?.mul(&invert_even(&den)?))
        }
        Ast::Pow(a, k) => {
            let base = elaborate(a, ring)?;
            if *k >= 0 {
                Ok(base.pow(*k as u32))
            } else if base.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(invert_even(&base)?.pow(-k as u32))
            }
        }
    }
}

/// Invert a denominator, which must be homogeneous even — `1/t1` and
/// `1/(1+t1)` are both rejected even when a formal inverse would exist.
fn invert_even(den: &SuperElem) -> Result<SuperElem> {
    if den.parity() != Some(0) {
        return Err(Error::OddDenominator(format!(
            "denominator `{den}` has odd terms"
        )));
    }
    den.inv()
}

fn scalar_from_big(field: FieldTag, n: &BigInt) -> Scalar {
    match field {
        FieldTag::Q => Scalar::Q(BigRational::from(n.clone())),
        FieldTag::Fp(p) => Scalar::from_i64(FieldTag::Fp(p), big_mod(n, p) as i64),
    }
}

/// `t3`, `θ3`, `θ₃` → `Some(2)`.
fn theta_index(name: &str) -> Option<usize> {
    let digits = name
        .strip_prefix('t')
        .or_else(|| name.strip_prefix('θ'))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (k >= 1).then(|| k - 1)
}

// ---------------------------------------------------------------------------
// expression lexer / parser
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            src: text.as_bytes(),
            text,
            pos: 0,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            at: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Ast::Add(Box::new(acc), Box::new(Ast::Neg(Box::new(self.term()?))));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        if self.eat(b'-') {
            return Ok(Ast::Neg(Box::new(self.term()?)));
        }
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = Ast::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                acc = Ast::Div(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Ast> {
        let atom = self.atom()?;
        if !self.eat(b'^') {
            return Ok(atom);
        }
        let neg = self.eat(b'-');
        let digits = self.digits("exponent")?;
        let e: i32 = digits
            .parse()
            .map_err(|_| self.err("exponent out of range"))?;
        Ok(Ast::Pow(Box::new(atom), if neg { -e } else { e }))
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let digits = self.digits("number")?;
                Ok(Ast::Num(digits.parse().expect("ascii digits")))
            }
            Some(b) if b.is_ascii_alphabetic() => Ok(Ast::Var(self.ident())),
            _ if self.rest().starts_with('θ') => Ok(Ast::Var(self.theta_ident())),
            _ => Err(self.err("expected a number, variable, or `(`")),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn digits(&mut self, what: &str) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(&format!("expected {what}")));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        self.text[start..self.pos].to_string()
    }

    /// `θ` followed by ASCII digits or Unicode subscript digits, normalized
    /// to the ASCII `tK` spelling.
    fn theta_ident(&mut self) -> String {
        self.pos += 'θ'.len_utf8();
        let mut digits = String::new();
        loop {
            let rest = self.rest();
            let Some(c) = rest.chars().next() else { break };
            if c.is_ascii_digit() {
                digits.push(c);
            } else if ('₀'..='₉').contains(&c) {
                digits.push((b'0' + (c as u32 - '₀' as u32) as u8) as char);
            } else {
                break;
            }
            self.pos += c.len_utf8();
        }
        format!("t{digits}")
    }
}

// ---------------------------------------------------------------------------
// ring descriptors
// ---------------------------------------------------------------------------

/// Parse a ring descriptor such as `Q(x)[t1,t2]` or `Z[x,x^-1][t1..t3]`.
///
/// Shape: base (`Q` | `Z` | `Fp<prime>`), then an optional `(…)` group of
/// invertible variables, an optional `[…]` group of adjoined variables
/// (`x` polynomial, `x,x^-1` Laurent), an optional localization `@(p)`,
/// and an optional final `[…]` group of odd generators (`t1,t2` or
/// `t1..tN`). Even variables may not use the reserved `t<digits>` names.
pub fn parse_ring(src: &str) -> Result<RingDesc> {
    let mut p = Lexer::new(src);
    let base = parse_base(&mut p)?;

    let mut even_vars: Vec<EvenVar> = Vec::new();
    if p.eat(b'(') {
        loop {
            let name = even_name(&mut p)?;
            even_vars.push(EvenVar {
                name,
                kind: VarKind::Rational,
            });
            if p.eat(b',') {
                continue;
            }
            if p.eat(b')') {
                break;
            }
            return Err(p.err("expected `,` or `)` in the variable list"));
        }
    }

    let mut odd = 0usize;
    let mut adjoined_done = false;
    let mut localized_src: Option<String> = None;
    while p.eat(b'[') {
        let names = bracket_items(&mut p)?;
        if let Some(n) = parse_theta_block(&names, &p)? {
            odd = n;
            break;
        }
        if adjoined_done {
            return Err(p.err("only one adjoined-variable group is allowed"));
        }
        adjoined_done = true;
        let mut i = 0;
        while i < names.len() {
            let name = &names[i];
            if let Some(base_name) = name.strip_suffix("^-1") {
                return Err(Error::Syntax {
                    at: 0,
                    msg: format!("`{base_name}^-1` must follow its variable `{base_name}`"),
                });
            }
            check_even_name(name, &p)?;
            let laurent = names.get(i + 1) == Some(&format!("{name}^-1"));
            even_vars.push(EvenVar {
                name: name.clone(),
                kind: if laurent {
                    VarKind::Laurent
                } else {
                    VarKind::Poly
                },
            });
            i += if laurent { 2 } else { 1 };
        }
        if p.eat(b'@') {
            if !p.eat(b'(') {
                return Err(p.err("expected `(` after `@`"));
            }
            let start = p.pos;
            let mut depth = 1;
            while p.pos < p.src.len() && depth > 0 {
                match p.src[p.pos] {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    _ => {}
                }
                p.pos += 1;
            }
            if depth > 0 {
                return Err(p.err("unterminated localization target"));
            }
            localized_src = Some(p.text[start..p.pos - 1].to_string());
        }
    }
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input after ring descriptor"));
    }

    let plain = RingDesc::new(base, even_vars, odd);
    match localized_src {
        None => Ok(plain),
        Some(s) => {
            let target = parse_even_poly(&s, &plain)?;
            plain.localize(&crate::superalg::PrimeDatum::EvenPrime(target))
        }
    }
}

fn parse_base(p: &mut Lexer) -> Result<BaseRing> {
    p.skip_ws();
    if p.rest().starts_with("Fp") {
        p.pos += 2;
        let digits = p.digits("prime after `Fp`")?;
        let q: u64 = digits
            .parse()
            .map_err(|_| p.err("prime out of range"))?;
        if q < 2 || (2..q).take_while(|d| d * d <= q).any(|d| q % d == 0) {
            return Err(Error::NotPrime(format!("{q} is not prime")));
        }
        return Ok(BaseRing::Fp(q));
    }
    if p.eat(b'Q') {
        return Ok(BaseRing::Q);
    }
    if p.eat(b'Z') {
        return Ok(BaseRing::Z);
    }
    Err(p.err("expected a base ring: `Q`, `Z`, or `Fp<prime>`"))
}

/// Comma-separated raw items up to the closing `]` (items may carry a
/// trailing `^-1`).
fn bracket_items(p: &mut Lexer) -> Result<Vec<String>> {
    let mut items = Vec::new();
    loop {
        p.skip_ws();
        let start = p.pos;
        while p.pos < p.src.len() && !matches!(p.src[p.pos], b',' | b']') {
            p.pos += 1;
        }
        let item = p.text[start..p.pos].trim().to_string();
        if item.is_empty() {
            return Err(p.err("empty name in bracket group"));
        }
        items.push(item);
        if p.eat(b',') {
            continue;
        }
        if p.eat(b']') {
            return Ok(items);
        }
        return Err(p.err("expected `,` or `]`"));
    }
}

/// Recognize an odd block: `t1,t2,…` consecutive from 1, or `t1..tN`.
/// Returns `Ok(None)` when the group names no odd generators at all.
fn parse_theta_block(names: &[String], p: &Lexer) -> Result<Option<usize>> {
    let theta_shaped = |s: &str| theta_index(s).is_some();
    if let [single] = names {
        if let Some((lo, hi)) = single.split_once("..") {
            if theta_shaped(lo) && theta_shaped(hi) {
                if theta_index(lo) != Some(0) {
                    return Err(p.err_at0("odd ranges start at t1"));
                }
                return Ok(Some(theta_index(hi).expect("theta-shaped") + 1));
            }
        }
    }
    if !names.iter().any(|n| theta_shaped(n)) {
        return Ok(None);
    }
    for (i, n) in names.iter().enumerate() {
        if theta_index(n) != Some(i) {
            return Err(p.err_at0(
                "odd generators must be t1,t2,… in order (or a t1..tN range)",
            ));
        }
    }
    Ok(Some(names.len()))
}

fn even_name(p: &mut Lexer) -> Result<String> {
    p.skip_ws();
    if !p
        .peek()
        .is_some_and(|b| b.is_ascii_alphabetic())
    {
        return Err(p.err("expected a variable name"));
    }
    let name = p.ident();
    check_even_name(&name, p)?;
    Ok(name)
}

fn check_even_name(name: &str, p: &Lexer) -> Result<()> {
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return Err(p.err_at0(&format!("`{name}` is not a valid variable name")));
    }
    if theta_index(name).is_some() {
        return Err(p.err_at0(&format!(
            "`{name}` is reserved for odd generators"
        )));
    }
    Ok(())
}

impl Lexer<'_> {
    /// An error that points at the whole construct rather than one byte —
    /// used after an item has already been consumed.
    fn err_at0(&self, msg: &str) -> Error {
        Error::Syntax {
            at: self.pos.saturating_sub(1),
            msg: msg.into(),
        }
    }
}
