//! Scalar arithmetic.
//!
//! Two scalar domains back every computation in this crate:
//!
//! * [`C64`] — double-precision complex numbers, used for numerical search,
//!   validation reports and the spectral oracle.
//! * [`Exact`] — complex numbers of the form `Σ c·√r₁·√r₂…` where the
//!   coefficients `c` live in `ℚ(i, √D)` for a fixed square-free `D` and the
//!   radicands `rᵢ` are positive elements of `ℚ(√D)`.  This is closed under
//!   the field operations and under the square roots the skeletal calculus
//!   needs (quantum dimensions and cup/cap normalisations), so certificate
//!   verification can run with zero tolerance.
//!
//! The [`Scalar`] trait is the small shared surface the generic core is
//! written against.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Shorthand for the float scalar.
pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("value is not representable in the current exact field: {0}")]
    NotRepresentable(String),
    #[error("square root of a negative quantity")]
    NegativeSqrt,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of_rational(r: &Rational) -> Sign {
        match r.numer().sign() {
            num_bigint::Sign::Minus => Sign::Neg,
            num_bigint::Sign::NoSign => Sign::Zero,
            num_bigint::Sign::Plus => Sign::Pos,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }

    pub fn is_nonneg(self) -> bool {
        self != Sign::Neg
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Non-negative square root of a rational, when it is rational.
fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Rational::zero());
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(Rational::new(ns, ds))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Quad: elements a + b√d of a real quadratic field
// ---------------------------------------------------------------------------

/// An element `a + b·√d` of the real quadratic field `ℚ(√d)`.
///
/// Canonical form: `b == 0` implies `d == 0`; `d == 0` denotes a plain
/// rational.  Values from different quadratic fields must not be mixed
/// (rationals coerce into any field).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    a: Rational,
    b: Rational,
    d: u64,
}

impl Quad {
    pub fn new(a: Rational, b: Rational, d: u64) -> Quad {
        if b.is_zero() {
            Quad {
                a,
                b,
                d: 0,
            }
        } else {
            debug_assert!(d >= 2, "irrational part requires d >= 2");
            Quad { a, b, d }
        }
    }

    pub fn from_rational(a: Rational) -> Quad {
        Quad::new(a, Rational::zero(), 0)
    }

    pub fn from_int(n: i64) -> Quad {
        Quad::from_rational(rat(n, 1))
    }

    /// √d itself, as an element of ℚ(√d).
    pub fn sqrt_d(d: u64) -> Quad {
        Quad::new(Rational::zero(), Rational::one(), d)
    }

    pub fn zero() -> Quad {
        Quad::from_int(0)
    }

    pub fn one() -> Quad {
        Quad::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.b.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn field(&self) -> u64 {
        self.d
    }

    fn join_field(&self, other: &Quad) -> u64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (d1, d2) if d1 == d2 => d1,
            (d1, d2) => panic!("mixed quadratic fields: sqrt({d1}) vs sqrt({d2})"),
        }
    }

    pub fn add(&self, other: &Quad) -> Quad {
        let d = self.join_field(other);
        Quad::new(&self.a + &other.a, &self.b + &other.b, d)
    }

    pub fn sub(&self, other: &Quad) -> Quad {
        let d = self.join_field(other);
        Quad::new(&self.a - &other.a, &self.b - &other.b, d)
    }

    pub fn neg(&self) -> Quad {
        Quad::new(-self.a.clone(), -self.b.clone(), self.d)
    }

    pub fn mul(&self, other: &Quad) -> Quad {
        let d = self.join_field(other);
        let dd = Rational::from(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * &dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Quad::new(a, b, d)
    }

    pub fn scale(&self, r: &Rational) -> Quad {
        Quad::new(&self.a * r, &self.b * r, self.d)
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Quad {
        assert!(!self.is_zero(), "division by zero");
        if self.b.is_zero() {
            return Quad::from_rational(self.a.recip());
        }
        let dd = Rational::from(BigInt::from(self.d));
        let norm = &self.a * &self.a - &self.b * &self.b * &dd;
        assert!(!norm.is_zero(), "degenerate quadratic field element");
        Quad::new(&self.a / &norm, -(&self.b / &norm), self.d)
    }

    /// Exact sign under the real embedding with √d > 0.
    pub fn sign(&self) -> Sign {
        let sa = Sign::of_rational(&self.a);
        let sb = Sign::of_rational(&self.b);
        match (sa, sb) {
            (s, Sign::Zero) => s,
            (Sign::Zero, s) => s,
            (x, y) if x == y => x,
            (x, _) => {
                let dd = Rational::from(BigInt::from(self.d));
                let norm = &self.a * &self.a - &self.b * &self.b * &dd;
                x.times(Sign::of_rational(&norm))
            }
        }
    }

    pub fn cmp_real(&self, other: &Quad) -> Ordering {
        match self.sub(other).sign() {
            Sign::Neg => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Pos => Ordering::Greater,
        }
    }

    pub fn abs(&self) -> Quad {
        if self.sign() == Sign::Neg {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Non-negative square root within ℚ(√d), if one exists.
    ///
    /// `ambient` is the field the caller works in; it matters when `self`
    /// is rational but its root is not (e.g. √2 inside ℚ(√2)).
    pub fn sqrt_in_field(&self, ambient: u64) -> Option<Quad> {
        if self.sign() == Sign::Neg {
            return None;
        }
        if self.is_zero() {
            return Some(Quad::zero());
        }
        if self.b.is_zero() {
            if let Some(r) = rational_sqrt(&self.a) {
                return Some(Quad::from_rational(r));
            }
            if ambient >= 2 {
                let dd = Rational::from(BigInt::from(ambient));
                if let Some(v) = rational_sqrt(&(&self.a / &dd)) {
                    return Some(Quad::new(Rational::zero(), v, ambient));
                }
            }
            return None;
        }
        // (u + v√d)² = a + b√d  with b ≠ 0 forces u,v ≠ 0 and
        // u² = (a ± t)/2 where t = √(a² − b²d) must be rational.
        let dd = Rational::from(BigInt::from(self.d));
        let disc = &self.a * &self.a - &self.b * &self.b * &dd;
        let t = rational_sqrt(&disc)?;
        for s in [t.clone(), -t] {
            let u2 = (&self.a + &s) / rat(2, 1);
            if let Some(u) = rational_sqrt(&u2) {
                if !u.is_zero() {
                    let v = &self.b / (rat(2, 1) * &u);
                    let cand = Quad::new(u, v, self.d);
                    if cand.mul(&cand) == *self {
                        return Some(if cand.sign() == Sign::Neg {
                            cand.neg()
                        } else {
                            cand
                        });
                    }
                }
            }
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    pub fn parse(s: &str) -> Result<Quad, ScalarError> {
        parse_quad(s)
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", self.b, self.d);
        }
        if self.b.is_negative() {
            write!(f, "{}-{}*sqrt({})", self.a, -self.b.clone(), self.d)
        } else {
            write!(f, "{}+{}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `a`, `a+b*sqrt(d)`, `b*sqrt(d)`, `sqrt(d)` with rational `a`, `b`.
fn parse_quad(s: &str) -> Result<Quad, ScalarError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(ScalarError::Parse("empty quad".into()));
    }
    // Split into signed terms at top level (no parentheses inside a quad).
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !matches!(compact.as_bytes()[i - 1], b'/' | b'*')
        {
            terms.push(cur.clone());
            cur.clear();
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    let mut d: u64 = 0;
    for t in terms {
        let (sign, body) = match t.strip_prefix('-') {
            Some(rest) => (-Rational::one(), rest.to_string()),
            None => (
                Rational::one(),
                t.strip_prefix('+').unwrap_or(&t).to_string(),
            ),
        };
        if let Some(idx) = body.find("sqrt(") {
            let coef = body[..idx].trim_end_matches('*');
            let inner = body[idx + 5..]
                .strip_suffix(')')
                .ok_or_else(|| ScalarError::Parse(format!("bad sqrt term: {t}")))?;
            let dd: u64 = inner
                .parse()
                .map_err(|_| ScalarError::Parse(format!("bad radicand: {inner}")))?;
            if d != 0 && d != dd {
                return Err(ScalarError::Parse(format!("mixed radicands in {s}")));
            }
            d = dd;
            let c: Rational = if coef.is_empty() {
                Rational::one()
            } else {
                coef.parse()
                    .map_err(|_| ScalarError::Parse(format!("bad rational: {coef}")))?
            };
            b += sign * c;
        } else {
            let c: Rational = body
                .parse()
                .map_err(|_| ScalarError::Parse(format!("bad rational: {body}")))?;
            a += sign * c;
        }
    }
    Ok(Quad::new(a, b, d))
}

// ---------------------------------------------------------------------------
// CQuad: complex numbers over a quadratic field
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CQuad {
    pub re: Quad,
    pub im: Quad,
}

impl CQuad {
    pub fn new(re: Quad, im: Quad) -> CQuad {
        CQuad { re, im }
    }

    pub fn real(re: Quad) -> CQuad {
        CQuad {
            re,
            im: Quad::zero(),
        }
    }

    pub fn zero() -> CQuad {
        CQuad::real(Quad::zero())
    }

    pub fn one() -> CQuad {
        CQuad::real(Quad::one())
    }

    pub fn i() -> CQuad {
        CQuad::new(Quad::zero(), Quad::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &CQuad) -> CQuad {
        CQuad::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CQuad) -> CQuad {
        CQuad::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> CQuad {
        CQuad::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &CQuad) -> CQuad {
        CQuad::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, q: &Quad) -> CQuad {
        CQuad::new(self.re.mul(q), self.im.mul(q))
    }

    pub fn conj(&self) -> CQuad {
        CQuad::new(self.re.clone(), self.im.neg())
    }

    pub fn norm_sq(&self) -> Quad {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn inv(&self) -> CQuad {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "division by zero");
        let ninv = n.inv();
        CQuad::new(self.re.mul(&ninv), self.im.neg().mul(&ninv))
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for CQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({})+({})i", self.re, self.im)
        }
    }
}

impl fmt::Debug for CQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// Exact: radical extension of ℚ(i, √D)
// ---------------------------------------------------------------------------

/// An exact complex scalar: a finite sum `Σ cⱼ · √r₁ⱼ · √r₂ⱼ …` with
/// `cⱼ ∈ ℚ(i, √D)` and positive radicands `rᵢⱼ ∈ ℚ(√D)`.
///
/// Monomials are kept canonical: radicands are sorted, duplicate radicands
/// and pairs whose product is a square in `ℚ(√D)` are folded into the
/// coefficient, and radicands that are themselves squares in `ℚ(√D)` are
/// removed.  With that normalisation distinct monomials are linearly
/// independent over `ℚ(i, √D)`, so equality is structural (the ambient
/// field tag is bookkeeping and does not enter equality).
#[derive(Clone)]
pub struct Exact {
    field: u64,
    terms: BTreeMap<Vec<Quad>, CQuad>,
}

impl PartialEq for Exact {
    fn eq(&self, other: &Exact) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Exact {}

impl Exact {
    fn empty(field: u64) -> Exact {
        Exact {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_cquad_in(field: u64, c: CQuad) -> Exact {
        let mut e = Exact::empty(field);
        e.insert_term(Vec::new(), c);
        e
    }

    pub fn from_quad(q: Quad) -> Exact {
        let field = q.field();
        Exact::from_cquad_in(field, CQuad::real(q))
    }

    pub fn from_cquad(c: CQuad) -> Exact {
        let field = c.re.field().max(c.im.field());
        Exact::from_cquad_in(field, c)
    }

    pub fn from_rational(r: Rational) -> Exact {
        Exact::from_quad(Quad::from_rational(r))
    }

    pub fn int(n: i64) -> Exact {
        Exact::from_quad(Quad::from_int(n))
    }

    pub fn i() -> Exact {
        Exact::from_cquad_in(0, CQuad::i())
    }

    /// √r as a formal radical monomial (r must be positive).
    pub fn radical(r: Quad) -> Exact {
        assert!(r.sign() == Sign::Pos, "radicand must be positive");
        let field = r.field();
        let mut e = Exact::empty(field);
        e.insert_term(vec![r], CQuad::one());
        e
    }

    pub fn field(&self) -> u64 {
        self.field
    }

    fn join(&self, other: &Exact) -> u64 {
        match (self.field, other.field) {
            (0, d) | (d, 0) => d,
            (d1, d2) if d1 == d2 => d1,
            (d1, d2) => panic!("mixed exact fields: sqrt({d1}) vs sqrt({d2})"),
        }
    }

    /// Inserts `c·∏√rads` after normalising the monomial.
    fn insert_term(&mut self, rads: Vec<Quad>, c: CQuad) {
        if c.is_zero() {
            return;
        }
        let (mono, extra) = normalize_monomial(rads, self.field);
        let c = c.scale(&extra);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono.clone()).or_insert_with(CQuad::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero_val(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a single complex coefficient, when it has no radicals.
    pub fn as_cquad(&self) -> Option<CQuad> {
        if self.terms.is_empty() {
            return Some(CQuad::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Vec::new()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn as_quad(&self) -> Option<Quad> {
        self.as_cquad().and_then(|c| {
            if c.is_real() {
                Some(c.re)
            } else {
                None
            }
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Quad>, &CQuad)> {
        self.terms.iter()
    }

    pub fn add_ref(&self, other: &Exact) -> Exact {
        let field = self.join(other);
        let mut out = Exact::empty(field);
        for (m, c) in &self.terms {
            out.insert_term(m.clone(), c.clone());
        }
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &Exact) -> Exact {
        self.add_ref(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> Exact {
        let mut out = Exact::empty(self.field);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn mul_ref(&self, other: &Exact) -> Exact {
        let field = self.join(other);
        let mut out = Exact::empty(field);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut rads = m1.clone();
                rads.extend(m2.iter().cloned());
                out.insert_term(rads, c1.mul(c2));
            }
        }
        out
    }

    pub fn conj_ref(&self) -> Exact {
        let mut out = Exact::empty(self.field);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.conj());
        }
        out
    }

    pub fn is_real_val(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    /// Exact sign of a real value.
    pub fn sign(&self) -> Sign {
        assert!(self.is_real_val(), "sign of a non-real value");
        self.sign_real()
    }

    fn sign_real(&self) -> Sign {
        if self.terms.is_empty() {
            return Sign::Zero;
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let _ = m;
            return c.re.sign();
        }
        // Split on one radicand r: self = A + B√r, with A, B in a smaller
        // radical lattice. If the component signs agree that is the sign;
        // otherwise compare via the conjugate product A² − B²r.
        let r = self.pick_radicand();
        let (a_part, b_part) = self.split_on(&r);
        let sa = a_part.sign_real();
        let sb = b_part.sign_real();
        match (sa, sb) {
            (s, Sign::Zero) => s,
            (Sign::Zero, s) => s,
            (x, y) if x == y => x,
            (x, _) => {
                let b2r = b_part
                    .mul_ref(&b_part)
                    .mul_ref(&Exact::from_quad(r.clone()));
                let norm = a_part.mul_ref(&a_part).sub_ref(&b2r);
                x.times(norm.sign_real())
            }
        }
    }

    fn pick_radicand(&self) -> Quad {
        for m in self.terms.keys() {
            if let Some(r) = m.last() {
                return r.clone();
            }
        }
        unreachable!("pick_radicand on rational value")
    }

    /// Splits `self = A + B·√r` (terms containing √r go to B with √r removed).
    fn split_on(&self, r: &Quad) -> (Exact, Exact) {
        let mut a = Exact::empty(self.field);
        let mut b = Exact::empty(self.field);
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|x| x == r) {
                let mut reduced = m.clone();
                reduced.remove(pos);
                b.terms.insert(reduced, c.clone());
            } else {
                a.terms.insert(m.clone(), c.clone());
            }
        }
        (a, b)
    }

    pub fn inv_ref(&self) -> Exact {
        assert!(!self.is_zero_val(), "division by zero");
        if !self.is_real_val() {
            let conj = self.conj_ref();
            let norm = self.mul_ref(&conj);
            assert!(norm.is_real_val(), "z·z̄ must be real");
            return conj.mul_ref(&norm.inv_real());
        }
        self.inv_real()
    }

    fn inv_real(&self) -> Exact {
        if let Some(c) = self.as_cquad() {
            return Exact::from_cquad_in(self.field, c.inv());
        }
        let r = self.pick_radicand();
        let (a_part, b_part) = self.split_on(&r);
        let b2r = b_part
            .mul_ref(&b_part)
            .mul_ref(&Exact::from_quad(r.clone()));
        let denom = a_part.mul_ref(&a_part).sub_ref(&b2r);
        let conj = a_part.sub_ref(&b_part.mul_ref(&Exact::radical(r)));
        conj.mul_ref(&denom.inv_real())
    }

    /// Exact non-negative square root, when representable in the lattice.
    pub fn sqrt_nonneg_exact(&self) -> Result<Exact, ScalarError> {
        if self.is_zero_val() {
            return Ok(Exact::empty(self.field));
        }
        if self.terms.len() != 1 {
            return Err(ScalarError::NotRepresentable(format!(
                "sqrt of a {}-term sum",
                self.terms.len()
            )));
        }
        let (mono, c) = self.terms.iter().next().unwrap();
        if !c.is_real() || c.re.sign() == Sign::Neg {
            return Err(ScalarError::NegativeSqrt);
        }
        // √(c·√r₁…√r_k) = √c · √(√r₁) … √(√r_k)
        let mut out = sqrt_of_quad(&c.re, self.field)?;
        for r in mono {
            // √(√r): representable only when √r itself is a Quad.
            let sr = r
                .sqrt_in_field(self.field)
                .ok_or_else(|| ScalarError::NotRepresentable(format!("sqrt of radical √({r})")))?;
            out = out.mul_ref(&sqrt_of_quad(&sr, self.field)?);
        }
        Ok(out)
    }

    pub fn to_c64(&self) -> C64 {
        let mut z = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut radf = 1.0;
            for r in m {
                radf *= r.to_f64().sqrt();
            }
            z += c.to_c64() * radf;
        }
        z
    }

    /// Real part as a Quad when the value is real and radical-free.
    pub fn expect_quad(&self, what: &str) -> Quad {
        self.as_quad()
            .unwrap_or_else(|| panic!("{what}: expected a plain quadratic-field value, got {self}"))
    }
}

fn sqrt_of_quad(q: &Quad, ambient: u64) -> Result<Exact, ScalarError> {
    if q.sign() == Sign::Neg {
        return Err(ScalarError::NegativeSqrt);
    }
    if q.is_zero() {
        return Ok(Exact::empty(ambient));
    }
    if let Some(s) = q.sqrt_in_field(ambient) {
        return Ok(Exact::from_cquad_in(ambient, CQuad::real(s)));
    }
    let mut e = Exact::empty(ambient);
    e.insert_term(vec![q.clone()], CQuad::one());
    Ok(e)
}

/// Normalises a radical monomial: sorts radicands, folds duplicates, folds
/// radicands that are squares in the ambient field and pairs whose product
/// is a square.  Returns the reduced monomial and the Quad factor extracted.
fn normalize_monomial(mut rads: Vec<Quad>, ambient: u64) -> (Vec<Quad>, Quad) {
    let mut factor = Quad::one();
    loop {
        rads.sort();
        let mut changed = false;
        let mut out: Vec<Quad> = Vec::with_capacity(rads.len());
        let mut i = 0;
        while i < rads.len() {
            if i + 1 < rads.len() && rads[i] == rads[i + 1] {
                factor = factor.mul(&rads[i]);
                i += 2;
                changed = true;
            } else {
                out.push(rads[i].clone());
                i += 1;
            }
        }
        rads = out;
        // fold radicands that are perfect squares in the ambient field
        let mut out2: Vec<Quad> = Vec::with_capacity(rads.len());
        for r in rads.into_iter() {
            if let Some(s) = r.sqrt_in_field(ambient) {
                factor = factor.mul(&s);
                changed = true;
            } else {
                out2.push(r);
            }
        }
        rads = out2;
        // fold pairs whose product is a square
        'outer: for i in 0..rads.len() {
            for j in (i + 1)..rads.len() {
                let p = rads[i].mul(&rads[j]);
                if let Some(s) = p.sqrt_in_field(ambient) {
                    factor = factor.mul(&s);
                    let rj = rads.remove(j);
                    let ri = rads.remove(i);
                    let _ = (ri, rj);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (rads, factor)
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for r in m {
                write!(f, "*rt({r})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// The Scalar trait
// ---------------------------------------------------------------------------

/// The scalar operations the generic core needs.  Implemented by [`C64`]
/// (floating point) and [`Exact`] (exact radical arithmetic).
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_rat(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rat(&rat(n, 1))
    }

    fn conj(&self) -> Self;

    /// Multiplicative inverse; panics on zero.
    fn inv(&self) -> Self;

    fn div(&self, other: &Self) -> Self {
        self.clone() * other.inv()
    }

    /// √x for non-negative real x; errors when not representable.
    fn sqrt_nonneg(&self) -> Result<Self, ScalarError>;

    /// |x|; errors when not representable in the scalar domain.
    fn modulus(&self) -> Result<Self, ScalarError>;

    fn approx(&self) -> C64;

    fn is_real(&self) -> bool;

    /// Sign of a real value (exact for exact scalars).
    fn real_sign(&self) -> Sign;
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_rat(r: &Rational) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn conj(&self) -> Self {
        C64::new(self.re, -self.im)
    }

    fn inv(&self) -> Self {
        C64::new(1.0, 0.0) / self
    }

    fn sqrt_nonneg(&self) -> Result<Self, ScalarError> {
        if self.im.abs() > 1e-9 * (1.0 + self.re.abs()) {
            return Err(ScalarError::NotRepresentable(
                "sqrt of a non-real float".into(),
            ));
        }
        if self.re < -1e-9 {
            return Err(ScalarError::NegativeSqrt);
        }
        Ok(C64::new(self.re.max(0.0).sqrt(), 0.0))
    }

    fn modulus(&self) -> Result<Self, ScalarError> {
        Ok(C64::new(self.norm(), 0.0))
    }

    fn approx(&self) -> C64 {
        *self
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }

    fn real_sign(&self) -> Sign {
        if self.re > 0.0 {
            Sign::Pos
        } else if self.re < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }
}

impl Add for Exact {
    type Output = Exact;
    fn add(self, rhs: Exact) -> Exact {
        self.add_ref(&rhs)
    }
}

impl Sub for Exact {
    type Output = Exact;
    fn sub(self, rhs: Exact) -> Exact {
        self.sub_ref(&rhs)
    }
}

impl Mul for Exact {
    type Output = Exact;
    fn mul(self, rhs: Exact) -> Exact {
        self.mul_ref(&rhs)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        self.neg_ref()
    }
}

impl Zero for Exact {
    fn zero() -> Exact {
        Exact::empty(0)
    }
    fn is_zero(&self) -> bool {
        self.is_zero_val()
    }
}

impl One for Exact {
    fn one() -> Exact {
        Exact::int(1)
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_rat(r: &Rational) -> Self {
        Exact::from_rational(r.clone())
    }

    fn conj(&self) -> Self {
        self.conj_ref()
    }

    fn inv(&self) -> Self {
        self.inv_ref()
    }

    fn sqrt_nonneg(&self) -> Result<Self, ScalarError> {
        self.sqrt_nonneg_exact()
    }

    fn modulus(&self) -> Result<Self, ScalarError> {
        if self.is_real_val() {
            return Ok(match self.sign() {
                Sign::Neg => self.neg_ref(),
                _ => self.clone(),
            });
        }
        let n = self.mul_ref(&self.conj_ref());
        n.sqrt_nonneg_exact()
    }

    fn approx(&self) -> C64 {
        self.to_c64()
    }

    fn is_real(&self) -> bool {
        self.is_real_val()
    }

    fn real_sign(&self) -> Sign {
        self.sign()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> Quad {
        // (1+√5)/2
        Quad::new(rat(1, 2), rat(1, 2), 5)
    }

    #[test]
    fn quad_arithmetic_golden_ratio() {
        let p = phi();
        // φ² = φ + 1
        assert_eq!(p.mul(&p), p.add(&Quad::one()));
        // 1/φ = φ − 1
        assert_eq!(p.inv(), p.sub(&Quad::one()));
        assert!((p.to_f64() - 1.618033988749895).abs() < 1e-12);
    }

    #[test]
    fn quad_sign_cases() {
        let p = phi();
        assert_eq!(p.sign(), Sign::Pos);
        assert_eq!(p.neg().sign(), Sign::Neg);
        // 2 − √5 < 0 even though the rational part is positive
        let x = Quad::new(rat(2, 1), rat(-1, 1), 5);
        assert_eq!(x.sign(), Sign::Neg);
        let y = Quad::new(rat(3, 1), rat(-1, 1), 5);
        assert_eq!(y.sign(), Sign::Pos);
    }

    #[test]
    fn quad_sqrt_in_field() {
        // √2 is a square root of 2 inside ℚ(√2)
        let two = Quad::from_int(2);
        let s = two.sqrt_in_field(2).unwrap();
        assert_eq!(s, Quad::sqrt_d(2));
        // 3 + 2√2 = (1+√2)²
        let x = Quad::new(rat(3, 1), rat(2, 1), 2);
        let r = x.sqrt_in_field(2).unwrap();
        assert_eq!(r, Quad::new(rat(1, 1), rat(1, 1), 2));
        // φ is not a square in ℚ(√5)
        assert!(phi().sqrt_in_field(5).is_none());
    }

    #[test]
    fn quad_parse_roundtrip() {
        for s in ["1/2", "-3", "1/2+1/2*sqrt(5)", "-1/2-2*sqrt(2)", "sqrt(5)"] {
            let q = Quad::parse(s).unwrap();
            let q2 = Quad::parse(&q.to_string()).unwrap();
            assert_eq!(q, q2, "roundtrip of {s}");
        }
    }

    #[test]
    fn exact_radical_folding() {
        // √φ · √φ = φ
        let r = Exact::radical(phi());
        let sq = r.mul_ref(&r);
        assert_eq!(sq, Exact::from_quad(phi()));
        // (1/√φ) via inverse
        let inv = r.inv_ref();
        assert_eq!(inv.mul_ref(&r), Exact::int(1));
        let asf = inv.to_c64().re;
        assert!((asf - 1.0 / 1.618033988749895f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exact_sqrt_tower() {
        // √(√2) inside field ℚ(√2): ( √(√2) )⁴ = 2
        let root2 = Exact::from_quad(Quad::sqrt_d(2));
        let q = root2.sqrt_nonneg_exact().unwrap();
        let fourth = q.mul_ref(&q).mul_ref(&q).mul_ref(&q);
        assert_eq!(fourth, Exact::int(2));
    }

    #[test]
    fn exact_sign_mixed_terms() {
        // √φ − 5/4 > 0 (√φ ≈ 1.272)
        let x = Exact::radical(phi()).sub_ref(&Exact::from_rational(rat(5, 4)));
        assert_eq!(x.sign(), Sign::Pos);
        // √φ − 3/2 < 0
        let y = Exact::radical(phi()).sub_ref(&Exact::from_rational(rat(3, 2)));
        assert_eq!(y.sign(), Sign::Neg);
    }

    #[test]
    fn exact_complex_inverse() {
        // (1 + i√5)⁻¹·(1 + i√5) = 1
        let z = Exact::from_cquad(CQuad::new(
            Quad::one(),
            Quad::sqrt_d(5),
        ));
        assert_eq!(z.inv_ref().mul_ref(&z), Exact::int(1));
        // modulus of i is 1
        assert_eq!(Exact::i().modulus().unwrap(), Exact::int(1));
    }

    #[test]
    fn exact_mixed_radical_inverse() {
        // x = 1 + √φ: check x·x⁻¹ = 1 through the recursive rationalisation
        let x = Exact::int(1).add_ref(&Exact::radical(phi()));
        assert_eq!(x.mul_ref(&x.inv_ref()), Exact::int(1));
    }
}
