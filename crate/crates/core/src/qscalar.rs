//! Exact scalars: rationals, Laurent polynomials in `q` and the rational
//! function field `Q(q)`, together with q-numbers, q-factorials and
//! q-binomial coefficients.
//!
//! Every [`QScalar`] is kept in a canonical form: the denominator is a genuine
//! polynomial in `q` with constant term `1`, the numerator is a Laurent
//! polynomial carrying any power-of-`q` shift, and the two are coprime. Equal
//! values therefore have identical representations, so `==` and `Hash` are
//! structural.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ScalarError;

/// Arbitrary precision rational number.
pub type Rat = BigRational;

pub(crate) fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// dense univariate polynomials over Q, index = degree

type Coeffs = Vec<Rat>;

fn trim(c: &mut Coeffs) {
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
}

fn poly_add(a: &[Rat], b: &[Rat]) -> Coeffs {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        };
        out.push(x);
    }
    trim(&mut out);
    out
}

fn poly_neg(a: &[Rat]) -> Coeffs {
    a.iter().map(|x| -x).collect()
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Coeffs {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_scale(a: &[Rat], s: &Rat) -> Coeffs {
    if s.is_zero() {
        return Vec::new();
    }
    a.iter().map(|x| x * s).collect()
}

/// Division with remainder; `b` must be nonzero.
fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Coeffs, Coeffs) {
    let lead = b.last().expect("division by zero polynomial");
    let mut rem: Coeffs = a.to_vec();
    trim(&mut rem);
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() / lead;
        for (j, y) in b.iter().enumerate() {
            rem[shift + j] -= &c * y;
        }
        quot[shift] = c;
        rem.pop();
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

/// Monic gcd by the Euclidean algorithm.
fn poly_gcd(a: &[Rat], b: &[Rat]) -> Coeffs {
    let mut x: Coeffs = a.to_vec();
    let mut y: Coeffs = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y);
        x = y;
        // keep the remainder monic to limit coefficient growth
        y = match r.last() {
            Some(l) => {
                let inv = l.recip();
                poly_scale(&r, &inv)
            }
            None => r,
        };
    }
    if let Some(l) = x.last() {
        let inv = l.recip();
        x = poly_scale(&x, &inv);
    }
    x
}

fn poly_eval(a: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

// ---------------------------------------------------------------------------

/// A Laurent polynomial `sum c_k q^k` with rational coefficients.
///
/// Stored densely from the lowest nonzero exponent upwards; the zero
/// polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LaurentQ {
    low: i64,
    coeffs: Coeffs,
}

impl LaurentQ {
    pub fn zero() -> Self {
        LaurentQ { low: 0, coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_parts(0, vec![c])
    }

    /// The monomial `c q^k`.
    pub fn monomial(c: Rat, k: i64) -> Self {
        Self::from_parts(k, vec![c])
    }

    fn from_parts(low: i64, mut coeffs: Coeffs) -> Self {
        trim(&mut coeffs);
        let lead_zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros == coeffs.len() {
            return Self::zero();
        }
        coeffs.drain(..lead_zeros);
        LaurentQ { low: low + lead_zeros as i64, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient (0 for the zero polynomial).
    pub fn low_exponent(&self) -> i64 {
        self.low
    }

    pub fn high_exponent(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    /// Iterates over `(exponent, coefficient)` pairs with nonzero coefficients,
    /// in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Rat)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn coefficient(&self, k: i64) -> Rat {
        let idx = k - self.low;
        if idx < 0 {
            return Rat::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_else(Rat::zero)
    }

    /// Constant rational if the polynomial has no `q` dependence.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.coeffs.len() {
            0 => Some(Rat::zero()),
            1 if self.low == 0 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let a = self.shifted_coeffs(low);
        let b = other.shifted_coeffs(low);
        Self::from_parts(low, poly_add(&a, &b))
    }

    fn shifted_coeffs(&self, low: i64) -> Coeffs {
        let pad = (self.low - low) as usize;
        let mut v = vec![Rat::zero(); pad];
        v.extend(self.coeffs.iter().cloned());
        v
    }

    fn neg(&self) -> Self {
        LaurentQ { low: self.low, coeffs: poly_neg(&self.coeffs) }
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.low + other.low, poly_mul(&self.coeffs, &other.coeffs))
    }

    /// Evaluates at a nonzero rational point.
    pub fn eval(&self, q: &Rat) -> Rat {
        let base = poly_eval(&self.coeffs, q);
        base * pow_rat(q, self.low)
    }

    fn fmt_sum(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            write_term(f, &mag, k)?;
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, mag: &Rat, k: i64) -> fmt::Result {
    let unit = mag.is_one();
    match (k, unit) {
        (0, _) => write!(f, "{}", mag),
        (1, true) => f.write_str("q"),
        (_, true) => write!(f, "q^{}", k),
        (1, false) => write!(f, "{}*q", mag),
        (_, false) => write!(f, "{}*q^{}", mag, k),
    }
}

fn pow_rat(q: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow(q.clone(), k as usize)
    } else {
        num_traits::pow(q.recip(), (-k) as usize)
    }
}

impl fmt::Display for LaurentQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_sum(f)
    }
}

// ---------------------------------------------------------------------------

/// An element of the rational function field `Q(q)` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QScalar {
    num: LaurentQ,
    den: LaurentQ,
}

impl QScalar {
    pub fn zero() -> Self {
        QScalar { num: LaurentQ::zero(), den: LaurentQ::constant(Rat::one()) }
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat(n))
    }

    pub fn from_rat(c: Rat) -> Self {
        Self::from_laurent(LaurentQ::constant(c))
    }

    pub fn from_laurent(num: LaurentQ) -> Self {
        QScalar { num, den: LaurentQ::constant(Rat::one()) }
    }

    /// The indeterminate `q`.
    pub fn q() -> Self {
        Self::q_pow(1)
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i64) -> Self {
        Self::from_laurent(LaurentQ::monomial(Rat::one(), k))
    }

    /// `q - 1/q`, the Hecke parameter.
    pub fn lambda() -> Self {
        Self::q() - Self::q_pow(-1)
    }

    /// Builds `num / den` and brings it to canonical form.
    pub fn from_fraction(num: LaurentQ, den: LaurentQ) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: LaurentQ, den: LaurentQ) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let shift = num.low - den.low;
        let (mut n, mut d) = (num.coeffs, den.coeffs);
        if d.len() > 1 {
            let g = poly_gcd(&n, &d);
            if g.len() > 1 {
                n = poly_divrem(&n, &g).0;
                d = poly_divrem(&d, &g).0;
            }
        }
        let c = d[0].recip();
        if !c.is_one() {
            n = poly_scale(&n, &c);
            d = poly_scale(&d, &c);
        }
        QScalar { num: LaurentQ::from_parts(shift, n), den: LaurentQ::from_parts(0, d) }
    }

    pub fn numerator(&self) -> &LaurentQ {
        &self.num
    }

    pub fn denominator(&self) -> &LaurentQ {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.coeffs.len() == 1 && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    /// True when the denominator is `1`, i.e. the value is a Laurent polynomial.
    pub fn is_laurent(&self) -> bool {
        self.den.coeffs.len() == 1
    }

    /// The value as a rational constant, if it does not depend on `q`.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.is_laurent() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn inverse(&self) -> Result<Self, ScalarError> {
        Self::from_fraction(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, k: i64) -> Result<Self, ScalarError> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Evaluates at a rational `q`. Fails when the denominator vanishes there.
    pub fn eval(&self, q: &Rat) -> Result<Rat, ScalarError> {
        if q.is_zero() && (self.num.low < 0) {
            return Err(ScalarError::Pole { at: q.to_string() });
        }
        let d = self.den.eval(q);
        if d.is_zero() {
            return Err(ScalarError::Pole { at: q.to_string() });
        }
        Ok(self.num.eval(q) / d)
    }
}

impl Default for QScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_laurent() {
            self.num.fmt_sum(f)
        } else {
            f.write_str("(")?;
            self.num.fmt_sum(f)?;
            f.write_str(")/(")?;
            self.den.fmt_sum(f)?;
            f.write_str(")")
        }
    }
}

impl<'a> Add<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn add(self, rhs: &QScalar) -> QScalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = self.num.add(&rhs.num);
            if self.is_laurent() {
                return QScalar::from_laurent(num);
            }
            return QScalar::normalize(num, self.den.clone());
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        QScalar::normalize(num, self.den.mul(&rhs.den))
    }
}

impl<'a> Sub<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn sub(self, rhs: &QScalar) -> QScalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn mul(self, rhs: &QScalar) -> QScalar {
        if self.is_zero() || rhs.is_zero() {
            return QScalar::zero();
        }
        if self.is_laurent() && rhs.is_laurent() {
            return QScalar::from_laurent(self.num.mul(&rhs.num));
        }
        QScalar::normalize(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl<'a> Div<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    /// Panics on division by zero; use [`QScalar::inverse`] for a fallible form.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &QScalar) -> QScalar {
        self * &rhs.inverse().expect("division by zero in Q(q)")
    }
}

impl Neg for &QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        QScalar { num: self.num.neg(), den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QScalar {
            type Output = QScalar;
            fn $m(self, rhs: QScalar) -> QScalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        -&self
    }
}

// ---------------------------------------------------------------------------
// q-combinatorics

/// The q-number `p_q = (q^p - q^-p) / (q - q^-1) = q^(p-1) + q^(p-3) + ... + q^(1-p)`.
///
/// Defined for every integer by the same formula; `0_q = 0` and `(-p)_q = -p_q`.
pub fn q_number(p: i64) -> QScalar {
    if p == 0 {
        return QScalar::zero();
    }
    let n = p.abs();
    let mut acc = LaurentQ::zero();
    for m in 0..n {
        acc = acc.add(&LaurentQ::monomial(Rat::one(), n - 1 - 2 * m));
    }
    let v = QScalar::from_laurent(acc);
    if p < 0 {
        -v
    } else {
        v
    }
}

/// `p_q! = 1_q 2_q ... p_q`, with `0_q! = 1`.
pub fn q_factorial(p: u32) -> QScalar {
    (1..=p as i64).fold(QScalar::one(), |acc, k| &acc * &q_number(k))
}

/// Symmetric q-binomial coefficient `p_q! / (i_q! (p-i)_q!)`.
pub fn q_binomial(p: i64, i: i64) -> Result<QScalar, ScalarError> {
    if p < 0 || i < 0 || i > p {
        return Err(ScalarError::OutOfRange(format!("q_binomial({p}, {i}) needs 0 <= i <= p")));
    }
    let num = q_factorial(p as u32);
    let den = &q_factorial(i as u32) * &q_factorial((p - i) as u32);
    Ok(&num / &den)
}

// ---------------------------------------------------------------------------
// parsing

/// Parses a scalar written in the text grammar used by R-matrix files and
/// reports:
///
/// ```text
/// expression ::= sum | '(' sum ')' '/' '(' sum ')'
/// sum        ::= term (('+'|'-') term)*
/// term       ::= rat ('*'? qpow)? | qpow
/// qpow       ::= 'q' ('^' int)?
/// rat        ::= int ('/' posint)?
/// ```
///
/// A leading sign on the first term is accepted. Whitespace is ignored.
pub fn parse_scalar(text: &str) -> Result<QScalar, ScalarError> {
    let mut p = Parser { chars: text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(), pos: 0, len: text.len() };
    let value = if p.peek() == Some('(') {
        p.bump();
        let num = p.sum()?;
        p.expect(')')?;
        p.expect('/')?;
        p.expect('(')?;
        let den = p.sum()?;
        p.expect(')')?;
        QScalar::from_fraction(num, den)?
    } else {
        QScalar::from_laurent(p.sum()?)
    };
    if p.peek().is_some() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(value)
}

impl std::str::FromStr for QScalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_scalar(s)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(i, _)| i).unwrap_or(self.len)
    }

    fn error(&self, msg: &str) -> ScalarError {
        ScalarError::Syntax { position: self.offset(), message: msg.to_string() }
    }

    fn expect(&mut self, c: char) -> Result<(), ScalarError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<LaurentQ, ScalarError> {
        let mut negative = false;
        match self.peek() {
            Some('-') => {
                negative = true;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        let mut acc = LaurentQ::zero();
        loop {
            let t = self.term()?;
            acc = acc.add(&if negative { t.neg() } else { t });
            match self.peek() {
                Some('+') => negative = false,
                Some('-') => negative = true,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<LaurentQ, ScalarError> {
        match self.peek() {
            Some('q') => {
                let k = self.qpow()?;
                Ok(LaurentQ::monomial(Rat::one(), k))
            }
            Some(c) if c.is_ascii_digit() => {
                let c = self.rational()?;
                match self.peek() {
                    Some('*') => {
                        self.pos += 1;
                        if self.peek() != Some('q') {
                            return Err(self.error("expected 'q' after '*'"));
                        }
                        let k = self.qpow()?;
                        Ok(LaurentQ::monomial(c, k))
                    }
                    Some('q') => {
                        let k = self.qpow()?;
                        Ok(LaurentQ::monomial(c, k))
                    }
                    _ => Ok(LaurentQ::constant(c)),
                }
            }
            _ => Err(self.error("expected a number or 'q'")),
        }
    }

    fn qpow(&mut self) -> Result<i64, ScalarError> {
        self.expect('q')?;
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        let negative = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let digits = self.digits()?;
        let k: i64 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        Ok(if negative { -k } else { k })
    }

    fn digits(&mut self) -> Result<String, ScalarError> {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.pos += 1;
        }
        if s.is_empty() {
            return Err(self.error("expected digits"));
        }
        Ok(s)
    }

    fn rational(&mut self) -> Result<Rat, ScalarError> {
        let n: BigInt = self.digits()?.parse().expect("digit string");
        if self.peek() == Some('/') && self.chars.get(self.pos + 1).is_some_and(|&(_, c)| c.is_ascii_digit()) {
            self.pos += 1;
            let d: BigInt = self.digits()?.parse().expect("digit string");
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            return Ok(Rat::new(n, d));
        }
        Ok(Rat::from_integer(n))
    }
}

/// Parses a plain rational such as `3`, `-2/5`.
pub fn parse_rat(text: &str) -> Result<Rat, ScalarError> {
    let v = parse_scalar(text)?;
    v.as_rat().ok_or_else(|| ScalarError::Syntax { position: 0, message: format!("'{text}' is not a rational constant") })
}
