//! Working fields. Every computation in the crate is generic over a [`Field`]
//! context object that knows how to do arithmetic on its elements and which
//! element plays the role of `q`.
//!
//! Three fields are provided:
//!
//! * [`RationalFunctions`]: `Q(q)` with `q` an indeterminate (symbolic mode);
//! * [`Rationals`]: `Q` with `q` specialized to a rational value;
//! * [`PrimeField`]: `F_p` with `q` specialized to a residue.
//!
//! The map from `Q(q)` into a specialized field is [`Field::embed`], which is a
//! ring homomorphism wherever it is defined.

use std::fmt::{self, Debug};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, ScalarError};
use crate::qscalar::{QScalar, Rat};

pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, n: i64) -> Self::Elem;
    /// The image of the deformation parameter `q`.
    fn q(&self) -> Self::Elem;

    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Image of an element of `Q(q)`.
    fn embed(&self, x: &QScalar) -> Result<Self::Elem, FieldError>;
    /// Text form in the scalar grammar.
    fn render(&self, a: &Self::Elem) -> String;
    /// The element as a small integer, when it is one.
    fn as_integer(&self, a: &Self::Elem) -> Option<i64>;
    fn spec(&self) -> FieldSpec;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn try_div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, FieldError> {
        let inv = self.inv(b).ok_or_else(|| FieldError::NotInvertible(self.render(b), self.spec().to_string()))?;
        Ok(self.mul(a, &inv))
    }

    /// `q^k` for any integer `k`.
    fn q_pow(&self, k: i64) -> Result<Self::Elem, FieldError> {
        let base = if k < 0 {
            let q = self.q();
            self.inv(&q).ok_or_else(|| FieldError::NotInvertible("q".into(), self.spec().to_string()))?
        } else {
            self.q()
        };
        let mut acc = self.one();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        Ok(acc)
    }

    /// The q-number `k_q` in this field.
    fn q_number(&self, k: i64) -> Self::Elem {
        self.embed(&crate::qscalar::q_number(k)).expect("q-numbers are Laurent polynomials")
    }
}

/// How the deformation parameter is treated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FieldSpec {
    Symbolic,
    Evaluated { q: String },
    Modular { prime: u64, q: u64 },
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Symbolic => f.write_str("Q(q)"),
            FieldSpec::Evaluated { q } => write!(f, "Q at q = {q}"),
            FieldSpec::Modular { prime, q } => write!(f, "F_{prime} at q = {q}"),
        }
    }
}

// ---------------------------------------------------------------------------

/// `Q(q)`, the symbolic field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RationalFunctions;

impl Field for RationalFunctions {
    type Elem = QScalar;

    fn zero(&self) -> QScalar {
        QScalar::zero()
    }
    fn one(&self) -> QScalar {
        QScalar::one()
    }
    fn from_i64(&self, n: i64) -> QScalar {
        QScalar::from_int(n)
    }
    fn q(&self) -> QScalar {
        QScalar::q()
    }
    fn is_zero(&self, a: &QScalar) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &QScalar, b: &QScalar) -> QScalar {
        a + b
    }
    fn sub(&self, a: &QScalar, b: &QScalar) -> QScalar {
        a - b
    }
    fn mul(&self, a: &QScalar, b: &QScalar) -> QScalar {
        a * b
    }
    fn neg(&self, a: &QScalar) -> QScalar {
        -a
    }
    fn inv(&self, a: &QScalar) -> Option<QScalar> {
        a.inverse().ok()
    }
    fn embed(&self, x: &QScalar) -> Result<QScalar, FieldError> {
        Ok(x.clone())
    }
    fn render(&self, a: &QScalar) -> String {
        a.to_string()
    }
    fn as_integer(&self, a: &QScalar) -> Option<i64> {
        let r = a.as_rat()?;
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Symbolic
    }
    fn q_pow(&self, k: i64) -> Result<QScalar, FieldError> {
        Ok(QScalar::q_pow(k))
    }
    fn q_number(&self, k: i64) -> QScalar {
        crate::qscalar::q_number(k)
    }
}

// ---------------------------------------------------------------------------

/// `Q` with `q` evaluated at a fixed nonzero rational.
///
/// `q = 1` is accepted: it is the classical (involutive) point used with the
/// permutation R-matrix. `q = 0` and `q = -1` are rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationals {
    q: Rat,
}

impl Rationals {
    pub fn new(q: Rat) -> Result<Self, FieldError> {
        if q.is_zero() || q == -Rat::one() {
            return Err(FieldError::InvalidSpec(format!("q = {q} is not allowed")));
        }
        Ok(Rationals { q })
    }

    pub fn classical() -> Self {
        Rationals { q: Rat::one() }
    }

    pub fn q_value(&self) -> &Rat {
        &self.q
    }
}

impl Field for Rationals {
    type Elem = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        Rat::one()
    }
    fn from_i64(&self, n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }
    fn q(&self) -> Rat {
        self.q.clone()
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        a - b
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn inv(&self, a: &Rat) -> Option<Rat> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn embed(&self, x: &QScalar) -> Result<Rat, FieldError> {
        Ok(x.eval(&self.q)?)
    }
    fn render(&self, a: &Rat) -> String {
        a.to_string()
    }
    fn as_integer(&self, a: &Rat) -> Option<i64> {
        if a.is_integer() {
            a.to_integer().to_i64()
        } else {
            None
        }
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Evaluated { q: self.q.to_string() }
    }
}

// ---------------------------------------------------------------------------

/// The Mersenne prime `2^61 - 1`, the default modulus.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

/// `F_p` with `q` specialized to a residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    prime: u64,
    q: u64,
}

impl PrimeField {
    /// Checks that `prime` is prime, below `2^63`, and `q` is not `0` or `+-1`.
    pub fn new(prime: u64, q: u64) -> Result<Self, FieldError> {
        if prime >= 1 << 63 || !is_prime(prime) {
            return Err(FieldError::InvalidSpec(format!("{prime} is not a prime below 2^63")));
        }
        let q = q % prime;
        if q == 0 || q == 1 || q == prime - 1 {
            return Err(FieldError::InvalidSpec(format!("q = {q} is 0 or +-1 mod {prime}")));
        }
        Ok(PrimeField { prime, q })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn q_residue(&self) -> u64 {
        self.q
    }

    /// Multiplicative order of `q`, if it is at most `bound`.
    pub fn small_order_of(prime: u64, q: u64, bound: u64) -> Option<u64> {
        let mut acc = q % prime;
        for k in 1..=bound {
            if acc == 1 {
                return Some(k);
            }
            acc = mulmod(acc, q, prime);
        }
        None
    }

    fn reduce_big(&self, n: &BigInt) -> u64 {
        let m = BigInt::from(self.prime);
        n.mod_floor(&m).to_u64().expect("reduced residue")
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.prime as i64) as u64
    }
    fn q(&self) -> u64 {
        self.q
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.prime {
            s - self.prime
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.prime - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mulmod(*a, *b, self.prime)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.prime - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| powmod(*a, self.prime - 2, self.prime))
    }
    fn embed(&self, x: &QScalar) -> Result<u64, FieldError> {
        let eval = |l: &crate::qscalar::LaurentQ| -> Result<u64, FieldError> {
            let mut acc = 0u64;
            for (k, c) in l.terms() {
                let n = self.reduce_big(c.numer());
                let d = self.reduce_big(c.denom());
                let d_inv = self
                    .inv(&d)
                    .ok_or_else(|| FieldError::Specialization(ScalarError::Pole { at: format!("coefficient {c} mod {}", self.prime) }))?;
                let term = self.mul(&self.mul(&n, &d_inv), &self.q_pow(k)?);
                acc = self.add(&acc, &term);
            }
            Ok(acc)
        };
        let num = eval(x.numerator())?;
        let den = eval(x.denominator())?;
        let den_inv =
            self.inv(&den).ok_or_else(|| FieldError::Specialization(ScalarError::Pole { at: format!("{} mod {}", self.q, self.prime) }))?;
        Ok(self.mul(&num, &den_inv))
    }
    fn render(&self, a: &u64) -> String {
        a.to_string()
    }
    fn as_integer(&self, a: &u64) -> Option<i64> {
        i64::try_from(*a).ok()
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Modular { prime: self.prime, q: self.q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qscalar::{parse_scalar, q_number};

    #[test]
    fn primes() {
        assert!(is_prime(DEFAULT_PRIME));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(!is_prime(1));
        assert!(!is_prime(561));
    }

    #[test]
    fn specializations() {
        let f = Rationals::new(Rat::from_integer(2.into())).unwrap();
        assert_eq!(f.embed(&QScalar::lambda()).unwrap(), Rat::new(3.into(), 2.into()));
        let c = Rationals::classical();
        assert_eq!(c.embed(&q_number(5)).unwrap(), Rat::from_integer(5.into()));
        let pole = parse_scalar("(q)/(q-1)").unwrap();
        assert!(matches!(c.embed(&pole), Err(FieldError::Specialization(_))));
        assert!(Rationals::new(Rat::zero()).is_err());
        assert!(Rationals::new(-Rat::one()).is_err());
    }

    #[test]
    fn modular_embedding_is_multiplicative() {
        let f = PrimeField::new(DEFAULT_PRIME, 123_456_789).unwrap();
        let a = parse_scalar("(3/2*q^2 - q^-1)/(q + 7)").unwrap();
        let b = parse_scalar("q^3 - 5/3").unwrap();
        let ab = f.embed(&(&a * &b)).unwrap();
        assert_eq!(ab, f.mul(&f.embed(&a).unwrap(), &f.embed(&b).unwrap()));
        let s = f.embed(&(&a + &b)).unwrap();
        assert_eq!(s, f.add(&f.embed(&a).unwrap(), &f.embed(&b).unwrap()));
    }

    #[test]
    fn modular_rejects_bad_q() {
        assert!(PrimeField::new(101, 1).is_err());
        assert!(PrimeField::new(101, 100).is_err());
        assert!(PrimeField::new(100, 3).is_err());
        // 10 has order 4 mod 101
        assert_eq!(PrimeField::small_order_of(101, 10, 8), Some(4));
        assert_eq!(PrimeField::small_order_of(101, 2, 8), None);
    }
}
