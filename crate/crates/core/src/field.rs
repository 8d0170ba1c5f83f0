//! Prime fields GF(q) and exact rationals of the form `count / q^exponent`.
//!
//! Hot loops elsewhere in the crate work on raw `u8` residues through the
//! [`PrimeField`] helpers; [`FieldElem`] is the checked, field-tagged value
//! used at API boundaries.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime field GF(q) with 2 ≤ q ≤ 251.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    q: u8,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;
    fn try_from(q: u32) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.q as u32
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self> {
        if q > 251 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q: q as u8 })
    }

    /// GF(2); never fails.
    pub fn gf2() -> Self {
        PrimeField { q: 2 }
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.q as u32
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u8 {
        (v % self.q as u64) as u8
    }

    /// Canonical residue of a signed integer.
    pub fn reduce_i64(self, v: i64) -> u8 {
        v.rem_euclid(self.q as i64) as u8
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        let s = a as u16 + b as u16;
        let q = self.q as u16;
        (if s >= q { s - q } else { s }) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        if a >= b {
            a - b
        } else {
            (a as u16 + self.q as u16 - b as u16) as u8
        }
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.q as u16) as u8
    }

    pub fn pow(self, a: u8, mut e: u64) -> u8 {
        let mut base = a;
        let mut acc = 1u8 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self, a: u8) -> Result<u8> {
        if a.is_multiple_of(self.q) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    pub fn elem(self, v: u64) -> FieldElem {
        FieldElem {
            value: self.reduce(v),
            field: self,
        }
    }

    pub fn zero(self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(self) -> FieldElem {
        self.elem(1)
    }

    pub fn elements(self) -> impl Iterator<Item = FieldElem> {
        (0..self.q as u64).map(move |v| self.elem(v))
    }

    /// `q^e` as an arbitrary-precision integer.
    pub fn big_pow(self, e: u32) -> BigUint {
        BigUint::from(self.q).pow(e)
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// An element of a prime field, always stored as its canonical residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u8,
    field: PrimeField,
}

impl FieldElem {
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    fn check(self, other: FieldElem) -> Result<PrimeField> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.q(), other.field.q()));
        }
        Ok(self.field)
    }

    pub fn add(self, other: FieldElem) -> Result<FieldElem> {
        let f = self.check(other)?;
        Ok(FieldElem {
            value: f.add(self.value, other.value),
            field: f,
        })
    }

    pub fn sub(self, other: FieldElem) -> Result<FieldElem> {
        let f = self.check(other)?;
        Ok(FieldElem {
            value: f.sub(self.value, other.value),
            field: f,
        })
    }

    pub fn mul(self, other: FieldElem) -> Result<FieldElem> {
        let f = self.check(other)?;
        Ok(FieldElem {
            value: f.mul(self.value, other.value),
            field: f,
        })
    }

    pub fn neg(self) -> FieldElem {
        FieldElem {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }

    pub fn inv(self) -> Result<FieldElem> {
        Ok(FieldElem {
            value: self.field.inv(self.value)?,
            field: self.field,
        })
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The exact rational `count / q^exponent`, kept unreduced.
///
/// Houses biases and agreement probabilities; comparisons between two values
/// over the same `q` are exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QPowerRational {
    #[serde(with = "biguint_dec")]
    count: BigUint,
    exponent: u32,
    q: u32,
}

mod biguint_dec {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom("bad integer"))
    }
}

impl QPowerRational {
    pub fn new(count: BigUint, exponent: u32, q: u32) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if count > BigUint::from(q).pow(exponent) {
            return Err(Error::InvalidParameter(format!(
                "count {count} exceeds {q}^{exponent}"
            )));
        }
        Ok(QPowerRational { count, exponent, q })
    }

    pub fn from_u64(count: u64, exponent: u32, q: u32) -> Result<Self> {
        Self::new(BigUint::from(count), exponent, q)
    }

    pub fn one(q: u32) -> Self {
        QPowerRational {
            count: BigUint::one(),
            exponent: 0,
            q,
        }
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.count.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        if self.count.is_zero() {
            return 0.0;
        }
        (ln_big(&self.count) - self.exponent as f64 * (self.q as f64).ln()).exp()
    }

    /// Product of two rationals over the same modulus.
    pub fn mul(&self, other: &QPowerRational) -> Result<QPowerRational> {
        if self.q != other.q {
            return Err(Error::FieldMismatch(self.q, other.q));
        }
        Ok(QPowerRational {
            count: &self.count * &other.count,
            exponent: self.exponent + other.exponent,
            q: self.q,
        })
    }

    /// Exact comparison; `None` when the moduli differ.
    pub fn try_cmp(&self, other: &QPowerRational) -> Option<Ordering> {
        if self.q != other.q {
            return None;
        }
        let q = BigUint::from(self.q);
        let lhs = &self.count * q.pow(other.exponent);
        let rhs = &other.count * q.pow(self.exponent);
        Some(lhs.cmp(&rhs))
    }

    /// `exponent − log_q(count)`, i.e. `−log_q` of the rational.
    pub fn qlog(&self) -> Result<f64> {
        if self.count.is_zero() {
            return Err(Error::LogOfZero);
        }
        if let Some(j) = exact_log(&self.count, self.q) {
            return Ok(self.exponent as f64 - j as f64);
        }
        Ok(self.exponent as f64 - ln_big(&self.count) / (self.q as f64).ln())
    }
}

impl PartialOrd for QPowerRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other)
    }
}

impl fmt::Display for QPowerRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.count, self.q, self.exponent)
    }
}

/// `Some(j)` when `x = q^j` exactly.
fn exact_log(x: &BigUint, q: u32) -> Option<u32> {
    let q = BigUint::from(q);
    let mut x = x.clone();
    let mut j = 0;
    while !x.is_one() {
        if (&x % &q).is_zero() {
            x /= &q;
            j += 1;
        } else {
            return None;
        }
    }
    Some(j)
}

/// Natural log of a big unsigned integer (> 0).
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.one().add(f2.one()).unwrap().value(), 0);
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.elem(3).mul(f5.elem(4)).unwrap().value(), 2);
        let f7 = PrimeField::new(7).unwrap();
        // exhaustive search oracle for 3b = 1 mod 7
        let b = (0..7u32).find(|b| (3 * b) % 7 == 1).unwrap();
        assert_eq!(f7.elem(3).inv().unwrap().value() as u32, b);
        assert_eq!(b, 5);
    }

    #[test]
    fn field_errors() {
        assert!(matches!(PrimeField::new(9), Err(Error::NotPrime(9))));
        assert!(matches!(PrimeField::new(257), Err(Error::NotPrime(257))));
        assert!(PrimeField::new(251).is_ok());
        let f3 = PrimeField::new(3).unwrap();
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f3.one().add(f5.one()), Err(Error::FieldMismatch(3, 5)));
        assert_eq!(f5.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u32, 3, 5, 7, 11] {
            let f = PrimeField::new(q).unwrap();
            for a in 0..q as u8 {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q as u8 {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.sub(f.add(a, b), b), a);
                    for c in 0..q as u8 {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn qlog_examples() {
        assert_eq!(QPowerRational::from_u64(1, 0, 2).unwrap().qlog().unwrap(), 0.0);
        assert_eq!(QPowerRational::from_u64(1, 5, 2).unwrap().qlog().unwrap(), 5.0);
        assert_eq!(QPowerRational::from_u64(3, 4, 3).unwrap().qlog().unwrap(), 3.0);
        assert_eq!(
            QPowerRational::from_u64(0, 4, 3).unwrap().qlog(),
            Err(Error::LogOfZero)
        );
        assert!(QPowerRational::from_u64(17, 4, 2).is_err());
    }

    #[test]
    fn exact_ordering() {
        let a = QPowerRational::from_u64(9, 4, 2).unwrap();
        let b = QPowerRational::from_u64(18, 5, 2).unwrap();
        let c = QPowerRational::from_u64(19, 5, 2).unwrap();
        assert_eq!(a.try_cmp(&b), Some(Ordering::Equal));
        assert!(a < c);
        let d = QPowerRational::from_u64(1, 1, 3).unwrap();
        assert_eq!(a.try_cmp(&d), None);
    }

    #[test]
    fn huge_counts_have_finite_logs() {
        let big = BigUint::from(3u32).pow(2000) - BigUint::one();
        let r = QPowerRational::new(big, 2000, 3).unwrap();
        let v = r.qlog().unwrap();
        assert!((0.0..1e-6).contains(&v));
    }
}
