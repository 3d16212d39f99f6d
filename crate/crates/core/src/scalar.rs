//! Coordinate fields used by the geometric realizations.
//!
//! Exact fields give exact predicates; `f64` compares against [`TAU`].

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Tolerance for float predicates.
pub const TAU: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Tag written into serialized systems.
    const NUMBER_SYSTEM: &'static str;
    const EXACT: bool;

    /// Sign relative to zero; `Equal` inside the tolerance band for inexact fields.
    fn sign(&self) -> Ordering;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// `(cos, sin)` of `2π/k`, if representable.
    fn unit_rotation(k: u32) -> Option<(Self, Self)>;
    fn encode(&self) -> String;
    fn decode(s: &str) -> Option<Self>;

    fn cmp_s(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).sign()
    }
    fn abs_s(&self) -> Self {
        if self.sign() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn half(&self) -> Self {
        self.clone() / Self::from_ratio(2, 1)
    }
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn encode_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn decode_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl Scalar for BigRational {
    const NUMBER_SYSTEM: &'static str = "rational";
    const EXACT: bool = true;

    fn sign(&self) -> Ordering {
        self.cmp(&BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        ratio(num, den)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn unit_rotation(k: u32) -> Option<(Self, Self)> {
        match k {
            1 => Some((ratio(1, 1), ratio(0, 1))),
            2 => Some((ratio(-1, 1), ratio(0, 1))),
            4 => Some((ratio(0, 1), ratio(1, 1))),
            _ => None,
        }
    }
    fn encode(&self) -> String {
        encode_rational(self)
    }
    fn decode(s: &str) -> Option<Self> {
        decode_rational(s)
    }
}

/// `a + b·√3` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt3 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt3 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QSqrt3 { a, b }
    }
    pub fn sqrt3() -> Self {
        QSqrt3::new(BigRational::zero(), BigRational::one())
    }
    fn conj(&self) -> Self {
        QSqrt3::new(self.a.clone(), -self.b.clone())
    }
    fn norm(&self) -> BigRational {
        &self.a * &self.a - ratio(3, 1) * &self.b * &self.b
    }
}

impl Zero for QSqrt3 {
    fn zero() -> Self {
        QSqrt3::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QSqrt3 {
    fn one() -> Self {
        QSqrt3::new(BigRational::one(), BigRational::zero())
    }
}

impl Add for QSqrt3 {
    type Output = QSqrt3;
    fn add(self, o: QSqrt3) -> QSqrt3 {
        QSqrt3::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, o: QSqrt3) -> QSqrt3 {
        QSqrt3::new(self.a - o.a, self.b - o.b)
    }
}

impl Mul for QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, o: QSqrt3) -> QSqrt3 {
        let three = ratio(3, 1);
        QSqrt3::new(&self.a * &o.a + three * &self.b * &o.b, &self.a * &o.b + &self.b * &o.a)
    }
}

impl Div for QSqrt3 {
    type Output = QSqrt3;
    fn div(self, o: QSqrt3) -> QSqrt3 {
        let n = o.norm();
        assert!(!n.is_zero(), "division by zero in Q(sqrt3)");
        let p = self * o.conj();
        QSqrt3::new(p.a / &n, p.b / n)
    }
}

impl Neg for QSqrt3 {
    type Output = QSqrt3;
    fn neg(self) -> QSqrt3 {
        QSqrt3::new(-self.a, -self.b)
    }
}

impl Scalar for QSqrt3 {
    const NUMBER_SYSTEM: &'static str = "rational-sqrt3";
    const EXACT: bool = true;

    fn sign(&self) -> Ordering {
        let sa = self.a.sign_ord();
        let sb = self.b.sign_ord();
        if sa == sb || sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal {
            return sb;
        }
        // opposite signs: the larger of a² and 3b² wins
        let lhs = &self.a * &self.a;
        let rhs = ratio(3, 1) * &self.b * &self.b;
        if lhs > rhs {
            sa
        } else {
            sb
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        QSqrt3::new(ratio(num, den), BigRational::zero())
    }
    fn to_f64(&self) -> f64 {
        Scalar::to_f64(&self.a) + Scalar::to_f64(&self.b) * 3f64.sqrt()
    }
    fn unit_rotation(k: u32) -> Option<(Self, Self)> {
        let half_root = QSqrt3::new(BigRational::zero(), ratio(1, 2));
        match k {
            1 | 2 | 4 => {
                let (c, s) = BigRational::unit_rotation(k)?;
                Some((QSqrt3::new(c, BigRational::zero()), QSqrt3::new(s, BigRational::zero())))
            }
            3 => Some((QSqrt3::from_ratio(-1, 2), half_root)),
            6 => Some((QSqrt3::from_ratio(1, 2), half_root)),
            _ => None,
        }
    }
    fn encode(&self) -> String {
        if self.b.is_zero() {
            encode_rational(&self.a)
        } else {
            format!("{}+{}r3", encode_rational(&self.a), encode_rational(&self.b))
        }
    }
    fn decode(s: &str) -> Option<Self> {
        match s.strip_suffix("r3") {
            Some(body) => {
                // the separator is the last '+' that is not a leading sign
                let idx = body.char_indices().skip(1).filter(|&(_, c)| c == '+').map(|(i, _)| i).last()?;
                Some(QSqrt3::new(decode_rational(&body[..idx])?, decode_rational(&body[idx + 1..])?))
            }
            None => Some(QSqrt3::new(decode_rational(s)?, BigRational::zero())),
        }
    }
}

trait SignOrd {
    fn sign_ord(&self) -> Ordering;
}

impl SignOrd for BigRational {
    fn sign_ord(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

impl Scalar for f64 {
    const NUMBER_SYSTEM: &'static str = "float";
    const EXACT: bool = false;

    fn sign(&self) -> Ordering {
        if self.abs() <= TAU {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn unit_rotation(k: u32) -> Option<(Self, Self)> {
        if k == 0 {
            return None;
        }
        let t = std::f64::consts::TAU / k as f64;
        Some((t.cos(), t.sin()))
    }
    fn encode(&self) -> String {
        format!("{:?}", self)
    }
    fn decode(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt3_sign_and_inverse() {
        let x = QSqrt3::new(ratio(2, 1), ratio(-1, 1)); // 2 - √3 > 0
        assert_eq!(x.sign(), Ordering::Greater);
        let y = QSqrt3::new(ratio(1, 1), ratio(-1, 1)); // 1 - √3 < 0
        assert_eq!(y.sign(), Ordering::Less);
        assert_eq!(x.clone() / x.clone(), QSqrt3::one());
        let (c, s) = QSqrt3::unit_rotation(6).unwrap();
        assert_eq!(c.clone() * c + s.clone() * s, QSqrt3::one());
    }

    #[test]
    fn encode_round_trip() {
        let x = QSqrt3::new(ratio(-3, 4), ratio(5, 7));
        assert_eq!(QSqrt3::decode(&x.encode()), Some(x));
        let q = ratio(-9, 2);
        assert_eq!(BigRational::decode(&q.encode()), Some(q));
        let y = QSqrt3::new(ratio(1, 3), ratio(-2, 1));
        assert_eq!(QSqrt3::decode(&y.encode()), Some(y));
    }
}
