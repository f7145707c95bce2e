//! Exact dyadic rationals `n / 2^e`.
//!
//! Every measure and function value in the crate is a [`Dyadic`]. Values are
//! kept in canonical form (odd numerator, or zero with exponent zero), so
//! structural equality is numeric equality. Arithmetic is exact; an operation
//! whose result does not fit in the 128-bit numerator panics rather than
//! rounding.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest exponent a canonical value may carry. Keeps `1 << exp` inside i128.
pub const MAX_EXPONENT: u32 = 120;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseDyadicError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("`{0}` is not a dyadic rational (denominator must be a power of two)")]
    NotDyadic(String),
    #[error("`{0}` is out of the representable range")]
    Overflow(String),
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// `num / 2^exp`, reduced.
    pub fn new(num: i128, exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let tz = num.trailing_zeros().min(exp);
        let exp = exp - tz;
        assert!(exp <= MAX_EXPONENT, "dyadic exponent {exp} exceeds {MAX_EXPONENT}");
        Dyadic { num: num >> tz, exp }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(n as i128, 0)
    }

    /// `2^-e`.
    pub fn unit(e: u32) -> Self {
        Self::new(1, e)
    }

    pub fn numerator(self) -> i128 {
        self.num
    }

    /// Base-two logarithm of the reduced denominator.
    pub fn log2_denominator(self) -> u32 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_negative(self) -> bool {
        self.num < 0
    }

    pub fn abs(self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Multiply by `2^shift` (negative shift divides).
    pub fn mul_pow2(self, shift: i32) -> Self {
        if self.num == 0 {
            return self;
        }
        if shift >= 0 {
            let s = shift as u32;
            if s <= self.exp {
                Dyadic::new(self.num, self.exp - s)
            } else {
                Dyadic::new(checked_shl(self.num, s - self.exp), 0)
            }
        } else {
            Dyadic::new(self.num, self.exp + shift.unsigned_abs())
        }
    }

    /// The integer `m` with `self == m / 2^e`, if the value lies on that grid.
    pub fn to_grid(self, e: u32) -> Option<i128> {
        if self.exp > e {
            return None;
        }
        let s = e - self.exp;
        if self.num == 0 {
            return Some(0);
        }
        if s >= 127 {
            return None;
        }
        self.num.checked_mul(1i128 << s)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(1) << self.exp as usize)
    }

    /// Exact conversion from a rational whose denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        use num_traits::{One, ToPrimitive};
        let den = r.denom();
        let bits = den.bits();
        if bits == 0 || (den.clone() & (den.clone() - BigInt::one())) != BigInt::from(0) {
            return None;
        }
        let exp = (bits - 1) as u32;
        let num = r.numer().to_i128()?;
        (exp <= MAX_EXPONENT).then(|| Dyadic::new(num, exp))
    }

    fn align(self, other: Self) -> (i128, i128, u32) {
        let e = self.exp.max(other.exp);
        (
            checked_shl(self.num, e - self.exp),
            checked_shl(other.num, e - other.exp),
            e,
        )
    }
}

fn checked_shl(n: i128, s: u32) -> i128 {
    if n == 0 {
        return 0;
    }
    let out = n.checked_mul(1i128.checked_shl(s).filter(|_| s < 127).expect("dyadic overflow"));
    out.expect("dyadic overflow")
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Self) -> Dyadic {
        let (a, b, e) = self.align(rhs);
        Dyadic::new(a.checked_add(b).expect("dyadic overflow"), e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Self) -> Dyadic {
        let (a, b, e) = self.align(rhs);
        Dyadic::new(a.checked_sub(b).expect("dyadic overflow"), e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Dyadic {
        Dyadic::new(
            self.num.checked_mul(rhs.num).expect("dyadic overflow"),
            self.exp + rhs.exp,
        )
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dyadic {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.copied().sum()
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1i128 << self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts integers (`3`), fractions with a power-of-two denominator
/// (`5/16`) and terminating decimals whose value is dyadic (`0.3125`).
impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = crate::ingest::parse_rational(s).map_err(|e| match e {
            crate::ingest::RationalParseError::Empty => ParseDyadicError::Empty,
            crate::ingest::RationalParseError::Malformed(m) => ParseDyadicError::Malformed(m),
        })?;
        let den = r.denom();
        let is_pow2 = den.bits() > 0 && (den.clone() & (den.clone() - BigInt::from(1))) == BigInt::from(0);
        if !is_pow2 {
            return Err(ParseDyadicError::NotDyadic(s.to_string()));
        }
        Dyadic::from_rational(&r).ok_or_else(|| ParseDyadicError::Overflow(s.to_string()))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i128, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    #[test]
    fn canonical_form() {
        assert_eq!(d(4, 3), d(1, 1));
        assert_eq!(d(0, 9).log2_denominator(), 0);
        assert_eq!(d(6, 0).numerator(), 6);
        assert_eq!(d(-12, 4), d(-3, 2));
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(d(1, 1) + d(1, 2), d(3, 2));
        assert_eq!(d(1, 2) - d(3, 2), d(-1, 1));
        assert_eq!(d(3, 2) * d(5, 3), d(15, 5));
        assert_eq!(d(1, 1) + d(1, 1), Dyadic::ONE);
        assert_eq!(d(3, 0).mul_pow2(-2), d(3, 2));
        assert_eq!(d(3, 2).mul_pow2(3), Dyadic::from_int(6));
    }

    #[test]
    fn ordering() {
        assert!(d(1, 2) < d(1, 1));
        assert!(d(-1, 1) < Dyadic::ZERO);
        assert_eq!(d(5, 4).max(d(1, 2)), d(5, 4));
    }

    #[test]
    fn grid_projection() {
        assert_eq!(d(5, 4).to_grid(4), Some(5));
        assert_eq!(d(5, 4).to_grid(6), Some(20));
        assert_eq!(d(5, 4).to_grid(3), None);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("5/16".parse::<Dyadic>().unwrap(), d(5, 4));
        assert_eq!("0.3125".parse::<Dyadic>().unwrap(), d(5, 4));
        assert_eq!("-3".parse::<Dyadic>().unwrap(), Dyadic::from_int(-3));
        assert_eq!(d(5, 4).to_string(), "5/16");
        assert_eq!(Dyadic::from_int(2).to_string(), "2");
        assert!(matches!("1/3".parse::<Dyadic>(), Err(ParseDyadicError::NotDyadic(_))));
        assert!("x".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rational_round_trip() {
        let x = d(-7, 5);
        assert_eq!(Dyadic::from_rational(&x.to_rational()), Some(x));
    }
}
