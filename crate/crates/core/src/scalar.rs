//! Scalar abstraction shared by the real-valued parts of the crate.
//!
//! Root bisection, limit estimates and extended sequences are written against
//! [`Scalar`], so the same code runs with `f32`, `f64` or exact
//! [`BigRational`]. The bounds checks never go through this trait; they are
//! always exact.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug + Send + Sync {
    /// Nearest representable value of an exact rational.
    fn from_ratio(r: &BigRational) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("every scalar represents small integers")
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl Scalar for f64 {
    fn from_ratio(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(r: &BigRational) -> Self {
        r.to_f64().map(|v| v as f32).unwrap_or(f32::NAN)
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Renders a rational as `p/q`, always with an explicit denominator.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`. The result is reduced.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || Error::ParseRatio(s.to_string());
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p = BigInt::from_str_radix(p, 10).map_err(|_| bad())?;
    let q = BigInt::from_str_radix(q, 10).map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

pub fn ratio_from_u64(p: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn ratio_int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// `serde(with = ...)` adapter writing rationals as `p/q` strings.
pub mod ratio_str {
    use num_rational::BigRational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_ratio(&s).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_keeps_unit_denominator() {
        assert_eq!(format_ratio(&ratio_int(2)), "2/1");
        assert_eq!(format_ratio(&ratio_from_u64(6, 4)), "3/2");
        assert_eq!(format_ratio(&-ratio_from_u64(1, 3)), "-1/3");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!(parse_ratio("5").unwrap(), ratio_int(5));
        assert_eq!(parse_ratio(" -4/6 ").unwrap(), -ratio_from_u64(2, 3));
        assert_eq!(parse_ratio("3/-9").unwrap(), -ratio_from_u64(1, 3));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x/2").is_err());
        assert!(parse_ratio("").is_err());
    }

    #[test]
    fn huge_ratio_converts_to_float() {
        let big = BigInt::from(3u8).pow(5000u32);
        let r = BigRational::new(big.clone() * BigInt::from(3u8), big * BigInt::from(2u8));
        assert_eq!(f64::from_ratio(&r), 1.5);
    }

    proptest::proptest! {
        #[test]
        fn ratio_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = BigRational::new(BigInt::from(p), BigInt::from(q));
            proptest::prop_assert_eq!(parse_ratio(&format_ratio(&r)).unwrap(), r);
        }
    }
}
