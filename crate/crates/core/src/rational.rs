//! Exact rational helpers and the `"p/q"` string format used in every document.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Fractional part in [0, 1).
pub fn fract(x: &Q) -> Q {
    x - x.floor()
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if is_integer(x) {
        x.numer().to_i64()
    } else {
        None
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub mod serde_q {
    //! `#[serde(with = "serde_q")]` for a single rational.
    use super::{format_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-4/6"), Some(frac(-2, 3)));
        assert_eq!(parse_q(" 7 "), Some(q(7)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(format_q(&frac(6, 3)), "2");
        assert_eq!(format_q(&frac(-1, 648)), "-1/648");
    }

    #[test]
    fn fractional_part_of_negatives() {
        assert_eq!(fract(&frac(-1, 3)), frac(2, 3));
        assert_eq!(fract(&frac(-4, 3)), frac(2, 3));
        assert_eq!(fract(&q(-2)), q(0));
    }
}
