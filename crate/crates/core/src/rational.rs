//! Exact rational scalars.
//!
//! Every probability and reward in a model is a [`Rational`]. Values that fit
//! in a pair of `i64` are kept in a small representation and promoted to
//! arbitrary precision only when an operation overflows, so the common case
//! (dyadic probabilities, small integer rewards) stays allocation-free.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(Ratio::from_integer(1)))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(Repr::Small(Ratio::from_integer(value)))
    }

    /// `numer / denom`, reduced. `None` when `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Option<Self> {
        if denom == 0 {
            return None;
        }
        // i64::MIN cannot be negated inside Ratio::new, go through BigInt.
        if numer == i64::MIN || denom == i64::MIN {
            return Some(Self::from_big(BigRational::new(numer.into(), denom.into())));
        }
        Some(Rational(Repr::Small(Ratio::new(numer, denom))))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Option<Self> {
        if denom.is_zero() {
            return None;
        }
        Some(Self::from_big(BigRational::new(numer, denom)))
    }

    /// `1 / 2^k`.
    pub fn dyadic(k: u32) -> Self {
        let denom = BigInt::one() << k as usize;
        Self::from_big(BigRational::new(BigInt::one(), denom))
    }

    fn from_big(value: BigRational) -> Self {
        match (value.numer().to_i64(), value.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                Rational(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => Rational(Repr::Big(value)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw((*r.numer()).into(), (*r.denom()).into()),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.numer()).into(),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.denom()).into(),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    /// Whether the value lies in the closed unit interval.
    pub fn is_probability(&self) -> bool {
        !self.is_negative() && *self <= Rational::one()
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64_exact(value: f64) -> Option<Self> {
        BigRational::from_float(value).map(Self::from_big)
    }

    fn binary(
        &self,
        rhs: &Self,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Self {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = small(a, b) {
                if *r.numer() != i64::MIN {
                    return Rational(Repr::Small(r));
                }
            }
        }
        Self::from_big(big(self.to_big(), rhs.to_big()))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // canonical form: a value that fits is never stored as Big
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Repr::Big(b) => {
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division of a rational by zero");
        self.binary(rhs, |a, b| a.checked_div(b), |a, b| a / b)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = &*self + &rhs;
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(r) if *r.numer() != i64::MIN => Rational(Repr::Small(-r)),
            _ => Rational::from_big(-self.to_big()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

/// Always `numer/denom`, also for integers, so files round-trip bit-exactly.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(text: &str, whole: &str) -> Result<BigInt, ParseRationalError> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    text.parse::<BigInt>()
        .map_err(|_| ParseRationalError::Malformed(whole.to_string()))
}

/// Parses a decimal literal such as `0.25`, `-3`, `1.5e-2` exactly.
fn parse_decimal(text: &str) -> Result<Rational, ParseRationalError> {
    let malformed = || ParseRationalError::Malformed(text.to_string());
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..].parse().map_err(|_| malformed())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (sign, unsigned) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match unsigned.split_once('.') {
        Some((i, f)) => (i, f),
        None => (unsigned, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().map_err(|_| malformed())?;
    numer *= sign;
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 4096 {
        return Err(malformed());
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(Rational::from_big(value))
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `num/den`, an integer, or a decimal literal; all exact.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if let Some((n, d)) = s.split_once('/') {
            let numer = parse_int(n.trim(), s)?;
            let denom = parse_int(d.trim(), s)?;
            return Rational::from_bigints(numer, denom)
                .ok_or_else(|| ParseRationalError::ZeroDenominator(s.to_string()));
        }
        parse_decimal(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Literal {
            Text(String),
            Number(serde_json::Number),
        }
        // JSON numbers are read through their shortest decimal text, so 0.1 is 1/10.
        let text = match Literal::deserialize(deserializer)? {
            Literal::Text(t) => t,
            Literal::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_normalizes() {
        assert_eq!(r("2/4"), Rational::new(1, 2).unwrap());
        assert_eq!(r("-3/-6").to_string(), "1/2");
        assert_eq!(r("3/-6").to_string(), "-1/2");
        assert_eq!(r("7").to_string(), "7/1");
        assert_eq!(r("0.1"), Rational::new(1, 10).unwrap());
        assert_eq!(r("-1.25e1"), Rational::new(-25, 2).unwrap());
        assert_eq!(r(".5"), Rational::new(1, 2).unwrap());
    }

    #[test]
    fn rejects_bad_literals() {
        assert_eq!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator("1/0".into()))
        );
        assert!("".parse::<Rational>().is_err());
        assert!("a/2".parse::<Rational>().is_err());
        assert!("1/2/3".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
        assert!("--1".parse::<Rational>().is_err());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::new(i64::MAX, 1).unwrap();
        let sum = &big + &big;
        assert_eq!(sum.numer(), BigInt::from(i64::MAX) * 2);
        let back = &sum - &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(_)));
        let tiny = Rational::dyadic(100);
        assert_eq!(&tiny * &Rational::from_integer(0), Rational::zero());
        assert!(tiny.is_positive());
        assert!(tiny < Rational::dyadic(99));
    }

    #[test]
    fn json_number_and_string_forms() {
        let a: Rational = serde_json::from_str("\"1/3\"").unwrap();
        let b: Rational = serde_json::from_str("0.25").unwrap();
        let c: Rational = serde_json::from_str("-2").unwrap();
        assert_eq!(a, Rational::new(1, 3).unwrap());
        assert_eq!(b, Rational::new(1, 4).unwrap());
        assert_eq!(c, Rational::from_integer(-2));
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"1/3\"");
        assert!(serde_json::from_str::<Rational>("\"1/0\"").is_err());
    }

    #[test]
    fn exact_float_conversion() {
        assert_eq!(Rational::from_f64_exact(0.5), Rational::new(1, 2));
        assert_ne!(Rational::from_f64_exact(0.1), Rational::new(1, 10));
    }

    proptest::proptest! {
        #[test]
        fn field_laws(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = Rational::new(a, b).unwrap();
            let y = Rational::new(c, d).unwrap();
            proptest::prop_assert_eq!(&(&x + &y) - &y, x.clone());
            proptest::prop_assert_eq!(&x * &y, &y * &x);
            proptest::prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x.clone());
            proptest::prop_assert_eq!(x < y, (a as i128 * d as i128) < (c as i128 * b as i128));
        }
    }
}
