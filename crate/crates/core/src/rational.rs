//! Exact rational numbers.
//!
//! Small values live inline as a reduced `i64` pair and arithmetic on them is
//! carried out in `i128`; anything that does not fit spills over to
//! [`BigRational`]. The representation is canonical (a value that fits the
//! small form is never stored as a big one), so structural equality and
//! hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

// Inline operands are bounded so that every i128 intermediate below is exact.
const SMALL_LIMIT: i128 = 1 << 62;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small { num: i64, den: i64 },
    Big(BigRational),
}

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct RationalParseError {
    pub input: String,
    pub reason: String,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn integer(n: i64) -> Self {
        Self::from_i128(n as i128, 1)
    }

    fn from_i128(mut num: i128, mut den: i128) -> Self {
        debug_assert!(den != 0);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        if num.abs() <= SMALL_LIMIT && den <= SMALL_LIMIT {
            Rational(Repr::Small {
                num: num as i64,
                den: den as i64,
            })
        } else {
            Rational(Repr::Big(BigRational::new(num.into(), den.into())))
        }
    }

    fn from_big(value: BigRational) -> Self {
        if let (Some(num), Some(den)) = (value.numer().to_i128(), value.denom().to_i128()) {
            if num.abs() <= SMALL_LIMIT && den <= SMALL_LIMIT {
                return Rational(Repr::Small {
                    num: num as i64,
                    den: den as i64,
                });
            }
        }
        Rational(Repr::Big(value))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => BigRational::new((*num).into(), (*den).into()),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => (*num).into(),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => (*den).into(),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { num, .. } => num.signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small { num, den } => Self::from_i128(*den as i128, *num as i128),
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Lossy conversion, for display and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }
    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Self::integer(n as i64)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Self::from_i128(n as i128, 1)
    }
}

impl From<BigRational> for Rational {
    fn from(b: BigRational) -> Self {
        Self::from_big(b)
    }
}

impl From<BigInt> for Rational {
    fn from(b: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(b))
    }
}

fn add_ref(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if ad == bd {
                Rational::from_i128(*an as i128 + *bn as i128, *ad as i128)
            } else {
                let (an, ad, bn, bd) = (*an as i128, *ad as i128, *bn as i128, *bd as i128);
                Rational::from_i128(an * bd + bn * ad, ad * bd)
            }
        }
        _ => Rational::from_big(a.to_big() + b.to_big()),
    }
}

fn mul_ref(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if *an == 0 || *bn == 0 {
                return Rational::zero();
            }
            Rational::from_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128)
        }
        _ => Rational::from_big(a.to_big() * b.to_big()),
    }
}

fn neg_ref(a: &Rational) -> Rational {
    match &a.0 {
        Repr::Small { num, den } => Rational(Repr::Small {
            num: -num,
            den: *den,
        }),
        Repr::Big(b) => Rational(Repr::Big(-b)),
    }
}

fn div_ref(a: &Rational, b: &Rational) -> Rational {
    mul_ref(a, &b.recip())
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $f:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $f(&self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $f(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, |a: &Rational, b: &Rational| add_ref(
    a,
    &neg_ref(b)
));
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_ref(&self)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_ref(self)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_ref(self, rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add_ref(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = add_ref(self, &neg_ref(rhs));
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self -= &rhs;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_ref(self, rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
                (*an as i128 * *bd as i128).cmp(&(*bn as i128 * *ad as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_bigint(s: &str, input: &str) -> Result<BigInt, RationalParseError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RationalParseError {
            input: input.to_string(),
            reason: format!("{s:?} is not an integer"),
        });
    }
    BigInt::from_str(s.strip_prefix('+').unwrap_or(s)).map_err(|e| RationalParseError {
        input: input.to_string(),
        reason: e.to_string(),
    })
}

fn parse_decimal(s: &str, input: &str) -> Result<BigRational, RationalParseError> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 =
                s[i + 1..]
                    .trim_start_matches('+')
                    .parse()
                    .map_err(|_| RationalParseError {
                        input: input.to_string(),
                        reason: "bad exponent".into(),
                    })?;
            (&s[..i], exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['+', '-']);
    if int_digits.is_empty() && frac_part.is_empty() {
        return Err(RationalParseError {
            input: input.to_string(),
            reason: "no digits".into(),
        });
    }
    let all_digits = format!("{int_digits}{frac_part}");
    let magnitude = parse_bigint(&all_digits, input)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(magnitude * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(magnitude, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

impl FromStr for Rational {
    type Err = RationalParseError;

    /// Accepts `p`, `p/q` and decimal notation (`0.1`, `-2.5e-3`); decimals are
    /// converted exactly.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num = parse_bigint(n.trim(), input)?;
            let den = parse_bigint(d.trim(), input)?;
            if den.is_zero() {
                return Err(RationalParseError {
                    input: input.to_string(),
                    reason: "zero denominator".into(),
                });
            }
            return Ok(Self::from_big(BigRational::new(num, den)));
        }
        Ok(Self::from_big(parse_decimal(s, input)?))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    /// Accepts a JSON string (`"p/q"` or decimal) or a JSON number; numbers are
    /// read from their literal text, so `0.1` becomes exactly `1/10`.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        rational_from_json(&value).map_err(serde::de::Error::custom)
    }
}

/// Exact conversion of a JSON scalar (number literal or string) to a rational.
pub fn rational_from_json(value: &serde_json::Value) -> Result<Rational, RationalParseError> {
    match value {
        serde_json::Value::Number(n) => n.to_string().parse(),
        serde_json::Value::String(s) => s.parse(),
        other => Err(RationalParseError {
            input: other.to_string(),
            reason: "expected a number or a rational string".into(),
        }),
    }
}

/// Shorthand used throughout the crate and its tests.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Integer vector to rational vector.
pub fn qvec(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| Rational::integer(v)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn format_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fraction_and_decimal_exactly() {
        assert_eq!("0.1".parse::<Rational>().unwrap(), q(1, 10));
        assert_eq!("-2.5e-1".parse::<Rational>().unwrap(), q(-1, 4));
        assert_eq!("3/6".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("1.5E2".parse::<Rational>().unwrap(), Rational::integer(150));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn json_number_literal_is_exact() {
        let v: serde_json::Value = serde_json::from_str("[0.1, \"2/3\", 7]").unwrap();
        let parsed: Vec<Rational> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|x| rational_from_json(x).unwrap())
            .collect();
        assert_eq!(parsed, vec![q(1, 10), q(2, 3), Rational::integer(7)]);
    }

    #[test]
    fn spills_to_big_and_back() {
        let big = Rational::integer(1 << 60) * Rational::integer(1 << 60);
        assert!(matches!(big.0, Repr::Big(_)));
        let back = &big / &Rational::integer(1 << 60);
        assert!(matches!(back.0, Repr::Small { .. }));
        assert_eq!(back, Rational::integer(1 << 60));
    }

    #[test]
    fn display_round_trips() {
        for x in [q(1, 3), q(-7, 2), Rational::integer(4), Rational::zero()] {
            assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
        }
    }

    fn big_of(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    proptest! {
        #[test]
        fn agrees_with_bigrational(a in -1_000_000_000_000i64..1_000_000_000_000, b in 1i64..1_000_000_000,
                                   c in -1_000_000_000_000i64..1_000_000_000_000, d in 1i64..1_000_000_000) {
            let x = q(a, b);
            let y = q(c, d);
            prop_assert_eq!((&x + &y).to_big(), big_of(a, b) + big_of(c, d));
            prop_assert_eq!((&x - &y).to_big(), big_of(a, b) - big_of(c, d));
            prop_assert_eq!((&x * &y).to_big(), big_of(a, b) * big_of(c, d));
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), big_of(a, b) / big_of(c, d));
            }
            prop_assert_eq!(x.cmp(&y), big_of(a, b).cmp(&big_of(c, d)));
        }
    }
}
