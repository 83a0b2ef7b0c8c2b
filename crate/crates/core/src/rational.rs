//! Exact rationals with an inline fast path.
//!
//! Almost every coefficient met while building Baker-Akhiezer functions fits in
//! a machine word, so [`Rat`] keeps `i64` numerator/denominator pairs inline and
//! only promotes to a heap-allocated [`BigRational`] when an intermediate
//! result overflows. The representation is canonical: a value that fits the
//! small form is always stored in it, which makes the derived `Eq`/`Hash`
//! structural equality sound.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact arbitrary-precision rational number, always in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Rat {
    /// numerator, denominator; denominator > 0, coprime, numerator != i64::MIN
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rat {
    pub const ZERO: Rat = Rat::Small(0, 1);
    pub const ONE: Rat = Rat::Small(1, 1);

    pub fn zero() -> Rat {
        Rat::ZERO
    }

    pub fn one() -> Rat {
        Rat::ONE
    }

    pub fn from_int(n: i64) -> Rat {
        if n == i64::MIN {
            return Rat::from_big(BigRational::from_integer(BigInt::from(n)));
        }
        Rat::Small(n, 1)
    }

    /// `num/den`; panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat::from_i128(num as i128, den as i128)
    }

    fn from_i128(mut n: i128, mut d: i128) -> Rat {
        debug_assert!(d != 0);
        if n == 0 {
            return Rat::ZERO;
        }
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = n.gcd(&d);
        if g != 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Rat::Small(n as i64, d as i64)
        } else {
            Rat::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))
        }
    }

    pub fn from_big(v: BigRational) -> Rat {
        if let (Some(n), Some(d)) = (v.numer().to_i64(), v.denom().to_i64()) {
            if n != i64::MIN {
                return Rat::Small(n, d);
            }
        }
        Rat::Big(Box::new(v))
    }

    pub fn from_bigint(v: BigInt) -> Rat {
        Rat::from_big(BigRational::from_integer(v))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rat::Small(n, _) => BigInt::from(*n),
            Rat::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rat::Small(_, d) => BigInt::from(*d),
            Rat::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_, d) => *d == 1,
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n > 0,
            Rat::Big(b) => b.is_positive(),
        }
    }

    /// The value as an `i64` if it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Rat::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(n, d) => *n as f64 / *d as f64,
            Rat::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn recip(&self) -> Rat {
        match self {
            Rat::Small(0, _) => panic!("reciprocal of zero"),
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(b) => Rat::from_big(b.recip()),
        }
    }

    pub fn pow(&self, e: i32) -> Rat {
        if e < 0 {
            return self.recip().pow(-e);
        }
        let mut acc = Rat::ONE;
        let mut base = self.clone();
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn add_ref(&self, rhs: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, rhs) {
            if *b == 1 && *d == 1 {
                return Rat::from_i128(*a as i128 + *c as i128, 1);
            }
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if b == d {
                return Rat::from_i128(a + c, b);
            }
            if let Some(n) = (a * d).checked_add(c * b) {
                return Rat::from_i128(n, b * d);
            }
        }
        Rat::from_big(self.to_big() + rhs.to_big())
    }

    fn mul_ref(&self, rhs: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, rhs) {
            if *a == 0 || *c == 0 {
                return Rat::ZERO;
            }
            if *b == 1 && *d == 1 {
                return Rat::from_i128(*a as i128 * *c as i128, 1);
            }
            let g1 = a.gcd(d);
            let g2 = c.gcd(b);
            let n = (*a / g1) as i128 * (*c / g2) as i128;
            let m = (*b / g2) as i128 * (*d / g1) as i128;
            if fits(n) && fits(m) {
                return Rat::Small(n as i64, m as i64);
            }
            return Rat::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(m))));
        }
        if self.is_zero() || rhs.is_zero() {
            return Rat::ZERO;
        }
        Rat::from_big(self.to_big() * rhs.to_big())
    }

    /// `self += a * b` without an intermediate allocation on the fast path.
    pub fn add_mul(&mut self, a: &Rat, b: &Rat) {
        let prod = a.mul_ref(b);
        *self = self.add_ref(&prod);
    }

    /// Canonical `"num/den"` text used in serialized artifacts.
    pub fn to_canonical(&self) -> String {
        match self {
            Rat::Small(n, d) => format!("{n}/{d}"),
            Rat::Big(b) => format!("{}/{}", b.numer(), b.denom()),
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::ZERO
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Rat {
        Rat::from_int(n as i64)
    }
}

impl From<u32> for Rat {
    fn from(n: u32) -> Rat {
        Rat::from_int(n as i64)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Rat {
        Rat::from_i128(n as i128, 1)
    }
}

impl From<usize> for Rat {
    fn from(n: usize) -> Rat {
        Rat::from_i128(n as i128, 1)
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(n, 1) => write!(f, "{n}"),
            Rat::Small(n, d) => write!(f, "{n}/{d}"),
            Rat::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Rat::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as a rational number")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `"n"`, `"n/d"` and terminating decimals such as `"-1.25"`.
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rat::from_big(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let neg = int.starts_with('-');
            let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
                "" => BigInt::zero(),
                digits => digits.parse().map_err(|_| err())?,
            };
            let frac_part: BigInt = frac.parse().map_err(|_| err())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let mut v = BigRational::new(int_part * &scale + frac_part, scale);
            if neg {
                v = -v;
            }
            return Ok(Rat::from_big(v));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rat::from_bigint(n))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::Small(-n, *d),
            Rat::Big(b) => Rat::from_big(-(**b).clone()),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $imp:expr) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                let f: fn(&Rat, &Rat) -> Rat = $imp;
                f(self, rhs)
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
        impl $assign_trait<&Rat> for Rat {
            fn $assign_method(&mut self, rhs: &Rat) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $assign_trait<Rat> for Rat {
            fn $assign_method(&mut self, rhs: Rat) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign, |a, b| a.add_ref(b));
forward_binop!(Sub, sub, SubAssign, sub_assign, |a, b| a.add_ref(&-b));
forward_binop!(Mul, mul, MulAssign, mul_assign, |a, b| a.mul_ref(b));
forward_binop!(Div, div, DivAssign, div_assign, |a, b| a.mul_ref(&b.recip()));

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ZERO, |a, b| a + b)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ONE, |a, b| a * b)
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::ZERO
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::ONE
    }
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> Rat {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    Rat::from_bigint(acc)
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return Rat::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    Rat::from_bigint(acc)
}
