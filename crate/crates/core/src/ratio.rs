//! Exact rationals and symbolic prime-power products.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Reduced rational with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRatio(BigRational);

impl ExactRatio {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        ExactRatio(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        ExactRatio(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn abs(&self) -> Self {
        ExactRatio(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        ExactRatio(self.0.recip())
    }

    pub fn powi(&self, exp: u64) -> Self {
        ExactRatio(Pow::pow(&self.0, BigUint::from(exp)))
    }

    pub fn to_f64(&self) -> f64 {
        // Shift both parts down to 64 significant bits first; huge powers
        // would otherwise overflow the f64 conversion of either part.
        let shift = |v: &BigInt| v.bits().saturating_sub(64);
        let (n, d) = (self.numer(), self.denom());
        let (sn, sd) = (shift(n), shift(d));
        let nf = (n >> sn).to_f64().unwrap_or(f64::NAN);
        let df = (d >> sd).to_f64().unwrap_or(f64::NAN);
        nf / df * 2f64.powi(sn as i32 - sd as i32)
    }

    /// Decimal expansion rounded half away from zero to `digits` places.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let n: BigInt = self.numer().abs() * &scale * 2 + self.denom();
        let q = n.div_floor(&(self.denom() * 2));
        format_scaled(self.0.is_negative() && !q.is_zero(), &q, digits)
    }
}

/// Formats `|q| / 10^digits` with an optional minus sign.
pub(crate) fn format_scaled(negative: bool, q: &BigInt, digits: u32) -> String {
    let s = q.to_string();
    let digits = digits as usize;
    let body = if digits == 0 {
        s
    } else if s.len() > digits {
        format!("{}.{}", &s[..s.len() - digits], &s[s.len() - digits..])
    } else {
        format!("0.{}{}", "0".repeat(digits - s.len()), s)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for ExactRatio {
    type Err = String;

    /// Accepts `a`, `a/b`, or a plain decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("cannot parse '{s}' as a rational");
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(ExactRatio::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            let all: BigInt = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac)
                .parse()
                .map_err(|_| bad())?;
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            let v = ExactRatio::new(all, den);
            return Ok(if neg { -v } else { v });
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(ExactRatio::from_integer(n))
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRatio {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Mul for &ExactRatio {
    type Output = ExactRatio;
    fn mul(self, rhs: &ExactRatio) -> ExactRatio {
        ExactRatio(&self.0 * &rhs.0)
    }
}

impl Neg for ExactRatio {
    type Output = ExactRatio;
    fn neg(self) -> ExactRatio {
        ExactRatio(-self.0)
    }
}

impl From<BigRational> for ExactRatio {
    fn from(r: BigRational) -> Self {
        ExactRatio(r)
    }
}

/// Trial-division factorization of `n > 0`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A ratio kept as `sign * Π p^e`, with arbitrarily large exponents.
///
/// Node values reach exponents near 10^276 after ten thousand products, far
/// beyond what can be expanded; equality, reciprocity and the `λ = 1` test
/// stay exact on this form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredRatio {
    pub negative: bool,
    pub exponents: BTreeMap<u64, BigInt>,
}

impl FactoredRatio {
    pub fn one() -> Self {
        FactoredRatio {
            negative: false,
            exponents: BTreeMap::new(),
        }
    }

    /// `(num / den)^exp` for small non-zero integers.
    pub fn power(num: i64, den: i64, exp: &BigUint) -> Self {
        let mut out = Self::one();
        if exp.is_zero() {
            return out;
        }
        let e = BigInt::from_biguint(Sign::Plus, exp.clone());
        out.negative = ((num < 0) != (den < 0)) && exp.is_odd();
        for (p, k) in factorize(num.unsigned_abs()) {
            *out.exponents.entry(p).or_default() += &e * k;
        }
        for (p, k) in factorize(den.unsigned_abs()) {
            *out.exponents.entry(p).or_default() -= &e * k;
        }
        out.exponents.retain(|_, v| !v.is_zero());
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.negative ^= other.negative;
        for (p, e) in &other.exponents {
            *out.exponents.entry(*p).or_default() += e;
        }
        out.exponents.retain(|_, v| !v.is_zero());
        out
    }

    pub fn recip(&self) -> Self {
        FactoredRatio {
            negative: self.negative,
            exponents: self.exponents.iter().map(|(p, e)| (*p, -e)).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.exponents.is_empty()
    }

    /// Expands to an exact rational; the cost grows with the exponents.
    pub fn expand(&self) -> ExactRatio {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exponents {
            let k = e.abs().to_u32().expect("exponent too large to expand");
            let v = BigInt::from(*p).pow(k);
            if e.is_positive() {
                num *= v;
            } else {
                den *= v;
            }
        }
        if self.negative {
            num = -num;
        }
        ExactRatio::new(num, den)
    }
}
