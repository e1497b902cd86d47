//! Binary fixed-point reals of arbitrary precision.
//!
//! A [`Fixed`] is `mantissa * 2^-bits`. [`Fixed::ln`] and [`Fixed::exp`]
//! run with 64 guard bits (more for large exponents) and round once at the
//! end, so their results are within `2^-out_bits` of the true value of the
//! function at the given argument. Addition is exact; multiplication and
//! division truncate by at most one unit in the last place.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ratio::format_scaled;

const GUARD: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    mant: BigInt,
    bits: u32,
}

/// Shift right rounding half away from zero.
fn shr_round(v: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return v.clone();
    }
    let half = BigInt::one() << (s - 1);
    if v.is_negative() {
        -((-v + half) >> s)
    } else {
        (v + half) >> s
    }
}

impl Fixed {
    pub fn zero(bits: u32) -> Self {
        Fixed {
            mant: BigInt::zero(),
            bits,
        }
    }

    pub fn from_int(v: &BigInt, bits: u32) -> Self {
        Fixed {
            mant: v << bits,
            bits,
        }
    }

    /// `num / den` rounded to nearest.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
        let scaled = (num << (bits + 1)).div_floor(&den);
        Fixed {
            mant: (scaled + 1) >> 1,
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        let mant = match bits.cmp(&self.bits) {
            Ordering::Equal => self.mant.clone(),
            Ordering::Greater => &self.mant << (bits - self.bits),
            Ordering::Less => shr_round(&self.mant, self.bits - bits),
        };
        Fixed { mant, bits }
    }

    fn aligned(&self, other: &Fixed) -> (BigInt, BigInt, u32) {
        let bits = self.bits.max(other.bits);
        (
            self.with_bits(bits).mant,
            other.with_bits(bits).mant,
            bits,
        )
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        let (a, b, bits) = self.aligned(other);
        Fixed { mant: a + b, bits }
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        let (a, b, bits) = self.aligned(other);
        Fixed { mant: a - b, bits }
    }

    pub fn neg(&self) -> Fixed {
        Fixed {
            mant: -&self.mant,
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Fixed {
        Fixed {
            mant: self.mant.abs(),
            bits: self.bits,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Fixed {
        Fixed {
            mant: &self.mant * k,
            bits: self.bits,
        }
    }

    /// Product at `self.bits`.
    pub fn mul(&self, other: &Fixed) -> Fixed {
        Fixed {
            mant: (&self.mant * &other.mant) >> other.bits,
            bits: self.bits,
        }
    }

    /// Quotient at `self.bits`.
    pub fn div(&self, other: &Fixed) -> Fixed {
        assert!(!other.mant.is_zero(), "division by zero");
        Fixed {
            mant: (&self.mant << other.bits) / &other.mant,
            bits: self.bits,
        }
    }

    pub fn signum(&self) -> Sign {
        self.mant.sign()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// One unit in the last place at this precision.
    pub fn ulp(bits: u32) -> Fixed {
        Fixed {
            mant: BigInt::one(),
            bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let len = self.mant.bits();
        let drop = len.saturating_sub(60);
        let top = (&self.mant >> drop).to_f64().unwrap_or(0.0);
        scale2(top, drop as i64 - self.bits as i64)
    }

    /// Decimal expansion rounded half away from zero.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scaled = self.mant.abs() * BigInt::from(10u32).pow(digits);
        let q = shr_round(&scaled, self.bits);
        format_scaled(self.mant.is_negative() && !q.is_zero(), &q, digits)
    }

    /// Natural logarithm, or `None` unless the value is positive.
    pub fn ln(&self, out_bits: u32) -> Option<Fixed> {
        if !self.mant.is_positive() {
            return None;
        }
        let top = self.mant.bits() - 1;
        // value = 2^e * y with y in [1, 2)
        let e = top as i64 - self.bits as i64;
        let e_bits = 64 - e.unsigned_abs().leading_zeros();
        let w = out_bits + GUARD + e_bits;
        let y = if (w as u64) >= top {
            &self.mant << (w as u64 - top)
        } else {
            &self.mant >> (top - w as u64)
        };
        let one = BigInt::one() << w;
        let z = ((&y - &one) << w) / (&y + &one);
        let mut total = atanh_series(&z, w) << 1;
        if e != 0 {
            total += ln2_mant(w) * e;
        }
        Some(Fixed { mant: total, bits: w }.with_bits(out_bits))
    }

    /// `e^self`. Intended for arguments of moderate size (|x| < 2^20).
    pub fn exp(&self, out_bits: u32) -> Fixed {
        const HALVINGS: u32 = 16;
        let w = out_bits + GUARD + HALVINGS;
        let x = self.with_bits(w);
        let ln2 = Fixed {
            mant: ln2_mant(w),
            bits: w,
        };
        // x = k ln2 + r, |r| <= ln2 / 2
        let k = shr_round(&(&x.mant << w).div_floor(&ln2.mant), w);
        let r = x.sub(&ln2.mul_int(&k));
        let k = k.to_i64().expect("exp argument too large");
        let r = Fixed {
            mant: r.mant >> HALVINGS,
            bits: w,
        };
        // Taylor series on the reduced argument
        let mut sum = BigInt::one() << w;
        let mut term = BigInt::one() << w;
        let mut n = 1u32;
        loop {
            term = ((&term * &r.mant) >> w) / n;
            if term.is_zero() {
                break;
            }
            sum += &term;
            n += 1;
        }
        for _ in 0..HALVINGS {
            sum = (&sum * &sum) >> w;
        }
        let mut out = Fixed { mant: sum, bits: w };
        if k >= 0 {
            out.mant <<= k as u64;
        } else {
            out.mant >>= (-k) as u64;
        }
        out.with_bits(out_bits)
    }
}

/// `2^e * f` without intermediate overflow for large |e|.
fn scale2(mut f: f64, mut e: i64) -> f64 {
    while e > 1000 {
        f *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        f *= 2f64.powi(-1000);
        e += 1000;
    }
    f * 2f64.powi(e as i32)
}

/// `Σ z^(2j+1) / (2j+1)` for `|z| <= 1/3` at `w` fractional bits.
fn atanh_series(z: &BigInt, w: u32) -> BigInt {
    let z2 = (z * z) >> w;
    let mut power = z.clone();
    let mut sum = BigInt::zero();
    let mut j = 1u32;
    while !power.is_zero() {
        sum += &power / j;
        power = (&power * &z2) >> w;
        j += 2;
    }
    sum
}

/// `ln 2 = 2 atanh(1/3)` at `w` fractional bits.
fn ln2_mant(w: u32) -> BigInt {
    let g = w + 16;
    let third = (BigInt::one() << g) / 3;
    shr_round(&(atanh_series(&third, g) << 1), 16)
}

/// `ln(n)` for a positive integer.
pub fn ln_int(n: &BigInt, out_bits: u32) -> Fixed {
    Fixed::from_int(n, 0).ln(out_bits).expect("positive integer")
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.bits as f64) * std::f64::consts::LOG10_2) as usize);
        f.write_str(&self.to_decimal(digits as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    // Reference digits computed with mpmath at 70 significant digits.
    const LN2: &str = "0.693147180559945309417232121458176568075500134360255254120680";
    const LN3: &str = "1.098612288668109691395245236922525704647490557822749451734694";
    const LN_8_9: &str = "-0.117783035656383454538794109470521705068480712564733141107349";
    const E: &str = "2.718281828459045235360287471352662497757247093699959574966968";

    #[test]
    fn logs_of_small_integers() {
        assert_eq!(ln_int(&big(2), 200).to_decimal(55), LN2[..57]);
        assert_eq!(ln_int(&big(3), 200).to_decimal(55), LN3[..57]);
        assert!(ln_int(&big(1), 200).is_zero());
    }

    #[test]
    fn log_of_ratio() {
        let x = Fixed::from_ratio(&big(8), &big(9), 256);
        assert_eq!(x.ln(200).unwrap().to_decimal(55), LN_8_9[..58]);
        assert!(Fixed::zero(10).ln(10).is_none());
        assert!(Fixed::from_int(&big(-3), 10).ln(10).is_none());
    }

    #[test]
    fn exp_and_ln_invert() {
        let one = Fixed::from_int(&big(1), 256);
        assert_eq!(one.exp(200).to_decimal(55), format!("{}50", &E[..55]));
        for (n, d) in [(1, 3), (-7, 5), (40, 1), (-1, 100_000), (355, 113)] {
            let x = Fixed::from_ratio(&big(n), &big(d), 300);
            let back = x.exp(300).ln(280).unwrap();
            assert!(back.sub(&x.with_bits(280)).abs() <= Fixed::ulp(270), "{n}/{d}");
        }
    }

    #[test]
    fn tiny_and_huge_arguments() {
        // ln(2^-900 * 3) = ln 3 - 900 ln 2
        let x = Fixed {
            mant: big(3),
            bits: 900,
        };
        let v = x.ln(128).unwrap();
        let expect = ln_int(&big(3), 200).sub(&ln_int(&big(2), 200).mul_int(&big(900)));
        assert!(v.sub(&expect).abs() <= Fixed::ulp(126));
        let huge = Fixed::from_int(&(BigInt::one() << 5000u32), 8);
        let lh = huge.ln(128).unwrap();
        let expect = ln_int(&big(2), 200).mul_int(&big(5000));
        assert!(lh.sub(&expect).abs() <= Fixed::ulp(120));
    }

    #[test]
    fn decimals_and_floats() {
        let x = Fixed::from_ratio(&big(-1), &big(8), 64);
        assert_eq!(x.to_decimal(3), "-0.125");
        assert_eq!(x.to_decimal(2), "-0.13");
        assert_eq!(x.to_f64(), -0.125);
        assert_eq!(Fixed::from_ratio(&big(1), &big(3), 80).to_decimal(5), "0.33333");
        assert!((ln_int(&big(10), 128).to_f64() - 10f64.ln()).abs() < 1e-15);
        assert_eq!(format!("{:.4}", Fixed::from_ratio(&big(22), &big(7), 64)), "3.1429");
    }

    #[test]
    fn ordering_across_precisions() {
        let a = Fixed::from_ratio(&big(1), &big(3), 64);
        let b = Fixed::from_ratio(&big(1), &big(3), 200);
        let c = Fixed::from_ratio(&big(1), &big(2), 10);
        assert!(a < c && b < c);
        assert_eq!(a.add(&c).bits(), 64);
    }
}
