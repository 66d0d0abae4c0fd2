//! Floating values with a separate binary exponent.
//!
//! Irwin-Hall densities and parking probabilities routinely fall far below
//! `f64::MIN_POSITIVE` (1e-5000 is not unusual at n ~ 1000), so the kernels
//! return an [`ExtFloat`]: a 53-bit mantissa in `[0.5, 1)` and an `i64`
//! exponent. Only nonnegative magnitudes are needed here, and the type keeps
//! the sign of the value for completeness.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtFloat {
    mantissa: f64,
    exponent: i64,
}

/// Outcome of narrowing an [`ExtFloat`] to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Narrowed {
    Exact(f64),
    /// Magnitude below the smallest subnormal; carries the saturated value 0.
    Underflow,
    /// Magnitude above `f64::MAX`; carries the saturated value +-inf.
    Overflow,
}

/// Split a finite nonzero `v` into `m * 2^e` with `0.5 <= |m| < 1`.
pub(crate) fn frexp(v: f64) -> (f64, i64) {
    debug_assert!(v.is_finite() && v != 0.0);
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: rescale into the normal range first
        let (m, e) = frexp(v * f64::powi(2.0, 64));
        return (m, e - 64);
    }
    let e = raw_exp - 1022;
    let m_bits = (bits & !(0x7ff_u64 << 52)) | (1022_u64 << 52);
    (f64::from_bits(m_bits), e)
}

fn ldexp(m: f64, e: i64) -> f64 {
    // two steps so that intermediate powers never overflow on their own
    let e = e.clamp(-2200, 2200) as i32;
    let half = e / 2;
    m * f64::powi(2.0, half) * f64::powi(2.0, e - half)
}

impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { mantissa: 0.0, exponent: 0 };
    pub const ONE: ExtFloat = ExtFloat { mantissa: 0.5, exponent: 1 };

    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "ExtFloat::from_f64 needs a finite value, got {v}");
        if v == 0.0 {
            return Self::ZERO;
        }
        let (mantissa, exponent) = frexp(v);
        ExtFloat { mantissa, exponent }
    }

    /// Build from `m * 2^e` without the `f64` range restriction on the product.
    pub fn from_parts(m: f64, e: i64) -> Self {
        let x = Self::from_f64(m);
        if x.is_zero() {
            x
        } else {
            ExtFloat { mantissa: x.mantissa, exponent: x.exponent + e }
        }
    }

    /// Correctly scaled quotient `num / den` of two big integers.
    ///
    /// The quotient is formed with 64 significant bits before the final
    /// rounding to `f64`, so the relative error is below 2^-52.
    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "ExtFloat::from_ratio with zero denominator");
        if num.is_zero() {
            return Self::ZERO;
        }
        let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
        let n = num.abs();
        let d = den.abs();
        let shift = 64 + d.bits() as i64 - n.bits() as i64;
        let q = if shift >= 0 {
            (n << shift as usize) / d
        } else {
            n / (d << (-shift) as usize)
        };
        let qf = q.to_f64().expect("quotient has about 64 bits");
        let (m, e) = frexp(qf);
        ExtFloat {
            mantissa: if negative { -m } else { m },
            exponent: e - shift,
        }
    }

    /// `exp(x)` for arbitrary finite `x`, including far outside `f64` range.
    pub fn exp(x: f64) -> Self {
        assert!(x.is_finite());
        let k = (x / std::f64::consts::LN_2).floor();
        let r = x - k * std::f64::consts::LN_2;
        Self::from_parts(r.exp(), k as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.exponent as f64 * std::f64::consts::LN_2
        }
    }

    /// Log base 10 of the magnitude; `-inf` for zero.
    pub fn log10(&self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    pub fn narrow(&self) -> Narrowed {
        if self.is_zero() {
            return Narrowed::Exact(0.0);
        }
        if self.exponent > 1024 {
            return Narrowed::Overflow;
        }
        if self.exponent < -1074 {
            return Narrowed::Underflow;
        }
        let v = ldexp(self.mantissa, self.exponent);
        if v.is_infinite() {
            Narrowed::Overflow
        } else if v == 0.0 {
            Narrowed::Underflow
        } else {
            Narrowed::Exact(v)
        }
    }

    /// Saturating conversion to `f64`.
    pub fn to_f64(&self) -> f64 {
        match self.narrow() {
            Narrowed::Exact(v) => v,
            Narrowed::Underflow => 0.0_f64.copysign(self.mantissa),
            Narrowed::Overflow => f64::INFINITY.copysign(self.mantissa),
        }
    }

    pub fn powi(self, n: i64) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        let mut acc = Self::ONE;
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Mul for ExtFloat {
    type Output = ExtFloat;
    fn mul(self, rhs: ExtFloat) -> ExtFloat {
        if self.is_zero() || rhs.is_zero() {
            return ExtFloat::ZERO;
        }
        ExtFloat::from_parts(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ExtFloat {
    type Output = ExtFloat;
    fn div(self, rhs: ExtFloat) -> ExtFloat {
        assert!(!rhs.is_zero(), "division of ExtFloat by zero");
        if self.is_zero() {
            return ExtFloat::ZERO;
        }
        ExtFloat::from_parts(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.mantissa.signum() * (!self.is_zero() as i32 as f64);
        let sb = other.mantissa.signum() * (!other.is_zero() as i32 as f64);
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        if sa == 0.0 {
            return Some(Ordering::Equal);
        }
        let mag = match self.exponent.cmp(&other.exponent) {
            Ordering::Equal => self.mantissa.abs().partial_cmp(&other.mantissa.abs())?,
            o => o,
        };
        Some(if sa > 0.0 { mag } else { mag.reverse() })
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Narrowed::Exact(v) = self.narrow() {
            return write!(f, "{v:e}");
        }
        let l10 = self.log10();
        let e10 = l10.floor();
        let m10 = 10f64.powf(l10 - e10) * self.mantissa.signum();
        write!(f, "{m10}e{e10}")
    }
}
