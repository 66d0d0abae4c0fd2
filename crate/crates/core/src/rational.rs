//! Exact abscissae.
//!
//! Grid points and rod-system lengths are carried as `Ratio<i64>` so the
//! Irwin-Hall kernel can evaluate them exactly. Denominators are kept at or
//! below [`MAX_DENOMINATOR`].

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub const MAX_DENOMINATOR: i64 = 1_000_000;

pub fn to_big(r: Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn to_f64(r: Rational) -> f64 {
    // numerator and denominator stay far below 2^53 for admissible grids
    r.to_f64().unwrap_or(*r.numer() as f64 / *r.denom() as f64)
}

/// Best rational approximation of `x` with denominator at most `max_den`.
///
/// Continued-fraction convergents plus the final semiconvergent, the
/// textbook construction. Exact for any `x` that already is such a ratio.
pub fn approximate(x: f64, max_den: i64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if max_den < 1 {
        return Err(Error::Invalid(format!("max denominator {max_den} < 1")));
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            // semiconvergent with the largest admissible partial quotient
            let k = (max_den as i128 - q0) / q1;
            let ps = k * p1 + p0;
            let qs = k * q1 + q0;
            let cand = Ratio::new(ps as i64, qs as i64);
            let conv = Ratio::new(p1 as i64, q1 as i64);
            let err = |r: Rational| (to_f64(r) - x).abs();
            return Ok(if err(cand) < err(conv) { cand } else { conv });
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = y - a;
        if frac.abs() < 1e-300 || (to_f64(Ratio::new(p1 as i64, q1 as i64)) == x) {
            break;
        }
        y = 1.0 / frac;
    }
    Ok(Ratio::new(p1 as i64, q1 as i64))
}

/// Parse `"a/b"`, an integer, or a plain decimal such as `"0.01"` exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("cannot read {s:?} as an exact rational"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int_v.checked_mul(den).and_then(|v| v.checked_add(frac_v)).ok_or_else(bad)?;
    let r = Ratio::new(if neg { -num } else { num }, den);
    if r.is_zero() {
        return Ok(Ratio::from_integer(0));
    }
    Ok(r)
}
