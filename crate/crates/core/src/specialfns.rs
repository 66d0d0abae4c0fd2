//! Irwin-Hall densities in exact rational arithmetic.
//!
//! `u_m` is the density of a sum of `m` independent uniform(0, 1) variables:
//!
//! ```text
//! u_m(t) = 1/(m-1)! * sum_{l=0}^{floor t} (-1)^l C(m, l) (t - l)^(m-1),   0 < t < m
//! ```
//!
//! The alternating sum cancels catastrophically in doubles (all digits are
//! gone by m ~ 45), so the reference path evaluates it over big integers:
//! with `t = a/q` every power is an integer `(a - l q)^(m-1)` and the sum is
//! divided by `(m-1)! q^(m-1)` only once, at the end, into an [`ExtFloat`].
//!
//! [`shifted_column`] evaluates `u_m(x - m)` for every contributing `m` at a
//! fixed `x` and shares the integer powers between orders; it is what the
//! pair distribution uses.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ext::ExtFloat;
use crate::rational::Rational;

mod tables {
    use super::*;

    #[derive(Default)]
    struct Tables {
        factorials: Vec<BigInt>,
        binomials: Vec<Arc<[BigInt]>>,
    }

    static TABLES: RwLock<Tables> = RwLock::new(Tables { factorials: Vec::new(), binomials: Vec::new() });

    fn grow(t: &mut Tables, m: usize) {
        if t.factorials.is_empty() {
            t.factorials.push(BigInt::one());
        }
        while t.factorials.len() <= m {
            let k = t.factorials.len();
            let next = &t.factorials[k - 1] * BigInt::from(k);
            t.factorials.push(next);
        }
        if t.binomials.is_empty() {
            t.binomials.push(Arc::from(vec![BigInt::one()]));
        }
        while t.binomials.len() <= m {
            let prev = t.binomials[t.binomials.len() - 1].clone();
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(BigInt::one());
            for w in prev.windows(2) {
                row.push(&w[0] + &w[1]);
            }
            row.push(BigInt::one());
            t.binomials.push(Arc::from(row));
        }
    }

    /// Make sure factorials and binomial rows exist up to order `m`.
    ///
    /// Growth takes a write lock once; afterwards every lookup is a shared
    /// read, so calling this before a parallel section keeps workers from
    /// contending on the lock.
    pub fn prepare(m: usize) {
        if TABLES.read().expect("tables lock").factorials.len() > m {
            return;
        }
        let mut t = TABLES.write().expect("tables lock");
        grow(&mut t, m);
    }

    pub fn factorial(n: usize) -> BigInt {
        prepare(n);
        TABLES.read().expect("tables lock").factorials[n].clone()
    }

    pub fn binomial_row(m: usize) -> Arc<[BigInt]> {
        prepare(m);
        TABLES.read().expect("tables lock").binomials[m].clone()
    }
}

pub use tables::prepare;

/// `C(m, k)` from the memoized Pascal table.
pub fn binomial(m: usize, k: usize) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    tables::binomial_row(m)[k].clone()
}

pub fn factorial(n: usize) -> BigInt {
    tables::factorial(n)
}

/// Log-domain value: the sign of a density is never negative, so only zero
/// versus positive needs flagging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogValue {
    Zero,
    Positive(f64),
}

impl LogValue {
    pub fn ln(&self) -> f64 {
        match self {
            LogValue::Zero => f64::NEG_INFINITY,
            LogValue::Positive(v) => *v,
        }
    }
}

/// The density of a sum of `m` uniform(0, 1) variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IrwinHall {
    m: u32,
}

impl IrwinHall {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroOrder);
        }
        Ok(IrwinHall { m })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// Integer numerator `sum (-1)^l C(m,l) (a - l q)^(m-1)` for `t = a/q`.
    fn numerator(&self, a: &BigInt, q: &BigInt) -> BigInt {
        let m = self.m as usize;
        let row = tables::binomial_row(m);
        let mut acc = BigInt::zero();
        let mut base = a.clone();
        for (l, c) in row.iter().enumerate() {
            if !base.is_positive() {
                break;
            }
            let term = c * num_traits::pow(base.clone(), m - 1);
            if l % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
            base -= q;
        }
        acc
    }

    /// `u_m(t)` as an exact rational.
    pub fn density_exact(&self, t: &BigRational) -> BigRational {
        let m = self.m as usize;
        let zero = BigRational::zero();
        let upper = BigRational::from_integer(BigInt::from(m));
        if *t <= zero || *t >= upper {
            return zero;
        }
        if m == 1 {
            return BigRational::one();
        }
        let a = t.numer();
        let q = t.denom();
        let num = self.numerator(a, q);
        let den = factorial(m - 1) * num_traits::pow(q.clone(), m - 1);
        BigRational::new(num, den)
    }

    /// `u_m(t)`, exact sum rounded once into an [`ExtFloat`].
    pub fn density(&self, t: Rational) -> ExtFloat {
        let m = self.m as usize;
        let (a, q) = (*t.numer(), *t.denom());
        if a <= 0 || a >= q.saturating_mul(m as i64) {
            return ExtFloat::ZERO;
        }
        if m == 1 {
            return ExtFloat::ONE;
        }
        let a = BigInt::from(a);
        let q = BigInt::from(q);
        let num = self.numerator(&a, &q);
        let den = factorial(m - 1) * num_traits::pow(q, m - 1);
        ExtFloat::from_ratio(&num, &den)
    }

    /// `u_m(x - m)`: density at `x` of a sum of `m` uniform(1, 2) variables.
    pub fn shifted(&self, x: Rational) -> ExtFloat {
        self.density(x - Rational::from_integer(self.m as i64))
    }

    pub fn log_shifted(&self, x: Rational) -> LogValue {
        let v = self.shifted(x);
        if v.is_zero() {
            LogValue::Zero
        } else {
            LogValue::Positive(v.ln())
        }
    }

    /// Direct double-precision evaluation of the alternating sum.
    ///
    /// Accurate near the mode, but in the upper tail `t -> m` the terms are
    /// huge and cancel to a tiny result: already at `m = 20, t = 18.5` the
    /// sign is wrong. Kept for comparison only.
    pub fn density_f64_lossy(&self, t: f64) -> f64 {
        let m = self.m as i32;
        if t <= 0.0 || t >= m as f64 {
            return 0.0;
        }
        if m == 1 {
            return 1.0;
        }
        let mut acc = 0.0;
        let mut c = 1.0;
        let mut fact = 1.0;
        for k in 1..m {
            fact *= k as f64;
        }
        let mut l = 0;
        while (l as f64) < t && l <= m {
            let term = c * (t - l as f64).powi(m - 1);
            acc += if l % 2 == 0 { term } else { -term };
            c = c * (m - l) as f64 / (l + 1) as f64;
            l += 1;
        }
        acc / fact
    }
}

/// `u_m(t)` for rational `t`.
pub fn irwin_hall(m: u32, t: Rational) -> Result<ExtFloat> {
    Ok(IrwinHall::new(m)?.density(t))
}

/// `u_m(t)` for a double argument, taken as the exact binary fraction it holds.
pub fn irwin_hall_f64(m: u32, t: f64) -> Result<ExtFloat> {
    let ih = IrwinHall::new(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite(t));
    }
    let exact = BigRational::from_float(t).ok_or(Error::NonFinite(t))?;
    let v = ih.density_exact(&exact);
    Ok(ExtFloat::from_ratio(v.numer(), v.denom()))
}

/// `u_m(x - m)`; support `(m, 2m)`.
pub fn irwin_hall_shifted(m: u32, x: Rational) -> Result<ExtFloat> {
    Ok(IrwinHall::new(m)?.shifted(x))
}

/// `ln u_m(x - m)`, flagged zero outside the support.
pub fn irwin_hall_log(m: u32, x: Rational) -> Result<LogValue> {
    Ok(IrwinHall::new(m)?.log_shifted(x))
}

/// Orders `m` with `m < x < 2m`, the only ones where `u_m(x - m)` is nonzero.
pub fn contributing_orders(x: Rational) -> std::ops::RangeInclusive<u32> {
    let (k, q) = (*x.numer(), *x.denom());
    if k <= q {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    // largest j < x, smallest m > x/2
    let j_max = if k % q == 0 { k / q - 1 } else { Integer::div_floor(&k, &q) };
    let m_min = Integer::div_floor(&k, &(2 * q)) + 1;
    m_min as u32..=j_max as u32
}

/// `(m, u_m(x - m))` for every contributing `m`, in ascending order.
///
/// With `x = k/q` the terms are `(k - j q)^(m-1)` for `j = m + l`, which
/// depend on `m` only through the exponent. The powers are advanced in place
/// from one order to the next, so each `x` costs one small-integer multiply
/// per (j, m) pair plus one big multiply by a binomial.
pub fn shifted_column(x: Rational) -> Vec<(u32, ExtFloat)> {
    let orders = contributing_orders(x);
    let (m_lo, m_hi) = (*orders.start() as usize, *orders.end() as usize);
    if orders.is_empty() {
        return Vec::new();
    }
    prepare(m_hi);
    let k = *x.numer();
    let q = *x.denom();
    let bases: Vec<i64> = (m_lo..=m_hi).map(|j| k - j as i64 * q).collect();
    let mut powers: Vec<BigInt> = bases
        .iter()
        .map(|&b| num_traits::pow(BigInt::from(b), m_lo - 1))
        .collect();
    let q_big = BigInt::from(q);
    let mut q_pow = num_traits::pow(q_big.clone(), m_lo - 1);
    let mut out = Vec::with_capacity(m_hi - m_lo + 1);
    for m in m_lo..=m_hi {
        let row = tables::binomial_row(m);
        let mut acc = BigInt::zero();
        for (l, pw) in powers[m - m_lo..].iter().enumerate() {
            let term = &row[l] * pw;
            if l % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let den = factorial(m - 1) * &q_pow;
        out.push((m as u32, ExtFloat::from_ratio(&acc, &den)));
        if m < m_hi {
            for (pw, &b) in powers.iter_mut().zip(&bases).skip(m + 1 - m_lo) {
                *pw *= b;
            }
            q_pow *= &q_big;
        }
    }
    out
}

/// Exact grid abscissa `i * step`.
pub fn grid_point(i: i64, step: Rational) -> Rational {
    step * Rational::from_integer(i)
}
