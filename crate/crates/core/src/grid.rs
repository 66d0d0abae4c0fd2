use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A real function sampled at `x0 + i * step`, `i = 0..len`.
///
/// Abscissae are exact rationals so that every grid point can be fed to the
/// exact Irwin-Hall kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    x0: Rational,
    step: Rational,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: Rational, step: Rational, values: Vec<f64>) -> Result<Self> {
        if step <= Rational::from_integer(0) {
            return Err(Error::Grid(format!("step {step} must be positive")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(GridFunction { x0, step, values })
    }

    pub fn x0(&self) -> Rational {
        self.x0
    }

    pub fn step(&self) -> Rational {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_exact(&self, i: usize) -> Rational {
        self.x0 + self.step * Rational::from_integer(i as i64)
    }

    pub fn x(&self, i: usize) -> f64 {
        rational::to_f64(self.x_exact(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.x(i), v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { x0: self.x0, step: self.step, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Index range `[lo, hi]` of the points with `x_lo <= x <= x_hi`.
    pub fn index_window(&self, x_lo: f64, x_hi: f64) -> Option<(usize, usize)> {
        if self.is_empty() || !(x_lo < x_hi) {
            return None;
        }
        let h = rational::to_f64(self.step);
        let first = self.x(0);
        let last = self.x(self.len() - 1);
        if x_lo < first - 1e-12 || x_hi > last + 1e-12 {
            return None;
        }
        let lo = ((x_lo - first) / h - 1e-9).ceil().max(0.0) as usize;
        let hi = (((x_hi - first) / h + 1e-9).floor() as usize).min(self.len() - 1);
        (lo < hi).then_some((lo, hi))
    }

    /// Composite trapezoid integral over the whole grid.
    pub fn trapezoid(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let inner: f64 = self.values[1..self.len() - 1].iter().sum();
        let ends = 0.5 * (self.values[0] + self.values[self.len() - 1]);
        (inner + ends) * rational::to_f64(self.step)
    }

    /// Two-column CSV with header `x,<label>`, LF line endings, 17
    /// significant digits.
    pub fn to_csv(&self, label: &str) -> String {
        let mut out = String::with_capacity(self.len() * 48);
        writeln!(out, "x,{label}").unwrap();
        for (x, v) in self.iter() {
            writeln!(out, "{},{}", fmt17(x), fmt17(v)).unwrap();
        }
        out
    }

    /// Parse the `(x, value)` rows written by [`GridFunction::to_csv`].
    pub fn parse_csv(text: &str) -> Result<(String, Vec<(f64, f64)>)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Invalid("empty CSV".into()))?;
        let label = header
            .strip_prefix("x,")
            .ok_or_else(|| Error::Invalid(format!("unexpected CSV header {header:?}")))?
            .to_string();
        let mut rows = Vec::new();
        for line in lines {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Invalid(format!("malformed CSV row {line:?}")))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Invalid(format!("bad number {s:?}")));
            rows.push((parse(a)?, parse(b)?));
        }
        Ok((label, rows))
    }
}

/// Scientific notation with 17 significant digits. Negative zero prints as zero.
pub fn fmt17(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}
