//! Pair distribution `g(x)` and pair correlation `h(x) = g(x) - 1`.
//!
//! In the isobaric ensemble the position of the `m`-th neighbour is a sum of
//! `m` independent gaps with density `e^{-ps} / z(p)` on `[1, 2]`, so for
//! `x > 0`
//!
//! ```text
//! g(x) = (1/rho) sum_m  W^m e^{-p x} u_m(x - m),     W = 1 / z(p)
//! ```
//!
//! Only orders with `m < x < 2m` contribute, so the sum is finite at every
//! `x` and no truncation is involved. Terms are combined as
//! `exp(m ln W - p x + ln u_m)`: the two exponents reach `1e4` in magnitude
//! and cancel to `O(1)`.
//!
//! At the single jump discontinuities (`x = 1` and `x = 2`) point evaluation
//! returns the right limit; [`g_limit`] gives either side.

use crate::eos;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::GridFunction;
use crate::rational::{self, Rational};
use crate::specialfns;

/// Largest `x_max` accepted by the grid builders.
pub const MAX_GRID_EXTENT: f64 = 200.0;
/// Smallest grid step accepted by the grid builders.
pub const MIN_GRID_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Precomputed per-pressure constants.
#[derive(Clone, Copy, Debug)]
struct Kernel {
    p: f64,
    ln_weight: f64,
    inv_rho: f64,
}

impl Kernel {
    fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFinite(p));
        }
        Ok(Kernel { p, ln_weight: -eos::ln_gap_partition(p), inv_rho: eos::mean_spacing(p) })
    }

    /// Contribution of the nearest neighbour, `W e^{-p x} / rho`.
    fn first_neighbour(&self, x: f64) -> f64 {
        (self.ln_weight - self.p * x).exp() * self.inv_rho
    }

    fn eval(&self, x: Rational, side: Side) -> f64 {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        let xf = rational::to_f64(x);
        match side {
            Side::Right if x == one => return self.first_neighbour(1.0),
            Side::Left if x <= one => return 0.0,
            Side::Left if x == two => return self.first_neighbour(2.0),
            _ => {}
        }
        if x < one {
            return 0.0;
        }
        specialfns::shifted_column(x)
            .into_iter()
            .map(|(m, u)| (m as f64 * self.ln_weight - self.p * xf + u.ln()).exp())
            .sum::<f64>()
            * self.inv_rho
    }
}

/// `g(x)` at pressure `p` for `x >= 0`; right limit at breakpoints.
pub fn g_point(p: f64, x: Rational) -> Result<f64> {
    g_limit(p, x, Side::Right)
}

/// One-sided value of `g` at `x`.
pub fn g_limit(p: f64, x: Rational, side: Side) -> Result<f64> {
    if x < Rational::from_integer(0) {
        return Err(Error::NegativeSeparation(rational::to_f64(x)));
    }
    Ok(Kernel::new(p)?.eval(x, side))
}

fn check_grid(x_max: f64, step: Rational) -> Result<usize> {
    let h = rational::to_f64(step);
    if !(x_max.is_finite() && x_max >= 0.0) {
        return Err(Error::Grid(format!("x_max = {x_max} must be finite and nonnegative")));
    }
    if x_max > MAX_GRID_EXTENT {
        return Err(Error::Grid(format!("x_max = {x_max} exceeds {MAX_GRID_EXTENT}")));
    }
    if !(h >= MIN_GRID_STEP) {
        return Err(Error::Grid(format!("step = {step} is below {MIN_GRID_STEP}")));
    }
    if *step.denom() > rational::MAX_DENOMINATOR {
        return Err(Error::Grid(format!("step denominator {} exceeds {}", step.denom(), rational::MAX_DENOMINATOR)));
    }
    Ok((x_max / h + 1e-9).floor() as usize + 1)
}

/// `g` at `x0 + i * step` for every grid point in `[x0, x_max]`.
pub fn g_grid_from(p: f64, x0: Rational, x_max: f64, step: Rational, exec: Exec) -> Result<GridFunction> {
    let kernel = Kernel::new(p)?;
    let total = check_grid(x_max, step)?;
    if x0 < Rational::from_integer(0) {
        return Err(Error::NegativeSeparation(rational::to_f64(x0)));
    }
    let skip = (rational::to_f64(x0 / step) - 1e-9).ceil().max(0.0) as usize;
    let start = step * Rational::from_integer(skip as i64);
    if start != x0 {
        return Err(Error::Grid(format!("x0 = {x0} is not a multiple of the step {step}")));
    }
    let n = total.saturating_sub(skip);
    specialfns::prepare(x_max.ceil() as usize + 1);
    let values = exec.map(n, |i| kernel.eval(x0 + step * Rational::from_integer(i as i64), Side::Right));
    GridFunction::new(x0, step, values)
}

/// `g` on `[0, x_max]`.
pub fn g_grid(p: f64, x_max: f64, step: Rational) -> Result<GridFunction> {
    g_grid_from(p, Rational::from_integer(0), x_max, step, Exec::default())
}

pub fn g_grid_with(p: f64, x_max: f64, step: Rational, exec: Exec) -> Result<GridFunction> {
    g_grid_from(p, Rational::from_integer(0), x_max, step, exec)
}

/// `h = g - 1` on `[0, x_max]`.
pub fn h_grid(p: f64, x_max: f64, step: Rational) -> Result<GridFunction> {
    Ok(g_grid(p, x_max, step)?.map(|v| v - 1.0))
}

/// `h = g - 1` on `[x0, x_max]`.
pub fn h_grid_from(p: f64, x0: Rational, x_max: f64, step: Rational, exec: Exec) -> Result<GridFunction> {
    Ok(g_grid_from(p, x0, x_max, step, exec)?.map(|v| v - 1.0))
}

/// Average of `g` over each bin `[i w, (i+1) w)` covering `[0, x_max]`.
///
/// Composite Simpson (4 panels) on every piece between integer breakpoints,
/// with one-sided limits at the piece ends, so jumps never leak across.
pub fn g_bin_averages(p: f64, x_max: f64, bin_width: Rational, exec: Exec) -> Result<Vec<f64>> {
    let kernel = Kernel::new(p)?;
    let w = rational::to_f64(bin_width);
    if !(w > 0.0) || !(x_max > 0.0) || x_max > MAX_GRID_EXTENT {
        return Err(Error::Bins(format!("bin width {bin_width}, x_max {x_max}")));
    }
    let n_bins = (x_max / w + 1e-9).floor() as usize;
    specialfns::prepare(x_max.ceil() as usize + 1);
    Ok(exec.map(n_bins, |b| {
        let lo = bin_width * Rational::from_integer(b as i64);
        let hi = lo + bin_width;
        let mut cuts = vec![lo];
        let mut k = lo.floor() + Rational::from_integer(1);
        while k < hi {
            cuts.push(k);
            k += Rational::from_integer(1);
        }
        cuts.push(hi);
        let mut total = 0.0;
        for piece in cuts.windows(2) {
            let (a, c) = (piece[0], piece[1]);
            let h = (c - a) / Rational::from_integer(4);
            let f = |i: i64| {
                let side = if i == 4 { Side::Left } else { Side::Right };
                kernel.eval(a + h * Rational::from_integer(i), side)
            };
            let s = f(0) + 4.0 * f(1) + 2.0 * f(2) + 4.0 * f(3) + f(4);
            total += s * rational::to_f64(h) / 3.0;
        }
        total / w
    }))
}

/// `g` sampled on every unit interval `[k, k+1]`, `k < units`, at `q + 1`
/// equispaced points with one-sided limits at both ends.
///
/// `g` is smooth inside each unit interval, so composite Simpson on these
/// rows integrates `w(x) g(x)` to high order for smooth weights.
#[derive(Clone, Debug)]
pub struct UnitSamples {
    q: usize,
    rows: Vec<Vec<f64>>,
}

impl UnitSamples {
    pub fn new(p: f64, units: usize, q: usize, exec: Exec) -> Result<Self> {
        let kernel = Kernel::new(p)?;
        if q == 0 || q % 2 == 1 || q as i64 > rational::MAX_DENOMINATOR {
            return Err(Error::Grid(format!("panels per unit q = {q} must be even and positive")));
        }
        if units as f64 > MAX_GRID_EXTENT {
            return Err(Error::Grid(format!("{units} units exceeds {MAX_GRID_EXTENT}")));
        }
        specialfns::prepare(units + 1);
        let qi = q as i64;
        let points = exec.map(units * q + 1, |i| {
            kernel.eval(Rational::new(i as i64, qi), Side::Right)
        });
        let rows = (0..units)
            .map(|k| {
                let mut row = points[k * q..=(k + 1) * q].to_vec();
                row[q] = kernel.eval(Rational::from_integer(k as i64 + 1), Side::Left);
                row
            })
            .collect();
        Ok(UnitSamples { q, rows })
    }

    pub fn units(&self) -> usize {
        self.rows.len()
    }

    /// `int_0^units w(x) g(x) dx` by composite Simpson on every row.
    pub fn integrate(&self, w: impl Fn(f64) -> f64) -> f64 {
        let h = 1.0 / self.q as f64;
        let mut total = 0.0;
        for (k, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for (i, v) in row.iter().enumerate() {
                let c = if i == 0 || i == self.q { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                s += c * w(k as f64 + i as f64 * h) * v;
            }
            total += s * h / 3.0;
        }
        total
    }
}

/// Exponential envelope and oscillation period of a decaying `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    /// Fitted decay rate `1/xi` of `|h|`.
    pub inv_xi: f64,
    /// Fitted pseudo-period of the oscillation.
    pub period: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the log-envelope regression.
    pub residual: f64,
    /// Number of extrema of `|h|` used.
    pub extrema: usize,
}

impl TailFit {
    pub fn xi(&self) -> f64 {
        1.0 / self.inv_xi
    }
}

/// Minimum number of extrema of `|h|` required by [`fit_tail`].
pub const MIN_EXTREMA: usize = 5;

/// Fit `|h(x)| ~ A_s e^{-x/xi}` through the local maxima of `|h|` in `window`.
///
/// Extremum positions and heights are refined by a parabola through the
/// three neighbouring samples. Maxima and minima of `h` get separate
/// intercepts and share one slope, so an asymmetric oscillation about zero
/// does not bias the decay rate. The period is the mean spacing between
/// successive extrema of the same sign.
pub fn fit_tail(h: &GridFunction, window: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = h
        .index_window(window.0, window.1)
        .ok_or(Error::Window { lo: window.0, hi: window.1 })?;
    let v = h.values();
    let step = rational::to_f64(h.step());
    let mut peaks: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for i in lo.max(1)..=hi.min(v.len() - 2) {
        let (a, b, c) = (v[i - 1].abs(), v[i].abs(), v[i + 1].abs());
        if !(b > 0.0 && b >= a && b > c) {
            continue;
        }
        // parabolic refinement on the signed samples
        let (ym, y0, yp) = (v[i - 1], v[i], v[i + 1]);
        let denom = ym - 2.0 * y0 + yp;
        let shift = if denom != 0.0 { (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        let height = y0 - 0.25 * (ym - yp) * shift;
        let x = h.x(i) + shift * step;
        if height == 0.0 {
            continue;
        }
        let class = usize::from(height < 0.0);
        peaks[class].push((x, height.abs().ln()));
    }
    let found = peaks[0].len() + peaks[1].len();
    if found < MIN_EXTREMA {
        return Err(Error::TooFewExtrema { found, needed: MIN_EXTREMA });
    }

    // common slope, one intercept per sign class
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut means = [(0.0, 0.0); 2];
    for (class, pts) in peaks.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        means[class] = (mx, my);
        for &(x, y) in pts {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    if sxx == 0.0 {
        return Err(Error::TooFewExtrema { found, needed: MIN_EXTREMA });
    }
    let slope = sxy / sxx;
    let mut ss = 0.0;
    for (class, pts) in peaks.iter().enumerate() {
        let (mx, my) = means[class];
        for &(x, y) in pts {
            let r = y - (my + slope * (x - mx));
            ss += r * r;
        }
    }
    let residual = (ss / found as f64).sqrt();
    if !(slope < 0.0) {
        return Err(Error::NonDecaying(slope));
    }

    let mut span = 0.0;
    let mut gaps = 0usize;
    for pts in &peaks {
        if pts.len() >= 2 {
            span += pts[pts.len() - 1].0 - pts[0].0;
            gaps += pts.len() - 1;
        }
    }
    if gaps == 0 {
        return Err(Error::TooFewExtrema { found, needed: MIN_EXTREMA });
    }
    Ok(TailFit { inv_xi: -slope, period: span / gaps as f64, fit_window: window, residual, extrema: found })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn r(a: i64, b: i64) -> Rational {
        Ratio::new(a, b)
    }

    #[test]
    fn hard_core() {
        for p in [-30.0, -1.0, 0.0, 5.0, 40.0] {
            for k in 0..100 {
                assert_eq!(g_point(p, r(k, 100)).unwrap(), 0.0);
            }
        }
        assert_eq!(g_point(5.0, r(1, 2)).unwrap(), 0.0);
    }

    #[test]
    fn nearest_neighbour_shell_at_zero_pressure() {
        // W(0) = 1, u_1 = 1 and 1/rho(0) = 3/2
        for k in [1, 13, 50, 77, 99] {
            let g = g_point(0.0, r(100 + k, 100)).unwrap();
            assert!((g - 1.5).abs() < 1e-14, "{g}");
        }
    }

    #[test]
    fn single_term_fixture() {
        // m in {2} at x = 2.5: W(3)^2 e^{-7.5} u_2(0.5) / rho(3), 50-digit value
        let g = g_point(3.0, r(5, 2)).unwrap();
        assert!((g - 1.424_481_798_214_254_403_827_636_277_17).abs() < 1e-13, "{g}");
    }

    #[test]
    fn approaches_one() {
        let g = g_point(2.0, r(40, 1)).unwrap();
        assert!((g - 1.0).abs() < 1e-6, "{g}");
    }

    #[test]
    fn negative_separation_rejected() {
        assert!(matches!(g_point(1.0, r(-1, 2)), Err(Error::NegativeSeparation(_))));
        assert!(matches!(g_point(f64::NAN, r(1, 2)), Err(Error::NonFinite(_))));
    }

    #[test]
    fn breakpoint_conventions() {
        let p = 1.5;
        let w = (-eos::ln_gap_partition(p)).exp();
        let inv_rho = eos::mean_spacing(p);
        assert_eq!(g_limit(p, r(1, 1), Side::Left).unwrap(), 0.0);
        let right = g_point(p, r(1, 1)).unwrap();
        assert!((right - w * (-p).exp() * inv_rho).abs() < 1e-14);
        let left2 = g_limit(p, r(2, 1), Side::Left).unwrap();
        assert!((left2 - w * (-2.0 * p).exp() * inv_rho).abs() < 1e-14);
        assert_eq!(g_point(p, r(2, 1)).unwrap(), 0.0);
        // right limit agrees with a point just to the right
        let near = g_point(p, r(1_000_001, 1_000_000)).unwrap();
        assert!((near - right).abs() < 1e-5);
    }

    #[test]
    fn nonnegative_everywhere() {
        for p in [-20.0, -3.0, 0.0, 3.0, 20.0] {
            let g = g_grid(p, 30.0, r(1, 20)).unwrap();
            assert!(g.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn zero_pressure_grid() {
        let g = g_grid(0.0, 6.0, r(1, 100)).unwrap();
        assert_eq!(g.len(), 601);
        for (x, v) in g.iter() {
            if x > 1.0 + 1e-9 && x < 2.0 - 1e-9 {
                assert!((v - 1.5).abs() < 1e-14);
            }
            if x < 1.0 {
                assert_eq!(v, 0.0);
            }
        }
        // jump down at x = 2 (nearest neighbour shell ends, second starts at 0)
        assert!(g.values()[199] > 1.4 && g.values()[200] < 1e-12);
    }

    #[test]
    fn sequence_sum_is_exactly_finite() {
        // every order outside m < x < 2m contributes exactly zero, so adding
        // them changes nothing
        let p = 2.5;
        let x = r(173, 10);
        let k = Kernel::new(p).unwrap();
        let base = k.eval(x, Side::Right);
        let mut extended = 0.0;
        for m in 1..=40u32 {
            let u = specialfns::irwin_hall_shifted(m, x).unwrap();
            if !u.is_zero() {
                extended += (m as f64 * k.ln_weight - p * 17.3 + u.ln()).exp();
            } else {
                assert!(!specialfns::contributing_orders(x).contains(&m));
            }
        }
        assert!((extended * k.inv_rho - base).abs() < 1e-14);
    }

    #[test]
    fn dirac_train_limits() {
        // mass piles up at the integers for p -> +inf and at even integers
        // for p -> -inf
        let g = g_grid(60.0, 8.0, r(1, 100)).unwrap();
        let near_int: f64 = g.iter().filter(|(x, _)| (x - x.round()).abs() < 0.2).map(|(_, v)| v).sum();
        let total: f64 = g.values().iter().sum();
        assert!(near_int / total > 0.95);
        let g = g_grid(-60.0, 12.0, r(1, 100)).unwrap();
        let near_even: f64 = g
            .iter()
            .filter(|(x, _)| (x / 2.0 - (x / 2.0).round()).abs() < 0.1)
            .map(|(_, v)| v)
            .sum();
        let total: f64 = g.values().iter().sum();
        assert!(near_even / total > 0.95);
    }

    #[test]
    fn grid_guards() {
        assert!(g_grid(0.0, 250.0, r(1, 10)).is_err());
        assert!(g_grid(0.0, 5.0, r(1, 100_000)).is_err());
        assert!(g_grid(0.0, -1.0, r(1, 10)).is_err());
        assert!(g_grid_from(0.0, r(1, 3), 5.0, r(1, 10), Exec::Sequential).is_err());
    }

    #[test]
    fn h_is_g_minus_one() {
        let h = h_grid(1.0, 3.0, r(1, 10)).unwrap();
        assert_eq!(h.values()[5], -1.0);
        let g = g_grid(1.0, 3.0, r(1, 10)).unwrap();
        for (a, b) in h.values().iter().zip(g.values()) {
            assert_eq!(*a, b - 1.0);
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let a = g_grid_from(-4.0, r(0, 1), 25.0, r(1, 50), Exec::Sequential).unwrap();
        let b = g_grid_from(-4.0, r(0, 1), 25.0, r(1, 50), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn windowed_grid_matches_full_grid() {
        let full = g_grid(3.0, 12.0, r(1, 20)).unwrap();
        let part = g_grid_from(3.0, r(5, 1), 12.0, r(1, 20), Exec::Sequential).unwrap();
        assert_eq!(part.len(), full.len() - 100);
        assert_eq!(&full.values()[100..], part.values());
    }

    #[test]
    fn bin_average_of_flat_shell() {
        let avg = g_bin_averages(0.0, 3.0, r(1, 20), Exec::Sequential).unwrap();
        assert_eq!(avg.len(), 60);
        assert!(avg[..20].iter().all(|&v| v == 0.0));
        for v in &avg[20..40] {
            assert!((v - 1.5).abs() < 1e-14);
        }
        // second shell: triangle u_2(x-2) * 3/2 on (2, 3) is (x-2) * 3/2
        for (b, v) in avg[40..].iter().enumerate() {
            let mid = 0.025 + 0.05 * b as f64;
            assert!((v - 1.5 * mid).abs() < 1e-13);
        }
    }

    #[test]
    fn unit_samples_integrate_the_shells() {
        // at p = 0 the first shell is 3/2 on (1, 2), the second 3/2 (x - 2) on (2, 3)
        let s = UnitSamples::new(0.0, 3, 8, Exec::Sequential).unwrap();
        assert!((s.integrate(|_| 1.0) - 2.25).abs() < 1e-14);
        assert!(UnitSamples::new(0.0, 3, 7, Exec::Sequential).is_err());
    }

    #[test]
    fn synthetic_tail() {
        let step = r(1, 100);
        let values = (0..=4000).map(|i| {
            let x = i as f64 / 100.0;
            (-x / 4.0).exp() * (2.0 * std::f64::consts::PI * x).cos()
        });
        let h = GridFunction::new(r(0, 1), step, values.collect()).unwrap();
        let fit = fit_tail(&h, (2.0, 30.0)).unwrap();
        assert!((fit.inv_xi - 0.25).abs() < 1e-3, "{fit:?}");
        assert!((fit.period - 1.0).abs() < 1e-3, "{fit:?}");
        assert!(fit.residual < 1e-3);
    }

    #[test]
    fn asymmetric_oscillation_keeps_the_decay_rate() {
        // both signs decay with rate 0.1 but with different amplitudes
        let step = r(1, 100);
        let values = (0..=6000).map(|i| {
            let x = i as f64 / 100.0;
            let c = (std::f64::consts::PI * x).cos();
            (-0.1 * x).exp() * if c > 0.0 { 3.0 * c } else { 0.5 * c }
        });
        let h = GridFunction::new(r(0, 1), step, values.collect()).unwrap();
        let fit = fit_tail(&h, (5.0, 55.0)).unwrap();
        assert!((fit.inv_xi - 0.1).abs() < 1e-3, "{fit:?}");
        assert!((fit.period - 2.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn fit_errors() {
        let h = GridFunction::new(r(0, 1), r(1, 10), (0..100).map(|i| (i as f64 * 0.01).sin()).collect()).unwrap();
        assert!(matches!(fit_tail(&h, (1.0, 9.0)), Err(Error::TooFewExtrema { .. })));
        assert!(matches!(fit_tail(&h, (1.0, 90.0)), Err(Error::Window { .. })));
        let growing = GridFunction::new(
            r(0, 1),
            r(1, 100),
            (0..3000).map(|i| {
                let x = i as f64 / 100.0;
                (0.1 * x).exp() * (2.0 * std::f64::consts::PI * x).cos()
            }).collect(),
        )
        .unwrap();
        assert!(matches!(fit_tail(&growing, (1.0, 25.0)), Err(Error::NonDecaying(_))));
    }
}
