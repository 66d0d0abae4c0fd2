//! Monte Carlo samplers and parking probabilities.
//!
//! Isobaric gaps are independent truncated exponentials and are drawn
//! exactly by inverting the CDF. Canonical configurations (`n` gaps in
//! `[1, 2]` with fixed sum `l`, flat measure) are sampled by a Markov chain
//! that redistributes the sum of a random pair of gaps uniformly over the
//! admissible segment.
//!
//! Every random draw comes from a stream addressed by `(seed, stream_id)`,
//! and histogram merges add integer counts, so results do not depend on the
//! execution mode.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::eos;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ext::ExtFloat;
use crate::grid::GridFunction;
use crate::rational::{self, Rational};
use crate::rng::{self, StreamRng};
use crate::specialfns::{self, IrwinHall};

/// Which ensemble a chain was drawn from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ensemble {
    Isobaric { p: f64 },
    Canonical { n: usize, l: f64 },
}

/// A run of consecutive gaps between rods.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacingChain {
    pub spacings: Vec<f64>,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub stream_id: u64,
}

impl SpacingChain {
    /// Rod positions relative to the first rod, `0, S_1, S_1 + S_2, ...`.
    pub fn positions(&self) -> Vec<f64> {
        let mut x = 0.0;
        let mut out = Vec::with_capacity(self.spacings.len() + 1);
        out.push(0.0);
        for s in &self.spacings {
            x += s;
            out.push(x);
        }
        out
    }
}

/// Inverse-CDF sampler for the gap density `e^{-p s}` on `[1, 2]`.
#[derive(Clone, Copy, Debug)]
pub struct GapSampler {
    rate: f64,
    em1: f64,
    reflect: bool,
}

impl GapSampler {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFinite(p));
        }
        // p < 0 is the mirror image s -> 3 - s of pressure -p
        let rate = p.abs();
        Ok(GapSampler { rate, em1: (-rate).exp_m1(), reflect: p < 0.0 })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let s = if self.rate == 0.0 { 1.0 + u } else { 1.0 - (u * self.em1).ln_1p() / self.rate };
        let s = s.clamp(1.0, 2.0);
        if self.reflect {
            3.0 - s
        } else {
            s
        }
    }
}

/// `n` independent isobaric gaps at pressure `p`.
pub fn sample_isobaric(p: f64, n: usize, seed: u64, stream_id: u64) -> Result<SpacingChain> {
    if n == 0 {
        return Err(Error::Invalid("chain length must be at least 1".into()));
    }
    let sampler = GapSampler::new(p)?;
    let mut rng = rng::stream(seed, stream_id);
    let spacings = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    Ok(SpacingChain { spacings, ensemble: Ensemble::Isobaric { p }, seed, stream_id })
}

fn check_canonical(n: usize, l: f64) -> Result<()> {
    let ratio = l / n as f64;
    if n < 2 || !(ratio > 1.0 && ratio < 2.0) {
        return Err(Error::Infeasible { n, l });
    }
    Ok(())
}

/// Pair-redistribution Markov chain on `{s in [1,2]^n : sum s = l}`.
#[derive(Clone, Debug)]
pub struct CanonicalSampler {
    spacings: Vec<f64>,
    l: f64,
    rng: StreamRng,
}

impl CanonicalSampler {
    /// Starts from the uniform configuration `s_i = l/n`.
    pub fn new(n: usize, l: f64, seed: u64, stream_id: u64) -> Result<Self> {
        check_canonical(n, l)?;
        Ok(CanonicalSampler { spacings: vec![l / n as f64; n], l, rng: rng::stream(seed, stream_id) })
    }

    /// One move: pick `i != j` and redraw `s_i` uniformly on the segment
    /// that keeps `s_i + s_j` and both gaps inside `[1, 2]`.
    pub fn step(&mut self) {
        let n = self.spacings.len();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = self.spacings[i] + self.spacings[j];
        let lo = (c - 2.0).max(1.0);
        let hi = (c - 1.0).min(2.0);
        let u: f64 = self.rng.gen();
        let si = (lo + u * (hi - lo)).clamp(1.0, 2.0);
        self.spacings[i] = si;
        self.spacings[j] = c - si;
    }

    /// `n` moves.
    pub fn sweep(&mut self) {
        for _ in 0..self.spacings.len() {
            self.step();
        }
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn total(&self) -> f64 {
        self.spacings.iter().sum()
    }

    pub fn target_total(&self) -> f64 {
        self.l
    }
}

/// Default number of sweeps discarded before a canonical chain is used.
pub const DEFAULT_BURN_IN: usize = 100;

/// Canonical chain after `sweeps` sweeps from the uniform start.
pub fn sample_canonical(n: usize, l: f64, sweeps: usize, seed: u64, stream_id: u64) -> Result<SpacingChain> {
    let mut s = CanonicalSampler::new(n, l, seed, stream_id)?;
    for _ in 0..sweeps {
        s.sweep();
    }
    Ok(SpacingChain { spacings: s.spacings, ensemble: Ensemble::Canonical { n, l }, seed, stream_id })
}

/// Integrated autocorrelation time `1 + 2 sum_t rho(t)` of a scalar series,
/// summed until the autocorrelation first drops below zero.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c = (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum::<f64>()
            / ((n - lag) as f64 * var);
        if c <= 0.0 {
            break;
        }
        tau += 2.0 * c;
    }
    tau
}

/// Where the partial sums for [`empirical_g`] come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChainSource {
    /// Fresh independent gaps for every sample.
    Isobaric { p: f64 },
    /// Independent canonical chains on a ring of `n` gaps summing to `l`;
    /// every one of the `n` rods serves as an origin.
    Canonical { n: usize, l: f64, burn_in: usize },
}

impl ChainSource {
    pub fn density(&self) -> f64 {
        match *self {
            ChainSource::Isobaric { p } => eos::density_from_pressure(p),
            ChainSource::Canonical { n, l, .. } => n as f64 / l,
        }
    }
}

/// Histogram estimate of `g` with per-bin standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalG {
    /// Bin averages at the bin centres.
    pub g: GridFunction,
    pub stderr: Vec<f64>,
    pub counts: Vec<u64>,
    /// Number of origins contributing partial sums.
    pub origins: u64,
    pub bin_width: Rational,
}

/// Isobaric samples drawn from one random stream.
const ISOBARIC_CHUNK: usize = 4096;

#[derive(Clone, Debug)]
struct Tally {
    counts: Vec<u64>,
    sumsq: Vec<u64>,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Tally { counts: vec![0; bins], sumsq: vec![0; bins] }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(other.sumsq) {
            *a += b;
        }
        self
    }
}

/// Estimate `g` on `(0, x_max)` from partial sums `S_1 + ... + S_m`,
/// `m <= m_max`.
///
/// Bin `k` counts partial sums in `[k w, (k+1) w)` and is normalized by
/// `rho w` per origin. For isobaric sources `samples` is the number of
/// independent origins; for canonical sources it is the number of
/// independent chains, each contributing `n` origins. Standard errors come
/// from the spread of per-sample (per-chain) counts.
///
/// Since every gap is at least 1, `S_{m_max + 1} >= m_max + 1`; `x_max` is
/// capped there so that no partial sum inside the range is left out.
#[allow(clippy::too_many_arguments)]
pub fn empirical_g(
    source: ChainSource,
    m_max: usize,
    x_max: f64,
    bin_width: Rational,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<EmpiricalG> {
    let w = rational::to_f64(bin_width);
    if !(w > 0.0) || !(x_max > 0.0) || !x_max.is_finite() {
        return Err(Error::Bins(format!("bin width {bin_width} and x_max {x_max} must be positive")));
    }
    if m_max == 0 || x_max > m_max as f64 + 1.0 {
        return Err(Error::Bins(format!("x_max = {x_max} exceeds m_max + 1 = {}", m_max + 1)));
    }
    if w > 1.0 {
        return Err(Error::Bins(format!("bin width {bin_width} exceeds the minimum gap 1")));
    }
    if samples < 2 {
        return Err(Error::Bins("need at least two samples for an error estimate".into()));
    }
    let bins = (x_max / w + 1e-9).floor() as usize;
    if bins == 0 {
        return Err(Error::Bins(format!("no complete bin of width {bin_width} below {x_max}")));
    }
    let top = bins as f64 * w;
    let bin_of = move |x: f64| -> Option<usize> {
        if x < top {
            Some(((x / w) as usize).min(bins - 1))
        } else {
            None
        }
    };

    let (tally, origins, per_sample) = match source {
        ChainSource::Isobaric { p } => {
            let sampler = GapSampler::new(p)?;
            let chunks = samples.div_ceil(ISOBARIC_CHUNK);
            let tally = exec.map_fold(
                chunks,
                Tally::new(bins),
                |c| {
                    let mut rng = rng::stream(seed, c as u64);
                    let mut t = Tally::new(bins);
                    let todo = ISOBARIC_CHUNK.min(samples - c * ISOBARIC_CHUNK);
                    for _ in 0..todo {
                        let mut x = 0.0;
                        for _ in 0..m_max {
                            x += sampler.sample(&mut rng);
                            match bin_of(x) {
                                // partial sums are >= 1 apart and w <= 1: at most one per bin
                                Some(b) => {
                                    t.counts[b] += 1;
                                    t.sumsq[b] += 1;
                                }
                                None => break,
                            }
                        }
                    }
                    t
                },
                Tally::merge,
            );
            (tally, samples as u64, 1.0)
        }
        ChainSource::Canonical { n, l, burn_in } => {
            check_canonical(n, l)?;
            let tally = exec.try_map(samples, |c| -> Result<Tally> {
                let chain = sample_canonical(n, l, burn_in, seed, c as u64)?;
                let s = &chain.spacings;
                let mut local = vec![0u64; bins];
                for origin in 0..n {
                    let mut x = 0.0;
                    for m in 0..m_max.min(n - 1) {
                        x += s[(origin + m) % n];
                        match bin_of(x) {
                            Some(b) => local[b] += 1,
                            None => break,
                        }
                    }
                }
                let sumsq = local.iter().map(|c| c * c).collect();
                Ok(Tally { counts: local, sumsq })
            })?;
            let tally = tally.into_iter().fold(Tally::new(bins), Tally::merge);
            (tally, (samples * n) as u64, n as f64)
        }
    };

    let rho = source.density();
    let draws = samples as f64;
    let to_g = 1.0 / (rho * w * per_sample);
    let mut values = Vec::with_capacity(bins);
    let mut stderr = Vec::with_capacity(bins);
    for b in 0..bins {
        let mean = tally.counts[b] as f64 / draws;
        let second = tally.sumsq[b] as f64 / draws;
        let var = (second - mean * mean).max(0.0) * draws / (draws - 1.0);
        values.push(mean * to_g);
        stderr.push((var / draws).sqrt() * to_g);
    }
    Ok(EmpiricalG {
        g: GridFunction::new(bin_width / Rational::from_integer(2), bin_width, values)?,
        stderr,
        counts: tally.counts,
        origins,
        bin_width,
    })
}

/// Exact pair distribution of the canonical ensemble on a ring of `n` gaps
/// with total `l`, counting neighbours up to order `m_max`:
///
/// ```text
/// g_n(x) = (l/n) sum_m u_m(x - m) u_{n-m}(l - x - (n - m)) / u_n(l - n)
/// ```
///
/// The density of the `m`-th partial sum is the isobaric one reweighted by
/// the density of the remaining `n - m` gaps closing the ring. Deviations
/// from the thermodynamic-limit `g` are `O(m/n)`.
pub fn ring_g_exact(n: usize, l: Rational, x: Rational, m_max: usize) -> Result<f64> {
    check_canonical(n, rational::to_f64(l))?;
    if x < Rational::from_integer(0) {
        return Err(Error::NegativeSeparation(rational::to_f64(x)));
    }
    let norm = IrwinHall::new(n as u32)?.density(l - Rational::from_integer(n as i64));
    let mut sum = 0.0;
    for m in 1..=m_max.min(n - 1) {
        let a = IrwinHall::new(m as u32)?.shifted(x);
        if a.is_zero() {
            continue;
        }
        let rest = (n - m) as u32;
        let b = IrwinHall::new(rest)?.density(l - x - Rational::from_integer(rest as i64));
        sum += (a * b / norm).to_f64();
    }
    Ok(sum * rational::to_f64(l) / n as f64)
}

/// Exact probability that `n` uniform points on a circle of circumference
/// `l` form a parking configuration, `(n-1)! u_n(l - n) / l^{n-1}`.
pub fn parking_probability_exact(n: usize, l: Rational) -> Result<ExtFloat> {
    if n < 2 {
        return Err(Error::Invalid(format!("parking probability needs n >= 2, got {n}")));
    }
    if l <= Rational::from_integer(0) {
        return Err(Error::Invalid(format!("circumference must be positive, got {l}")));
    }
    let nn = Rational::from_integer(n as i64);
    if l <= nn || l >= nn * Rational::from_integer(2) {
        return Ok(ExtFloat::ZERO);
    }
    let t = rational::to_big(l - nn);
    let u = IrwinHall::new(n as u32)?.density_exact(&t);
    let big_l = rational::to_big(l);
    let mut pow = BigRational::one();
    for _ in 1..n {
        pow *= &big_l;
    }
    let value = u * BigRational::from_integer(specialfns::factorial(n - 1)) / pow;
    debug_assert!(!value.is_negative());
    if value.is_zero() {
        return Ok(ExtFloat::ZERO);
    }
    Ok(ExtFloat::from_ratio(value.numer(), value.denom()))
}

/// Exact value for a floating circumference, taken at its exact binary value.
pub fn parking_probability_exact_f64(n: usize, l: f64) -> Result<ExtFloat> {
    if !l.is_finite() {
        return Err(Error::NonFinite(l));
    }
    let exact = BigRational::from_float(l).ok_or(Error::NonFinite(l))?;
    let (num, den): (&BigInt, &BigInt) = (exact.numer(), exact.denom());
    // route through Ratio<i64> when it fits, otherwise approximate
    match (i64::try_from(num.clone()), i64::try_from(den.clone())) {
        (Ok(a), Ok(b)) => parking_probability_exact(n, Rational::new(a, b)),
        _ => parking_probability_exact(n, rational::approximate(l, rational::MAX_DENOMINATOR)?),
    }
}

/// Trials drawn from one random stream.
const PARKING_CHUNK: u64 = 1 << 14;

/// Monte Carlo estimate of the parking probability: `(frequency, stderr)`.
///
/// Each trial sorts `n` uniform points on the circle of circumference `l`
/// and checks that all `n` circular gaps lie in `[1, 2]`.
pub fn parking_probability_mc(n: usize, l: f64, trials: u64, seed: u64, exec: Exec) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if n < 2 || !(l > 0.0) || !l.is_finite() {
        return Err(Error::Invalid(format!("need n >= 2 and l > 0, got n = {n}, l = {l}")));
    }
    let chunks = trials.div_ceil(PARKING_CHUNK) as usize;
    let hits = exec.map_fold(
        chunks,
        0u64,
        |c| {
            let mut rng = rng::stream(seed, c as u64);
            let todo = PARKING_CHUNK.min(trials - c as u64 * PARKING_CHUNK);
            let mut pts = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..todo {
                for x in pts.iter_mut() {
                    *x = rng.gen::<f64>() * l;
                }
                pts.sort_unstable_by(f64::total_cmp);
                let wrap = l - pts[n - 1] + pts[0];
                let ok = (1.0..=2.0).contains(&wrap)
                    && pts.windows(2).all(|w| (1.0..=2.0).contains(&(w[1] - w[0])));
                hits += u64::from(ok);
            }
            hits
        },
        |a, b| a + b,
    );
    let f = hits as f64 / trials as f64;
    Ok((f, (f * (1.0 - f) / trials as f64).sqrt()))
}

/// Exact and Monte Carlo parking probabilities side by side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParkingProbability {
    pub n: usize,
    pub l: f64,
    pub exact: f64,
    pub exact_ext: ExtFloat,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    pub trials: u64,
}

impl ParkingProbability {
    pub fn compute(n: usize, l: Rational, trials: u64, seed: u64, exec: Exec) -> Result<Self> {
        let exact_ext = parking_probability_exact(n, l)?;
        let lf = rational::to_f64(l);
        let (mc_estimate, mc_stderr) = parking_probability_mc(n, lf, trials, seed, exec)?;
        Ok(ParkingProbability { n, l: lf, exact: exact_ext.to_f64(), exact_ext, mc_estimate, mc_stderr, trials })
    }

    /// `|mc - exact|` in units of the standard error; 0 when both vanish.
    pub fn sigma_distance(&self) -> f64 {
        let d = (self.mc_estimate - self.exact).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.mc_stderr
        }
    }
}

/// One row of [`rate_function_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    pub n: usize,
    /// `-(1/n) ln P`.
    pub value: f64,
    /// `value - I(rho)`.
    pub error: f64,
}

/// `-(1/n) ln P(n, n/rho)` for each `n`, compared with the rate function.
pub fn rate_function_check(rho: f64, n_list: &[usize]) -> Result<Vec<RateRow>> {
    let limit = eos::parking_rate(rho)?;
    let rho_r = rational::approximate(rho, rational::MAX_DENOMINATOR)?;
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("n list must be strictly ascending".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let l = Rational::from_integer(n as i64) / rho_r;
            let prob = parking_probability_exact(n, l)?;
            if prob.is_zero() {
                return Err(Error::Infeasible { n, l: rational::to_f64(l) });
            }
            let value = -prob.ln() / n as f64;
            Ok(RateRow { n, value, error: value - limit })
        })
        .collect()
}
