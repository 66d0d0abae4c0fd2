//! Laplace transform of `g`, its poles and the correlation length.
//!
//! With `phi(z) = (e^{-z} - e^{-2z}) / z` the Laplace transform of a single
//! gap density is `psi(lambda) = phi(lambda + p) / phi(p)`, and summing the
//! renewal series gives
//!
//! ```text
//! g^(lambda) = (1/rho) psi / (1 - psi)
//! ```
//!
//! Poles of `g^` other than `lambda = 0` solve `phi(lambda + p) = phi(p)`.
//! They come in conjugate pairs in the left half-plane; the one closest to
//! the imaginary axis sets the decay rate `1/xi` and the pseudo-period
//! `2 pi / |Im lambda|` of `h(x)`.
//!
//! `phi` spans hundreds of orders of magnitude over the pressures of
//! interest, so everything is carried as `ln phi`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::eos;
use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 0.1;
/// Newton iteration cap per pole.
pub const MAX_NEWTON_ITERS: usize = 100;
/// Below this `|p|` poles are reached by continuation from `|p| = 30`.
pub const CONTINUATION_THRESHOLD: f64 = 8.0;
const CONTINUATION_START: f64 = 30.0;
const CONTINUATION_STEP: f64 = 0.5;
/// Required `|psi(lambda) - 1|` at a converged pole.
pub const RESIDUAL_TOL: f64 = 1e-12;

fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `phi(z) = sum_k (-1)^k (2^{k+1} - 1) z^k / (k+1)!`
fn phi_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow2 = 2.0;
    for k in 0..24 {
        // term = (-z)^k / (k+1)!
        sum += term * (pow2 - 1.0);
        term *= -z / (k as f64 + 2.0);
        pow2 *= 2.0;
    }
    sum
}

/// `ln phi(z)` on the principal branch of the pieces.
fn ln_phi(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        return phi_series(z).ln();
    }
    if z.re >= 0.0 {
        -z + (-expm1(-z) / z).ln()
    } else {
        -2.0 * z + (expm1(z) / z).ln()
    }
}

/// `d ln phi / dz = -1 - 1/z + 1/(e^z - 1)`.
fn dln_phi(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        let z2 = z * z;
        return -1.5 + z * (1.0 / 12.0 + z2 * (-1.0 / 720.0 + z2 / 30240.0));
    }
    -1.0 - 1.0 / z + 1.0 / expm1(z)
}

/// `psi(lambda) = phi(lambda + p) / phi(p)`.
fn psi(p: f64, lambda: Complex64) -> Complex64 {
    (ln_phi(lambda + p) - ln_phi(Complex64::new(p, 0.0))).exp()
}

/// Closed-form Laplace transform of `g` at pressure `p`.
///
/// Valid for `Re lambda > 0` and by analytic continuation elsewhere; points
/// where `1 - psi` vanishes to rounding are rejected.
pub fn laplace_g(p: f64, lambda: Complex64) -> Result<Complex64> {
    if !p.is_finite() {
        return Err(Error::NonFinite(p));
    }
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::NonFinite(if lambda.re.is_finite() { lambda.im } else { lambda.re }));
    }
    let s = psi(p, lambda);
    let denom = 1.0 - s;
    if denom.norm() <= RESIDUAL_TOL * s.norm().max(1.0) {
        return Err(Error::NearPole { re: lambda.re, im: lambda.im });
    }
    Ok(s / denom * eos::mean_spacing(p))
}

/// `phi(lambda + p) - phi(p)`; its zeros other than `lambda = 0` are the
/// poles of the transform.
pub fn pole_equation(p: f64, lambda: Complex64) -> Result<Complex64> {
    let z = lambda + p;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint);
    }
    Ok(ln_phi(z).exp() - ln_phi(Complex64::new(p, 0.0)).exp())
}

/// `psi(lambda) - 1`, the pole equation divided by `phi(p)`. This is the
/// form used for Newton and residuals: it stays O(1) while `phi(p)` itself
/// runs from `e^{-p}` to `e^{2|p|}`.
pub fn pole_equation_normalized(p: f64, lambda: Complex64) -> Complex64 {
    psi(p, lambda) - 1.0
}

/// Laplace transform of `h`, `g^(lambda) - 1/lambda`.
///
/// The difference cancels to `O(1)` as `lambda -> 0`, so inside
/// `|lambda| < 0.05` it is evaluated by the Cauchy integral over the circle
/// `|z| = 1/2`, where no pole lies.
pub fn laplace_h(p: f64, lambda: Complex64) -> Result<Complex64> {
    if lambda.norm() >= 0.05 {
        return Ok(laplace_g(p, lambda)? - 1.0 / lambda);
    }
    const N: usize = 32;
    const R: f64 = 0.5;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..N {
        let zeta = Complex64::from_polar(R, 2.0 * PI * (k as f64 + 0.5) / N as f64);
        let f = laplace_g(p, zeta)? - 1.0 / zeta;
        acc += f * zeta / (zeta - lambda);
    }
    Ok(acc / N as f64)
}

/// `int_0^inf h(x) dx = (var - mean^2) / (2 mean)` in terms of the gap
/// cumulants.
pub fn laplace_h_at_zero(p: f64) -> f64 {
    let mu = eos::mean_spacing(p);
    (eos::spacing_variance(p) - mu * mu) / (2.0 * mu)
}

/// Fourier transform of the even function `h` on the whole line.
pub fn fourier_h(p: f64, k: f64) -> Result<Complex64> {
    let lam = Complex64::new(0.0, k);
    Ok(laplace_h(p, lam)? + laplace_h(p, -lam)?)
}

/// Large-`|p|` location of branch `n`.
pub fn asymptotic_seed(p: f64, n: i32) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::ZeroBranch);
    }
    if !p.is_finite() || p == 0.0 {
        return Err(Error::Invalid(format!("asymptotic seed needs finite nonzero p, got {p}")));
    }
    let nf = n as f64;
    Ok(if p > 0.0 {
        Complex64::new(-2.0 * nf * nf * PI * PI / (p * p), 2.0 * nf * PI * (1.0 - 1.0 / p))
    } else {
        Complex64::new(-nf * nf * PI * PI / (4.0 * p * p), nf * PI * (1.0 - 1.0 / (2.0 * p)))
    })
}

/// A converged pole of the transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub lambda: Complex64,
    pub index_n: i32,
    /// `|psi(lambda) - 1|`.
    pub residual: f64,
    pub newton_iters: usize,
}

/// Damped Newton on `psi - 1` from `seed`.
pub fn newton(p: f64, n: i32, seed: Complex64) -> Result<Pole> {
    let mut lam = seed;
    let mut f = pole_equation_normalized(p, lam);
    for it in 1..=MAX_NEWTON_ITERS {
        let z = lam + p;
        let df = (f + 1.0) * dln_phi(z);
        if !(df.re.is_finite() && df.im.is_finite()) || df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        let mut t = 1.0;
        let mut next = lam - step;
        let mut fnext = pole_equation_normalized(p, next);
        while !(fnext.norm() < f.norm()) && t > 1e-6 {
            t *= 0.5;
            next = lam - step * t;
            fnext = pole_equation_normalized(p, next);
        }
        let moved = (next - lam).norm();
        lam = next;
        f = fnext;
        if f.norm() < 1e-14 || moved <= 4.0 * f64::EPSILON * lam.norm() {
            if f.norm() >= RESIDUAL_TOL {
                break;
            }
            if lam.norm() < 1e-6 {
                return Err(Error::TrivialRoot { p, n });
            }
            if !(lam.re < 0.0) {
                return Err(Error::Invalid(format!("branch {n} at p = {p} converged to Re lambda = {}", lam.re)));
            }
            return Ok(Pole { lambda: lam, index_n: n, residual: f.norm(), newton_iters: it });
        }
    }
    Err(Error::NoConvergence { p, n, iters: MAX_NEWTON_ITERS })
}

/// Pole of branch `n` at pressure `p`.
///
/// For `|p| >= 8` Newton starts from the asymptotic seed. Closer to `p = 0`
/// (or when the direct start fails) the root is tracked from `|p| = 30` in
/// steps of `0.5`, each converged root seeding the next pressure.
pub fn find_pole(p: f64, n: i32) -> Result<Pole> {
    if n == 0 {
        return Err(Error::ZeroBranch);
    }
    if !p.is_finite() {
        return Err(Error::NonFinite(p));
    }
    if p.abs() >= CONTINUATION_THRESHOLD {
        let direct = newton(p, n, asymptotic_seed(p, n)?);
        if direct.is_ok() || p.abs() >= CONTINUATION_START {
            return direct;
        }
    }
    continuation(p, n)
}

fn continuation(p: f64, n: i32) -> Result<Pole> {
    let sign = if p < 0.0 { -1.0 } else { 1.0 };
    let mut q = sign * CONTINUATION_START;
    let mut pole = newton(q, n, asymptotic_seed(q, n)?)?;
    let mut steps = 0usize;
    while q != p {
        q = if (q - p).abs() <= CONTINUATION_STEP { p } else { q - sign * CONTINUATION_STEP };
        let last = pole;
        pole = newton(q, n, last.lambda)?;
        steps += last.newton_iters;
    }
    pole.newton_iters += steps;
    Ok(pole)
}

/// Dominant pole and the derived correlation length and pseudo-period.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSummary {
    pub p: f64,
    pub xi: f64,
    pub period: f64,
    pub dominant: Pole,
    /// Poles for `n = 1..=4`, upper half-plane representatives.
    pub poles: Vec<Pole>,
    /// Whether `Re lambda` strictly decreases with `n`.
    pub ordered: bool,
}

/// Branches scanned by [`correlation_summary`].
pub const SUMMARY_BRANCHES: i32 = 4;

pub fn correlation_summary(p: f64) -> Result<CorrelationSummary> {
    let poles = (1..=SUMMARY_BRANCHES).map(|n| find_pole(p, n)).collect::<Result<Vec<_>>>()?;
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            if (a.lambda - b.lambda).norm() <= 1e-8 * a.lambda.norm().max(1.0) {
                return Err(Error::RootCollision { p, a: a.index_n, b: b.index_n });
            }
        }
    }
    let dominant = *poles
        .iter()
        .max_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re))
        .expect("at least one branch");
    let ordered = poles.windows(2).all(|w| w[0].lambda.re > w[1].lambda.re);
    Ok(CorrelationSummary {
        p,
        xi: -1.0 / dominant.lambda.re,
        period: 2.0 * PI / dominant.lambda.im.abs(),
        dominant,
        poles,
        ordered,
    })
}

/// `p -> +inf` limit of the transform: unit Dirac train.
pub fn dirac_train_dense(lambda: Complex64) -> Complex64 {
    let e = (-lambda).exp();
    e / (1.0 - e)
}

/// `p -> -inf` limit of the transform: Dirac train of spacing 2, weight 2.
pub fn dirac_train_sparse(lambda: Complex64) -> Complex64 {
    let e = (-2.0 * lambda).exp();
    2.0 * e / (1.0 - e)
}
