//! Equation of state of the parking model.
//!
//! In the isobaric ensemble each gap between successive rods is an
//! independent draw from `e^{-p s}` on `[1, 2]`. Everything here follows from
//! the single-gap partition integral
//!
//! ```text
//! z(p) = int_1^2 e^{-p s} ds = (e^{-p} - e^{-2p}) / p
//! ```
//!
//! and its derivatives: the mean gap `1/rho`, the gap variance, the Gibbs
//! potential `-ln z(p)` per particle and the Helmholtz free energy per
//! particle by Legendre transform.
//!
//! Removable singularities at `p = 0` are evaluated by Taylor series in a
//! small disc around the origin.

use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 1e-3;
// the cumulant formulas cancel like 1/p^2 and 1/p^3
const CUMULANT_SERIES_RADIUS: f64 = 0.5;

/// `ln z(p)`, the log of the single-gap partition integral.
pub fn ln_gap_partition(p: f64) -> f64 {
    if p.abs() < SERIES_RADIUS {
        // z(p) = 1 - 3p/2 + 7p^2/6 - 5p^3/8 + 31p^4/120 - ...
        let y = p * (-1.5 + p * (7.0 / 6.0 + p * (-0.625 + p * (31.0 / 120.0))));
        return y.ln_1p();
    }
    if p > 0.0 {
        // e^{-p} (1 - e^{-p}) / p
        -p + (-(-p).exp_m1() / p).ln()
    } else {
        // e^{-2p} (e^{p} - 1) / p
        -2.0 * p + (p.exp_m1() / p).ln()
    }
}

/// Mean gap `E s = 1/rho` at pressure `p`; accepts `+-inf`.
pub fn mean_spacing(p: f64) -> f64 {
    if p.abs() < SERIES_RADIUS {
        return 1.5 - p / 12.0 + p * p * p / 720.0;
    }
    if p == f64::INFINITY {
        return 1.0;
    }
    if p == f64::NEG_INFINITY {
        return 2.0;
    }
    // 1/p + (e^{-p} - 2e^{-2p}) / (e^{-p} - e^{-2p})  =  1 + 1/p - 1/(e^p - 1)
    1.0 + 1.0 / p - 1.0 / p.exp_m1()
}

/// Variance of a single gap, `-d(mean)/dp`.
pub fn spacing_variance(p: f64) -> f64 {
    if p.abs() < CUMULANT_SERIES_RADIUS {
        let q = p * p;
        return 1.0 / 12.0
            + q * (-1.0 / 240.0
                + q * (1.0 / 6048.0 + q * (-1.0 / 172_800.0 + q * (1.0 / 5_322_240.0 - q * 691.0 / 118_879_488_000.0))));
    }
    if p.is_infinite() {
        return 0.0;
    }
    let sh = (0.5 * p).sinh();
    1.0 / (p * p) - 1.0 / (4.0 * sh * sh)
}

/// Third cumulant of a single gap, `-d(variance)/dp`.
pub fn spacing_third_cumulant(p: f64) -> f64 {
    if p.abs() < CUMULANT_SERIES_RADIUS {
        let q = p * p;
        return p
            * (1.0 / 120.0
                + q * (-1.0 / 1512.0
                    + q * (1.0 / 28_800.0 + q * (-1.0 / 665_280.0 + q * (691.0 / 11_887_948_800.0 - q / 479_001_600.0)))));
    }
    if p.is_infinite() {
        return 0.0;
    }
    let h = 0.5 * p;
    if h.abs() > 300.0 {
        return 2.0 / (p * p * p);
    }
    2.0 / (p * p * p) - h.cosh() / (4.0 * h.sinh().powi(3))
}

/// Density `rho(p)` in `(1/2, 1)`; `+inf -> 1`, `-inf -> 1/2`.
pub fn density_from_pressure(p: f64) -> f64 {
    1.0 / mean_spacing(p)
}

fn check_density(rho: f64) -> Result<()> {
    if !(rho > 0.5 && rho < 1.0) {
        return Err(Error::DensityOutOfRange(rho));
    }
    Ok(())
}

/// Pressure `p` with `density_from_pressure(p) = rho`.
///
/// `mean_spacing` is strictly decreasing (its derivative is minus the gap
/// variance), so a bracket is grown geometrically from `[-1, 1]` and refined
/// by Newton steps, falling back to bisection whenever a step leaves the
/// bracket.
pub fn pressure_from_density(rho: f64) -> Result<f64> {
    check_density(rho)?;
    let target = 1.0 / rho;
    let f = |p: f64| mean_spacing(p) - target;

    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while f(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e300 {
            break;
        }
    }
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    // asymptotic starting points: mean ~ 1 + 1/p and mean ~ 2 + 1/p
    let guess = if target < 1.4 {
        1.0 / (target - 1.0)
    } else if target > 1.6 {
        1.0 / (target - 2.0)
    } else {
        -12.0 * (target - 1.5)
    };
    let mut p = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };

    for _ in 0..200 {
        let fp = f(p);
        if fp == 0.0 {
            return Ok(p);
        }
        if fp > 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let slope = -spacing_variance(p);
        let mut next = p - fp / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - p).abs() <= 4.0 * f64::EPSILON * p.abs().max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs());
        p = next;
        if done {
            break;
        }
    }
    Ok(p)
}

/// Gibbs potential per particle, `-ln((e^{-p} - e^{-2p}) / p)`.
pub fn gibbs_per_particle(p: f64) -> f64 {
    -ln_gap_partition(p)
}

/// Helmholtz free energy per particle, `-p/rho + gibbs(p)` at matched `p`.
pub fn free_energy_per_particle(rho: f64) -> Result<f64> {
    let p = pressure_from_density(rho)?;
    Ok(-p / rho + gibbs_per_particle(p))
}

/// Large-deviation rate of `N` uniform points forming a parking configuration.
///
/// `I(rho) = 1 - p/rho - ln rho - ln z(p)`, i.e. `1 - ln rho + f(rho)`.
pub fn parking_rate(rho: f64) -> Result<f64> {
    let p = pressure_from_density(rho)?;
    Ok(1.0 - p / rho - rho.ln() - ln_gap_partition(p))
}

/// A matched `(p, rho)` pair with the two potentials per particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoState {
    pub p: f64,
    pub rho: f64,
    pub gibbs_per_particle: f64,
    pub free_energy_per_particle: f64,
}

impl ThermoState {
    pub fn from_pressure(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFinite(p));
        }
        let rho = density_from_pressure(p);
        let g = gibbs_per_particle(p);
        Ok(ThermoState { p, rho, gibbs_per_particle: g, free_energy_per_particle: -p / rho + g })
    }

    pub fn from_density(rho: f64) -> Result<Self> {
        let p = pressure_from_density(rho)?;
        let g = gibbs_per_particle(p);
        Ok(ThermoState { p, rho, gibbs_per_particle: g, free_energy_per_particle: -p / rho + g })
    }

    /// `1/rho - mean_spacing(p)`; zero up to rounding for a matched state.
    pub fn residual(&self) -> f64 {
        1.0 / self.rho - mean_spacing(self.p)
    }
}

/// Temperature and rod length for quoting results in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitSystem {
    kt: f64,
    ell: f64,
}

impl UnitSystem {
    pub fn new(kt: f64, ell: f64) -> Result<Self> {
        if !(kt > 0.0 && kt.is_finite() && ell > 0.0 && ell.is_finite()) {
            return Err(Error::Units { kt, ell });
        }
        Ok(UnitSystem { kt, ell })
    }

    pub fn reduced() -> Self {
        UnitSystem { kt: 1.0, ell: 1.0 }
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Physical `1/rho` at physical pressure `p`: `kT/p + ell * <gap term>`.
    pub fn inverse_density(&self, pressure: f64) -> f64 {
        self.ell * mean_spacing(pressure * self.ell / self.kt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalState {
    pub pressure: f64,
    pub density: f64,
}

/// Map a reduced state to physical units: `p_phys ell / kT = p`, `rho_phys = rho / ell`.
pub fn rescale(state: &ThermoState, units: &UnitSystem) -> PhysicalState {
    PhysicalState { pressure: state.p * units.kt / units.ell, density: state.rho / units.ell }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn anchor_values() {
        assert!((density_from_pressure(0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((density_from_pressure(LN_2) - LN_2).abs() < 1e-15);
        assert_eq!(density_from_pressure(f64::INFINITY), 1.0);
        assert_eq!(density_from_pressure(f64::NEG_INFINITY), 0.5);
    }

    #[test]
    fn high_precision_fixtures() {
        // 50-digit evaluations of 1/rho = 1/p + 1 - 1/(e^p - 1)
        assert!((density_from_pressure(12.7) - 0.927_009_921_247_454_255_722_293_965_318).abs() < 1e-15);
        let p = pressure_from_density(0.51).unwrap();
        assert!((p - -25.499_999_994_522_642_664_785_707_593).abs() < 1e-10, "{p}");
        let p = pressure_from_density(0.8).unwrap();
        assert!((p - 3.593_511_969_447_426_082_272_169_884_56).abs() < 1e-12, "{p}");
    }

    #[test]
    fn inversion_anchors() {
        assert!(pressure_from_density(2.0 / 3.0).unwrap().abs() < 1e-12);
        assert!((pressure_from_density(LN_2).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        for rho in [0.5, 1.0, 0.2, 1.5, f64::NAN] {
            assert!(matches!(pressure_from_density(rho), Err(Error::DensityOutOfRange(_))));
            assert!(parking_rate(rho).is_err());
            assert!(free_energy_per_particle(rho).is_err());
        }
        let msg = pressure_from_density(1.2).unwrap_err().to_string();
        assert!(msg.contains("(1/2, 1)"), "{msg}");
    }

    #[test]
    fn round_trip_grid() {
        for i in -100..=100 {
            let p = i as f64 * 0.5;
            if p.abs() < 1e-6 {
                continue;
            }
            let back = pressure_from_density(density_from_pressure(p)).unwrap();
            assert!((back - p).abs() < 1e-10, "p = {p}: {back}");
        }
        // inside the series window
        for p in [-9e-4, -1e-5, 3e-7, 5e-4] {
            let back = pressure_from_density(density_from_pressure(p)).unwrap();
            assert!((back - p).abs() < 1e-10, "p = {p}: {back}");
        }
    }

    #[test]
    fn inversion_accuracy_in_density() {
        for rho in [0.5001, 0.51, 0.6, 0.7, 0.9, 0.99, 0.9999] {
            let p = pressure_from_density(rho).unwrap();
            assert!((density_from_pressure(p) - rho).abs() < 1e-13, "rho = {rho}");
        }
    }

    #[test]
    fn strictly_increasing() {
        let mut prev = 0.0;
        for i in -400..=400 {
            let r = density_from_pressure(i as f64 * 0.125);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn approach_to_limits() {
        // rho(p) - 1 ~ -1/p and rho(-p) - 1/2 ~ 1/(4p): the limits are only
        // reached to 1e-3 for |p| in the thousands
        let mut last_hi = 0.0;
        let mut last_lo = 1.0;
        for p in [10.0, 20.0, 30.0, 40.0] {
            let hi = density_from_pressure(p);
            let lo = density_from_pressure(-p);
            assert!(hi > last_hi && lo < last_lo);
            assert!(((1.0 - hi) * p - 1.0).abs() < 2.0 / p);
            assert!(((lo - 0.5) * 4.0 * p - 1.0).abs() < 2.0 / p);
            last_hi = hi;
            last_lo = lo;
        }
        assert!((density_from_pressure(4000.0) - 1.0).abs() < 1e-3);
        assert!((density_from_pressure(-4000.0) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn series_matches_direct_at_the_seam() {
        for p in [-SERIES_RADIUS, SERIES_RADIUS] {
            let inside = p * (1.0 - 1e-12);
            let outside = p * (1.0 + 1e-12);
            assert!((mean_spacing(inside) - mean_spacing(outside)).abs() < 1e-12);
            assert!((ln_gap_partition(inside) - ln_gap_partition(outside)).abs() < 1e-12);
        }
        for p in [-CUMULANT_SERIES_RADIUS, CUMULANT_SERIES_RADIUS] {
            let a = spacing_variance(p * (1.0 - 1e-12));
            let b = spacing_variance(p * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-13);
            let a = spacing_third_cumulant(p * (1.0 - 1e-12));
            let b = spacing_third_cumulant(p * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gibbs_values() {
        assert_eq!(gibbs_per_particle(0.0), 0.0);
        let want = -(1.0 / (4.0 * LN_2)).ln();
        assert!((gibbs_per_particle(LN_2) - want).abs() < 1e-14);
        assert!((gibbs_per_particle(1.0) - 1.458_675_145_387_081_891_021_643_645_07).abs() < 1e-14);
        // no overflow in the tails
        assert!(gibbs_per_particle(800.0).is_finite());
        assert!(gibbs_per_particle(-800.0).is_finite());
    }

    #[test]
    fn gibbs_derivative_is_mean_gap() {
        let h = 1e-6;
        for i in -40..=40 {
            let p = i as f64 * 0.5 + 0.25;
            let d = (gibbs_per_particle(p + h) - gibbs_per_particle(p - h)) / (2.0 * h);
            assert!((d - 1.0 / density_from_pressure(p)).abs() < 1e-6, "p = {p}");
        }
        let d = (gibbs_per_particle(1.0 + h) - gibbs_per_particle(1.0 - h)) / (2.0 * h);
        assert!((d - 1.418_023_293_130_673_575_614_997_994_89).abs() < 1e-8);
    }

    #[test]
    fn variance_is_minus_mean_derivative() {
        let h = 1e-5;
        for p in [-30.0, -3.0, -0.3, 0.02, 0.7, 4.0, 25.0] {
            let d = (mean_spacing(p + h) - mean_spacing(p - h)) / (2.0 * h);
            assert!((d + spacing_variance(p)).abs() < 1e-8, "p = {p}");
            let d = (spacing_variance(p + h) - spacing_variance(p - h)) / (2.0 * h);
            assert!((d + spacing_third_cumulant(p)).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn free_energy_values() {
        assert!(free_energy_per_particle(2.0 / 3.0).unwrap().abs() < 1e-12);
        let f = free_energy_per_particle(0.8).unwrap();
        assert!((f - 0.408_638_820_402_771_158_213_842_869_641).abs() < 1e-12, "{f}");
    }

    #[test]
    fn free_energy_legendre_slope() {
        // df/d(1/rho) = -p at fixed particle number
        let h = 1e-6;
        for rho in [0.55, 0.62, 2.0 / 3.0, 0.75, 0.9] {
            let v = 1.0 / rho;
            let fp = free_energy_per_particle(1.0 / (v + h)).unwrap();
            let fm = free_energy_per_particle(1.0 / (v - h)).unwrap();
            let p = pressure_from_density(rho).unwrap();
            assert!(((fp - fm) / (2.0 * h) + p).abs() < 1e-5, "rho = {rho}");
        }
    }

    #[test]
    fn parking_rate_values() {
        let at_two_thirds = parking_rate(2.0 / 3.0).unwrap();
        assert!((at_two_thirds - (1.0 - (2.0f64 / 3.0).ln())).abs() < 1e-12);
        assert!((parking_rate(0.9).unwrap() - 2.302_709_133_162_041_058_107_649_548_28).abs() < 1e-11);
        for i in 1..=50 {
            let rho = 0.5 + 0.5 * i as f64 / 51.0;
            assert!(parking_rate(rho).unwrap() > 0.0);
        }
    }

    #[test]
    fn thermo_state_invariants() {
        for p in [-20.0, -1.0, 0.0, 1e-4, 2.0, 30.0] {
            let s = ThermoState::from_pressure(p).unwrap();
            assert!(s.rho > 0.5 && s.rho < 1.0);
            assert!(s.residual().abs() < 1e-12);
            assert_eq!(s.free_energy_per_particle, -s.p / s.rho + s.gibbs_per_particle);
        }
        let s = ThermoState::from_density(0.7).unwrap();
        assert!(s.residual().abs() < 1e-12);
        assert!(ThermoState::from_pressure(f64::NAN).is_err());
    }

    #[test]
    fn rescaling() {
        let s = ThermoState::from_pressure(3.0).unwrap();
        let id = rescale(&s, &UnitSystem::reduced());
        assert_eq!((id.pressure, id.density), (s.p, s.rho));
        let phys = rescale(&s, &UnitSystem::new(2.0, 1.0).unwrap());
        assert_eq!(phys.pressure, 6.0);
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -2.0).is_err());
    }

    #[test]
    fn physical_law_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let kt = rng.gen_range(0.1..10.0);
            let ell = rng.gen_range(0.1..10.0);
            let p_red = rng.gen_range(-30.0..30.0);
            let units = UnitSystem::new(kt, ell).unwrap();
            let phys = rescale(&ThermoState::from_pressure(p_red).unwrap(), &units);
            let x = phys.pressure * ell / kt;
            let (e1, e2) = ((-x).exp(), (-2.0 * x).exp());
            let law = kt / phys.pressure + ell * (e1 - 2.0 * e2) / (e1 - e2);
            assert!((law * phys.density - 1.0).abs() < 1e-12, "kT {kt} ell {ell} p {p_red}");
            assert!((units.inverse_density(phys.pressure) * phys.density - 1.0).abs() < 1e-12);
        }
    }
}
