//! Time-dependent diffusion and dissipation coefficients.
//!
//! The inner time integrals are done in closed form,
//!
//! ```text
//! Δ(t) = 2 ∫ dω I(ω) K_c(ω, t)      K_c = sin((ω-ω₀)t)/(2(ω-ω₀)) + sin((ω+ω₀)t)/(2(ω+ω₀))
//! γ(t) =   ∫ dω J(ω) K_s(ω, t)      K_s = sin((ω-ω₀)t)/(2(ω-ω₀)) - sin((ω+ω₀)t)/(2(ω+ω₀))
//! ```
//!
//! leaving one oscillatory frequency integral per sample. It is split into
//! panels no wider than a quarter period of the fastest kernel oscillation
//! and handed to the adaptive Gauss–Kronrod driver. The running integrals
//! `N(t) = ∫Δ` and `Γ(t) = 2∫γ` integrate the kernels once more in time,
//! `∫₀ᵗ sin(xt')/(2x) dt' = (1 - cos xt)/(2x²)`, and take the same route.
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad::{self, Tolerances};
use crate::spectral::{SpectralModel, ThermalBath};

/// Treatment of the `ω^{s-1}` origin singularity of `I(ω)` when `s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OriginHandling {
    /// Integrate in `u` with `ω = u^{1/s}`, which makes the integrand finite.
    Substitution,
    /// Plain quadrature over `[epsilon, ω_max]`; only useful for checks.
    Naive { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Frequencies are integrated over `[0, omega_max_factor * ω_c]`.
    pub omega_max_factor: f64,
    pub max_subdivisions: usize,
    pub origin: OriginHandling,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            omega_max_factor: 60.0,
            max_subdivisions: 2000,
            origin: OriginHandling::Substitution,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must be positive",
            });
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be positive",
            });
        }
        if !(self.omega_max_factor >= 30.0) {
            return Err(Error::InvalidParameter {
                name: "omega_max_factor",
                value: self.omega_max_factor,
                reason: "must be at least 30",
            });
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                value: 0.0,
                reason: "must be positive",
            });
        }
        if let OriginHandling::Naive { epsilon } = self.origin {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "epsilon",
                    value: epsilon,
                    reason: "naive origin cut must be positive",
                });
            }
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// `sin(x t) / (2x)`, with a Taylor branch for `|x| < 1e-6 ω₀`.
#[inline]
fn half_sinc(x: f64, sin_xt: f64, t: f64, omega_0: f64) -> f64 {
    if x.abs() < 1e-6 * omega_0 {
        let x2t2 = x * x * t * t;
        0.5 * t * (1.0 - x2t2 / 6.0 + x2t2 * x2t2 / 120.0)
    } else {
        0.5 * sin_xt / x
    }
}

/// `(1 - cos x t) / (2x²) = sin²(x t / 2) / x²`, with a Taylor branch for
/// `|x| < 1e-6 ω₀`.
#[inline]
fn half_fejer(x: f64, t: f64, omega_0: f64) -> f64 {
    if x.abs() < 1e-6 * omega_0 {
        let x2t2 = x * x * t * t;
        0.25 * t * t * (1.0 - x2t2 / 12.0 + x2t2 * x2t2 / 360.0)
    } else {
        let s = (0.5 * x * t).sin() / x;
        s * s
    }
}

/// Returns `(sin((ω-ω₀)t)/(2(ω-ω₀)), sin((ω+ω₀)t)/(2(ω+ω₀)))`.
#[inline]
fn kernel_pair(omega: f64, omega_0: f64, t: f64) -> (f64, f64) {
    // sin((ω∓ω₀)t) from one pair of sin/cos evaluations
    let (sw, cw) = (omega * t).sin_cos();
    let (s0, c0) = (omega_0 * t).sin_cos();
    let minus = sw * c0 - cw * s0;
    let plus = sw * c0 + cw * s0;
    (
        half_sinc(omega - omega_0, minus, t, omega_0),
        0.5 * plus / (omega + omega_0),
    )
}

/// Time integral of [`kernel_pair`] from 0 to `t`.
#[inline]
fn cumulative_pair(omega: f64, omega_0: f64, t: f64) -> (f64, f64) {
    (half_fejer(omega - omega_0, t, omega_0), half_fejer(omega + omega_0, t, omega_0))
}

#[derive(Clone, Copy)]
enum Kernel {
    Rate,
    /// Integrated from 0 to `t`.
    Cumulative,
}

/// Which weight multiplies the kernel.
#[derive(Clone, Copy)]
enum Weight<'a> {
    Distribution(&'a ThermalBath),
    Density,
}

/// Frequency breakpoints: panels of width at most `π/(4t)` (at least 16),
/// with `ω₀` inserted when it falls inside the range.
fn frequency_breakpoints(lo: f64, hi: f64, t: f64, omega_0: f64) -> Vec<f64> {
    let width = hi - lo;
    let n = if t > 0.0 {
        ((width * 4.0 * t / std::f64::consts::PI).ceil() as usize).max(16)
    } else {
        16
    };
    let mut pts = quad::uniform_breakpoints(lo, hi, n);
    if omega_0 > lo && omega_0 < hi {
        let k = pts.partition_point(|&p| p < omega_0);
        if pts[k] != omega_0 {
            pts.insert(k, omega_0);
        }
    }
    pts
}

fn kernel_integral(
    model: &SpectralModel,
    weight: Weight<'_>,
    kernel: Kernel,
    t: f64,
    sign: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain { what: "time", value: t });
    }
    if t == 0.0 || model.coupling() == 0.0 {
        return Ok(0.0);
    }
    let w0 = model.omega_0();
    let omega_max = cfg.omega_max_factor * model.omega_c();
    let integrand = |omega: f64| -> f64 {
        let (a, b) = match kernel {
            Kernel::Rate => kernel_pair(omega, w0, t),
            Kernel::Cumulative => cumulative_pair(omega, w0, t),
        };
        let w = match weight {
            Weight::Distribution(bath) => model.distribution_unchecked(bath, omega),
            Weight::Density => model.density_unchecked(omega),
        };
        w * (a + sign * b)
    };

    let singular = matches!(weight, Weight::Distribution(_)) && model.is_origin_singular();
    let value = match (singular, cfg.origin) {
        (true, OriginHandling::Substitution) => {
            // ω = u^p with p = 1/s; dω = p u^{p-1} du cancels ω^{s-1}
            let p = 1.0 / model.exponent();
            let omega_pts = frequency_breakpoints(0.0, omega_max, t, w0);
            let u_pts: Vec<f64> = omega_pts.iter().map(|&w| w.powf(1.0 / p)).collect();
            quad::integrate_infallible(
                |u: f64| {
                    if u <= 0.0 {
                        return 0.0;
                    }
                    let omega = if p == 2.0 { u * u } else { u.powf(p) };
                    integrand(omega) * p * omega / u
                },
                &u_pts,
                cfg.tolerances(),
            )?
        }
        (true, OriginHandling::Naive { epsilon }) => quad::integrate_infallible(
            integrand,
            &frequency_breakpoints(epsilon, omega_max, t, w0),
            cfg.tolerances(),
        )?,
        (false, _) => quad::integrate_infallible(
            integrand,
            &frequency_breakpoints(0.0, omega_max, t, w0),
            cfg.tolerances(),
        )?,
    };
    Ok(value.value)
}

/// Diffusion coefficient `Δ(t)`.
pub fn compute_delta(model: &SpectralModel, bath: &ThermalBath, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(2.0 * kernel_integral(model, Weight::Distribution(bath), Kernel::Rate, t, 1.0, cfg)?)
}

/// Dissipation coefficient `γ(t)`; independent of temperature.
pub fn compute_gamma(model: &SpectralModel, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    kernel_integral(model, Weight::Density, Kernel::Rate, t, -1.0, cfg)
}

/// Heating function `N(t) = ∫_0^t Δ(t') dt'`.
pub fn compute_heating(model: &SpectralModel, bath: &ThermalBath, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(2.0 * kernel_integral(model, Weight::Distribution(bath), Kernel::Cumulative, t, 1.0, cfg)?)
}

/// Damping exponent `Γ(t) = 2 ∫_0^t γ(t') dt'`.
pub fn compute_big_gamma(model: &SpectralModel, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(2.0 * kernel_integral(model, Weight::Density, Kernel::Cumulative, t, -1.0, cfg)?)
}

/// `∫_a^b Δ(t') dt'`.
pub fn heating_increment(
    model: &SpectralModel,
    bath: &ThermalBath,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    Ok(compute_heating(model, bath, b, cfg)? - compute_heating(model, bath, a, cfg)?)
}

/// `2 ∫_a^b γ(t') dt'`.
pub fn damping_increment(model: &SpectralModel, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    Ok(compute_big_gamma(model, b, cfg)? - compute_big_gamma(model, a, cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientMode {
    NonMarkovian,
    /// Coefficients frozen at their long-time values.
    Markovian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTrace {
    pub times: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub heating: Vec<f64>,
    pub big_gamma: Vec<f64>,
    pub mode: CoefficientMode,
    pub model: SpectralModel,
    pub bath: ThermalBath,
}

impl CoefficientTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Checks that `times` starts at 0 and is strictly increasing.
pub fn validate_time_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => Err(Error::InvalidGrid("time grid is empty".into())),
        Some(&t0) if t0 != 0.0 => Err(Error::InvalidGrid(format!("time grid starts at {t0}, not 0"))),
        _ => {
            if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
                return Err(Error::InvalidGrid(format!("time grid not increasing at {} -> {}", w[0], w[1])));
            }
            Ok(())
        }
    }
}

/// Samples `Δ` and `γ` on `times` (any order, any non-negative values).
pub fn sample_rates(
    model: &SpectralModel,
    bath: &ThermalBath,
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| Ok((compute_delta(model, bath, t, cfg)?, compute_gamma(model, t, cfg)?)))
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Full coefficient trace on a grid starting at `t = 0`.
pub fn trace(
    model: &SpectralModel,
    bath: &ThermalBath,
    times: &[f64],
    mode: CoefficientMode,
    cfg: &QuadratureConfig,
) -> Result<CoefficientTrace> {
    validate_time_grid(times)?;
    cfg.validate()?;
    let (delta, gamma, heating, big_gamma) = match mode {
        CoefficientMode::Markovian => {
            let dm = model.markovian_delta(bath);
            let gm = model.markovian_gamma();
            (
                vec![dm; times.len()],
                vec![gm; times.len()],
                times.iter().map(|&t| dm * t).collect(),
                times.iter().map(|&t| 2.0 * gm * t).collect(),
            )
        }
        CoefficientMode::NonMarkovian => {
            let (delta, gamma) = sample_rates(model, bath, times, cfg)?;
            let heating = times
                .par_iter()
                .map(|&t| compute_heating(model, bath, t, cfg))
                .collect::<Result<_>>()?;
            let big_gamma = times
                .par_iter()
                .map(|&t| compute_big_gamma(model, t, cfg))
                .collect::<Result<_>>()?;
            (delta, gamma, heating, big_gamma)
        }
    };
    Ok(CoefficientTrace {
        times: times.to_vec(),
        delta,
        gamma,
        heating,
        big_gamma,
        mode,
        model: *model,
        bath: *bath,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ReservoirKind;
    use approx::assert_relative_eq;

    fn ohmic(g: f64, r: f64) -> SpectralModel {
        SpectralModel::from_kind(ReservoirKind::Ohmic, g, r).unwrap()
    }

    #[test]
    fn zero_time_and_zero_coupling_vanish() {
        let cfg = QuadratureConfig::default();
        let bath = ThermalBath::default();
        let m = ohmic(0.1, 10.0);
        assert_eq!(compute_delta(&m, &bath, 0.0, &cfg).unwrap(), 0.0);
        assert_eq!(compute_gamma(&m, 0.0, &cfg).unwrap(), 0.0);
        assert_eq!(compute_heating(&m, &bath, 0.0, &cfg).unwrap(), 0.0);
        assert_eq!(compute_big_gamma(&m, 0.0, &cfg).unwrap(), 0.0);
        let free = ohmic(0.0, 10.0);
        assert_eq!(compute_heating(&free, &bath, 3.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn small_time_slope() {
        // Δ(t)/t -> 2 g² kT ω_c Γ(s) = 20
        let cfg = QuadratureConfig::default();
        let d = compute_delta(&ohmic(0.1, 10.0), &ThermalBath::default(), 1e-3, &cfg).unwrap();
        assert_relative_eq!(d / 1e-3, 20.0, max_relative = 1e-3);
    }

    #[test]
    fn small_time_heating() {
        let cfg = QuadratureConfig::default();
        let n = compute_heating(&ohmic(0.1, 10.0), &ThermalBath::default(), 1e-2, &cfg).unwrap();
        assert_relative_eq!(n, 1e-3, max_relative = 1e-2);
    }

    #[test]
    fn naive_cut_converges_towards_substitution() {
        let m = SpectralModel::from_kind(ReservoirKind::SubOhmic, 0.1, 1.0).unwrap();
        let bath = ThermalBath::high_t(1.0).unwrap();
        let t = 2.0;
        let reference = compute_delta(&m, &bath, t, &QuadratureConfig::default()).unwrap();
        let naive = |eps: f64| {
            let cfg = QuadratureConfig {
                origin: OriginHandling::Naive { epsilon: eps },
                ..Default::default()
            };
            compute_delta(&m, &bath, t, &cfg).unwrap()
        };
        // the missing piece scales as sqrt(eps): extrapolate from two cuts
        let (e1, e2) = (1e-6, 1e-8);
        let (d1, d2) = (naive(e1), naive(e2));
        let extrapolated = d2 + (d2 - d1) * e2.sqrt() / (e1.sqrt() - e2.sqrt());
        assert!((extrapolated - reference).abs() / reference.abs() < 1e-5);
    }

    #[test]
    fn trace_on_single_point_grid() {
        let t = trace(&ohmic(0.1, 1.0), &ThermalBath::default(), &[0.0], CoefficientMode::NonMarkovian, &QuadratureConfig::default())
            .unwrap();
        assert_eq!(t.delta, vec![0.0]);
        assert_eq!(t.gamma, vec![0.0]);
        assert_eq!(t.heating, vec![0.0]);
        assert_eq!(t.big_gamma, vec![0.0]);
    }

    #[test]
    fn markovian_trace_is_constant() {
        let m = ohmic(0.1, 10.0);
        let bath = ThermalBath::default();
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let t = trace(&m, &bath, &grid, CoefficientMode::Markovian, &QuadratureConfig::default()).unwrap();
        assert!(t.delta.iter().all(|&d| d == m.markovian_delta(&bath)));
        assert!(t.gamma.iter().all(|&g| g == m.markovian_gamma()));
        assert_relative_eq!(t.big_gamma[10], 2.0 * m.markovian_gamma() * 5.0, max_relative = 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(validate_time_grid(&[]).is_err());
        assert!(validate_time_grid(&[0.1, 0.2]).is_err());
        assert!(validate_time_grid(&[0.0, 0.2, 0.2]).is_err());
        assert!(validate_time_grid(&[0.0, 0.2, 0.3]).is_ok());
    }

    #[test]
    fn negative_time_is_rejected() {
        let cfg = QuadratureConfig::default();
        assert!(compute_delta(&ohmic(0.1, 1.0), &ThermalBath::default(), -1.0, &cfg).is_err());
        let bad = QuadratureConfig { omega_max_factor: 10.0, ..Default::default() };
        assert!(compute_gamma(&ohmic(0.1, 1.0), 1.0, &bad).is_err());
    }

    #[test]
    fn kernel_taylor_branch_is_continuous() {
        let t = 7.3;
        let x = 0.999_999e-6;
        let (series, _) = kernel_pair(1.0 + x, 1.0, t);
        let direct = 0.5 * (x * t).sin() / x;
        assert_relative_eq!(series, direct, max_relative = 1e-9);
        let series = half_fejer(x, t, 1.0);
        let direct = (1.0 - (x * t).cos()) / (2.0 * x * x);
        assert_relative_eq!(series, direct, max_relative = 1e-4);
        let y = 2e-6;
        assert_relative_eq!(half_fejer(y, t, 1.0), (0.5 * y * t).sin().powi(2) / (y * y), max_relative = 1e-12);
    }
}
