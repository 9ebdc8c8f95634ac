//! Fringe visibility of an even cat state `(|α⟩ + |-α⟩)/√𝒩`.
//!
//! ```text
//! F = exp[-2α² (1 - e^{-Γ(t)} / (c N(t) + 1))]      c = 2 off resonance, 4 on resonance
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, CoefficientMode, CoefficientTrace, QuadratureConfig};
use crate::spectral::{SpectralModel, ThermalBath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatState {
    alpha: f64,
}

impl CatState {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "cat amplitude must be positive and finite",
            });
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `𝒩 = 2(1 + e^{-2α²})`, the squared norm of `|α⟩ + |-α⟩`.
    pub fn normalization(&self) -> f64 {
        2.0 * (1.0 + (-2.0 * self.alpha * self.alpha).exp())
    }

    /// Long-time visibility `e^{-2α²}` reached once the fringes are gone.
    pub fn visibility_floor(&self) -> f64 {
        (-2.0 * self.alpha * self.alpha).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `r ≪ 1`: denominator `2N + 1`.
    OffResonant,
    /// `r ≫ 1`: counter-rotating terms kept, denominator `4N + 1`.
    Resonant,
}

impl Regime {
    fn heating_factor(self) -> f64 {
        match self {
            Regime::OffResonant => 2.0,
            Regime::Resonant => 4.0,
        }
    }
}

/// Closed-form visibility for given heating `N` and damping exponent `Γ`.
pub fn fringe_visibility(cat: &CatState, heating: f64, damping: f64, regime: Regime) -> Result<f64> {
    let denominator = regime.heating_factor() * heating + 1.0;
    if !(denominator > 0.0) {
        return Err(Error::RegimeValidity { heating, denominator });
    }
    let a2 = cat.alpha * cat.alpha;
    Ok((-2.0 * a2 * (1.0 - (-damping).exp() / denominator)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeTrace {
    pub times: Vec<f64>,
    /// `Γ′t = 2 g² ω₀ t`.
    pub gamma_prime_t: Vec<f64>,
    pub visibility: Vec<f64>,
    pub regime: Regime,
    pub mode: CoefficientMode,
    pub cat: CatState,
    pub model: SpectralModel,
    pub bath: ThermalBath,
    /// Set when the regime is used outside the resonance range it was
    /// derived for.
    pub warnings: Vec<String>,
}

impl FringeTrace {
    /// Trapezoidal area under `F(t)`.
    pub fn area(&self) -> f64 {
        trapezoid(&self.times, &self.visibility)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

pub fn gamma_prime_time(model: &SpectralModel, t: f64) -> f64 {
    2.0 * model.coupling() * model.coupling() * model.omega_0() * t
}

/// Inverse of [`gamma_prime_time`].
pub fn time_from_gamma_prime(model: &SpectralModel, gpt: f64) -> Result<f64> {
    let scale = 2.0 * model.coupling() * model.coupling() * model.omega_0();
    if scale == 0.0 {
        return Err(Error::DegenerateModel("Γ′t axis undefined for g = 0".into()));
    }
    Ok(gpt / scale)
}

fn regime_warnings(model: &SpectralModel, regime: Regime) -> Vec<String> {
    let r = model.resonance();
    match regime {
        Regime::OffResonant if r > 0.5 => vec![format!("off-resonant formula used at r = {r} > 0.5")],
        Regime::Resonant if r < 2.0 => vec![format!("resonant formula used at r = {r} < 2")],
        _ => Vec::new(),
    }
}

/// Applies the closed form pointwise to an existing coefficient trace.
pub fn fringe_from_coefficients(cat: &CatState, coeffs: &CoefficientTrace, regime: Regime) -> Result<FringeTrace> {
    let visibility = coeffs
        .heating
        .iter()
        .zip(&coeffs.big_gamma)
        .map(|(&n, &g)| fringe_visibility(cat, n, g, regime))
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeTrace {
        gamma_prime_t: coeffs.times.iter().map(|&t| gamma_prime_time(&coeffs.model, t)).collect(),
        times: coeffs.times.clone(),
        visibility,
        regime,
        mode: coeffs.mode,
        cat: *cat,
        model: coeffs.model,
        bath: coeffs.bath,
        warnings: regime_warnings(&coeffs.model, regime),
    })
}

pub fn fringe_trace(
    cat: &CatState,
    model: &SpectralModel,
    bath: &ThermalBath,
    times: &[f64],
    regime: Regime,
    mode: CoefficientMode,
    cfg: &QuadratureConfig,
) -> Result<FringeTrace> {
    let coeffs = kernels::trace(model, bath, times, mode, cfg)?;
    fringe_from_coefficients(cat, &coeffs, regime)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirComparison {
    pub traces: Vec<FringeTrace>,
    pub areas: Vec<f64>,
    /// Indices into `traces`, slowest decoherence (largest area) first.
    pub ranking: Vec<usize>,
}

/// Fringe traces for several reservoirs sharing `g`, `kT` and `r`, ranked by
/// area under `F` on the common grid.
pub fn compare_reservoirs(
    cat: &CatState,
    models: &[SpectralModel],
    bath: &ThermalBath,
    times: &[f64],
    regime: Regime,
    mode: CoefficientMode,
    cfg: &QuadratureConfig,
) -> Result<ReservoirComparison> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidGrid("no reservoirs to compare".into()))?;
    for m in models {
        if m.coupling() != first.coupling() {
            return Err(Error::InvalidParameter {
                name: "g",
                value: m.coupling(),
                reason: "compared reservoirs must share the coupling",
            });
        }
        if m.resonance() != first.resonance() {
            return Err(Error::InvalidParameter {
                name: "r",
                value: m.resonance(),
                reason: "compared reservoirs must share the resonance parameter",
            });
        }
    }
    let traces: Vec<FringeTrace> = models
        .par_iter()
        .map(|m| fringe_trace(cat, m, bath, times, regime, mode, cfg))
        .collect::<Result<_>>()?;
    let areas: Vec<f64> = traces.iter().map(FringeTrace::area).collect();
    let mut ranking: Vec<usize> = (0..traces.len()).collect();
    ranking.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]));
    Ok(ReservoirComparison { traces, areas, ranking })
}

/// Rule for choosing a time window that covers the decoherence of a set of
/// traces: the window ends at the first scan time where every trace has
/// completed `fraction` of its decay from 1 to the floor `e^{-2α²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRule {
    pub fraction: f64,
    pub points_per_decade: usize,
    /// Largest `Γ′t` searched before giving up.
    pub gamma_prime_limit: f64,
}

impl Default for WindowRule {
    fn default() -> Self {
        Self {
            fraction: 0.95,
            points_per_decade: 40,
            gamma_prime_limit: 1e3,
        }
    }
}

/// End time of the decoherence window of `models` under `rule`.
pub fn decoherence_window(
    cat: &CatState,
    models: &[SpectralModel],
    bath: &ThermalBath,
    regime: Regime,
    mode: CoefficientMode,
    rule: &WindowRule,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(rule.fraction > 0.0 && rule.fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction",
            value: rule.fraction,
            reason: "must lie strictly between 0 and 1",
        });
    }
    let floor = cat.visibility_floor();
    let threshold = floor + (1.0 - rule.fraction) * (1.0 - floor);
    let ends = models
        .par_iter()
        .map(|m| {
            let t_max = time_from_gamma_prime(m, rule.gamma_prime_limit)?;
            let factor = 10f64.powf(1.0 / rule.points_per_decade.max(1) as f64);
            let mut t = 1e-4 / m.omega_c().max(m.omega_0());
            while t <= t_max {
                let (n, g) = match mode {
                    CoefficientMode::NonMarkovian => (
                        kernels::compute_heating(m, bath, t, cfg)?,
                        kernels::compute_big_gamma(m, t, cfg)?,
                    ),
                    CoefficientMode::Markovian => (m.markovian_delta(bath) * t, 2.0 * m.markovian_gamma() * t),
                };
                if fringe_visibility(cat, n, g, regime)? <= threshold {
                    return Ok(t);
                }
                t *= factor;
            }
            Err(Error::DegenerateModel(format!(
                "fringes survive beyond Γ′t = {} for s = {}",
                rule.gamma_prime_limit,
                m.exponent()
            )))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ends.into_iter().fold(0.0, f64::max))
}
