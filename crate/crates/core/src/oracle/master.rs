//! Interaction-picture high-temperature master equations in a truncated
//! Fock basis,
//!
//! ```text
//! dρ/dt = (Δ+γ)/2 (2aρa† - a†aρ - ρa†a) + (Δ-γ)/2 (2a†ρa - aa†ρ - ρaa†)
//!       + (Δ-γ)/2 e^{-2iω₀t} (2aρa - a²ρ - ρa²) + (Δ-γ)/2 e^{+2iω₀t} (2a†ρa† - a†²ρ - ρa†²)
//! ```
//!
//! where the secular equation keeps only the first line. Matrix elements are
//! applied by index arithmetic with the untruncated number operator, so
//! population pushed past the top level shows up as trace loss.

use num_complex::Complex64;
use rayon::prelude::*;

use super::generator::{Ladder, Weights};
use super::magnus;
use super::state::DensityMatrix;
use super::wigner::wigner_at;
use crate::error::{Error, Result};
use crate::kernels::{self, CoefficientTrace, QuadratureConfig};
use crate::numeric::interp::CubicTable;
use crate::numeric::lin_space;
use crate::numeric::ode::{self, OdeOptions, OdeStats};
use crate::spectral::{SpectralModel, ThermalBath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Secular,
    /// Keeps the counter-rotating `e^{±2iω₀t}` terms.
    NonSecular,
}

/// Where `Δ(t)` and `γ(t)` come from during integration.
#[derive(Debug, Clone)]
pub enum CoefficientSource {
    Constant { delta: f64, gamma: f64 },
    /// Cubic interpolation of tabulated rates.
    Tabulated { delta: CubicTable, gamma: CubicTable },
    /// Fresh quadrature at every evaluation; slow, for spot checks.
    Live {
        model: SpectralModel,
        bath: ThermalBath,
        cfg: QuadratureConfig,
    },
}

impl CoefficientSource {
    pub fn markovian(model: &SpectralModel, bath: &ThermalBath) -> Self {
        Self::Constant {
            delta: model.markovian_delta(bath),
            gamma: model.markovian_gamma(),
        }
    }

    /// Rates tabulated on `[0, t_end]` with step `1e-3 / max(ω_c, ω₀)`.
    pub fn tabulate(model: &SpectralModel, bath: &ThermalBath, t_end: f64, cfg: &QuadratureConfig) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Domain { what: "table end time", value: t_end });
        }
        let step = 1e-3 / model.omega_c().max(model.omega_0());
        let n = ((t_end / step).ceil() as usize).max(4) + 1;
        let times = lin_space(0.0, t_end, n);
        let (delta, gamma) = kernels::sample_rates(model, bath, &times, cfg)?;
        Self::from_samples(times, delta, gamma)
    }

    pub fn from_trace(trace: &CoefficientTrace) -> Result<Self> {
        Self::from_samples(trace.times.clone(), trace.delta.clone(), trace.gamma.clone())
    }

    fn from_samples(times: Vec<f64>, delta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let bad = || Error::InvalidGrid("coefficient table needs an increasing grid of at least two points".into());
        Ok(Self::Tabulated {
            delta: CubicTable::new(times.clone(), delta).ok_or_else(bad)?,
            gamma: CubicTable::new(times, gamma).ok_or_else(bad)?,
        })
    }

    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            Self::Constant { delta, gamma } => Ok((*delta, *gamma)),
            Self::Tabulated { delta, gamma } => {
                let (lo, hi) = delta.domain();
                let slack = 1e-9 * (hi - lo);
                if t < lo - slack || t > hi + slack {
                    return Err(Error::Domain { what: "time outside coefficient table", value: t });
                }
                Ok((delta.eval(t), gamma.eval(t)))
            }
            Self::Live { model, bath, cfg } => Ok((
                kernels::compute_delta(model, bath, t, cfg)?,
                kernels::compute_gamma(model, t, cfg)?,
            )),
        }
    }
}

/// How `ρ(t)` is obtained from the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagator {
    /// Adaptive Runge–Kutta on `dρ/dt`, stepping forward in time.
    #[default]
    TimeOrdered,
    /// Second-order Magnus exponent over `[0, t]` for every sample, applied
    /// by integrating `dρ/ds = Ω(t) ρ` for `s ∈ [0, 1]`. Stays well
    /// conditioned when `Δ(t)` changes sign while `N(t)` stays positive,
    /// where stepping through the backward-diffusion phases amplifies
    /// round-off in the high Fock levels.
    Magnus,
}

#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub equation: Equation,
    pub propagator: Propagator,
    pub coefficients: CoefficientSource,
    /// Required by [`Equation::NonSecular`].
    pub omega_0: Option<f64>,
    pub ode: OdeOptions,
    /// Allowed drift of the trace away from its initial value.
    pub trace_tol: f64,
    pub hermiticity_tol: f64,
}

impl EvolutionSpec {
    pub fn new(equation: Equation, coefficients: CoefficientSource, omega_0: Option<f64>) -> Self {
        Self {
            equation,
            propagator: Propagator::TimeOrdered,
            coefficients,
            omega_0,
            ode: OdeOptions::default(),
            trace_tol: 1e-6,
            hermiticity_tol: 1e-10,
        }
    }

    pub fn with_propagator(mut self, propagator: Propagator) -> Self {
        self.propagator = propagator;
        self
    }

    fn validate(&self) -> Result<Option<f64>> {
        match (self.equation, self.omega_0) {
            (Equation::NonSecular, None) => Err(Error::InvalidParameter {
                name: "omega_0",
                value: f64::NAN,
                reason: "the nonsecular equation needs the system frequency",
            }),
            (Equation::NonSecular, Some(w)) if !(w > 0.0) => Err(Error::InvalidParameter {
                name: "omega_0",
                value: w,
                reason: "must be positive",
            }),
            (Equation::NonSecular, w) => Ok(w),
            (Equation::Secular, _) => Ok(None),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Diagnostic only: smallest eigenvalue at each sample.
    pub min_eigenvalues: Vec<f64>,
    pub stats: OdeStats,
}

/// Options that only affect the sample-time checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SampleChecks {
    pub eigenvalues: bool,
}

pub(crate) fn evolve_with(
    rho0: &DensityMatrix,
    spec: &EvolutionSpec,
    samples: &[f64],
    checks: SampleChecks,
) -> Result<Trajectory> {
    let omega_0 = spec.validate()?;
    if samples.iter().any(|&t| t < 0.0) || samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("sample times must be non-negative and non-decreasing".into()));
    }
    let dim = rho0.dim();
    let mut recorder = Recorder::new(rho0, spec, checks, samples.len());
    let stats = match spec.propagator {
        Propagator::TimeOrdered => {
            let ladder = Ladder::new(dim);
            let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
                let (delta, gamma) = spec.coefficients.at(t)?;
                let w = Weights::instant(delta, gamma, omega_0.map(|w| 2.0 * w * t));
                ladder.apply(y, dy, &w, true);
                Ok(())
            };
            ode::integrate(rhs, 0.0, &rho0.to_flat(), samples, spec.ode, |t, y| recorder.record(t, y))?
        }
        Propagator::Magnus => magnus::propagate(rho0, spec, omega_0, samples, |t, y| recorder.record(t, y))?,
    };
    Ok(recorder.finish(stats))
}

/// Collects samples and applies the trace and Hermiticity checks.
struct Recorder {
    dim: usize,
    trace0: f64,
    trace_tol: f64,
    hermiticity_tol: f64,
    checks: SampleChecks,
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    min_eigenvalues: Vec<f64>,
}

impl Recorder {
    fn new(rho0: &DensityMatrix, spec: &EvolutionSpec, checks: SampleChecks, capacity: usize) -> Self {
        Self {
            dim: rho0.dim(),
            trace0: rho0.trace(),
            trace_tol: spec.trace_tol,
            hermiticity_tol: spec.hermiticity_tol,
            checks,
            times: Vec::with_capacity(capacity),
            states: Vec::with_capacity(capacity),
            min_eigenvalues: Vec::with_capacity(capacity),
        }
    }

    fn record(&mut self, t: f64, y: &[Complex64]) -> Result<()> {
        let dim = self.dim;
        let rho = DensityMatrix::from_flat(dim, y);
        let drift = (rho.trace() - self.trace0).abs();
        if drift > self.trace_tol {
            return Err(Error::Truncation {
                time: t,
                detail: format!("trace drifted by {drift:e} at dim {dim}"),
            });
        }
        let herm = rho.hermiticity_error();
        if herm > self.hermiticity_tol {
            return Err(Error::Truncation {
                time: t,
                detail: format!("hermiticity error {herm:e}"),
            });
        }
        self.min_eigenvalues
            .push(if self.checks.eigenvalues { rho.min_eigenvalue() } else { f64::NAN });
        self.times.push(t);
        self.states.push(rho);
        Ok(())
    }

    fn finish(self, stats: OdeStats) -> Trajectory {
        Trajectory {
            times: self.times,
            states: self.states,
            min_eigenvalues: self.min_eigenvalues,
            stats,
        }
    }
}

/// Integrates `ρ(t)` from `t = 0` and returns it at every sample time.
pub fn evolve(rho0: &DensityMatrix, spec: &EvolutionSpec, samples: &[f64]) -> Result<Trajectory> {
    evolve_with(rho0, spec, samples, SampleChecks { eigenvalues: true })
}

/// Truncation used for cat states of amplitude `alpha`.
pub fn cat_dimension(alpha: f64) -> usize {
    (4.0 * alpha * alpha + 10.0 * alpha.max(1.0) + 20.0).ceil() as usize
}

/// [`cat_dimension`] widened for a run whose heating function peaks at
/// `max_heating`: the added thermal-like tail falls off as `(N/(N+1))^k`.
pub fn heated_cat_dimension(alpha: f64, max_heating: f64) -> usize {
    cat_dimension(alpha) + (20.0 * max_heating.max(0.0)).ceil() as usize
}

/// Truncation used for Fock-state runs starting in `|n⟩`.
pub fn fock_dimension(n: usize) -> usize {
    8 * (n + 1)
}

/// The even cat split into `|α⟩⟨α|`, `|-α⟩⟨-α|` and `|α⟩⟨-α| + h.c.`,
/// each evolved separately (the equations are linear). The split keeps the
/// Gaussian peaks and the interference term apart, which is what the
/// fringe visibility compares.
#[derive(Debug, Clone)]
pub struct CatTrajectory {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub plus: Vec<DensityMatrix>,
    pub minus: Vec<DensityMatrix>,
    pub interference: Vec<DensityMatrix>,
    /// Smallest eigenvalue of the recombined, normalized cat at each sample.
    pub min_eigenvalues: Vec<f64>,
}

impl CatTrajectory {
    /// Recombined normalized state at sample `k`.
    pub fn state(&self, k: usize) -> DensityMatrix {
        let sum = &(&self.plus[k] + &self.minus[k]) + &self.interference[k];
        let norm = 2.0 * (1.0 + (-2.0 * self.alpha * self.alpha).exp());
        DensityMatrix::from_flat(
            sum.dim(),
            &sum.to_flat().iter().map(|z| z / norm).collect::<Vec<_>>(),
        )
    }
}

pub fn evolve_cat(alpha: f64, dim: usize, spec: &EvolutionSpec, samples: &[f64]) -> Result<CatTrajectory> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "cat amplitude must be positive",
        });
    }
    let a = Complex64::new(alpha, 0.0);
    let vp = super::state::coherent_amplitudes(dim, a);
    let vm = super::state::coherent_amplitudes(dim, -a);
    let plus = DensityMatrix::outer(&vp, &vp);
    let minus = DensityMatrix::outer(&vm, &vm);
    let cross = DensityMatrix::outer(&vp, &vm);
    let cross_h = DensityMatrix::outer(&vm, &vp);
    let interference = &cross + &cross_h;
    let checks = SampleChecks { eigenvalues: false };
    let mut parts: Vec<Trajectory> = [plus, minus, interference]
        .par_iter()
        .map(|rho| evolve_with(rho, spec, samples, checks))
        .collect::<Result<_>>()?;
    let inter = parts.pop().expect("three parts");
    let minus = parts.pop().expect("three parts");
    let plus = parts.pop().expect("three parts");
    let mut out = CatTrajectory {
        alpha,
        times: plus.times,
        plus: plus.states,
        minus: minus.states,
        interference: inter.states,
        min_eigenvalues: Vec::new(),
    };
    out.min_eigenvalues = (0..out.times.len()).map(|k| out.state(k).min_eigenvalue()).collect();
    Ok(out)
}

/// `F = ½ W_I(0) / √(W₊ W₋)` per sample. The coherent peaks are read at
/// the current centres `tr(aρ±)/tr(ρ±)`, which for these Gaussian-preserving
/// equations is where each component's maximum sits.
pub fn fringe_from_trajectory(traj: &CatTrajectory) -> Result<Vec<f64>> {
    (0..traj.times.len())
        .map(|k| {
            let peak = |rho: &DensityMatrix| wigner_at(rho, rho.mean_amplitude() / rho.trace());
            let wi = wigner_at(&traj.interference[k], Complex64::new(0.0, 0.0))?;
            let wp = peak(&traj.plus[k])?;
            let wm = peak(&traj.minus[k])?;
            if !(wp > 0.0 && wm > 0.0) {
                return Err(Error::UndefinedVisibility {
                    time: traj.times[k],
                    detail: format!("peak values {wp:e}, {wm:e}"),
                });
            }
            Ok(0.5 * wi / (wp * wm).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(delta: f64, gamma: f64) -> CoefficientSource {
        CoefficientSource::Constant { delta, gamma }
    }

    #[test]
    fn zero_generator_leaves_state_unchanged() {
        let rho = DensityMatrix::cat(30, 1.0).unwrap();
        for eq in [Equation::Secular, Equation::NonSecular] {
            let spec = EvolutionSpec::new(eq, constant(0.0, 0.0), Some(1.0));
            let tr = evolve(&rho, &spec, &[0.0, 1.0, 5.0]).unwrap();
            for s in &tr.states {
                assert_eq!(s, &rho);
            }
        }
    }

    #[test]
    fn nonsecular_requires_frequency() {
        let spec = EvolutionSpec::new(Equation::NonSecular, constant(0.1, 0.01), None);
        let rho = DensityMatrix::fock(10, 0).unwrap();
        assert!(matches!(evolve(&rho, &spec, &[1.0]), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn secular_populations_follow_rate_equations() {
        // independent birth-death integration with classical RK4
        let (delta, gamma) = (0.3, 0.1);
        let dim = 20;
        let (down, up) = (delta + gamma, delta - gamma);
        let spec = EvolutionSpec::new(Equation::Secular, constant(delta, gamma), None);
        let rho = DensityMatrix::fock(dim, 1).unwrap();
        let t_end = 0.8;
        let tr = evolve(&rho, &spec, &[t_end]).unwrap();

        let deriv = |p: &[f64]| -> Vec<f64> {
            (0..dim)
                .map(|n| {
                    let nf = n as f64;
                    let mut v = -(down * nf + up * (nf + 1.0)) * p[n];
                    if n + 1 < dim {
                        v += down * (nf + 1.0) * p[n + 1];
                    }
                    if n > 0 {
                        v += up * nf * p[n - 1];
                    }
                    v
                })
                .collect()
        };
        let mut p = vec![0.0; dim];
        p[1] = 1.0;
        let steps = 8000;
        let h = t_end / steps as f64;
        for _ in 0..steps {
            let k1 = deriv(&p);
            let y2: Vec<f64> = p.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = deriv(&y2);
            let y3: Vec<f64> = p.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = deriv(&y3);
            let y4: Vec<f64> = p.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = deriv(&y4);
            for n in 0..dim {
                p[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
            }
        }
        for n in 0..6 {
            assert!((tr.states[0].population(n) - p[n]).abs() < 1e-7, "n={n}");
        }
    }

    #[test]
    fn secular_fixed_point_is_geometric() {
        let (delta, gamma) = (0.3, 0.1);
        let nbar = (delta - gamma) / (2.0 * gamma);
        let spec = EvolutionSpec::new(Equation::Secular, constant(delta, gamma), None);
        let tr = evolve(&DensityMatrix::fock(40, 0).unwrap(), &spec, &[100.0]).unwrap();
        let q = nbar / (1.0 + nbar);
        for n in 0..8 {
            let expected = (1.0 - q) * q.powi(n as i32);
            assert!((tr.states[0].population(n) - expected).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn trace_loss_is_detected() {
        let spec = EvolutionSpec::new(Equation::Secular, constant(5.0, 0.0), None);
        let rho = DensityMatrix::fock(6, 3).unwrap();
        assert!(matches!(evolve(&rho, &spec, &[2.0]), Err(Error::Truncation { .. })));
    }

    #[test]
    fn fringe_starts_at_one() {
        let spec = EvolutionSpec::new(Equation::Secular, constant(0.2, 0.01), None);
        for alpha in [0.5, 1.0, 2.0] {
            let tr = evolve_cat(alpha, cat_dimension(alpha), &spec, &[0.0, 0.1]).unwrap();
            let f = fringe_from_trajectory(&tr).unwrap();
            assert!((f[0] - 1.0).abs() < 1e-6, "alpha={alpha}: {}", f[0]);
            assert!(f[1] < f[0]);
        }
    }

    #[test]
    fn markovian_secular_fringe_matches_gaussian_solution() {
        // constant rates make the secular equation an Ornstein-Uhlenbeck
        // process for W; each quadrature gains variance s² referred back to
        // t = 0, and F = exp(-2α² s² / (1/4 + s²))
        let (delta, gamma) = (0.2, 0.02);
        let spec = EvolutionSpec::new(Equation::Secular, constant(delta, gamma), None);
        let times = [0.0, 0.5, 1.0, 2.0];
        let tr = evolve_cat(1.0, 60, &spec, &times).unwrap();
        let f = fringe_from_trajectory(&tr).unwrap();
        for (t, f) in times.iter().zip(f) {
            let s2 = delta / (4.0 * gamma) * ((2.0 * gamma * t).exp() - 1.0);
            let exact = (-2.0 * s2 / (0.25 + s2)).exp();
            assert!((f - exact).abs() < 1e-7, "t={t}: {f} vs {exact}");
        }
    }

    #[test]
    fn magnus_matches_time_ordered_where_stepping_is_stable() {
        // first positive-Δ phase off resonance, and a short nonsecular run at r = 10
        let bath = ThermalBath::default();
        let cfg = QuadratureConfig::default();
        for (r, equation, t_end, dim) in [(0.1, Equation::Secular, 3.0, 24), (10.0, Equation::NonSecular, 0.3, 30)] {
            let m = SpectralModel::from_kind(crate::ReservoirKind::Ohmic, 0.1, r).unwrap();
            let src = CoefficientSource::tabulate(&m, &bath, t_end, &cfg).unwrap();
            let times = lin_space(0.0, t_end, 4);
            let run = |p: Propagator| {
                let spec = EvolutionSpec::new(equation, src.clone(), Some(1.0)).with_propagator(p);
                fringe_from_trajectory(&evolve_cat(1.0, dim, &spec, &times).unwrap()).unwrap()
            };
            let (a, b) = (run(Propagator::TimeOrdered), run(Propagator::Magnus));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-5, "r={r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn magnus_handles_sign_changing_diffusion() {
        // Δ(t) = 0.2 sin t, γ = 0: the exact state depends on N(t) only, so at
        // t = 2π the initial state returns
        let times = lin_space(0.0, 2.0 * std::f64::consts::PI, 2001);
        let delta = CubicTable::new(times.clone(), times.iter().map(|t| 0.2 * t.sin()).collect()).unwrap();
        let gamma = CubicTable::new(times.clone(), vec![0.0; times.len()]).unwrap();
        let spec = EvolutionSpec::new(Equation::Secular, CoefficientSource::Tabulated { delta, gamma }, None)
            .with_propagator(Propagator::Magnus);
        let rho = DensityMatrix::coherent(40, Complex64::new(1.0, 0.0)).unwrap();
        let tr = evolve(&rho, &spec, &[std::f64::consts::PI, 2.0 * std::f64::consts::PI]).unwrap();
        assert!((tr.states[0].mean_number() - 1.4).abs() < 1e-6);
        assert!((tr.states[1].matrix() - rho.matrix()).norm() < 1e-6);
    }

    #[test]
    fn tabulated_source_reproduces_rates() {
        let m = SpectralModel::new(1.0, 0.1, 2.0).unwrap();
        let bath = ThermalBath::default();
        let cfg = QuadratureConfig::default();
        let src = CoefficientSource::tabulate(&m, &bath, 1.0, &cfg).unwrap();
        for t in [0.1234, 0.5, 0.987] {
            let (d, g) = src.at(t).unwrap();
            let d0 = kernels::compute_delta(&m, &bath, t, &cfg).unwrap();
            let g0 = kernels::compute_gamma(&m, t, &cfg).unwrap();
            assert!((d / d0 - 1.0).abs() < 1e-6);
            assert!((g / g0 - 1.0).abs() < 1e-6);
        }
        assert!(src.at(1.5).is_err());
    }
}
