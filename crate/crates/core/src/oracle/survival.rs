use serde::{Deserialize, Serialize};

use super::master::{evolve_with, EvolutionSpec, SampleChecks};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Per-cycle survival below this value violates the short-interval premise
/// behind the effective-rate formula.
pub const PREMISE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub n: usize,
    pub tau: f64,
    pub num_measurements: usize,
    /// `P_n(τ)` after a single free evolution from `|n⟩`.
    pub per_cycle: f64,
    /// `P_n(τ)^{N_m}`.
    pub probability: f64,
    /// `-ln P / (N_m τ)`.
    pub fitted_rate: f64,
    /// Fock populations after `N_m` nonselective cycles starting from `|n⟩`.
    pub populations: Vec<f64>,
    pub premise_warning: Option<String>,
}

/// Survival of `|n⟩` under `num_measurements` rounds of free evolution for
/// `tau` followed by a nonselective energy measurement. The master-equation
/// clock restarts at every round, so `spec` only needs coefficients on
/// `[0, tau]`.
pub fn survival_probability(
    n: usize,
    tau: f64,
    num_measurements: usize,
    spec: &EvolutionSpec,
    dim: usize,
) -> Result<SurvivalResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain { what: "measurement interval", value: tau });
    }
    if num_measurements == 0 {
        return Err(Error::InvalidParameter {
            name: "num_measurements",
            value: 0.0,
            reason: "need at least one measurement",
        });
    }
    if 2 * n >= dim {
        return Err(Error::Truncation {
            time: 0.0,
            detail: format!("level {n} needs dim > {}", 2 * n),
        });
    }
    let checks = SampleChecks { eigenvalues: false };
    let mut rho = DensityMatrix::fock(dim, n)?;
    let mut per_cycle = f64::NAN;
    for cycle in 0..num_measurements {
        let traj = evolve_with(&rho, spec, &[tau], checks)?;
        rho = traj.states[0].dephased();
        if cycle == 0 {
            per_cycle = rho.population(n);
        }
    }
    let probability = per_cycle.powi(num_measurements as i32);
    let fitted_rate = -per_cycle.ln() / tau;
    let premise_warning = (per_cycle < PREMISE_THRESHOLD).then(|| {
        format!("P_n(τ) = {per_cycle:.4} is below {PREMISE_THRESHOLD}; the short-interval premise does not hold")
    });
    Ok(SurvivalResult {
        n,
        tau,
        num_measurements,
        per_cycle,
        probability,
        fitted_rate,
        populations: (0..dim).map(|k| rho.population(k)).collect(),
        premise_warning,
    })
}
