//! Second-order Magnus propagation.
//!
//! With `L(t) = Δ D₁ + γ D₂ + c(t) G_lo + c*(t) G_hi`, where
//! `D₁ = (down + up)/2`, `D₂ = (down - up)/2` and `c = (Δ-γ)/2 e^{-2iω₀t}`,
//!
//! ```text
//! Ω(t) = Σ_k F_k M_k + Σ_{i<j} W_ij [M_i, M_j],
//! F_k = ∫₀ᵗ f_k,   W_ij = ½ ∫₀ᵗ (f_i F_j - f_j F_i).
//! ```
//!
//! `D₁`, `G_lo` and `G_hi` are double commutators with operators linear in
//! `a, a†`, so they commute with each other on the untruncated space; only
//! the pairs involving the drift `D₂` are kept.

use num_complex::Complex64;

use super::generator::{hermitize, Ladder, Weights};
use super::master::{CoefficientSource, EvolutionSpec};
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::numeric::ode::{self, OdeStats};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF: Complex64 = Complex64::new(0.5, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Integration grid for the Magnus weights: the table knots when the
/// coefficients are tabulated, otherwise a uniform grid, merged with the
/// sample times.
fn weight_grid(source: &CoefficientSource, omega_0: Option<f64>, t_end: f64, samples: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = match source {
        CoefficientSource::Tabulated { delta, .. } => {
            delta.knots().iter().copied().take_while(|&t| t < t_end).collect()
        }
        _ => {
            let h = omega_0.map_or(1e-3, |w| (1e-3f64).min(0.02 / w));
            let n = (t_end / h).ceil().max(1.0) as usize;
            (0..n).map(|k| t_end * k as f64 / n as f64).collect()
        }
    };
    grid.push(t_end);
    grid.extend_from_slice(samples);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `F_k` and `W_ij` on the grid by cumulative trapezoid.
struct MagnusWeights {
    first: Vec<[Complex64; 4]>,
    /// `W₀₁`, `W₁₂`, `W₁₃`.
    second: Vec<[Complex64; 3]>,
}

fn magnus_weights(grid: &[f64], source: &CoefficientSource, omega_0: Option<f64>) -> Result<MagnusWeights> {
    let f = grid
        .iter()
        .map(|&t| {
            let (delta, gamma) = source.at(t)?;
            let c = omega_0.map_or(ZERO, |w| Complex64::from_polar(0.5 * (delta - gamma), -2.0 * w * t));
            Ok([Complex64::new(delta, 0.0), Complex64::new(gamma, 0.0), c, c.conj()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut first = vec![[ZERO; 4]; grid.len()];
    let mut second = vec![[ZERO; 3]; grid.len()];
    const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (1, 3)];
    let integrand = |fk: &[Complex64; 4], fc: &[Complex64; 4]| {
        PAIRS.map(|(i, j)| HALF * (fk[i] * fc[j] - fk[j] * fc[i]))
    };
    for k in 1..grid.len() {
        let h = grid[k] - grid[k - 1];
        for q in 0..4 {
            first[k][q] = first[k - 1][q] + HALF * h * (f[k - 1][q] + f[k][q]);
        }
        let a = integrand(&f[k - 1], &first[k - 1]);
        let b = integrand(&f[k], &first[k]);
        for q in 0..3 {
            second[k][q] = second[k - 1][q] + HALF * h * (a[q] + b[q]);
        }
    }
    Ok(MagnusWeights { first, second })
}

fn scaled(w: Weights, c: Complex64) -> Weights {
    Weights {
        down: w.down * c,
        up: w.up * c,
        lo: w.lo * c,
        hi: w.hi * c,
    }
}

fn sum(a: Weights, b: Weights) -> Weights {
    Weights {
        down: a.down + b.down,
        up: a.up + b.up,
        lo: a.lo + b.lo,
        hi: a.hi + b.hi,
    }
}

const D1: Weights = Weights { down: HALF, up: HALF, lo: ZERO, hi: ZERO };
const D2: Weights = Weights {
    down: HALF,
    up: Complex64::new(-0.5, 0.0),
    lo: ZERO,
    hi: ZERO,
};
const G_LO: Weights = Weights { down: ZERO, up: ZERO, lo: ONE, hi: ZERO };
const G_HI: Weights = Weights { down: ZERO, up: ZERO, lo: ZERO, hi: ONE };

/// `Ω ρ = A ρ + [P, D₂] ρ` with `A = Σ F_k M_k` and
/// `P = W₀₁ D₁ - W₁₂ G_lo - W₁₃ G_hi`.
struct Exponent<'a> {
    ladder: &'a Ladder,
    dim: usize,
    first: Weights,
    commutator: Option<Weights>,
}

impl Exponent<'_> {
    fn apply(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Vec<Complex64>; 3]) {
        self.ladder.apply(rho, out, &self.first, true);
        if let Some(p) = &self.commutator {
            let [d2, pd2, tmp] = scratch;
            self.ladder.apply(rho, d2, &D2, true);
            self.ladder.apply(d2, pd2, p, false);
            self.ladder.apply(rho, tmp, p, true);
            self.ladder.apply(&tmp[..], d2, &D2, false);
            for k in 0..out.len() {
                out[k] += pd2[k] - d2[k];
            }
            hermitize(out, self.dim);
        }
    }
}

/// Calls `on_sample(t, ρ(t))` for every sample.
pub(crate) fn propagate<S>(
    rho0: &DensityMatrix,
    spec: &EvolutionSpec,
    omega_0: Option<f64>,
    samples: &[f64],
    mut on_sample: S,
) -> Result<OdeStats>
where
    S: FnMut(f64, &[Complex64]) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let Some(&t_end) = samples.last() else {
        return Ok(stats);
    };
    let dim = rho0.dim();
    let y0 = rho0.to_flat();
    if t_end == 0.0 {
        for &t in samples {
            on_sample(t, &y0)?;
        }
        return Ok(stats);
    }
    let grid = weight_grid(&spec.coefficients, omega_0, t_end, samples);
    let weights = magnus_weights(&grid, &spec.coefficients, omega_0)?;
    let ladder = Ladder::new(dim);
    let mut scratch = [vec![ZERO; dim * dim], vec![ZERO; dim * dim], vec![ZERO; dim * dim]];
    for &t in samples {
        let k = grid.partition_point(|&g| g < t);
        if grid.get(k) != Some(&t) {
            return Err(Error::InvalidGrid(format!("sample {t} missing from the Magnus grid")));
        }
        let [f_delta, f_gamma, f_lo, f_hi] = weights.first[k];
        let [w01, w12, w13] = weights.second[k];
        let first = sum(
            sum(scaled(D1, f_delta), scaled(D2, f_gamma)),
            sum(scaled(G_LO, f_lo), scaled(G_HI, f_hi)),
        );
        let p = sum(scaled(D1, w01), sum(scaled(G_LO, -w12), scaled(G_HI, -w13)));
        let exponent = Exponent {
            ladder: &ladder,
            dim,
            first,
            commutator: (p != Weights::default()).then_some(p),
        };
        let rhs = |_s: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
            exponent.apply(y, dy, &mut scratch);
            Ok(())
        };
        let mut result = Ok(());
        let run = ode::integrate(rhs, 0.0, &y0, &[1.0], spec.ode, |_, y| {
            result = on_sample(t, y);
            Ok(())
        })
        .map_err(|e| match e {
            Error::StepSizeUnderflow { step, .. } => Error::StepSizeUnderflow { time: t, step },
            other => other,
        })?;
        result?;
        stats.accepted += run.accepted;
        stats.rejected += run.rejected;
        stats.rhs_evaluations += run.rhs_evaluations;
    }
    Ok(stats)
}
