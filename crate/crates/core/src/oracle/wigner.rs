//! Wigner function by displaced parity,
//! `W(β) = (2/π) tr[Π D(β)† ρ D(β)]` with `Π = (-1)^{a†a}`.

use std::f64::consts::FRAC_2_PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Truncated displacement `exp(β a† - β* a)` by scaling-and-squaring.
pub fn displacement(dim: usize, beta: Complex64) -> DMatrix<Complex64> {
    let mut g = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        // ⟨n|a†|n-1⟩ = √n, ⟨n-1|a|n⟩ = √n
        g[(n, n - 1)] = beta * s;
        g[(n - 1, n)] = -beta.conj() * s;
    }
    g.exp()
}

fn check_point(dim: usize, beta: Complex64) -> Result<()> {
    if beta.norm_sqr() >= dim as f64 / 4.0 {
        return Err(Error::Truncation {
            time: f64::NAN,
            detail: format!("|β|² = {} is not below dim/4 = {}", beta.norm_sqr(), dim as f64 / 4.0),
        });
    }
    Ok(())
}

fn parity_expectation(rho: &DMatrix<Complex64>, d: &DMatrix<Complex64>) -> f64 {
    // Σ_k (-1)^k (D† ρ D)_kk = Σ_k (-1)^k Σ_j conj(D_jk) (ρ D)_jk
    let rd = rho * d;
    let dim = rho.nrows();
    let mut acc = 0.0;
    for k in 0..dim {
        let mut diag = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            diag += d[(j, k)].conj() * rd[(j, k)];
        }
        acc += if k % 2 == 0 { diag.re } else { -diag.re };
    }
    acc
}

/// `W(β)`. Requires `|β|² < dim/4` so the displaced state fits the truncation.
pub fn wigner_at(rho: &DensityMatrix, beta: Complex64) -> Result<f64> {
    check_point(rho.dim(), beta)?;
    if beta == Complex64::new(0.0, 0.0) {
        let parity: f64 = (0..rho.dim())
            .map(|k| if k % 2 == 0 { rho.population(k) } else { -rho.population(k) })
            .sum();
        return Ok(FRAC_2_PI * parity);
    }
    Ok(FRAC_2_PI * parity_expectation(rho.matrix(), &displacement(rho.dim(), beta)))
}

/// Wigner values at a fixed set of points, reusing the displacement
/// operators across many states.
#[derive(Debug, Clone)]
pub struct WignerProbe {
    dim: usize,
    displacements: Vec<DMatrix<Complex64>>,
}

impl WignerProbe {
    pub fn new(dim: usize, points: &[Complex64]) -> Result<Self> {
        for &b in points {
            check_point(dim, b)?;
        }
        Ok(Self {
            dim,
            displacements: points.iter().map(|&b| displacement(dim, b)).collect(),
        })
    }

    pub fn eval(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::InvalidGrid(format!(
                "probe built for dim {}, state has dim {}",
                self.dim,
                rho.dim()
            )));
        }
        Ok(self
            .displacements
            .iter()
            .map(|d| FRAC_2_PI * parity_expectation(rho.matrix(), d))
            .collect())
    }
}
