use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermitian operator on the truncated Fock space `{|0⟩, …, |dim-1⟩}`.
///
/// Besides density matrices this also holds the non-positive pieces of a cat
/// state (see [`crate::oracle::evolve_cat`]), so positivity is not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: dim as f64,
            reason: "truncation needs at least two levels",
        });
    }
    Ok(())
}

/// Fock amplitudes of the coherent state `|α⟩`, truncated to `dim` levels.
pub fn coherent_amplitudes(dim: usize, alpha: Complex64) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        v[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    v
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidGrid(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        check_dim(m.nrows())?;
        Ok(Self { m })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::Truncation {
                time: 0.0,
                detail: format!("Fock level {n} outside dimension {dim}"),
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { m })
    }

    /// `|ψ⟩⟨φ|` from two kets (not necessarily Hermitian).
    pub(crate) fn outer(psi: &DVector<Complex64>, phi: &DVector<Complex64>) -> Self {
        Self { m: psi * phi.adjoint() }
    }

    pub fn coherent(dim: usize, alpha: Complex64) -> Result<Self> {
        check_dim(dim)?;
        let v = coherent_amplitudes(dim, alpha);
        Ok(Self::outer(&v, &v))
    }

    /// Normalized even cat `(|α⟩ + |-α⟩)/√𝒩` in the truncated space.
    pub fn cat(dim: usize, alpha: f64) -> Result<Self> {
        check_dim(dim)?;
        let a = Complex64::new(alpha, 0.0);
        let v = coherent_amplitudes(dim, a) + coherent_amplitudes(dim, -a);
        let norm = v.norm_squared();
        Ok(Self { m: (&v * v.adjoint()) / Complex64::new(norm, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn population(&self, n: usize) -> f64 {
        self.m[(n, n)].re
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Nonselective energy measurement: drops every Fock-basis coherence.
    pub fn dephased(&self) -> Self {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = Complex64::new(self.m[(i, i)].re, 0.0);
        }
        Self { m }
    }

    /// Mean excitation `tr(a†a ρ)`.
    pub fn mean_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.m[(n, n)].re).sum()
    }

    /// `tr(a ρ)`, the centre of a Gaussian state in phase space.
    pub fn mean_amplitude(&self) -> Complex64 {
        (1..self.dim()).map(|n| self.m[(n, n - 1)] * (n as f64).sqrt()).sum()
    }

    /// Row-major entries, the layout the integrator works on.
    pub(crate) fn to_flat(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }

    pub(crate) fn from_flat(dim: usize, data: &[Complex64]) -> Self {
        Self {
            m: DMatrix::from_row_slice(dim, dim, data),
        }
    }
}

impl std::ops::Add for &DensityMatrix {
    type Output = DensityMatrix;
    fn add(self, rhs: Self) -> DensityMatrix {
        DensityMatrix { m: &self.m + &rhs.m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_and_coherent_states_are_normalized() {
        let f = DensityMatrix::fock(10, 3).unwrap();
        assert_eq!(f.trace(), 1.0);
        assert_eq!(f.population(3), 1.0);
        let c = DensityMatrix::coherent(40, Complex64::new(1.5, -0.5)).unwrap();
        assert!((c.trace() - 1.0).abs() < 1e-12);
        assert!((c.mean_number() - 2.5).abs() < 1e-10);
        assert!(c.hermiticity_error() < 1e-15);
        assert!((c.mean_amplitude() - Complex64::new(1.5, -0.5)).norm() < 1e-10);
        assert!(DensityMatrix::fock(10, 10).is_err());
    }

    #[test]
    fn cat_has_even_parity_and_expected_mean() {
        let alpha = 1.3f64;
        let cat = DensityMatrix::cat(50, alpha).unwrap();
        assert!((cat.trace() - 1.0).abs() < 1e-12);
        for n in (1..50).step_by(2) {
            assert!(cat.population(n).abs() < 1e-15);
        }
        // ⟨n⟩ = α² tanh(α²) for the even cat
        let a2 = alpha * alpha;
        assert!((cat.mean_number() - a2 * a2.tanh()).abs() < 1e-10);
        assert!(cat.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn dephasing_keeps_populations_only() {
        let c = DensityMatrix::coherent(20, Complex64::new(1.0, 0.0)).unwrap();
        let d = c.dephased();
        assert_eq!(d.population(2), c.population(2));
        assert_eq!(d.matrix()[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn flat_round_trip() {
        let c = DensityMatrix::coherent(7, Complex64::new(0.3, 0.8)).unwrap();
        assert_eq!(DensityMatrix::from_flat(7, &c.to_flat()), c);
    }
}
