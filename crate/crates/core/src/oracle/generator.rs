//! Action of the master-equation generator pieces on a row-major density
//! matrix, by ladder-operator index arithmetic. The untruncated number
//! operator is used, so population pushed past the top level is lost.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Weights of the four superoperators
///
/// ```text
/// down: 2aρa† - a†aρ - ρa†a      up: 2a†ρa - aa†ρ - ρaa†
/// lo:   2aρa  - a²ρ  - ρa²       hi: 2a†ρa† - a†²ρ - ρa†²
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Weights {
    pub down: Complex64,
    pub up: Complex64,
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Weights {
    /// The master-equation generator at one instant: `down = (Δ+γ)/2`,
    /// `up = (Δ-γ)/2` and, for the nonsecular equation, `lo = (Δ-γ)/2 e^{-2iω₀t}`
    /// with `hi = lo*`.
    pub fn instant(delta: f64, gamma: f64, phase: Option<f64>) -> Self {
        let b = 0.5 * (delta - gamma);
        let lo = phase.map_or(ZERO, |p| Complex64::from_polar(b, -p));
        Self {
            down: Complex64::new(0.5 * (delta + gamma), 0.0),
            up: Complex64::new(b, 0.0),
            lo,
            hi: lo.conj(),
        }
    }

    /// Maps Hermitian matrices to Hermitian matrices.
    fn preserves_hermiticity(&self) -> bool {
        self.down.im == 0.0 && self.up.im == 0.0 && self.hi == self.lo.conj()
    }

    fn has_counter_terms(&self) -> bool {
        self.lo != ZERO || self.hi != ZERO
    }
}

pub(crate) struct Ladder {
    dim: usize,
    sqrt: Vec<f64>,
}

impl Ladder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            sqrt: (0..=dim + 2).map(|k| (k as f64).sqrt()).collect(),
        }
    }

    #[inline]
    fn entry(&self, rho: &[Complex64], w: &Weights, counter: bool, m: usize, n: usize) -> Complex64 {
        let d = self.dim;
        let s = &self.sqrt;
        let at = |i: usize, j: usize| rho[i * d + j];
        let r = at(m, n);
        let (mf, nf) = (m as f64, n as f64);
        let mut v = -(mf + nf) * r;
        if m + 1 < d && n + 1 < d {
            v += 2.0 * s[m + 1] * s[n + 1] * at(m + 1, n + 1);
        }
        let mut u = -(mf + nf + 2.0) * r;
        if m > 0 && n > 0 {
            u += 2.0 * s[m] * s[n] * at(m - 1, n - 1);
        }
        let mut z = w.down * v + w.up * u;
        if counter {
            let mut lo = ZERO;
            if m + 1 < d && n >= 1 {
                lo += 2.0 * s[m + 1] * s[n] * at(m + 1, n - 1);
            }
            if m + 2 < d {
                lo -= s[m + 1] * s[m + 2] * at(m + 2, n);
            }
            if n >= 2 {
                lo -= s[n] * s[n - 1] * at(m, n - 2);
            }
            let mut hi = ZERO;
            if m >= 1 && n + 1 < d {
                hi += 2.0 * s[m] * s[n + 1] * at(m - 1, n + 1);
            }
            if m >= 2 {
                hi -= s[m] * s[m - 1] * at(m - 2, n);
            }
            if n + 2 < d {
                hi -= s[n + 1] * s[n + 2] * at(m, n + 2);
            }
            z += w.lo * lo + w.hi * hi;
        }
        z
    }

    /// `out = L rho` for the generator with weights `w`. When `rho` is
    /// Hermitian and `w` preserves that, only the upper triangle is computed
    /// and mirrored, so the integrator keeps Hermiticity exactly.
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64], w: &Weights, rho_hermitian: bool) {
        let d = self.dim;
        let counter = w.has_counter_terms();
        if rho_hermitian && w.preserves_hermiticity() {
            for m in 0..d {
                for n in m..d {
                    let z = self.entry(rho, w, counter, m, n);
                    if n == m {
                        out[m * d + m] = Complex64::new(z.re, 0.0);
                    } else {
                        out[m * d + n] = z;
                        out[n * d + m] = z.conj();
                    }
                }
            }
        } else {
            for m in 0..d {
                for n in 0..d {
                    out[m * d + n] = self.entry(rho, w, counter, m, n);
                }
            }
        }
    }
}

/// Replaces the lower triangle by the mirror of the upper one.
pub(crate) fn hermitize(a: &mut [Complex64], dim: usize) {
    for m in 0..dim {
        a[m * dim + m].im = 0.0;
        for n in m + 1..dim {
            a[n * dim + m] = a[m * dim + n].conj();
        }
    }
}
