//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with adaptive steps.
//!
//! The state is a flat slice of any [`OdeScalar`]; the oracle integrates
//! vectorised complex density matrices with it.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait OdeScalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn modulus(self) -> f64;
}

impl OdeScalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl OdeScalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `f64::INFINITY` leaves it free.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 1_000_000,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(t, y)` from `t0` through every time in `samples`
/// (non-decreasing, all `>= t0`), calling `on_sample(t, y)` at each.
pub fn integrate<T, R, S>(
    mut rhs: R,
    t0: f64,
    y0: &[T],
    samples: &[f64],
    opts: OdeOptions,
    mut on_sample: S,
) -> Result<OdeStats>
where
    T: OdeScalar,
    R: FnMut(f64, &[T], &mut [T]) -> Result<()>,
    S: FnMut(f64, &[T]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = OdeStats::default();
    let mut k: Vec<Vec<T>> = (0..7).map(|_| vec![T::default(); n]).collect();
    let mut tmp = vec![T::default(); n];
    let mut y_new = vec![T::default(); n];

    rhs(t, &y, &mut k[0])?;
    stats.rhs_evaluations += 1;

    let t_end = samples.last().copied().unwrap_or(t0);
    let mut h = initial_step(&y, &k[0], t_end - t0, opts);
    let mut fsal_valid = true;

    for &ts in samples {
        if ts < t {
            return Err(Error::InvalidGrid(format!(
                "sample time {ts} precedes integrator time {t}"
            )));
        }
        while t < ts {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::TooManySteps(opts.max_steps));
            }
            let mut step = h.min(opts.max_step);
            let mut last = false;
            if t + step >= ts || (ts - t - step) < 1e-12 * ts.abs().max(1.0) {
                step = ts - t;
                last = true;
            }
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { time: t, step });
            }
            if !fsal_valid {
                rhs(t, &y, &mut k[0])?;
                stats.rhs_evaluations += 1;
                fsal_valid = true;
            }

            stage(&y, &k, &[A21], step, &mut tmp);
            rhs(t + C2 * step, &tmp, &mut k[1])?;
            stage(&y, &k, &[A31, A32], step, &mut tmp);
            rhs(t + C3 * step, &tmp, &mut k[2])?;
            stage(&y, &k, &[A41, A42, A43], step, &mut tmp);
            rhs(t + C4 * step, &tmp, &mut k[3])?;
            stage(&y, &k, &[A51, A52, A53, A54], step, &mut tmp);
            rhs(t + C5 * step, &tmp, &mut k[4])?;
            stage(&y, &k, &[A61, A62, A63, A64, A65], step, &mut tmp);
            rhs(t + step, &tmp, &mut k[5])?;
            stage(&y, &k, &[A71, 0.0, A73, A74, A75, A76], step, &mut y_new);
            rhs(t + step, &y_new, &mut k[6])?;
            stats.rhs_evaluations += 6;

            let mut acc = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * step;
                let scale = opts.abs_tol + opts.rel_tol * y[i].modulus().max(y_new[i].modulus());
                let r = e.modulus() / scale;
                acc += r * r;
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::StepSizeUnderflow { time: t, step });
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { ts } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                stats.accepted += 1;
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor.min(1.0));
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { time: t, step: h });
                }
            }
        }
        on_sample(ts, &y)?;
    }
    Ok(stats)
}

fn stage<T: OdeScalar>(y: &[T], k: &[Vec<T>], a: &[f64], h: f64, out: &mut [T]) {
    for i in 0..y.len() {
        let mut acc = T::default();
        for (j, &aj) in a.iter().enumerate() {
            if aj != 0.0 {
                acc = acc + k[j][i] * aj;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

fn initial_step<T: OdeScalar>(y: &[T], dy: &[T], span: f64, opts: OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, di) in y.iter().zip(dy) {
        let sc = opts.abs_tol + opts.rel_tol * yi.modulus();
        d0 += (yi.modulus() / sc).powi(2);
        d1 += (di.modulus() / sc).powi(2);
    }
    let n = y.len().max(1) as f64;
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let span = span.abs();
    if span > 0.0 {
        h.min(0.1 * span).max(1e-12 * span)
    } else {
        h
    }
}
