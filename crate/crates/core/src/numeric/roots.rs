//! Sign-change bracketing on sampled functions and bisection refinement.

use crate::error::{Error, Result};

fn sign(y: f64) -> i8 {
    if y > 0.0 {
        1
    } else if y < 0.0 {
        -1
    } else {
        0
    }
}

/// A sign change of a sampled function between `xs[lo]` and `xs[hi]`.
///
/// Exact zeros are skipped when looking for the bracket, so `hi - lo` can
/// exceed one; `exact` holds a sampled zero inside the bracket if there is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: usize,
    pub hi: usize,
    pub exact: Option<usize>,
}

/// Every sign change in `ys`. An identically-zero sequence has none.
pub fn sign_changes(ys: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let mut last: Option<(usize, i8)> = None;
    for (i, &y) in ys.iter().enumerate() {
        let s = sign(y);
        if s == 0 || y.is_nan() {
            continue;
        }
        if let Some((j, sj)) = last {
            if sj != s {
                let exact = (j + 1..i).find(|&k| ys[k] == 0.0);
                out.push(Bracket { lo: j, hi: i, exact });
            }
        }
        last = Some((i, s));
    }
    out
}

/// Bisection for `f(x) = 0` on `[lo, hi]` where `f(lo)` and `f(hi)` have
/// opposite signs. Stops as soon as `|f| < f_tol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, f_lo: f64, f_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let s_lo = sign(f_lo);
    let mut residual = f_lo;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        residual = fm;
        if fm.abs() < f_tol {
            return Ok(mid);
        }
        if sign(fm) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    Err(Error::RootRefinement { lo, hi, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_all_brackets() {
        let ys = [1.0, 0.5, -0.2, -0.1, 0.3, 0.0, -1.0];
        let b = sign_changes(&ys);
        assert_eq!(b.len(), 3);
        assert_eq!((b[0].lo, b[0].hi), (1, 2));
        assert_eq!((b[1].lo, b[1].hi), (3, 4));
        assert_eq!((b[2].lo, b[2].hi, b[2].exact), (4, 6, Some(5)));
    }

    #[test]
    fn identically_zero_has_no_roots() {
        assert!(sign_changes(&[0.0; 10]).is_empty());
    }

    #[test]
    fn bisects_sqrt_two() {
        let f = |x: f64| Ok(x * x - 2.0);
        let r = bisect(f, 1.0, 2.0, -1.0, 1e-12, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn discontinuity_is_a_refinement_error() {
        let f = |x: f64| Ok(if x < 0.3 { -1.0 } else { 1.0 });
        assert!(matches!(
            bisect(f, 0.0, 1.0, -1.0, 1e-6, 200),
            Err(Error::RootRefinement { .. })
        ));
    }
}
