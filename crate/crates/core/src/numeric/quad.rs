//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature over a set of
//! initial panels.
//!
//! The driver keeps every panel in a max-heap keyed on its error estimate
//! and bisects the worst one until the summed estimate meets
//! `max(abs_tol, rel_tol * |I|)`. Error estimates follow the QUADPACK
//! `qk21` heuristics, including the round-off floor of `50 eps * ∫|f|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_015_008_582,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisections allowed on top of the initial panels.
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0_f64).min((200.0 * error / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Domain {
            what: "quadrature integrand",
            value,
        });
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    })
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// the panels delimited by `breakpoints` (strictly increasing).
pub fn integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerances) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidGrid(
            "quadrature needs at least two breakpoints".into(),
        ));
    }
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() + tol.max_subdivisions);
    let mut finished: Vec<Segment> = Vec::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            if w[1] == w[0] {
                continue;
            }
            return Err(Error::InvalidGrid(format!(
                "breakpoints not increasing: {} then {}",
                w[0], w[1]
            )));
        }
        heap.push(gk21(&mut f, w[0], w[1])?);
        evaluations += 21;
    }
    if heap.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations,
            subdivisions: 0,
        });
    }

    let totals = |heap: &BinaryHeap<Segment>, finished: &[Segment]| {
        heap.iter()
            .chain(finished.iter())
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };

    let mut subdivisions = 0;
    let (mut value, mut error) = totals(&heap, &finished);
    loop {
        let target = tol.abs_tol.max(tol.rel_tol * value.abs());
        if error <= target {
            break;
        }
        let Some(worst) = heap.pop() else {
            // every remaining panel is at machine resolution
            return Err(Error::Convergence {
                value,
                error,
                tolerance: target,
                subdivisions,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-13 * worst.a.abs().max(1e-300) {
            finished.push(worst);
            continue;
        }
        if subdivisions >= tol.max_subdivisions {
            heap.push(worst);
            return Err(Error::Convergence {
                value,
                error,
                tolerance: target,
                subdivisions,
            });
        }
        let left = gk21(&mut f, worst.a, mid)?;
        let right = gk21(&mut f, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        // round-off floor: nothing left to gain once all panels sit at 50 eps ∫|f|
        if left.error <= 50.0 * f64::EPSILON * left.abs_value * 1.0001 {
            finished.push(left);
        } else {
            heap.push(left);
        }
        if right.error <= 50.0 * f64::EPSILON * right.abs_value * 1.0001 {
            finished.push(right);
        } else {
            heap.push(right);
        }
        if subdivisions % 64 == 0 {
            (value, error) = totals(&heap, &finished);
        }
    }
    let (value, error) = totals(&heap, &finished);
    Ok(QuadResult {
        value,
        error,
        evaluations,
        subdivisions,
    })
}

/// Convenience wrapper for infallible integrands.
pub fn integrate_infallible<F>(mut f: F, breakpoints: &[f64], tol: Tolerances) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Ok(f(x)), breakpoints, tol)
}

/// `n` equal panels on `[a, b]`.
pub fn uniform_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut pts: Vec<f64> = (0..n).map(|k| a + h * k as f64).collect();
    pts.push(b);
    pts
}
