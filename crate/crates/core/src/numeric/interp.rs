/// Piecewise cubic (four-point Lagrange) interpolation on a monotone grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl CubicTable {
    /// `xs` must be strictly increasing with at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        Some(Self { xs, ys })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n < 4 {
            // linear fallback for tiny tables
            let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
            let (x0, x1) = (self.xs[i - 1], self.xs[i]);
            let w = (x - x0) / (x1 - x0);
            return self.ys[i - 1] * (1.0 - w) + self.ys[i] * w;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        // stencil [j, j+3] around the interval [i-1, i]
        let j = i.saturating_sub(2).min(n - 4);
        let mut acc = 0.0;
        for a in j..j + 4 {
            let mut l = 1.0;
            for b in j..j + 4 {
                if a != b {
                    l *= (x - self.xs[b]) / (self.xs[a] - self.xs[b]);
                }
            }
            acc += l * self.ys[a];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).powf(1.2)).collect();
        let f = |x: f64| 2.0 - x + 0.3 * x * x - 0.05 * x * x * x;
        let t = CubicTable::new(xs.clone(), xs.iter().map(|&x| f(x)).collect()).unwrap();
        for k in 0..100 {
            let x = xs[19] * k as f64 / 99.0;
            assert!((t.eval(x) - f(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_accuracy_on_sine() {
        let h = 1e-2;
        let xs: Vec<f64> = (0..=300).map(|i| i as f64 * h).collect();
        let t = CubicTable::new(xs.clone(), xs.iter().map(|x| x.sin()).collect()).unwrap();
        let worst = (0..1000)
            .map(|k| {
                let x = 0.003 * k as f64;
                (t.eval(x) - x.sin()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }
}
