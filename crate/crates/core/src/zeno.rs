//! Zeno / anti-Zeno crossover under repeated nonselective energy
//! measurements.
//!
//! With measurements every `τ` the effective decay rate of a Fock state is
//! `γ^Z(τ) = N(τ)/τ`, and without measurements it is `Δ_M`. The ratio
//! `N(τ)/(τ Δ_M)` is below one in the Zeno regime and above one in the
//! anti-Zeno regime.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, CoefficientMode, QuadratureConfig};
use crate::numeric::{log_space, roots};
use crate::spectral::{ReservoirKind, SpectralModel, ThermalBath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZenoClass {
    /// Measurements slow the decay (`ratio < 1`).
    Qze,
    /// Measurements speed it up (`ratio > 1`).
    Aze,
    Boundary,
}

impl ZenoClass {
    pub fn of(ratio: f64, boundary_tol: f64) -> Self {
        if (ratio - 1.0).abs() <= boundary_tol {
            Self::Boundary
        } else if ratio < 1.0 {
            Self::Qze
        } else {
            Self::Aze
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Qze => "QZE",
            Self::Aze => "AZE",
            Self::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoConfig {
    pub boundary_tol: f64,
    /// Roots are refined until `|ratio - 1| < root_tol`.
    pub root_tol: f64,
    pub scan_points: usize,
    /// Default scan range in units of `ω_c τ`.
    pub scan_range: (f64, f64),
    /// When the ratio already exceeds one at the bottom of the scan, look
    /// for the crossover below it, down to this `ω_c τ`. `None` disables.
    pub extend_below: Option<f64>,
    pub max_bisections: usize,
}

impl Default for ZenoConfig {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-3,
            root_tol: 1e-4,
            scan_points: 400,
            scan_range: (0.05, 50.0),
            extend_below: Some(1e-8),
            max_bisections: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoPoint {
    pub r: f64,
    /// Measurement interval in units of `1/ω₀`.
    pub tau: f64,
    pub omega_c_tau: f64,
    pub ratio: f64,
    pub class: ZenoClass,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "measurement interval",
            value: tau,
        })
    }
}

/// `γ^Z(τ) = N(τ)/τ`.
pub fn effective_decay_rate(
    model: &SpectralModel,
    bath: &ThermalBath,
    tau: f64,
    mode: CoefficientMode,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_tau(tau)?;
    match mode {
        CoefficientMode::Markovian => Ok(model.markovian_delta(bath)),
        CoefficientMode::NonMarkovian => Ok(kernels::compute_heating(model, bath, tau, cfg)? / tau),
    }
}

fn markovian_rate(model: &SpectralModel, bath: &ThermalBath) -> Result<f64> {
    let dm = model.markovian_delta(bath);
    if dm > 0.0 {
        Ok(dm)
    } else {
        Err(Error::DegenerateModel(format!(
            "Markovian decay rate is {dm}; the Zeno ratio is undefined"
        )))
    }
}

/// `γ^Z(τ)/γ⁰ = N(τ)/(τ Δ_M)`.
pub fn zeno_ratio(
    model: &SpectralModel,
    bath: &ThermalBath,
    tau: f64,
    mode: CoefficientMode,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_tau(tau)?;
    let dm = markovian_rate(model, bath)?;
    match mode {
        CoefficientMode::Markovian => Ok(1.0),
        CoefficientMode::NonMarkovian => Ok(kernels::compute_heating(model, bath, tau, cfg)? / (tau * dm)),
    }
}

/// Heating function tabulated on a set of nodes; other `τ` are evaluated
/// directly.
struct HeatingTable<'a> {
    model: &'a SpectralModel,
    bath: &'a ThermalBath,
    mode: CoefficientMode,
    cfg: &'a QuadratureConfig,
    dm: f64,
    /// Starts at 0; strictly increasing.
    nodes: Vec<f64>,
    /// `None` where the quadrature failed.
    heating: Vec<Option<f64>>,
    failure: Option<Error>,
}

impl<'a> HeatingTable<'a> {
    fn build(
        model: &'a SpectralModel,
        bath: &'a ThermalBath,
        mode: CoefficientMode,
        cfg: &'a QuadratureConfig,
        taus: &[f64],
    ) -> Result<Self> {
        let dm = markovian_rate(model, bath)?;
        let mut nodes: Vec<f64> = std::iter::once(0.0).chain(taus.iter().copied()).collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let (heating, failure) = match mode {
            CoefficientMode::Markovian => (nodes.iter().map(|&t| Some(dm * t)).collect(), None),
            CoefficientMode::NonMarkovian => {
                let values: Vec<Result<f64>> = nodes
                    .par_iter()
                    .map(|&t| kernels::compute_heating(model, bath, t, cfg))
                    .collect();
                let mut failure = None;
                let out = values
                    .into_iter()
                    .map(|v| match v {
                        Ok(n) => Some(n),
                        Err(e) => {
                            failure.get_or_insert(e);
                            None
                        }
                    })
                    .collect();
                (out, failure)
            }
        };
        Ok(Self {
            model,
            bath,
            mode,
            cfg,
            dm,
            nodes,
            heating,
            failure,
        })
    }

    fn node_ratio(&self, tau: f64) -> Option<f64> {
        if self.mode == CoefficientMode::Markovian {
            return Some(1.0);
        }
        let i = self.nodes.binary_search_by(|t| t.total_cmp(&tau)).ok()?;
        self.heating[i].map(|n| n / (tau * self.dm))
    }

    fn ratio(&self, tau: f64) -> Result<f64> {
        if self.mode == CoefficientMode::Markovian {
            return Ok(1.0);
        }
        if let Some(v) = self.node_ratio(tau) {
            return Ok(v);
        }
        Ok(kernels::compute_heating(self.model, self.bath, tau, self.cfg)? / (tau * self.dm))
    }

    /// Roots of `ratio - 1` among the scan nodes, refined in `ln τ`.
    fn roots(&self, scan: &[f64], zcfg: &ZenoConfig) -> Result<Vec<f64>> {
        if self.mode == CoefficientMode::Markovian || scan.is_empty() {
            return Ok(Vec::new());
        }
        let mut taus = Vec::with_capacity(scan.len());
        let mut ys = Vec::with_capacity(scan.len());
        for &tau in scan {
            match self.node_ratio(tau) {
                Some(v) => {
                    taus.push(tau);
                    ys.push(v - 1.0);
                }
                None => return Err(self.failure.clone().unwrap_or_else(|| Error::InvalidGrid("scan point missing".into()))),
            }
        }
        // extend downward when the bottom of the scan is already anti-Zeno
        if let (Some(limit), Some(&y0)) = (zcfg.extend_below, ys.first()) {
            if y0 > 0.0 {
                let floor = limit / self.model.omega_c();
                let mut tau = taus[0];
                while tau > floor {
                    tau = (tau / 10.0).max(floor);
                    let y = self.ratio(tau)? - 1.0;
                    taus.insert(0, tau);
                    ys.insert(0, y);
                    if y < 0.0 {
                        break;
                    }
                }
            }
        }
        let f = |x: f64| Ok(self.ratio(x.exp())? - 1.0);
        let mut out = Vec::new();
        for b in roots::sign_changes(&ys) {
            if let Some(k) = b.exact {
                out.push(taus[k]);
                continue;
            }
            let (lo, hi) = (taus[b.lo], taus[b.hi]);
            if ys[b.lo].abs() < zcfg.root_tol {
                out.push(lo);
                continue;
            }
            if ys[b.hi].abs() < zcfg.root_tol {
                out.push(hi);
                continue;
            }
            let x = roots::bisect(f, lo.ln(), hi.ln(), ys[b.lo], zcfg.root_tol, zcfg.max_bisections)?;
            out.push(x.exp());
        }
        Ok(out)
    }
}

/// Every crossover time `τ*` (units `1/ω₀`) found by scanning `ratio - 1` on
/// `zcfg.scan_points` log-spaced points of `tau_range` and bisecting each
/// sign change.
pub fn crossover_times(
    model: &SpectralModel,
    bath: &ThermalBath,
    tau_range: (f64, f64),
    mode: CoefficientMode,
    zcfg: &ZenoConfig,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let (lo, hi) = tau_range;
    check_tau(lo)?;
    if !(hi > lo && hi.is_finite()) {
        return Err(Error::InvalidGrid(format!("τ range [{lo}, {hi}] is empty")));
    }
    let scan = log_space(lo, hi, zcfg.scan_points.max(2));
    let table = HeatingTable::build(model, bath, mode, cfg, &scan)?;
    table.roots(&scan, zcfg)
}

/// Scan range of [`ZenoConfig`] converted to times for a given model.
pub fn default_tau_range(model: &SpectralModel, zcfg: &ZenoConfig) -> (f64, f64) {
    (zcfg.scan_range.0 / model.omega_c(), zcfg.scan_range.1 / model.omega_c())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenoColumn {
    pub r: f64,
    /// `Some` per `tau_grid` entry, `None` where the value could not be computed.
    pub ratios: Vec<Option<f64>>,
    /// Crossovers in units of `ω_c τ`, ascending.
    pub roots: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenoMap {
    pub kind: ReservoirKind,
    pub g: f64,
    pub bath: ThermalBath,
    pub mode: CoefficientMode,
    pub r_grid: Vec<f64>,
    /// In units of `ω_c τ`.
    pub tau_grid: Vec<f64>,
    pub columns: Vec<ZenoColumn>,
    pub boundary_tol: f64,
}

impl ZenoMap {
    pub fn ratio(&self, i_r: usize, i_tau: usize) -> Option<f64> {
        self.columns[i_r].ratios[i_tau]
    }

    pub fn class(&self, i_r: usize, i_tau: usize) -> Option<ZenoClass> {
        self.ratio(i_r, i_tau).map(|v| ZenoClass::of(v, self.boundary_tol))
    }

    pub fn is_complete(&self) -> bool {
        self.columns.iter().all(|c| c.error.is_none())
    }

    pub fn points(&self) -> impl Iterator<Item = ZenoPoint> + '_ {
        self.columns.iter().zip(&self.r_grid).flat_map(move |(col, &r)| {
            col.ratios.iter().zip(&self.tau_grid).filter_map(move |(v, &wct)| {
                v.map(|ratio| ZenoPoint {
                    r,
                    tau: wct / r,
                    omega_c_tau: wct,
                    ratio,
                    class: ZenoClass::of(ratio, self.boundary_tol),
                })
            })
        })
    }
}

fn check_positive_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidGrid(format!("{name} grid holds non-positive value {v}")));
    }
    Ok(())
}

/// Ratio map over `r_grid × tau_grid` (`tau_grid` in `ω_c τ`). Each column
/// also lists its crossovers, scanned on `zcfg.scan_points` log-spaced
/// points spanning `tau_grid`. Failures are recorded per column.
#[allow(clippy::too_many_arguments)]
pub fn crossover_map(
    kind: ReservoirKind,
    g: f64,
    bath: &ThermalBath,
    r_grid: &[f64],
    tau_grid: &[f64],
    mode: CoefficientMode,
    zcfg: &ZenoConfig,
    cfg: &QuadratureConfig,
) -> Result<ZenoMap> {
    check_positive_grid("r", r_grid)?;
    check_positive_grid("ω_c τ", tau_grid)?;
    cfg.validate()?;
    let lo = tau_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tau_grid.iter().copied().fold(0.0, f64::max);
    let scan_wct = if hi > lo {
        log_space(lo, hi, zcfg.scan_points.max(2))
    } else {
        vec![lo]
    };

    let columns = r_grid
        .par_iter()
        .map(|&r| {
            let failed = |e: Error| ZenoColumn {
                r,
                ratios: vec![None; tau_grid.len()],
                roots: Vec::new(),
                error: Some(e.to_string()),
            };
            let model = match SpectralModel::from_kind(kind, g, r) {
                Ok(m) => m,
                Err(e) => return failed(e),
            };
            let wc = model.omega_c();
            let map_taus: Vec<f64> = tau_grid.iter().map(|&x| x / wc).collect();
            let scan_taus: Vec<f64> = scan_wct.iter().map(|&x| x / wc).collect();
            let all: Vec<f64> = map_taus.iter().chain(&scan_taus).copied().collect();
            let table = match HeatingTable::build(&model, bath, mode, cfg, &all) {
                Ok(t) => t,
                Err(e) => return failed(e),
            };
            let ratios = map_taus.iter().map(|&t| table.node_ratio(t)).collect();
            let (roots, error) = match table.roots(&scan_taus, zcfg) {
                Ok(rs) => (rs.into_iter().map(|t| t * wc).collect(), table.failure.as_ref().map(|e| e.to_string())),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            ZenoColumn { r, ratios, roots, error }
        })
        .collect();

    Ok(ZenoMap {
        kind,
        g,
        bath: *bath,
        mode,
        r_grid: r_grid.to_vec(),
        tau_grid: tau_grid.to_vec(),
        columns,
        boundary_tol: zcfg.boundary_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(kind: ReservoirKind, r: f64) -> SpectralModel {
        SpectralModel::from_kind(kind, 0.1, r).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(ZenoClass::of(0.5, 1e-3), ZenoClass::Qze);
        assert_eq!(ZenoClass::of(1.0005, 1e-3), ZenoClass::Boundary);
        assert_eq!(ZenoClass::of(1.2, 1e-3), ZenoClass::Aze);
    }

    #[test]
    fn markovian_mode_is_flat() {
        let m = model(ReservoirKind::Ohmic, 1.0);
        let bath = ThermalBath::default();
        let cfg = QuadratureConfig::default();
        for tau in [1e-3, 0.7, 30.0] {
            assert_eq!(zeno_ratio(&m, &bath, tau, CoefficientMode::Markovian, &cfg).unwrap(), 1.0);
            assert_eq!(
                effective_decay_rate(&m, &bath, tau, CoefficientMode::Markovian, &cfg).unwrap(),
                m.markovian_delta(&bath)
            );
        }
        let roots = crossover_times(&m, &bath, (0.05, 50.0), CoefficientMode::Markovian, &ZenoConfig::default(), &cfg).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn degenerate_without_coupling() {
        let m = SpectralModel::from_kind(ReservoirKind::Ohmic, 0.0, 1.0).unwrap();
        let r = zeno_ratio(&m, &ThermalBath::default(), 1.0, CoefficientMode::NonMarkovian, &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn short_intervals_suppress_decay() {
        let m = model(ReservoirKind::Ohmic, 1.0);
        let bath = ThermalBath::default();
        let rate = effective_decay_rate(&m, &bath, 1e-3, CoefficientMode::NonMarkovian, &QuadratureConfig::default()).unwrap();
        assert!(rate < 1e-2 * m.markovian_delta(&bath));
    }

    #[test]
    fn long_intervals_recover_markovian_rate() {
        let m = model(ReservoirKind::Ohmic, 1.0);
        let bath = ThermalBath::default();
        let rate = effective_decay_rate(&m, &bath, 50.0, CoefficientMode::NonMarkovian, &QuadratureConfig::default()).unwrap();
        assert!((rate / m.markovian_delta(&bath) - 1.0).abs() < 0.02);
    }

    #[test]
    fn off_resonant_jolt_gives_anti_zeno() {
        let m = model(ReservoirKind::Ohmic, 0.1);
        let r = zeno_ratio(&m, &ThermalBath::default(), 1.0 / 0.1, CoefficientMode::NonMarkovian, &QuadratureConfig::default()).unwrap();
        assert!(r > 1.0, "{r}");
    }

    #[test]
    fn map_of_one_markovian_cell() {
        let map = crossover_map(
            ReservoirKind::Ohmic,
            0.1,
            &ThermalBath::default(),
            &[1.0],
            &[1.0],
            CoefficientMode::Markovian,
            &ZenoConfig::default(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(map.ratio(0, 0), Some(1.0));
        assert_eq!(map.class(0, 0), Some(ZenoClass::Boundary));
        assert!(map.columns[0].roots.is_empty());
    }

    #[test]
    fn uncoupled_columns_are_marked_not_fatal() {
        let map = crossover_map(
            ReservoirKind::Ohmic,
            0.0,
            &ThermalBath::default(),
            &[0.5, 1.0],
            &[0.1, 1.0],
            CoefficientMode::NonMarkovian,
            &ZenoConfig::default(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(!map.is_complete());
        assert!(map.columns.iter().all(|c| c.ratios.iter().all(Option::is_none)));
    }

    #[test]
    fn rejects_bad_grids() {
        let bath = ThermalBath::default();
        let (z, q) = (ZenoConfig::default(), QuadratureConfig::default());
        let mode = CoefficientMode::Markovian;
        assert!(crossover_map(ReservoirKind::Ohmic, 0.1, &bath, &[], &[1.0], mode, &z, &q).is_err());
        assert!(crossover_map(ReservoirKind::Ohmic, 0.1, &bath, &[1.0], &[0.0], mode, &z, &q).is_err());
        let m = model(ReservoirKind::Ohmic, 1.0);
        assert!(crossover_times(&m, &bath, (1.0, 0.5), mode, &z, &q).is_err());
    }
}
