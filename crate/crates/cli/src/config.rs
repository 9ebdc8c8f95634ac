//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` (and anything after a `#` on a line) are ignored.
//! Unknown and repeated keys are errors. Grids are written as
//! `lin(a, b, n)`, `log(a, b, n)` or a comma-separated list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use qbm_core::decoherence::Regime;
use qbm_core::kernels::{CoefficientMode, QuadratureConfig};
use qbm_core::numeric::{lin_space, log_space};
use qbm_core::{ReservoirKind, TemperatureMode, ThermalBath};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Lin { lo: f64, hi: f64, n: usize },
    Log { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Lin { lo, hi, n } => lin_space(*lo, *hi, *n),
            Grid::Log { lo, hi, n } => log_space(*lo, *hi, *n),
            Grid::List(v) => v.clone(),
        }
    }

    fn parse(key: &str, s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        let call = |name: &str| -> Option<&str> { s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')') };
        let args = |inner: &str| -> Result<(f64, f64, usize), CliError> {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(CliError::config(key, s, "expected three arguments (lo, hi, n)"));
            }
            let lo = parse_f64(key, parts[0])?;
            let hi = parse_f64(key, parts[1])?;
            let n = parts[2]
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::config(key, s, "point count must be a positive integer"))?;
            if hi < lo || (n > 1 && hi == lo) {
                return Err(CliError::config(key, s, "grid bounds must be increasing"));
            }
            Ok((lo, hi, n))
        };
        if let Some(inner) = call("lin") {
            let (lo, hi, n) = args(inner)?;
            Ok(Grid::Lin { lo, hi, n })
        } else if let Some(inner) = call("log") {
            let (lo, hi, n) = args(inner)?;
            if lo <= 0.0 {
                return Err(CliError::config(key, s, "log grid needs a positive lower bound"));
            }
            Ok(Grid::Log { lo, hi, n })
        } else {
            let v = s.split(',').map(|p| parse_f64(key, p.trim())).collect::<Result<Vec<_>, _>>()?;
            Ok(Grid::List(v))
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Lin { lo, hi, n } => write!(f, "lin({lo}, {hi}, {n})"),
            Grid::Log { lo, hi, n } => write!(f, "log({lo}, {hi}, {n})"),
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeChoice {
    /// Off-resonant below `r = 1`, resonant from there on.
    Auto,
    Fixed(Regime),
}

impl RegimeChoice {
    pub fn resolve(self, r: f64) -> Regime {
        match self {
            RegimeChoice::Fixed(regime) => regime,
            RegimeChoice::Auto if r < 1.0 => Regime::OffResonant,
            RegimeChoice::Auto => Regime::Resonant,
        }
    }

    pub fn parse(key: &str, s: &str) -> Result<Self, CliError> {
        match s {
            "auto" => Ok(RegimeChoice::Auto),
            "off" => Ok(RegimeChoice::Fixed(Regime::OffResonant)),
            "res" => Ok(RegimeChoice::Fixed(Regime::Resonant)),
            _ => Err(CliError::config(key, s, "expected auto, off or res")),
        }
    }
}

impl fmt::Display for RegimeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeChoice::Auto => "auto",
            RegimeChoice::Fixed(Regime::OffResonant) => "off",
            RegimeChoice::Fixed(Regime::Resonant) => "res",
        })
    }
}

pub fn parse_mode(key: &str, s: &str) -> Result<CoefficientMode, CliError> {
    match s {
        "nonmarkovian" => Ok(CoefficientMode::NonMarkovian),
        "markovian" => Ok(CoefficientMode::Markovian),
        _ => Err(CliError::config(key, s, "expected nonmarkovian or markovian")),
    }
}

pub fn mode_name(mode: CoefficientMode) -> &'static str {
    match mode {
        CoefficientMode::NonMarkovian => "nonmarkovian",
        CoefficientMode::Markovian => "markovian",
    }
}

fn parse_reservoir(key: &str, s: &str) -> Result<ReservoirKind, CliError> {
    match s {
        "ohmic" => Ok(ReservoirKind::Ohmic),
        "subohmic" => Ok(ReservoirKind::SubOhmic),
        "superohmic" => Ok(ReservoirKind::SuperOhmic),
        other => match other.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(ReservoirKind::from_exponent(v)),
            _ => Err(CliError::config(key, s, "expected ohmic, subohmic, superohmic or a positive exponent")),
        },
    }
}

fn reservoir_name(kind: ReservoirKind) -> String {
    match kind {
        ReservoirKind::Custom(s) => s.to_string(),
        other => other.label(),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(key, s, "expected a finite number"))
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.parse::<usize>().map_err(|_| CliError::config(key, s, "expected a non-negative integer"))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::config(key, s, "expected true or false")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Reservoir for `coeffs`.
    pub reservoir: ReservoirKind,
    /// Reservoirs compared by `fringe` and mapped by `zeno`.
    pub reservoirs: Vec<ReservoirKind>,
    pub g: f64,
    pub kt: f64,
    pub temperature: TemperatureMode,
    pub r: f64,
    pub mode: CoefficientMode,
    pub regime: RegimeChoice,
    pub alpha: f64,
    /// Time grid of `coeffs`, in units of `1/ω₀`.
    pub times: Grid,
    /// `Γ′t` grid of `fringe`; `None` uses the decoherence window.
    pub fringe_grid: Option<Grid>,
    pub fringe_points: usize,
    /// Largest `Γ′t` the decoherence window may reach. When the fringes
    /// outlive it the window ends there.
    pub window_gamma_prime: f64,
    pub zeno_r: Grid,
    /// In units of `ω_c τ`.
    pub zeno_tau: Grid,
    pub zeno_scan_points: usize,
    pub cert_zeno_g: f64,
    pub cert_dim: Option<usize>,
    pub cert_samples: usize,
    pub cert_truncation_check: bool,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirKind::Ohmic,
            reservoirs: vec![ReservoirKind::Ohmic, ReservoirKind::SubOhmic, ReservoirKind::SuperOhmic],
            g: 0.1,
            kt: 100.0,
            temperature: TemperatureMode::HighT,
            r: 10.0,
            mode: CoefficientMode::NonMarkovian,
            regime: RegimeChoice::Auto,
            alpha: 1.0,
            times: Grid::Lin { lo: 0.0, hi: 50.0, n: 501 },
            fringe_grid: None,
            fringe_points: 201,
            window_gamma_prime: 5.0,
            zeno_r: Grid::Lin { lo: 0.1, hi: 3.0, n: 60 },
            zeno_tau: Grid::Log { lo: 0.05, hi: 10.0, n: 120 },
            zeno_scan_points: 400,
            cert_zeno_g: 0.05,
            cert_dim: None,
            cert_samples: 51,
            cert_truncation_check: true,
            quad_rel_tol: 1e-8,
            quad_abs_tol: 1e-12,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value, got `{line}`", i + 1)))?;
            let key = key.trim();
            if seen.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("line {}: key `{key}` given twice", i + 1)));
            }
        }
        let mut cfg = Self::default();
        for (key, value) in &seen {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "reservoir" => self.reservoir = parse_reservoir(key, v)?,
            "reservoirs" => {
                self.reservoirs = v.split(',').map(|p| parse_reservoir(key, p.trim())).collect::<Result<_, _>>()?
            }
            "g" => self.g = parse_f64(key, v)?,
            "kT" => self.kt = parse_f64(key, v)?,
            "temperature" => {
                self.temperature = match v {
                    "high" => TemperatureMode::HighT,
                    "exact" => TemperatureMode::Exact,
                    _ => return Err(CliError::config(key, v, "expected high or exact")),
                }
            }
            "r" => self.r = parse_f64(key, v)?,
            "mode" => self.mode = parse_mode(key, v)?,
            "regime" => self.regime = RegimeChoice::parse(key, v)?,
            "alpha" => self.alpha = parse_f64(key, v)?,
            "times" => self.times = Grid::parse(key, v)?,
            "fringe_grid" => self.fringe_grid = if v == "window" { None } else { Some(Grid::parse(key, v)?) },
            "fringe_points" => self.fringe_points = parse_usize(key, v)?,
            "window_gamma_prime" => self.window_gamma_prime = parse_f64(key, v)?,
            "zeno_r" => self.zeno_r = Grid::parse(key, v)?,
            "zeno_tau" => self.zeno_tau = Grid::parse(key, v)?,
            "zeno_scan_points" => self.zeno_scan_points = parse_usize(key, v)?,
            "cert_zeno_g" => self.cert_zeno_g = parse_f64(key, v)?,
            "cert_dim" => self.cert_dim = if v == "auto" { None } else { Some(parse_usize(key, v)?) },
            "cert_samples" => self.cert_samples = parse_usize(key, v)?,
            "cert_truncation_check" => self.cert_truncation_check = parse_bool(key, v)?,
            "quad_rel_tol" => self.quad_rel_tol = parse_f64(key, v)?,
            "quad_abs_tol" => self.quad_abs_tol = parse_f64(key, v)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(CliError::config(key, &v.to_string(), "must be positive"))
            }
        };
        if self.g < 0.0 {
            return Err(CliError::config("g", &self.g.to_string(), "must be non-negative"));
        }
        positive("kT", self.kt)?;
        positive("r", self.r)?;
        positive("alpha", self.alpha)?;
        positive("window_gamma_prime", self.window_gamma_prime)?;
        if self.reservoirs.is_empty() {
            return Err(CliError::config("reservoirs", "", "at least one reservoir is required"));
        }
        if self.fringe_points < 2 {
            return Err(CliError::config("fringe_points", &self.fringe_points.to_string(), "need at least 2"));
        }
        if self.cert_samples < 2 {
            return Err(CliError::config("cert_samples", &self.cert_samples.to_string(), "need at least 2"));
        }
        if let Some(d) = self.cert_dim {
            if !(8..=120).contains(&d) {
                return Err(CliError::config("cert_dim", &d.to_string(), "desk-scale runs need 8 <= dim <= 120"));
            }
        }
        Ok(())
    }

    pub fn bath(&self) -> Result<ThermalBath, CliError> {
        ThermalBath::new(self.kt, self.temperature).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.quad_rel_tol,
            abs_tol: self.quad_abs_tol,
            ..QuadratureConfig::default()
        }
    }

    /// Every key with its effective value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let reservoirs: Vec<String> = self.reservoirs.iter().map(|&k| reservoir_name(k)).collect();
        vec![
            ("reservoir", reservoir_name(self.reservoir)),
            ("reservoirs", reservoirs.join(", ")),
            ("g", self.g.to_string()),
            ("kT", self.kt.to_string()),
            (
                "temperature",
                match self.temperature {
                    TemperatureMode::HighT => "high",
                    TemperatureMode::Exact => "exact",
                }
                .into(),
            ),
            ("r", self.r.to_string()),
            ("mode", mode_name(self.mode).into()),
            ("regime", self.regime.to_string()),
            ("alpha", self.alpha.to_string()),
            ("times", self.times.to_string()),
            ("fringe_grid", self.fringe_grid.as_ref().map_or("window".into(), Grid::to_string)),
            ("fringe_points", self.fringe_points.to_string()),
            ("window_gamma_prime", self.window_gamma_prime.to_string()),
            ("zeno_r", self.zeno_r.to_string()),
            ("zeno_tau", self.zeno_tau.to_string()),
            ("zeno_scan_points", self.zeno_scan_points.to_string()),
            ("cert_zeno_g", self.cert_zeno_g.to_string()),
            ("cert_dim", self.cert_dim.map_or("auto".into(), |d| d.to_string())),
            ("cert_samples", self.cert_samples.to_string()),
            ("cert_truncation_check", self.cert_truncation_check.to_string()),
            ("quad_rel_tol", self.quad_rel_tol.to_string()),
            ("quad_abs_tol", self.quad_abs_tol.to_string()),
        ]
    }

    /// The configuration in its own file format.
    pub fn render(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
