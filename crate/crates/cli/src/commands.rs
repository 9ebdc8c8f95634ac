use std::path::Path;

use qbm_core::decoherence::{self, CatState, WindowRule};
use qbm_core::kernels::{self, CoefficientMode};
use qbm_core::oracle::{certify, CertifyConfig};
use qbm_core::zeno::{self, ZenoConfig};
use qbm_core::{Error, SpectralModel};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{float, write_file, Table, TOOL};
use crate::{plot, CliError, Status};

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn model(cfg: &RunConfig, kind: qbm_core::ReservoirKind) -> Result<SpectralModel, CliError> {
    SpectralModel::from_kind(kind, cfg.g, cfg.r).map_err(|e| CliError::Usage(e.to_string()))
}

/// `coeffs.csv`: the coefficient trace of `reservoir` on `times`.
pub fn coeffs(cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    let bath = cfg.bath()?;
    let m = model(cfg, cfg.reservoir)?;
    let times = cfg.times.values();
    kernels::validate_time_grid(&times).map_err(|e| CliError::Usage(format!("times: {e}")))?;
    let tr = kernels::trace(&m, &bath, &times, cfg.mode, &cfg.quadrature()).map_err(numeric)?;
    let notes = [
        format!("delta_M = {}", float(m.markovian_delta(&bath))),
        format!("gamma_M = {}", float(m.markovian_gamma())),
    ];
    let mut table = Table::new(
        "coeffs",
        cfg,
        &notes,
        &["t", "omega_c_t", "delta", "gamma", "heating", "big_gamma"],
    );
    for i in 0..tr.len() {
        table.row(&[
            float(tr.times[i]),
            float(m.omega_c() * tr.times[i]),
            float(tr.delta[i]),
            float(tr.gamma[i]),
            float(tr.heating[i]),
            float(tr.big_gamma[i]),
        ]);
    }
    table.write(&out.join("coeffs.csv"))?;
    println!("coeffs: {} rows, delta_M = {}", tr.len(), float(m.markovian_delta(&bath)));
    Ok(Status::Clean)
}

/// Times of the fringe study. With `g = 0` the `Γ′t` axis is undefined and
/// the grid is read as `ω₀t` instead.
fn fringe_times(cfg: &RunConfig, models: &[SpectralModel], cat: &CatState) -> Result<Vec<f64>, CliError> {
    let reference = models[0];
    if let Some(grid) = &cfg.fringe_grid {
        let values = grid.values();
        let times = if cfg.g == 0.0 {
            values
        } else {
            values
                .iter()
                .map(|&x| decoherence::time_from_gamma_prime(&reference, x))
                .collect::<qbm_core::Result<_>>()
                .map_err(numeric)?
        };
        kernels::validate_time_grid(&times).map_err(|e| CliError::Usage(format!("fringe_grid: {e}")))?;
        return Ok(times);
    }
    let end = if cfg.g == 0.0 {
        1.0
    } else {
        let limit = decoherence::time_from_gamma_prime(&reference, cfg.window_gamma_prime).map_err(numeric)?;
        let rule = WindowRule {
            gamma_prime_limit: cfg.window_gamma_prime,
            ..WindowRule::default()
        };
        let regime = cfg.regime.resolve(cfg.r);
        match decoherence::decoherence_window(cat, models, &cfg.bath()?, regime, cfg.mode, &rule, &cfg.quadrature()) {
            Ok(t) => t,
            // the fringes outlive the cap
            Err(Error::DegenerateModel(_)) => limit,
            Err(e) => return Err(numeric(e)),
        }
    };
    Ok(qbm_core::numeric::lin_space(0.0, end, cfg.fringe_points))
}

/// `fringe.csv`, `fringe_ranking.csv` and `fringe.gp`.
pub fn fringe(cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    let bath = cfg.bath()?;
    let quad = cfg.quadrature();
    let cat = CatState::new(cfg.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let models = cfg
        .reservoirs
        .iter()
        .map(|&k| model(cfg, k))
        .collect::<Result<Vec<_>, _>>()?;
    let regime = cfg.regime.resolve(cfg.r);
    let times = fringe_times(cfg, &models, &cat)?;
    let cmp = decoherence::compare_reservoirs(&cat, &models, &bath, &times, regime, cfg.mode, &quad).map_err(numeric)?;
    let markovian = decoherence::fringe_trace(&cat, &models[0], &bath, &times, regime, CoefficientMode::Markovian, &quad)
        .map_err(numeric)?;

    let labels: Vec<String> = models.iter().map(|m| m.kind().label()).collect();
    let mut notes = vec![format!("regime = {regime:?}")];
    let mut warnings: Vec<String> = cmp.traces.iter().flat_map(|t| t.warnings.clone()).collect();
    warnings.dedup();
    for w in &warnings {
        eprintln!("warning: {w}");
        notes.push(format!("warning: {w}"));
    }
    let mut columns = vec!["Gamma_prime_t".to_string(), "t".to_string()];
    columns.extend(labels.iter().map(|l| format!("F_{l}")));
    columns.push(format!("F_markovian_{}", labels[0]));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("fringe", cfg, &notes, &column_refs);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![float(cmp.traces[0].gamma_prime_t[i]), float(t)];
        row.extend(cmp.traces.iter().map(|tr| float(tr.visibility[i])));
        row.push(float(markovian.visibility[i]));
        table.row(&row);
    }
    table.write(&out.join("fringe.csv"))?;

    let order: Vec<&str> = cmp.ranking.iter().map(|&i| labels[i].as_str()).collect();
    let ranking_line = format!("ranking (slowest decoherence first): {}", order.join(", "));
    let mut ranking = Table::new("fringe", cfg, &[ranking_line.clone()], &["rank", "reservoir", "area"]);
    for (rank, &i) in cmp.ranking.iter().enumerate() {
        ranking.row(&[(rank + 1).to_string(), labels[i].clone(), float(cmp.areas[i])]);
    }
    ranking.write(&out.join("fringe_ranking.csv"))?;

    let last_gpt = *cmp.traces[0].gamma_prime_t.last().unwrap_or(&0.0);
    let script = plot::fringe_script(&labels, &labels[0], columns.len(), 0.2 * last_gpt);
    write_file(&out.join("fringe.gp"), &script)?;
    println!("{ranking_line}");
    Ok(Status::Clean)
}

/// `zeno_map.csv`, `zeno_roots.csv` and `zeno_map.gp`. Cells that could
/// not be computed are written as `nan` with class `failed`.
pub fn zeno(cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    let bath = cfg.bath()?;
    let quad = cfg.quadrature();
    let zcfg = ZenoConfig {
        scan_points: cfg.zeno_scan_points.max(2),
        ..ZenoConfig::default()
    };
    let r_grid = cfg.zeno_r.values();
    let tau_grid = cfg.zeno_tau.values();
    let mut map_rows = Table::new(
        "zeno",
        cfg,
        &[format!("boundary_tol = {}", float(zcfg.boundary_tol))],
        &["reservoir", "r", "omega_c_tau", "ratio", "class"],
    );
    let mut root_rows = Table::new(
        "zeno",
        cfg,
        &["omega_c_tau_star lists every crossover, separated by ';'".into()],
        &["reservoir", "r", "count", "omega_c_tau_star"],
    );
    let mut labels = Vec::new();
    let mut partial = false;
    for &kind in &cfg.reservoirs {
        let map = zeno::crossover_map(kind, cfg.g, &bath, &r_grid, &tau_grid, cfg.mode, &zcfg, &quad)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let label = kind.label();
        for (i_r, col) in map.columns.iter().enumerate() {
            if let Some(e) = &col.error {
                partial = true;
                eprintln!("warning: {label} r = {}: {e}", col.r);
            }
            for (i_tau, &wct) in map.tau_grid.iter().enumerate() {
                let (ratio, class) = match (map.ratio(i_r, i_tau), map.class(i_r, i_tau)) {
                    (Some(v), Some(c)) => (float(v), c.label().to_string()),
                    _ => ("nan".into(), "failed".into()),
                };
                map_rows.row(&[label.clone(), float(col.r), float(wct), ratio, class]);
            }
            let roots: Vec<String> = col.roots.iter().map(|&x| float(x)).collect();
            root_rows.row(&[label.clone(), float(col.r), roots.len().to_string(), roots.join(";")]);
        }
        labels.push(label);
    }
    map_rows.write(&out.join("zeno_map.csv"))?;
    root_rows.write(&out.join("zeno_roots.csv"))?;
    write_file(&out.join("zeno_map.gp"), &plot::zeno_script(&labels))?;
    println!(
        "zeno: {} reservoir(s), {}×{} cells each{}",
        labels.len(),
        r_grid.len(),
        tau_grid.len(),
        if partial { ", some cells failed" } else { "" }
    );
    Ok(if partial { Status::Partial } else { Status::Clean })
}

/// `certify.json`. The only time-dependent entry is `generated_at`.
pub fn certify_cmd(cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    let ccfg = CertifyConfig {
        fringe_coupling: cfg.g,
        zeno_coupling: cfg.cert_zeno_g,
        bath: cfg.bath()?,
        alpha: cfg.alpha,
        cat_dim: cfg.cert_dim,
        samples: cfg.cert_samples,
        check_truncation: cfg.cert_truncation_check,
        quad: cfg.quadrature(),
        ..CertifyConfig::default()
    };
    let report = certify(&ccfg);
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let config: serde_json::Map<String, serde_json::Value> =
        cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
    let doc = json!({
        "tool": TOOL,
        "generated_at": generated_at,
        "config": config,
        "passed": report.passed,
        "suites": report.suites,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    write_file(&out.join("certify.json"), &text)?;
    for s in &report.suites {
        let verdict = match (s.passed, s.informational) {
            (true, _) => "pass",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        println!(
            "{verdict:4} {:20} deviation {:.4e} (tolerance {:.2e}), dim {}",
            s.name, s.max_deviation, s.tolerance, s.dim
        );
    }
    Ok(if report.passed {
        Status::Clean
    } else {
        Status::CertificationFailed
    })
}
