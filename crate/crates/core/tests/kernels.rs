use qbm_core::kernels::{self, CoefficientMode, QuadratureConfig};
use qbm_core::{ReservoirKind, SpectralModel, ThermalBath};

/// Composite Simpson in `u = sqrt(ω)` of the closed-form running integrals
/// `∫ w(ω) [(1 - cos((ω-1)t))/(ω-1)² ± (1 - cos((ω+1)t))/(ω+1)²] dω`.
/// Independent of the library: no adaptive driver, no time integration.
fn fejer(s: f64, g: f64, wc: f64, kt: Option<f64>, t: f64, sign: f64) -> f64 {
    let fej = |x: f64| {
        let h = 0.5 * x * t;
        if h.abs() < 1e-8 {
            0.5 * t * t
        } else {
            let sn = h.sin();
            2.0 * sn * sn / (x * x)
        }
    };
    let f = |u: f64| {
        if u == 0.0 {
            return match kt {
                Some(kt) if s == 0.5 => 2.0 * g * g * wc.sqrt() * kt * (fej(-1.0) + sign * fej(1.0)),
                _ => 0.0,
            };
        }
        let w = u * u;
        let j = g * g * wc.powf(1.0 - s) * w.powf(s) * (-w / wc).exp();
        let weight = match kt {
            Some(kt) => j * kt / w,
            None => j,
        };
        weight * (fej(w - 1.0) + sign * fej(w + 1.0)) * 2.0 * u
    };
    let umax = (60.0 * wc).sqrt();
    let n = 400_000;
    let h = umax / n as f64;
    let mut acc = f(0.0) + f(umax);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn model(s: f64, g: f64, wc: f64) -> SpectralModel {
    SpectralModel::new(s, g, wc).unwrap()
}

// (s, ω_c, t, Δ, γ, N, Γ) from an independent fixed-node Gauss-Legendre evaluation
const GOLDEN: [(f64, f64, f64, f64, f64, f64, f64); 5] = [
    (1.0, 10.0, 1.0, 2.859_619_368_719_682_3, 0.013_464_957_254_679_704, 2.443_801_175_758_701, 0.019_977_843_350_085_372),
    (0.5, 1.0, 2.0, 2.968_125_752_278_443_7, 0.005_672_309_744_610_847, 4.611_647_137_630_291, 0.009_488_189_604_589_409),
    (3.0, 2.0, 5.0, 0.478_080_466_466_780_15, 0.002_379_270_891_788_883_4, 2.700_699_571_865_055_5, 0.034_016_331_815_435_25),
    (1.0, 0.1, 3.0, 0.037_455_144_759_574_906, 5.780_782_649_524_405e-5, 0.400_447_269_135_35, 1.350_705_427_613_549_5e-4),
    (0.5, 0.1, 7.0, 0.193_016_945_138_867_3, -4.014_174_431_844_570_5e-5, 0.119_700_017_021_845_27, -6.781_690_676_415_586e-7),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn golden_coefficients() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    for (s, wc, t, d, g, n, bg) in GOLDEN {
        let m = model(s, 0.1, wc);
        let got_d = kernels::compute_delta(&m, &bath, t, &cfg).unwrap();
        let got_g = kernels::compute_gamma(&m, t, &cfg).unwrap();
        let got_n = kernels::compute_heating(&m, &bath, t, &cfg).unwrap();
        let got_bg = kernels::compute_big_gamma(&m, t, &cfg).unwrap();
        assert!(rel(got_d, d) < 1e-7, "Δ s={s} wc={wc}: {got_d} vs {d}");
        assert!(rel(got_g, g) < 1e-6, "γ s={s} wc={wc}: {got_g} vs {g}");
        assert!(rel(got_n, n) < 1e-7, "N s={s} wc={wc}: {got_n} vs {n}");
        assert!(rel(got_bg, bg) < 1e-5, "Γ s={s} wc={wc}: {got_bg} vs {bg}");
    }
}

#[test]
fn damping_matches_trapezoid_golden() {
    // 2 ∫_0^1 γ on a 10⁴-interval trapezoid grid, Ohmic g=0.1, r=10
    let golden = 0.019_977_843_352_832_654;
    let got = kernels::compute_big_gamma(&model(1.0, 0.1, 10.0), 1.0, &QuadratureConfig::default()).unwrap();
    assert!(rel(got, golden) < 1e-7, "{got}");
}

#[test]
fn running_integrals_match_closed_form_oracle() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    for (s, wc, t) in [(1.0, 10.0, 2.5), (0.5, 0.3, 4.0), (3.0, 1.2, 6.0), (1.0, 0.1, 10.0)] {
        let m = model(s, 0.1, wc);
        let n = kernels::compute_heating(&m, &bath, t, &cfg).unwrap();
        let bg = kernels::compute_big_gamma(&m, t, &cfg).unwrap();
        let n_ref = fejer(s, 0.1, wc, Some(100.0), t, 1.0);
        let bg_ref = fejer(s, 0.1, wc, None, t, -1.0);
        assert!(rel(n, n_ref) < 1e-6, "N s={s} wc={wc} t={t}: {n} vs {n_ref}");
        assert!((bg - bg_ref).abs() < 1e-6 * bg_ref.abs().max(1e-6), "Γ s={s} wc={wc}: {bg} vs {bg_ref}");
    }
}

#[test]
fn running_integrals_match_time_quadrature_of_rates() {
    // the defining t'-integrals of Δ and 2γ by composite Simpson
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    for (s, wc, t) in [(1.0, 10.0, 1.0), (1.0, 0.1, 3.0), (3.0, 2.0, 2.0), (0.5, 0.5, 2.0)] {
        let m = model(s, 0.1, wc);
        let n = 2000;
        let h = t / n as f64;
        let (mut n_ref, mut bg_ref) = (0.0, 0.0);
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let ti = i as f64 * h;
            n_ref += w * kernels::compute_delta(&m, &bath, ti, &cfg).unwrap();
            bg_ref += w * 2.0 * kernels::compute_gamma(&m, ti, &cfg).unwrap();
        }
        n_ref *= h / 3.0;
        bg_ref *= h / 3.0;
        let got_n = kernels::compute_heating(&m, &bath, t, &cfg).unwrap();
        let got_bg = kernels::compute_big_gamma(&m, t, &cfg).unwrap();
        assert!(rel(got_n, n_ref) < 1e-7, "N s={s} wc={wc}: {got_n} vs {n_ref}");
        assert!(rel(got_bg, bg_ref) < 1e-6, "Γ s={s} wc={wc}: {got_bg} vs {bg_ref}");
    }
}

#[test]
fn trace_cumulants_agree_with_direct_calls_and_differentiate_back() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    let m = model(1.0, 0.1, 2.0);
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.02).collect();
    let tr = kernels::trace(&m, &bath, &grid, CoefficientMode::NonMarkovian, &cfg).unwrap();
    assert_eq!(tr.delta[0], 0.0);
    assert_eq!(tr.big_gamma[0], 0.0);
    let n_end = kernels::compute_heating(&m, &bath, 4.0, &cfg).unwrap();
    assert!(rel(tr.heating[200], n_end) < 1e-9);
    // five-point derivatives of the cumulants give back the rates
    let d5 = |y: &[f64], i: usize| (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * 0.02);
    for i in 10..198 {
        let dn = d5(&tr.heating, i);
        let dg = d5(&tr.big_gamma, i);
        assert!(rel(dn, tr.delta[i]) < 1e-3, "t={} {dn} vs {}", grid[i], tr.delta[i]);
        assert!(rel(dg, 2.0 * tr.gamma[i]) < 1e-3, "t={} {dg} vs {}", grid[i], 2.0 * tr.gamma[i]);
    }
}

#[test]
fn rates_are_continuous_on_a_fine_grid() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    let m = model(0.5, 0.1, 0.1);
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    let (d, _) = kernels::sample_rates(&m, &bath, &grid, &cfg).unwrap();
    let scale = d.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for i in 1..400 {
        let mid = 0.5 * (d[i - 1] + d[i + 1]);
        assert!((d[i] - mid).abs() < 0.05 * scale, "jump at t={}", grid[i]);
    }
}

#[test]
fn off_resonant_jolt_overshoots_markovian_value() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    let m = SpectralModel::from_kind(ReservoirKind::Ohmic, 0.1, 0.1).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
    let tr = kernels::trace(&m, &bath, &grid, CoefficientMode::NonMarkovian, &cfg).unwrap();
    let peak = tr.delta.iter().cloned().fold(f64::MIN, f64::max);
    assert!(peak > m.markovian_delta(&bath), "{peak}");
}

#[test]
fn long_time_limits_for_resonant_and_on_resonance_cutoffs() {
    let cfg = QuadratureConfig::default();
    let bath = ThermalBath::default();
    for kind in ReservoirKind::NAMED {
        for r in [1.0, 10.0] {
            let m = SpectralModel::from_kind(kind, 0.1, r).unwrap();
            let t = 50.0 / r.min(1.0);
            let d = kernels::compute_delta(&m, &bath, t, &cfg).unwrap();
            let g = kernels::compute_gamma(&m, t, &cfg).unwrap();
            // the sub-Ohmic tail converges too slowly for this window
            if kind != ReservoirKind::SubOhmic {
                assert!(rel(d, m.markovian_delta(&bath)) < 0.01, "{kind:?} r={r}: Δ {d}");
            }
            assert!(rel(g, m.markovian_gamma()) < 0.01, "{kind:?} r={r}: γ {g}");
        }
    }
    let unit = SpectralModel::from_kind(ReservoirKind::Ohmic, 1.0, 1.0).unwrap();
    let g = kernels::compute_gamma(&unit, 50.0, &cfg).unwrap();
    assert!(rel(g, 0.5 * std::f64::consts::PI * (-1.0f64).exp()) < 0.01);
}
