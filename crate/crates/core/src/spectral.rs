//! Ohmic-family reservoir spectra.
//!
//! Units: ħ = 1 and the system frequency ω₀ sets the scale, so frequencies
//! are in units of ω₀ and times in units of 1/ω₀. The spectral density is
//!
//! ```text
//! J(ω) = g² ω_c^{1-s} ω^s e^{-ω/ω_c}
//! ```
//!
//! and the spectral distribution weights it thermally,
//! `I(ω) = J(ω) [N(ω) + 1/2]` with `N(ω) = 1/(e^{ω/kT} - 1)`, or
//! `I(ω) = J(ω) kT/ω` in the high-temperature form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named members of the family; `Custom` carries an arbitrary exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReservoirKind {
    Ohmic,
    SubOhmic,
    SuperOhmic,
    Custom(f64),
}

impl ReservoirKind {
    pub const NAMED: [ReservoirKind; 3] = [Self::Ohmic, Self::SubOhmic, Self::SuperOhmic];

    pub fn exponent(self) -> f64 {
        match self {
            Self::Ohmic => 1.0,
            Self::SubOhmic => 0.5,
            Self::SuperOhmic => 3.0,
            Self::Custom(s) => s,
        }
    }

    pub fn from_exponent(s: f64) -> Self {
        if s == 1.0 {
            Self::Ohmic
        } else if s == 0.5 {
            Self::SubOhmic
        } else if s == 3.0 {
            Self::SuperOhmic
        } else {
            Self::Custom(s)
        }
    }

    /// Lower-case identifier used in file columns and config files.
    pub fn label(self) -> String {
        match self {
            Self::Ohmic => "ohmic".into(),
            Self::SubOhmic => "subohmic".into(),
            Self::SuperOhmic => "superohmic".into(),
            Self::Custom(s) => format!("custom_s{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemperatureMode {
    /// `N(ω) + 1/2` with the Bose–Einstein occupation.
    Exact,
    /// `N(ω) + 1/2` replaced by `kT/ω`.
    HighT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBath {
    kt: f64,
    mode: TemperatureMode,
}

impl Default for ThermalBath {
    fn default() -> Self {
        Self {
            kt: 100.0,
            mode: TemperatureMode::HighT,
        }
    }
}

impl ThermalBath {
    pub fn new(kt: f64, mode: TemperatureMode) -> Result<Self> {
        if !(kt > 0.0 && kt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kT",
                value: kt,
                reason: "thermal energy must be positive and finite",
            });
        }
        Ok(Self { kt, mode })
    }

    pub fn high_t(kt: f64) -> Result<Self> {
        Self::new(kt, TemperatureMode::HighT)
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn mode(&self) -> TemperatureMode {
        self.mode
    }

    /// `N(ω) + 1/2` (or `kT/ω`) for `ω > 0`.
    #[inline]
    pub(crate) fn weight(&self, omega: f64) -> f64 {
        match self.mode {
            TemperatureMode::HighT => self.kt / omega,
            // N + 1/2 = coth(ω / 2kT) / 2
            TemperatureMode::Exact => 0.5 / (0.5 * omega / self.kt).tanh(),
        }
    }
}

/// Reservoir spectral density `J(ω) = g² ω_c^{1-s} ω^s e^{-ω/ω_c}` coupled to
/// an oscillator of frequency `omega_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    s: f64,
    g: f64,
    omega_c: f64,
    omega_0: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

#[inline]
fn power(omega: f64, s: f64) -> f64 {
    if s == 1.0 {
        omega
    } else if s == 0.5 {
        omega.sqrt()
    } else if s == 3.0 {
        omega * omega * omega
    } else if s == 2.0 {
        omega * omega
    } else {
        omega.powf(s)
    }
}

impl SpectralModel {
    /// Model in internal units (`omega_0 = 1`).
    ///
    /// `g = 0` is accepted and describes an uncoupled oscillator.
    pub fn new(s: f64, g: f64, omega_c: f64) -> Result<Self> {
        Self::with_system_frequency(s, g, omega_c, 1.0)
    }

    pub fn with_system_frequency(s: f64, g: f64, omega_c: f64, omega_0: f64) -> Result<Self> {
        positive("s", s)?;
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                reason: "coupling must be non-negative and finite",
            });
        }
        positive("omega_c", omega_c)?;
        positive("omega_0", omega_0)?;
        Ok(Self { s, g, omega_c, omega_0 })
    }

    /// Model with cutoff `ω_c = r ω₀` (ω₀ = 1).
    pub fn from_kind(kind: ReservoirKind, g: f64, r: f64) -> Result<Self> {
        positive("r", r)?;
        Self::new(kind.exponent(), g, r)
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> ReservoirKind {
        ReservoirKind::from_exponent(self.s)
    }

    pub fn coupling(&self) -> f64 {
        self.g
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    /// Resonance parameter `r = ω_c / ω₀`.
    pub fn resonance(&self) -> f64 {
        self.omega_c / self.omega_0
    }

    /// True when `I(ω)` diverges at the origin (`s < 1`).
    pub fn is_origin_singular(&self) -> bool {
        self.s < 1.0
    }

    /// `J(ω)`.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain {
                what: "frequency",
                value: omega,
            });
        }
        Ok(self.density_unchecked(omega))
    }

    /// `I(ω)`. At `ω = 0` the analytic limit is returned when it is finite
    /// (`0` for `s > 1`, `g² kT` for `s = 1`); for `s < 1` the distribution
    /// diverges and [`Error::IntegrableSingular`] is returned instead.
    pub fn spectral_distribution(&self, bath: &ThermalBath, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain {
                what: "frequency",
                value: omega,
            });
        }
        if omega == 0.0 {
            return if self.g == 0.0 || self.s > 1.0 {
                Ok(0.0)
            } else if self.s == 1.0 {
                Ok(self.g * self.g * bath.kt())
            } else {
                Err(Error::IntegrableSingular { omega })
            };
        }
        Ok(self.distribution_unchecked(bath, omega))
    }

    #[inline]
    pub(crate) fn density_unchecked(&self, omega: f64) -> f64 {
        self.g * self.g * power(self.omega_c, 1.0 - self.s) * power(omega, self.s) * (-omega / self.omega_c).exp()
    }

    #[inline]
    pub(crate) fn distribution_unchecked(&self, bath: &ThermalBath, omega: f64) -> f64 {
        self.density_unchecked(omega) * bath.weight(omega)
    }

    /// Long-time diffusion coefficient `Δ_M = π I(ω₀)`.
    pub fn markovian_delta(&self, bath: &ThermalBath) -> f64 {
        PI * self.distribution_unchecked(bath, self.omega_0)
    }

    /// Long-time dissipation coefficient `γ_M = (π/2) J(ω₀)`.
    pub fn markovian_gamma(&self) -> f64 {
        0.5 * PI * self.density_unchecked(self.omega_0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn high_t(kt: f64) -> ThermalBath {
        ThermalBath::high_t(kt).unwrap()
    }

    #[test]
    fn density_examples() {
        let ohmic = SpectralModel::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(ohmic.spectral_density(0.0).unwrap(), 0.0);
        assert_relative_eq!(ohmic.spectral_density(1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        let sup = SpectralModel::new(3.0, 0.1, 2.0).unwrap();
        assert_relative_eq!(sup.spectral_density(2.0).unwrap(), 0.02 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn negative_frequency_is_a_domain_error() {
        let m = SpectralModel::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(m.spectral_density(-1e-3), Err(Error::Domain { .. })));
        assert!(matches!(
            m.spectral_distribution(&ThermalBath::default(), -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn distribution_examples() {
        let m = SpectralModel::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            m.spectral_distribution(&high_t(100.0), 1.0).unwrap(),
            100.0 * (-1.0f64).exp(),
            max_relative = 1e-14
        );
        let sub = SpectralModel::new(0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            sub.spectral_distribution(&high_t(1.0), 0.01).unwrap(),
            10.0 * (-0.01f64).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn exact_mode_approaches_high_t() {
        let m = SpectralModel::new(3.0, 0.3, 2.0).unwrap();
        for kt in [1e3, 1e5, 1e7] {
            let exact = ThermalBath::new(kt, TemperatureMode::Exact).unwrap();
            let ratio = m.spectral_distribution(&exact, 1.5).unwrap() / m.spectral_distribution(&high_t(kt), 1.5).unwrap();
            assert!((ratio - 1.0).abs() < 1.0 / kt, "kT={kt}: {ratio}");
        }
    }

    #[test]
    fn origin_limits() {
        let bath = high_t(100.0);
        let ohmic = SpectralModel::new(1.0, 0.1, 1.0).unwrap();
        assert_relative_eq!(ohmic.spectral_distribution(&bath, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        let sup = SpectralModel::new(3.0, 0.1, 1.0).unwrap();
        assert_eq!(sup.spectral_distribution(&bath, 0.0).unwrap(), 0.0);
        let sub = SpectralModel::new(0.5, 0.1, 1.0).unwrap();
        assert!(matches!(
            sub.spectral_distribution(&bath, 0.0),
            Err(Error::IntegrableSingular { .. })
        ));
    }

    #[test]
    fn markovian_rates() {
        let bath = high_t(100.0);
        let m = SpectralModel::from_kind(ReservoirKind::Ohmic, 0.1, 10.0).unwrap();
        assert_relative_eq!(m.markovian_delta(&bath), PI * (-0.1f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.markovian_delta(&bath), 2.842_64, max_relative = 5e-6);

        let zero = SpectralModel::from_kind(ReservoirKind::SubOhmic, 0.0, 3.0).unwrap();
        assert_eq!(zero.markovian_delta(&bath), 0.0);
        assert_eq!(zero.markovian_gamma(), 0.0);

        let o1 = SpectralModel::from_kind(ReservoirKind::Ohmic, 1.0, 1.0).unwrap();
        assert_relative_eq!(o1.markovian_gamma(), 0.5 * PI * (-1.0f64).exp(), max_relative = 1e-15);

        let sup = SpectralModel::from_kind(ReservoirKind::SuperOhmic, 0.1, 10.0).unwrap();
        assert_relative_eq!(
            sup.markovian_gamma(),
            0.5 * PI * 0.01 * 1e-2 * (-0.1f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn families_coincide_at_resonance_one() {
        let bath = high_t(100.0);
        let ohm = SpectralModel::from_kind(ReservoirKind::Ohmic, 0.2, 1.0).unwrap();
        for kind in [ReservoirKind::SubOhmic, ReservoirKind::SuperOhmic] {
            let m = SpectralModel::from_kind(kind, 0.2, 1.0).unwrap();
            assert_relative_eq!(m.markovian_delta(&bath), ohm.markovian_delta(&bath), max_relative = 1e-14);
            assert_relative_eq!(
                m.spectral_density(1.0).unwrap(),
                0.04 * (-1.0f64).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(SpectralModel::new(0.0, 0.1, 1.0).is_err());
        assert!(SpectralModel::new(1.0, -0.1, 1.0).is_err());
        assert!(SpectralModel::new(1.0, 0.1, 0.0).is_err());
        assert!(ThermalBath::high_t(0.0).is_err());
        assert!(ThermalBath::high_t(f64::NAN).is_err());
    }

    #[test]
    fn named_kinds_map_to_exponents() {
        assert_eq!(ReservoirKind::Ohmic.exponent(), 1.0);
        assert_eq!(ReservoirKind::SubOhmic.exponent(), 0.5);
        assert_eq!(ReservoirKind::SuperOhmic.exponent(), 3.0);
        for k in ReservoirKind::NAMED {
            assert_eq!(ReservoirKind::from_exponent(k.exponent()), k);
        }
    }

    fn any_model() -> impl Strategy<Value = SpectralModel> {
        (prop_oneof![Just(0.5), Just(1.0), Just(3.0), 0.2f64..4.0], 0.01f64..2.0, 0.05f64..20.0)
            .prop_map(|(s, g, wc)| SpectralModel::new(s, g, wc).unwrap())
    }

    proptest! {
        #[test]
        fn spectra_are_non_negative(m in any_model(), w in 0.0f64..200.0, kt in 0.1f64..1e3) {
            prop_assert!(m.spectral_density(w).unwrap() >= 0.0);
            for mode in [TemperatureMode::Exact, TemperatureMode::HighT] {
                let bath = ThermalBath::new(kt, mode).unwrap();
                match m.spectral_distribution(&bath, w) {
                    Ok(v) => prop_assert!(v >= 0.0),
                    Err(Error::IntegrableSingular { .. }) => prop_assert!(w == 0.0),
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }

        #[test]
        fn density_scales_as_coupling_squared(m in any_model(), w in 0.0f64..50.0) {
            let doubled = SpectralModel::new(m.exponent(), 2.0 * m.coupling(), m.omega_c()).unwrap();
            let a = m.spectral_density(w).unwrap();
            let b = doubled.spectral_density(w).unwrap();
            prop_assert!((b - 4.0 * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        #[test]
        fn temperature_modes_agree_at_high_kt_over_omega(m in any_model(), log_w in -4.0f64..2.0) {
            let w = 10f64.powf(log_w);
            let kt = 50.0 * w;
            let exact = ThermalBath::new(kt, TemperatureMode::Exact).unwrap();
            let hight = ThermalBath::high_t(kt).unwrap();
            let e = m.spectral_distribution(&exact, w).unwrap();
            let h = m.spectral_distribution(&hight, w).unwrap();
            if h > 0.0 {
                prop_assert!((e / h - 1.0).abs() < 0.01);
            }
        }
    }
}
