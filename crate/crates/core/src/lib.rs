//! Non-Markovian quantum Brownian motion: reservoir spectra, time-dependent
//! master-equation coefficients, cat-state fringe visibility, Zeno/anti-Zeno
//! crossover maps and a Fock-space master-equation oracle.

pub mod decoherence;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod kernels;
pub mod spectral;
pub mod zeno;

pub use error::{Error, Result};
pub use spectral::{ReservoirKind, SpectralModel, TemperatureMode, ThermalBath};
