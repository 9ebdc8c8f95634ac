//! Direct density-matrix integration of the master equations, used to
//! check the analytic fringe visibility and Zeno rates.

mod certify;
mod generator;
mod magnus;
mod master;
mod state;
mod survival;
mod wigner;

pub use master::{
    cat_dimension, evolve, evolve_cat, fock_dimension, fringe_from_trajectory, heated_cat_dimension, CatTrajectory,
    CoefficientSource, Equation, EvolutionSpec, Propagator, Trajectory,
};
pub use certify::{certify, fringe_suite, zeno_suites, CertificationReport, CertifyConfig, SuiteReport};
pub use state::{coherent_amplitudes, DensityMatrix};
pub use survival::{survival_probability, SurvivalResult, PREMISE_THRESHOLD};
pub use wigner::{displacement, wigner_at, WignerProbe};
