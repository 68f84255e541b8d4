//! Theorem checks on completed runs, the periodic orbit and principal
//! eigenpair they rely on, and built-in scenario suites.

mod checks;
mod eigen;
mod estimates;
mod periodic;
pub mod suites;

pub use checks::{
    check_theorem_1_1, check_theorem_1_2, check_theorem_1_3, CheckTolerances, Theorem11Report,
    Theorem12Report, Theorem13Report,
};
pub use eigen::{principal_eigenpair, EigenPair};
pub use estimates::{check_cross_chemical, CrossChemicalCheck};
pub use periodic::{
    solve_periodic_orbit, solve_periodic_orbit_from, PeriodicOrbit, STEPS_PER_PERIOD,
};
pub use suites::{run_suite, ScenarioResult, Suite, VerificationReport};
