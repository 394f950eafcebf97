//! Finite-difference study of small odd solutions of the nonlinear
//! Klein-Gordon equation `u_tt = u_xx + m u + f(u)` on the half line:
//! a leapfrog integrator, localized virial diagnostics, discrete spectral
//! certificates and closed-form reference solutions.

pub mod config;
pub mod error;
pub mod exact;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod model;
pub mod scenario;
pub mod spectral;
pub mod virial;

pub use config::{parse_config, parse_config_with, ExperimentConfig, Scenario};
pub use error::{Error, Result};
pub use grid::{make_grid, Grid, State};
pub use model::{energy, eval_F, eval_f, make_model, Model};
pub use scenario::{execute, run_scenario, ScenarioOutcome};
