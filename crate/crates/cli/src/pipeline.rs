//! Orchestration: config -> trajectory -> first-law record, with failures
//! classified for the exit-code contract (2 = config, 3 = numerical).

use thermogauge_core::dynamics::{assemble_trajectory, build_family, TrajectoryGrid};
use thermogauge_core::functionals::{first_law_report_with_tol, ThermoRecord};

use crate::config::{ConfigError, RunConfig};

/// A run failure classified by exit code.
#[derive(Debug)]
pub enum RunError {
    /// Exit code 2: the configuration is malformed or inconsistent.
    Config(String),
    /// Exit code 3: a numerical invariant failed mid-run (frame
    /// discontinuity, first-law residual breach, ...).
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

/// Assemble the configured trajectory.
pub fn trajectory_for(config: &RunConfig) -> Result<TrajectoryGrid, RunError> {
    let spec = config.family_spec()?;
    let times: Vec<f64> = (0..=config.grid.n)
        .map(|i| config.grid.tau * i as f64 / config.grid.n as f64)
        .collect();
    let hamiltonians =
        build_family(&spec, &times).map_err(|e| RunError::Config(format!("hamiltonian: {e}")))?;
    let rho0 = config.initial_state(&hamiltonians[0])?;
    assemble_trajectory(
        &spec,
        &rho0,
        config.grid.n,
        config.grid.tau,
        config.tolerances.cluster_tol,
    )
    .map_err(|e| RunError::Numerical(e.to_string()))
}

/// Trajectory plus first-law ledger at the configured residual tolerance.
pub fn run_record(config: &RunConfig) -> Result<(TrajectoryGrid, ThermoRecord), RunError> {
    let traj = trajectory_for(config)?;
    let record = first_law_report_with_tol(&traj, config.tolerances.residual_tol)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    Ok((traj, record))
}
