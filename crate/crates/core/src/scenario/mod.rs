//! Run configuration, built-in fixtures, output writing and parameter sweeps.

mod fixtures;
mod output;
mod sweep;

pub use fixtures::{corridor, fig1, CorridorSpec};
pub use output::{dump_dnl, emit_plot_data, write_outputs, Summary};
pub use sweep::{run_sweep, write_sensitivity_table, SweepParam, SweepRow};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::compliance::ComplianceParams;
use crate::daytoday::{InitialProfile, PenaltyFunction, SolverConfig};
use crate::error::Issue;
use crate::network::GridSpec;

fn default_residual_tolerance() -> f64 {
    0.005
}

/// Everything that controls a run besides the network and demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub compliance: ComplianceParams,
    #[serde(default)]
    pub penalty: PenaltyFunction,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial_profile: InitialProfile,
    /// Share of total demand allowed to remain in the network at `tf`
    /// before a warning is raised.
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    /// Indifference band for paths missing from the tolerance file.
    #[serde(default)]
    pub default_epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Also write cumulative curves and turning ratios of the last day.
    #[serde(default)]
    pub dump_dnl: bool,
}

impl RunConfig {
    pub fn new(grid: GridSpec) -> Self {
        RunConfig {
            grid,
            compliance: ComplianceParams::default(),
            penalty: PenaltyFunction::default(),
            solver: SolverConfig::default(),
            initial_profile: InitialProfile::default(),
            residual_tolerance: default_residual_tolerance(),
            default_epsilon: 0.0,
            seed: 0,
            output_dir: None,
            dump_dnl: false,
        }
    }

    /// Hard problems and soft warnings (parameters outside the tested ranges).
    pub fn check(&self) -> (Vec<Issue>, Vec<String>) {
        let (mut issues, warnings) = self.compliance.check();
        issues.extend(self.solver.check());
        if !(self.penalty.early >= 0.0 && self.penalty.late >= 0.0) {
            issues.push(Issue::new("config.penalty", "penalty slopes must be nonnegative"));
        }
        if !(self.residual_tolerance >= 0.0) {
            issues.push(Issue::new("config", "residual_tolerance must be nonnegative"));
        }
        let e = self.default_epsilon;
        if !(e >= 0.0 && e.is_finite()) {
            issues.push(Issue::new("config", format!("default_epsilon must be nonnegative, got {e}")));
        }
        if let Some([a, b]) = self.initial_profile.window {
            if !(a < b) {
                issues.push(Issue::new("config.initial_profile", format!("empty window [{a}, {b})")));
            }
        }
        (issues, warnings)
    }
}
