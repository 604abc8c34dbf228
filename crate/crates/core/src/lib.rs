//! Day-to-day dynamic traffic assignment with variable message signs.
//!
//! Two time scales are coupled. Within a day, [`dnl::run_dnl`] loads
//! departures onto the network with a link transmission model while signs
//! divert a compliance-dependent share of traffic at their junctions. Across
//! days, [`daytoday::run_day_to_day`] moves departure rates toward a
//! bounded-rationality equilibrium and [`compliance`] updates how much
//! drivers trust each sign from what they experienced.

// parameter checks use `!(x > 0.0)` so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compliance;
pub mod daytoday;
pub mod dnl;
pub mod error;
pub mod network;
pub mod scenario;

pub use compliance::{ComplianceModel, ComplianceParams, ComplianceState};
pub use daytoday::{run_day_to_day, DayRecord, PenaltyFunction, RunOutcome, SolverConfig};
pub use dnl::{run_dnl, ComplianceRates, DnlResult};
pub use error::{DnlError, EngineError, LoadError, ParamError};
pub use network::{load_scenario, DepartureProfile, Scenario, ScenarioFiles, ScenarioInputs, TimeGrid};
pub use scenario::RunConfig;
