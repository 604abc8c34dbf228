use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{br_cost, min_od_cost, relative_gap, solve_eta, travel_cost, update_departures, InitialMode};
use crate::compliance::{step_compliance, ComplianceState, Observation, Perception};
use crate::dnl::{run_dnl, ComplianceRates, DnlResult};
use crate::error::EngineError;
use crate::network::{DepartureProfile, Scenario, VmsPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceRecord {
    pub od: usize,
    pub sign: usize,
    /// Rate used in today's loading.
    pub cr: f64,
    /// Perception after today's observation.
    pub perception: Perception,
    pub observation: Observation,
    /// Rate for tomorrow.
    pub next_cr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub day: usize,
    pub profile: DepartureProfile,
    /// `D_p` at bin midpoints.
    pub travel_times: Vec<Vec<f64>>,
    /// `Ψ_p` at bin midpoints.
    pub costs: Vec<Vec<f64>>,
    /// `v_ij` per O-D.
    pub min_costs: Vec<f64>,
    /// Multipliers used for tomorrow's profile; empty on the final day.
    pub etas: Vec<f64>,
    /// Against the previous day; `None` on day one or when undefined.
    pub relative_gap: Option<f64>,
    /// `max |CR^τ − CR^{τ−1}|`; `None` on day one.
    pub cr_drift: Option<f64>,
    /// `Σ_p ∫ h_p Ψ_p dt`
    pub total_cost: f64,
    pub residual: f64,
    pub compliance: Vec<ComplianceRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub days: Vec<DayRecord>,
    pub converged: bool,
    /// Loading of the last simulated day.
    pub final_dnl: DnlResult,
}

impl RunOutcome {
    pub fn last(&self) -> &DayRecord {
        self.days.last().expect("at least one day")
    }
}

/// Free-flow traversal times from the diversion node, averaged over the
/// (follow, not follow) sets.
pub fn free_flow_traversal(scenario: &Scenario, partition: &VmsPartition) -> (f64, f64) {
    let node = scenario.signs[partition.sign].junction;
    let mean = |paths: &[usize]| {
        let total: f64 = paths
            .iter()
            .map(|&p| {
                let nodes = scenario.path_nodes(p);
                let pos = nodes.iter().position(|&n| n == node).unwrap_or(0);
                scenario.paths[p].links[pos..].iter().map(|&l| scenario.network.links[l].free_flow_time()).sum::<f64>()
            })
            .sum();
        total / paths.len().max(1) as f64
    };
    (mean(&partition.follow), mean(&partition.not_follow))
}

/// Day-one profile built from the configured mode and window.
pub fn initial_profile(scenario: &Scenario) -> DepartureProfile {
    let grid = &scenario.grid;
    let cfg = &scenario.config.initial_profile;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.config.seed);
    let mut h = DepartureProfile::zeros(scenario.paths.len(), grid);
    for od in &scenario.ods {
        let [a, b] = cfg.window.unwrap_or([grid.t0(), od.desired_arrival]);
        let overlap: Vec<f64> = (0..grid.n_bins()).map(|k| grid.overlap(k, a, b)).collect();
        let mut weights: Vec<Vec<f64>> = od
            .paths
            .iter()
            .map(|_| match cfg.mode {
                InitialMode::Uniform => overlap.clone(),
                InitialMode::Random => overlap.iter().map(|w| w * rng.gen::<f64>()).collect(),
            })
            .collect();
        let total: f64 = weights.iter().flatten().sum();
        if total <= 0.0 || od.demand <= 0.0 {
            continue;
        }
        // Σ h·dt = Q
        let scale = od.demand / (total * grid.dt());
        for (row, &p) in weights.iter_mut().zip(&od.paths) {
            for (r, w) in h.path_mut(p).iter_mut().zip(row.iter()) {
                *r = w * scale;
            }
        }
    }
    h
}

/// Runs the coupled flow and compliance dynamics until both settle or
/// `max_days` is reached. Non-convergence is reported, not an error.
pub fn run_day_to_day(scenario: &Scenario, initial: Option<DepartureProfile>) -> Result<RunOutcome, EngineError> {
    let cfg = &scenario.config;
    let grid = &scenario.grid;
    let solver = &cfg.solver;
    let partitions: Vec<&VmsPartition> = scenario.affected_partitions().collect();

    let mut h = initial.unwrap_or_else(|| initial_profile(scenario));
    let mut states: Vec<ComplianceState> = partitions
        .iter()
        .map(|p| ComplianceState::initial(p, &cfg.compliance, free_flow_traversal(scenario, p)))
        .collect();
    let mut prev: Option<(DepartureProfile, Vec<f64>)> = None;
    let mut days = Vec::new();
    let mut converged = false;
    let mut last_dnl = None;

    for day in 1..=solver.max_days {
        let rates: ComplianceRates = states.iter().map(|s| ((s.od, s.sign), s.cr)).collect();
        let dnl = run_dnl(scenario, &h, &rates).map_err(|source| EngineError::Dnl { day, source })?;

        let travel_times: Vec<Vec<f64>> = (0..scenario.paths.len()).map(|p| dnl.travel_times(p).to_vec()).collect();
        let mut costs = vec![Vec::new(); scenario.paths.len()];
        for od in &scenario.ods {
            for &p in &od.paths {
                costs[p] = travel_times[p]
                    .iter()
                    .enumerate()
                    .map(|(k, &d)| travel_cost(d, grid.midpoint(k), od.desired_arrival, &cfg.penalty))
                    .collect();
            }
        }
        let min_costs: Vec<f64> = scenario.ods.iter().map(|od| min_od_cost(&costs, od)).collect();
        let total_cost =
            h.rates().iter().flatten().zip(costs.iter().flatten()).map(|(r, c)| r * c).sum::<f64>() * grid.dt();

        let crs: Vec<f64> = states.iter().map(|s| s.cr).collect();
        let (gap, drift) = match &prev {
            None => (None, None),
            Some((hp, cp)) => {
                (relative_gap(&h, hp), Some(crs.iter().zip(cp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)))
            }
        };

        let mut compliance = Vec::with_capacity(states.len());
        let mut next_states = Vec::with_capacity(states.len());
        for (state, part) in states.iter().zip(&partitions) {
            let sign = &scenario.signs[part.sign];
            let (next, observation) = step_compliance(state, &cfg.compliance, &dnl, part, sign)
                .map_err(|source| EngineError::Dnl { day, source })?;
            compliance.push(ComplianceRecord {
                od: state.od,
                sign: state.sign,
                cr: state.cr,
                perception: next.perception,
                observation,
                next_cr: next.cr,
            });
            next_states.push(next);
        }

        let settled = day >= 2
            && gap.is_some_and(|g| g < solver.gap_tolerance)
            && drift.is_some_and(|d| d < solver.gap_tolerance);
        debug!("day {day}: gap {gap:?}, cr drift {drift:?}, total cost {total_cost:.1}");

        let mut record = DayRecord {
            day,
            profile: h.clone(),
            travel_times,
            costs,
            min_costs,
            etas: Vec::new(),
            relative_gap: gap,
            cr_drift: drift,
            total_cost,
            residual: dnl.residual(),
            compliance,
            warnings: dnl.warnings().to_vec(),
        };

        if settled || day == solver.max_days {
            converged = settled;
            days.push(record);
            last_dnl = Some(dnl);
            break;
        }

        let mut phi = vec![Vec::new(); scenario.paths.len()];
        for (o, od) in scenario.ods.iter().enumerate() {
            let eps_min = od.min_tolerance();
            for &p in &od.paths {
                let eps = od.tolerance_of(p);
                phi[p] = record.costs[p].iter().map(|&c| br_cost(c, record.min_costs[o], eps, eps_min)).collect();
            }
        }
        let etas: Vec<f64> = scenario
            .ods
            .iter()
            .map(|od| {
                let hr: Vec<&[f64]> = od.paths.iter().map(|&p| h.path(p)).collect();
                let pr: Vec<&[f64]> = od.paths.iter().map(|&p| phi[p].as_slice()).collect();
                solve_eta(&hr, &pr, solver.lambda, od.demand, grid.dt(), solver).eta
            })
            .collect();
        let next_h = update_departures(&h, &phi, solver.lambda, &etas, &scenario.ods);
        record.etas = etas;
        days.push(record);

        prev = Some((h, crs));
        h = next_h;
        states = next_states;
    }

    let outcome = RunOutcome { days, converged, final_dnl: last_dnl.expect("max_days is at least one") };
    let last = outcome.last();
    info!(
        "{} after {} days (gap {:?}, cr drift {:?})",
        if converged { "converged" } else { "stopped" },
        last.day,
        last.relative_gap,
        last.cr_drift
    );
    Ok(outcome)
}
