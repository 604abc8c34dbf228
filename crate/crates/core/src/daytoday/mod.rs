//! Day-to-day departure-rate adjustment under bounded rationality.
//!
//! Each day the departure profile moves against the bounded-rationality cost
//! operator and is projected back onto the demand-feasible set. The
//! projection reduces to one scalar dual variable per O-D, found by a
//! bracketed bisection on a monotone piecewise-linear function.

mod engine;

pub use engine::{free_flow_traversal, initial_profile, run_day_to_day, ComplianceRecord, DayRecord, RunOutcome};

use serde::{Deserialize, Serialize};

use crate::error::Issue;
use crate::network::{DepartureProfile, OdPair};

/// Piecewise-linear schedule-delay penalty on arrival time deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyFunction {
    /// cost-seconds per second early
    pub early: f64,
    /// cost-seconds per second late
    pub late: f64,
}

impl Default for PenaltyFunction {
    fn default() -> Self {
        PenaltyFunction { early: 0.5, late: 1.5 }
    }
}

impl PenaltyFunction {
    /// `f(x)` for arrival offset `x = arrival − T_A`.
    pub fn eval(&self, x: f64) -> f64 {
        self.early * (-x).max(0.0) + self.late * x.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Step size of the fixed-point update.
    pub lambda: f64,
    pub max_days: usize,
    /// Threshold on both the relative gap and the compliance drift.
    pub gap_tolerance: f64,
    /// Relative accuracy of the dual-variable root.
    pub eta_tolerance: f64,
    pub eta_max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { lambda: 0.01, max_days: 200, gap_tolerance: 1e-3, eta_tolerance: 1e-8, eta_max_iterations: 400 }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let e = "config.solver";
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            issues.push(Issue::new(e, format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.max_days == 0 {
            issues.push(Issue::new(e, "max_days must be at least 1"));
        }
        if !(self.gap_tolerance > 0.0) {
            issues.push(Issue::new(e, "gap_tolerance must be positive"));
        }
        if !(self.eta_tolerance > 0.0) {
            issues.push(Issue::new(e, "eta_tolerance must be positive"));
        }
        if self.eta_max_iterations == 0 {
            issues.push(Issue::new(e, "eta_max_iterations must be positive"));
        }
        issues
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    #[default]
    Uniform,
    /// Seeded random shape, rescaled to each O-D's demand.
    Random,
}

/// Day-one departure profile. Without a window each O-D departs over `[t0, T_A)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialProfile {
    pub mode: InitialMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

/// Generalised cost `Ψ = D + f(t + D − T_A)`.
pub fn travel_cost(travel_time: f64, departure: f64, desired_arrival: f64, penalty: &PenaltyFunction) -> f64 {
    travel_time + penalty.eval(departure + travel_time - desired_arrival)
}

/// Least cost over the O-D's paths and all departure bins.
pub fn min_od_cost(costs: &[Vec<f64>], od: &OdPair) -> f64 {
    od.paths.iter().flat_map(|&p| costs[p].iter().copied()).fold(f64::INFINITY, f64::min)
}

/// Bounded-rationality cost `max{Ψ, v + ε_p} − (ε_p − min_q ε_q)`.
pub fn br_cost(psi: f64, v: f64, eps_p: f64, eps_min: f64) -> f64 {
    psi.max(v + eps_p) - (eps_p - eps_min)
}

/// Root of the per-O-D demand equation with its certified bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaRoot {
    pub eta: f64,
    /// `g(lo) <= Q`
    pub lo: f64,
    /// `g(hi) >= Q`
    pub hi: f64,
    pub iterations: usize,
}

/// `g(η) = Σ_p Σ_k [h − λΦ + η]₊ · dt`
pub fn demand_function(shifted: &[f64], eta: f64, dt: f64) -> f64 {
    shifted.iter().map(|c| (c + eta).max(0.0)).sum::<f64>() * dt
}

/// Solves `Σ_p ∫ [h_p − λΦ_p + η]₊ dt = Q` for η.
///
/// `h` and `phi` hold one row per path of the O-D. A zero demand returns
/// `-∞`, which maps every rate to zero.
pub fn solve_eta(h: &[&[f64]], phi: &[&[f64]], lambda: f64, demand: f64, dt: f64, config: &SolverConfig) -> EtaRoot {
    if demand <= 0.0 {
        return EtaRoot { eta: f64::NEG_INFINITY, lo: f64::NEG_INFINITY, hi: f64::NEG_INFINITY, iterations: 0 };
    }
    let shifted: Vec<f64> =
        h.iter().zip(phi).flat_map(|(hr, pr)| hr.iter().zip(pr.iter()).map(|(a, b)| a - lambda * b)).collect();
    let g = |eta: f64| demand_function(&shifted, eta, dt);

    let max_h = shifted_max(h.iter().flat_map(|r| r.iter().copied()));
    let max_phi = shifted_max(phi.iter().flat_map(|r| r.iter().copied()));
    let mut lo = -lambda * max_phi;
    let mut hi = max_h + lambda * max_phi;
    let mut step = (hi - lo).abs().max(1.0);
    while g(lo) > demand {
        lo -= step;
        step *= 2.0;
    }
    let mut step = (hi - lo).abs().max(1.0);
    while g(hi) < demand {
        hi += step;
        step *= 2.0;
    }

    let tol = config.eta_tolerance * demand;
    let mut iterations = 0;
    while iterations < config.eta_max_iterations {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm - demand).abs() <= tol {
            return EtaRoot { eta: mid, lo, hi, iterations };
        }
        if gm < demand {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    // g is linear on the active set at `hi`; solve it there directly
    let active: Vec<f64> = shifted.iter().copied().filter(|c| c + hi > 0.0).collect();
    let exact = (demand / dt - active.iter().sum::<f64>()) / active.len().max(1) as f64;
    let eta =
        if exact >= lo && exact <= hi && (g(exact) - demand).abs() <= (g(hi) - demand).abs() { exact } else { hi };
    EtaRoot { eta, lo, hi, iterations }
}

fn shifted_max(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// Projected update `h' = [h − λΦ + η]₊` using each path's O-D multiplier.
pub fn update_departures(
    h: &DepartureProfile,
    phi: &[Vec<f64>],
    lambda: f64,
    etas: &[f64],
    ods: &[OdPair],
) -> DepartureProfile {
    let mut next = h.clone();
    for (od, &eta) in ods.iter().zip(etas) {
        for &p in &od.paths {
            for (r, &f) in next.path_mut(p).iter_mut().zip(&phi[p]) {
                *r = (*r - lambda * f + eta).max(0.0);
            }
        }
    }
    next
}

/// `‖h_now − h_prev‖ / ‖h_prev‖` in the discretised L² norm. Undefined
/// (`None`) when the previous profile is zero and the current is not.
pub fn relative_gap(now: &DepartureProfile, prev: &DepartureProfile) -> Option<f64> {
    let dt = prev.dt();
    let diff: f64 =
        now.rates().iter().flatten().zip(prev.rates().iter().flatten()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            * dt;
    let base = prev.l2_norm();
    if base > 0.0 {
        Some(diff.sqrt() / base)
    } else if diff == 0.0 {
        Some(0.0)
    } else {
        None
    }
}
