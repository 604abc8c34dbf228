//! Day-scale learning of VMS compliance.
//!
//! Each affected (O-D, sign) pair carries a perception that is smoothed
//! exponentially from day to day and mapped to a compliance rate by a binary
//! logit. Models I and III perceive the saving from following the sign;
//! Models II and IV perceive the disutility of each alternative separately.

use serde::{Deserialize, Serialize};

use crate::dnl::DnlResult;
use crate::error::{DnlError, Issue};
use crate::network::{ActiveSet, TimeGrid, VmsPartition, VmsSign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplianceModel {
    /// Exponentially smoothed average saving.
    I,
    /// Exponentially smoothed average traversal times per alternative.
    II,
    /// Model I with an indifference threshold on the saving.
    III,
    /// Model II with mean times scaled by their within-day standard deviation.
    IV,
}

impl ComplianceModel {
    pub fn uses_saving(self) -> bool {
        matches!(self, ComplianceModel::I | ComplianceModel::III)
    }
}

impl std::fmt::Display for ComplianceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ComplianceModel::I => "I",
            ComplianceModel::II => "II",
            ComplianceModel::III => "III",
            ComplianceModel::IV => "IV",
        };
        f.write_str(s)
    }
}

/// Time domain over which Models II and IV average traversal times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// The whole horizon `[t0, tf]`.
    #[default]
    Horizon,
    /// Only the sign's active set.
    Omega,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplianceParams {
    pub model: ComplianceModel,
    /// Weight of the newest observation, in (0, 1).
    pub w: f64,
    /// Logit scale for Models I-III, 1/s.
    pub beta: f64,
    /// Logit scale for Model IV, whose perceptions are in s².
    pub beta_model_iv: f64,
    /// Model III threshold, seconds.
    pub gamma: f64,
    /// Initial perceived saving X⁰, seconds.
    pub x0: f64,
    /// Initial perceived disutilities; free-flow traversal statistics when absent.
    pub y_f0: Option<f64>,
    pub y_nf0: Option<f64>,
    pub averaging: Averaging,
}

impl Default for ComplianceParams {
    fn default() -> Self {
        ComplianceParams {
            model: ComplianceModel::I,
            w: 0.3,
            beta: 0.01,
            beta_model_iv: 1e-4,
            gamma: 200.0,
            x0: 0.0,
            y_f0: None,
            y_nf0: None,
            averaging: Averaging::Horizon,
        }
    }
}

impl ComplianceParams {
    pub fn effective_beta(&self) -> f64 {
        match self.model {
            ComplianceModel::IV => self.beta_model_iv,
            _ => self.beta,
        }
    }

    /// Hard errors, plus warnings for values outside the ranges explored in
    /// the original sensitivity study.
    pub fn check(&self) -> (Vec<Issue>, Vec<String>) {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();
        let e = "config.compliance";
        if !(self.w > 0.0 && self.w < 1.0) {
            issues.push(Issue::new(e, format!("w must lie in (0, 1), got {}", self.w)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            issues.push(Issue::new(e, format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.beta_model_iv > 0.0 && self.beta_model_iv.is_finite()) {
            issues.push(Issue::new(e, format!("beta_model_iv must be positive, got {}", self.beta_model_iv)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            issues.push(Issue::new(e, format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !self.x0.is_finite() {
            issues.push(Issue::new(e, "x0 must be finite"));
        }
        let mut range = |name: &str, v: f64, lo: f64, hi: f64| {
            if v < lo || v > hi {
                warnings.push(format!("{name} = {v} is outside the tested range [{lo}, {hi}]"));
            }
        };
        if self.model.uses_saving() {
            range("x0", self.x0, -600.0, 600.0);
        }
        range("w", self.w, 0.2, 0.5);
        if self.model != ComplianceModel::IV {
            range("beta", self.beta, 0.001, 0.1);
        }
        if self.model == ComplianceModel::III {
            range("gamma", self.gamma, 0.0, 300.0);
        }
        if matches!(self.model, ComplianceModel::II) {
            for (name, y) in [("y_f0", self.y_f0), ("y_nf0", self.y_nf0)] {
                if let Some(y) = y {
                    range(name, y, 100.0, 600.0);
                }
            }
        }
        (issues, warnings)
    }
}

/// What a pair currently believes about the sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Perception {
    /// Expected saving X from following the sign (Models I, III).
    Saving { x: f64 },
    /// Expected disutility of following / not following (Models II, IV).
    Times { y_f: f64, y_nf: f64 },
}

/// Quantities observed on one day, before smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Observation {
    Saving { s_bar: f64, s_bar_effective: f64 },
    Times { mu_f: f64, mu_nf: f64, sigma_f: f64, sigma_nf: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceState {
    pub od: usize,
    pub sign: usize,
    pub perception: Perception,
    /// Compliance rate used for the next network loading.
    pub cr: f64,
}

impl ComplianceState {
    /// Day-one state. `free_flow` holds the free-flow traversal times from
    /// the diversion node (follow, not follow), used when Y⁰ is not given.
    pub fn initial(partition: &VmsPartition, params: &ComplianceParams, free_flow: (f64, f64)) -> Self {
        let perception = if params.model.uses_saving() {
            Perception::Saving { x: params.x0 }
        } else {
            let (ff_f, ff_nf) = match params.model {
                // Free-flow times have zero spread, so the mean-std product is zero.
                ComplianceModel::IV => (0.0, 0.0),
                _ => free_flow,
            };
            Perception::Times { y_f: params.y_f0.unwrap_or(ff_f), y_nf: params.y_nf0.unwrap_or(ff_nf) }
        };
        let cr = rate_from(perception, params.effective_beta());
        ComplianceState { od: partition.od, sign: partition.sign, perception, cr }
    }
}

fn rate_from(perception: Perception, beta: f64) -> f64 {
    match perception {
        Perception::Saving { x } => compliance_model1(x, beta),
        Perception::Times { y_f, y_nf } => compliance_model2(y_f, y_nf, beta),
    }
}

/// Logistic function kept strictly inside (0, 1).
fn logistic(z: f64) -> f64 {
    let v = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Model I/III logit: `exp(βx) / (exp(-βx) + exp(βx))`.
pub fn compliance_model1(x: f64, beta: f64) -> f64 {
    logistic(2.0 * beta * x)
}

/// Model II/IV logit: `exp(-βY_F) / (exp(-βY_F) + exp(-βY_NF))`.
pub fn compliance_model2(y_f: f64, y_nf: f64, beta: f64) -> f64 {
    logistic(beta * (y_nf - y_f))
}

/// Model III indifference band: savings in `[0, γ)` count as zero.
pub fn apply_threshold(s_bar: f64, gamma: f64) -> f64 {
    if s_bar >= 0.0 && s_bar < gamma {
        0.0
    } else {
        s_bar
    }
}

pub fn update_perception_x(x_prev: f64, s_bar: f64, w: f64) -> f64 {
    (1.0 - w) * x_prev + w * s_bar
}

pub fn update_perceived_times(y_prev: f64, stat: f64, w: f64) -> f64 {
    (1.0 - w) * y_prev + w * stat
}

/// Mean of a per-bin profile over `domain`, bins weighted by their overlap.
pub fn domain_average(profile: &[f64], grid: &TimeGrid, domain: &ActiveSet) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in profile.iter().enumerate() {
        let w = domain.bin_overlap(grid, k);
        if w > 0.0 {
            num += w * v;
            den += w;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Average saving over the sign's active set.
pub fn average_saving(profile: &[f64], grid: &TimeGrid, omega: &ActiveSet) -> f64 {
    domain_average(profile, grid, omega)
}

/// Average over the full horizon.
pub fn average_time(profile: &[f64], grid: &TimeGrid) -> f64 {
    domain_average(profile, grid, &ActiveSet::always(grid))
}

/// Population standard deviation of a per-bin profile about `mean` over `domain`.
pub fn time_std(profile: &[f64], mean: f64, grid: &TimeGrid, domain: &ActiveSet) -> f64 {
    let sq: Vec<f64> = profile.iter().map(|v| (v - mean) * (v - mean)).collect();
    domain_average(&sq, grid, domain).max(0.0).sqrt()
}

fn mean_traversal(result: &DnlResult, paths: &[usize], node: usize, t: f64) -> Result<f64, DnlError> {
    let mut sum = 0.0;
    for &p in paths {
        sum += result.partial_traversal_time(p, node, t)?.value;
    }
    Ok(sum / paths.len() as f64)
}

/// Saving from following the sign for a driver leaving the diversion node at `t`.
pub fn saving_at(result: &DnlResult, partition: &VmsPartition, node: usize, t: f64) -> Result<f64, DnlError> {
    Ok(mean_traversal(result, &partition.not_follow, node, t)? - mean_traversal(result, &partition.follow, node, t)?)
}

/// Saving sampled at every bin midpoint of the horizon.
pub fn saving_profile(result: &DnlResult, partition: &VmsPartition, node: usize) -> Result<Vec<f64>, DnlError> {
    let grid = result.grid();
    (0..grid.n_bins()).map(|k| saving_at(result, partition, node, grid.midpoint(k))).collect()
}

/// Mean traversal times from the diversion node of the follow and
/// not-follow sets, sampled at every bin midpoint.
pub fn experienced_times(
    result: &DnlResult,
    partition: &VmsPartition,
    node: usize,
) -> Result<(Vec<f64>, Vec<f64>), DnlError> {
    let grid = result.grid();
    let mut f = Vec::with_capacity(grid.n_bins());
    let mut nf = Vec::with_capacity(grid.n_bins());
    for k in 0..grid.n_bins() {
        let t = grid.midpoint(k);
        f.push(mean_traversal(result, &partition.follow, node, t)?);
        nf.push(mean_traversal(result, &partition.not_follow, node, t)?);
    }
    Ok((f, nf))
}

/// Advances one pair by one day using that day's loading result. Returns the
/// next state (perception of day τ, rate for day τ+1) and what was observed.
pub fn step_compliance(
    state: &ComplianceState,
    params: &ComplianceParams,
    result: &DnlResult,
    partition: &VmsPartition,
    sign: &VmsSign,
) -> Result<(ComplianceState, Observation), DnlError> {
    let grid = result.grid();
    let beta = params.effective_beta();
    let (perception, observation) = match state.perception {
        Perception::Saving { x } => {
            let profile = saving_profile(result, partition, sign.junction)?;
            let s_bar = average_saving(&profile, grid, &sign.active);
            let s_eff = match params.model {
                ComplianceModel::III => apply_threshold(s_bar, params.gamma),
                _ => s_bar,
            };
            (
                Perception::Saving { x: update_perception_x(x, s_eff, params.w) },
                Observation::Saving { s_bar, s_bar_effective: s_eff },
            )
        }
        Perception::Times { y_f, y_nf } => {
            let (f, nf) = experienced_times(result, partition, sign.junction)?;
            let domain = match params.averaging {
                Averaging::Horizon => ActiveSet::always(grid),
                Averaging::Omega => sign.active.clone(),
            };
            let mu_f = domain_average(&f, grid, &domain);
            let mu_nf = domain_average(&nf, grid, &domain);
            let sigma_f = time_std(&f, mu_f, grid, &domain);
            let sigma_nf = time_std(&nf, mu_nf, grid, &domain);
            let (stat_f, stat_nf) = match params.model {
                ComplianceModel::IV => (mu_f * sigma_f, mu_nf * sigma_nf),
                _ => (mu_f, mu_nf),
            };
            (
                Perception::Times {
                    y_f: update_perceived_times(y_f, stat_f, params.w),
                    y_nf: update_perceived_times(y_nf, stat_nf, params.w),
                },
                Observation::Times { mu_f, mu_nf, sigma_f, sigma_nf },
            )
        }
    };
    let next = ComplianceState { od: state.od, sign: state.sign, perception, cr: rate_from(perception, beta) };
    Ok((next, observation))
}
