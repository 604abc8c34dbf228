use std::fs;
use std::path::Path as FsPath;

use serde::Serialize;

use crate::compliance::{Observation, Perception};
use crate::daytoday::RunOutcome;
use crate::dnl::{DnlResult, Target};
use crate::error::EngineError;
use crate::network::Scenario;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(dir: &FsPath, name: &str, header: &[&str]) -> Result<csv::Writer<fs::File>, EngineError> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalRate {
    pub od_id: String,
    pub sign_id: String,
    pub cr: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub converged: bool,
    pub days: usize,
    pub final_gap: Option<f64>,
    pub final_cr_drift: Option<f64>,
    pub final_crs: Vec<FinalRate>,
    pub total_cost: f64,
    pub residual: f64,
    pub model: String,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(outcome: &RunOutcome, scenario: &Scenario) -> Self {
        let last = outcome.last();
        let mut warnings = scenario.warnings.clone();
        warnings.extend(last.warnings.iter().cloned());
        Summary {
            converged: outcome.converged,
            days: last.day,
            final_gap: last.relative_gap,
            final_cr_drift: last.cr_drift,
            final_crs: last
                .compliance
                .iter()
                .map(|c| FinalRate {
                    od_id: scenario.ods[c.od].id.clone(),
                    sign_id: scenario.signs[c.sign].id.clone(),
                    cr: c.cr,
                })
                .collect(),
            total_cost: last.total_cost,
            residual: last.residual,
            model: scenario.config.compliance.model.to_string(),
            seed: scenario.config.seed,
            warnings,
        }
    }
}

/// Writes `days.csv`, `flows.csv`, `costs.csv`, `compliance.csv` and
/// `summary.json` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, scenario: &Scenario, dir: &FsPath) -> Result<Summary, EngineError> {
    fs::create_dir_all(dir)?;
    let n_days = outcome.days.len();

    let mut w = writer(dir, "days.csv", &["day", "relative_gap", "cr_drift", "total_cost", "residual", "converged"])?;
    for (i, d) in outcome.days.iter().enumerate() {
        let conv = outcome.converged && i + 1 == n_days;
        w.write_record([
            d.day.to_string(),
            opt(d.relative_gap),
            opt(d.cr_drift),
            d.total_cost.to_string(),
            d.residual.to_string(),
            conv.to_string(),
        ])?;
    }
    w.flush()?;

    let mut flows = writer(dir, "flows.csv", &["day", "path", "bin", "rate"])?;
    let mut costs = writer(dir, "costs.csv", &["day", "path", "bin", "travel_time", "cost"])?;
    for d in &outcome.days {
        for (p, path) in scenario.paths.iter().enumerate() {
            for (k, r) in d.profile.path(p).iter().enumerate() {
                flows.write_record([d.day.to_string(), path.id.clone(), k.to_string(), r.to_string()])?;
                costs.write_record([
                    d.day.to_string(),
                    path.id.clone(),
                    k.to_string(),
                    d.travel_times[p][k].to_string(),
                    d.costs[p][k].to_string(),
                ])?;
            }
        }
    }
    flows.flush()?;
    costs.flush()?;

    let header = [
        "day",
        "od_id",
        "sign_id",
        "model",
        "s_bar",
        "s_bar_effective",
        "mu_f",
        "mu_nf",
        "sigma_f",
        "sigma_nf",
        "x",
        "y_f",
        "y_nf",
        "cr",
        "next_cr",
    ];
    let mut w = writer(dir, "compliance.csv", &header)?;
    let model = scenario.config.compliance.model.to_string();
    for d in &outcome.days {
        for c in &d.compliance {
            let (s, se, mf, mnf, sf, snf) = match c.observation {
                Observation::Saving { s_bar, s_bar_effective } => {
                    (Some(s_bar), Some(s_bar_effective), None, None, None, None)
                }
                Observation::Times { mu_f, mu_nf, sigma_f, sigma_nf } => {
                    (None, None, Some(mu_f), Some(mu_nf), Some(sigma_f), Some(sigma_nf))
                }
            };
            let (x, yf, ynf) = match c.perception {
                Perception::Saving { x } => (Some(x), None, None),
                Perception::Times { y_f, y_nf } => (None, Some(y_f), Some(y_nf)),
            };
            w.write_record([
                d.day.to_string(),
                scenario.ods[c.od].id.clone(),
                scenario.signs[c.sign].id.clone(),
                model.clone(),
                opt(s),
                opt(se),
                opt(mf),
                opt(mnf),
                opt(sf),
                opt(snf),
                opt(x),
                opt(yf),
                opt(ynf),
                c.cr.to_string(),
                c.next_cr.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let summary = Summary::new(outcome, scenario);
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Cumulative curves (`dnl_curves.csv`) and realised turning ratios
/// (`turning_ratios.csv`) of one loading.
pub fn dump_dnl(result: &DnlResult, scenario: &Scenario, dir: &FsPath) -> Result<(), EngineError> {
    fs::create_dir_all(dir)?;
    let mut w = writer(dir, "dnl_curves.csv", &["link_id", "bin", "N_up", "N_down"])?;
    for rec in result.links() {
        for (k, (u, d)) in rec.upstream.values().iter().zip(rec.downstream.values()).enumerate() {
            w.write_record([rec.id.clone(), k.to_string(), u.to_string(), d.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = writer(dir, "turning_ratios.csv", &["link_id", "bin", "to", "ratio"])?;
    for lt in result.turning_ratios().iter() {
        let id = &scenario.network.links[lt.link].id;
        for (k, row) in lt.ratios.iter().enumerate() {
            for (t, r) in lt.targets.iter().zip(row) {
                let to = match t {
                    Target::Link(j) => scenario.network.links[*j].id.clone(),
                    Target::Sink => "sink".to_string(),
                };
                w.write_record([id.clone(), k.to_string(), to, r.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format tables behind the savings, perception, compliance, flow
/// share and gap plots.
pub fn emit_plot_data(outcome: &RunOutcome, scenario: &Scenario, dir: &FsPath) -> Result<(), EngineError> {
    fs::create_dir_all(dir)?;
    let pair = |od: usize, sign: usize| (scenario.ods[od].id.clone(), scenario.signs[sign].id.clone());

    let mut savings = writer(dir, "plot_savings.csv", &["day", "od_id", "sign_id", "variable", "value"])?;
    let mut perception = writer(dir, "plot_perception.csv", &["day", "od_id", "sign_id", "variable", "value"])?;
    let mut cr = writer(dir, "plot_cr.csv", &["day", "od_id", "sign_id", "cr"])?;
    for d in &outcome.days {
        let day = d.day.to_string();
        for c in &d.compliance {
            let (od, sign) = pair(c.od, c.sign);
            let obs: Vec<(&str, f64)> = match c.observation {
                Observation::Saving { s_bar, s_bar_effective } => {
                    vec![("s_bar", s_bar), ("s_bar_effective", s_bar_effective)]
                }
                Observation::Times { mu_f, mu_nf, sigma_f, sigma_nf } => {
                    vec![("mu_f", mu_f), ("mu_nf", mu_nf), ("sigma_f", sigma_f), ("sigma_nf", sigma_nf)]
                }
            };
            for (name, v) in obs {
                savings.write_record([day.clone(), od.clone(), sign.clone(), name.to_string(), v.to_string()])?;
            }
            let per: Vec<(&str, f64)> = match c.perception {
                Perception::Saving { x } => vec![("x", x)],
                Perception::Times { y_f, y_nf } => vec![("y_f", y_f), ("y_nf", y_nf)],
            };
            for (name, v) in per {
                perception.write_record([day.clone(), od.clone(), sign.clone(), name.to_string(), v.to_string()])?;
            }
            cr.write_record([day.clone(), od, sign, c.cr.to_string()])?;
        }
    }
    savings.flush()?;
    perception.flush()?;
    cr.flush()?;

    let mut shares = writer(dir, "plot_flow_shares.csv", &["day", "od_id", "path_id", "share"])?;
    for d in &outcome.days {
        for od in &scenario.ods {
            let total = d.profile.od_volume(od);
            for &p in &od.paths {
                let share = if total > 0.0 { d.profile.path_volume(p) / total } else { 0.0 };
                shares.write_record([
                    d.day.to_string(),
                    od.id.clone(),
                    scenario.paths[p].id.clone(),
                    share.to_string(),
                ])?;
            }
        }
    }
    shares.flush()?;

    let mut gap = writer(dir, "plot_gap.csv", &["day", "relative_gap"])?;
    for d in &outcome.days {
        gap.write_record([d.day.to_string(), opt(d.relative_gap)])?;
    }
    gap.flush()?;
    Ok(())
}
