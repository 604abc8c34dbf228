use std::fmt;
use std::fs;
use std::path::Path as FsPath;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::RunConfig;
use crate::compliance::ComplianceModel;
use crate::daytoday::run_day_to_day;
use crate::error::EngineError;
use crate::network::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Beta,
    W,
    Gamma,
    X0,
    /// Both initial perceived times.
    Y0,
    Lambda,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] =
        [SweepParam::X0, SweepParam::Y0, SweepParam::W, SweepParam::Beta, SweepParam::Gamma, SweepParam::Lambda];

    pub fn apply(self, config: &mut RunConfig, value: f64) {
        let c = &mut config.compliance;
        match self {
            SweepParam::Beta => {
                c.beta = value;
                c.beta_model_iv = value;
            }
            SweepParam::W => c.w = value,
            SweepParam::Gamma => c.gamma = value,
            SweepParam::X0 => c.x0 = value,
            SweepParam::Y0 => {
                c.y_f0 = Some(value);
                c.y_nf0 = Some(value);
            }
            SweepParam::Lambda => config.solver.lambda = value,
        }
    }

    /// Whether the parameter enters the given model at all.
    pub fn applies_to(self, model: ComplianceModel) -> bool {
        match self {
            SweepParam::X0 => model.uses_saving(),
            SweepParam::Y0 => !model.uses_saving(),
            SweepParam::Gamma => model == ComplianceModel::III,
            _ => true,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Beta => "beta",
            SweepParam::W => "w",
            SweepParam::Gamma => "gamma",
            SweepParam::X0 => "x0",
            SweepParam::Y0 => "y0",
            SweepParam::Lambda => "lambda",
        })
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown sweep parameter '{s}' (expected beta, w, gamma, x0, y0 or lambda)"))
    }
}

/// Final state of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub model: String,
    pub converged: bool,
    pub days: usize,
    pub final_gap: Option<f64>,
    /// Mean compliance rate over affected pairs on the last day.
    pub final_cr: f64,
    pub total_cost: f64,
}

/// Runs one independent replicate per (model, value), in parallel.
pub fn run_sweep(
    base: &Scenario,
    param: SweepParam,
    values: &[f64],
    models: &[ComplianceModel],
) -> Result<Vec<SweepRow>, EngineError> {
    let jobs: Vec<(ComplianceModel, f64)> = models.iter().flat_map(|&m| values.iter().map(move |&v| (m, v))).collect();
    jobs.par_iter()
        .map(|&(model, value)| {
            let mut scenario = base.clone();
            scenario.config.compliance.model = model;
            param.apply(&mut scenario.config, value);
            let (issues, _) = scenario.config.check();
            if let Some(issue) = issues.first() {
                return Err(EngineError::Config(format!("{param} = {value}: {issue}")));
            }
            let outcome = run_day_to_day(&scenario, None)?;
            let last = outcome.last();
            let n = last.compliance.len().max(1) as f64;
            Ok(SweepRow {
                param,
                value,
                model: model.to_string(),
                converged: outcome.converged,
                days: last.day,
                final_gap: last.relative_gap,
                final_cr: last.compliance.iter().map(|c| c.cr).sum::<f64>() / n,
                total_cost: last.total_cost,
            })
        })
        .collect()
}

/// Range of final CR across a sweep, labelled by coarse bands.
fn sensitivity_label(range: f64) -> &'static str {
    if range < 0.05 {
        "Low"
    } else if range < 0.2 {
        "Medium"
    } else {
        "High"
    }
}

/// Writes `sweep.csv` (one row per replicate) and `sensitivity.csv` (one row
/// per parameter, one column per model).
pub fn write_sensitivity_table(rows: &[SweepRow], dir: &FsPath) -> Result<(), EngineError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(["param", "value", "model", "converged", "days", "final_gap", "final_cr", "total_cost"])?;
    for r in rows {
        w.write_record([
            r.param.to_string(),
            r.value.to_string(),
            r.model.clone(),
            r.converged.to_string(),
            r.days.to_string(),
            r.final_gap.map(|g| g.to_string()).unwrap_or_default(),
            r.final_cr.to_string(),
            r.total_cost.to_string(),
        ])?;
    }
    w.flush()?;

    let models = [ComplianceModel::I, ComplianceModel::II, ComplianceModel::III, ComplianceModel::IV];
    let mut w = csv::Writer::from_path(dir.join("sensitivity.csv"))?;
    w.write_record(["parameter", "range", "I", "II", "III", "IV"])?;
    for param in SweepParam::ALL {
        let of_param: Vec<&SweepRow> = rows.iter().filter(|r| r.param == param).collect();
        if of_param.is_empty() {
            continue;
        }
        let lo = of_param.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        let hi = of_param.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        let mut record = vec![param.to_string(), format!("[{lo}, {hi}]")];
        for m in models {
            let crs: Vec<f64> = of_param.iter().filter(|r| r.model == m.to_string()).map(|r| r.final_cr).collect();
            record.push(if crs.is_empty() || !param.applies_to(m) {
                "--".to_string()
            } else {
                let range = crs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    - crs.iter().copied().fold(f64::INFINITY, f64::min);
                format!("{} ({range:.4})", sensitivity_label(range))
            });
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_params() {
        assert_eq!("beta".parse::<SweepParam>().unwrap(), SweepParam::Beta);
        assert_eq!("X0".parse::<SweepParam>().unwrap(), SweepParam::X0);
        assert!("delta".parse::<SweepParam>().is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(sensitivity_label(0.0), "Low");
        assert_eq!(sensitivity_label(0.1), "Medium");
        assert_eq!(sensitivity_label(0.5), "High");
    }
}
