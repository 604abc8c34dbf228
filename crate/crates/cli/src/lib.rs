//! Command-line front end: run, validate, fixtures and sweep.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use vmsdta::compliance::ComplianceModel;
use vmsdta::error::Issue;
use vmsdta::scenario::{self, CorridorSpec, SweepParam};
use vmsdta::{load_scenario, run_day_to_day, EngineError, LoadError, Scenario, ScenarioFiles};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vmsdta", version, about = "Day-to-day traffic assignment with variable message signs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the day-to-day engine and write CSV outputs.
    Run {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        out: OutDir,
        /// Also dump the last day's cumulative curves and turning ratios.
        #[arg(long)]
        dump_dnl: bool,
    },
    /// Load and check a scenario without running it.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Write a built-in scenario.
    Fixtures {
        #[arg(value_enum)]
        which: Fixture,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run independent replicates over one parameter.
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        out: OutDir,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Models to sweep; defaults to the configured one.
        #[arg(long, value_delimiter = ',', value_parser = parse_model)]
        models: Vec<ComplianceModel>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fixture {
    Fig1,
    Corridor,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Directory holding the conventional file names; individual flags override it.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long)]
    demand: Option<PathBuf>,
    #[arg(long)]
    tolerances: Option<PathBuf>,
    #[arg(long)]
    vms: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "VMSDTA_OUT_DIR")]
    out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ComplianceModel, String> {
    match s.to_ascii_uppercase().as_str() {
        "I" | "1" => Ok(ComplianceModel::I),
        "II" | "2" => Ok(ComplianceModel::II),
        "III" | "3" => Ok(ComplianceModel::III),
        "IV" | "4" => Ok(ComplianceModel::IV),
        _ => Err(format!("unknown model '{s}'")),
    }
}

enum Failure {
    Input { kind: &'static str, message: String, issues: Vec<Issue> },
    Runtime(EngineError),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let kind = match e {
            LoadError::Io { .. } => "io",
            LoadError::Schema { .. } => "schema",
            LoadError::Invalid(_) => "validation",
        };
        Failure::Input { kind, message: e.to_string(), issues: e.issues() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Runtime(e)
    }
}

impl Inputs {
    fn files(&self) -> Result<ScenarioFiles, Failure> {
        let base = self.dir.as_ref().map(ScenarioFiles::in_dir);
        let pick = |flag: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| {
            flag.clone().or_else(|| from_dir.cloned()).ok_or_else(|| Failure::Input {
                kind: "usage",
                message: format!("--{name} is required without --dir"),
                issues: Vec::new(),
            })
        };
        Ok(ScenarioFiles {
            network: pick(&self.network, base.as_ref().map(|b| &b.network), "network")?,
            paths: pick(&self.paths, base.as_ref().map(|b| &b.paths), "paths")?,
            demand: pick(&self.demand, base.as_ref().map(|b| &b.demand), "demand")?,
            tolerances: self.tolerances.clone().or_else(|| base.as_ref().and_then(|b| b.tolerances.clone())),
            vms: self.vms.clone().or_else(|| base.as_ref().and_then(|b| b.vms.clone())),
            config: pick(&self.config, base.as_ref().map(|b| &b.config), "config")?,
        })
    }

    fn load(&self) -> Result<Scenario, Failure> {
        let scenario = load_scenario(&self.files()?)?;
        for w in &scenario.warnings {
            log::warn!("{w}");
        }
        Ok(scenario)
    }
}

fn out_dir(out: &OutDir, scenario: Option<&Scenario>) -> PathBuf {
    out.out
        .clone()
        .or_else(|| scenario.and_then(|s| s.config.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { inputs, out, dump_dnl } => {
            let scenario = inputs.load()?;
            let dir = out_dir(&out, Some(&scenario));
            let outcome = run_day_to_day(&scenario, None)?;
            let summary = scenario::write_outputs(&outcome, &scenario, &dir)?;
            scenario::emit_plot_data(&outcome, &scenario, &dir)?;
            if dump_dnl || scenario.config.dump_dnl {
                scenario::dump_dnl(&outcome.final_dnl, &scenario, &dir)?;
            }
            print_json(&json!({ "output_dir": dir, "summary": summary }));
        }
        Command::Validate { inputs } => {
            let scenario = inputs.load()?;
            print_json(&json!({
                "valid": true,
                "links": scenario.network.links.len(),
                "paths": scenario.paths.len(),
                "ods": scenario.ods.len(),
                "signs": scenario.signs.len(),
                "affected_pairs": scenario.affected_partitions().count(),
                "bins": scenario.grid.n_bins(),
                "warnings": scenario.warnings,
            }));
        }
        Command::Fixtures { which, out } => {
            let dir = out_dir(&out, None);
            let inputs = match which {
                Fixture::Fig1 => scenario::fig1(),
                Fixture::Corridor => scenario::corridor(&CorridorSpec::default()),
            };
            inputs.write_to(&dir).map_err(EngineError::from)?;
            print_json(&json!({ "output_dir": dir }));
        }
        Command::Sweep { inputs, out, param, values, models } => {
            let scenario = inputs.load()?;
            let dir = out_dir(&out, Some(&scenario));
            let models = if models.is_empty() { vec![scenario.config.compliance.model] } else { models };
            let rows = scenario::run_sweep(&scenario, param, &values, &models)?;
            scenario::write_sensitivity_table(&rows, &dir)?;
            print_json(&json!({ "output_dir": dir, "rows": rows }));
        }
    }
    Ok(())
}

fn report(kind: &str, message: &str, issues: &[Issue]) {
    let body = json!({ "error": { "kind": kind, "message": message, "issues": issues } });
    eprintln!("{}", serde_json::to_string(&body).expect("json value serializes"));
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 ok, 1 input error, 2 runtime error.
pub fn cli_run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            report("usage", e.to_string().trim(), &[]);
            return EXIT_INPUT;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input { kind, message, issues }) => {
            report(kind, &message, &issues);
            EXIT_INPUT
        }
        Err(Failure::Runtime(e)) => {
            report("runtime", &e.to_string(), &[]);
            EXIT_RUNTIME
        }
    }
}
