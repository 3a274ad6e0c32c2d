//! `storsize` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 infeasible scenario or
//! capacity, 3 solver failure. JSON goes to stdout, diagnostics to stderr,
//! CSV artifacts to `--out`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use storsize_core::bounds::{bounds_report, BoundsReport};
use storsize_core::dispatch::{self, DispatchError};
use storsize_core::feasibility::{check_assumptions, partition, AssumptionCheck, FeasibilityReport};
use storsize_core::scenario::{synth_scenario, LoadKind, PvVariation, Scenario, SystemParams};
use storsize_core::sizing::{self, Algorithm, SavingsReport, SizingConfig, SizingError, SizingResult};

use crate::io::{self as sio, DispatchSummary, IoError};
use crate::json;
use crate::table::{emit_table, TableEntry};

#[derive(Debug, Parser)]
#[command(name = "storsize", version, about = "Battery sizing for grid-connected PV systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the scenario and check operability and economy.
    Check(ScenarioArgs),
    /// Closed-form cost envelope and capacity bracket.
    Bounds(ScenarioArgs),
    /// Optimal dispatch at one capacity.
    Dispatch {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Battery capacity, Wh.
        #[arg(long = "c-ref")]
        c_ref: f64,
        /// Directory for dispatch.csv and dispatch_summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical capacity search.
    Size {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Directory for the cost trace CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic scenario to disk.
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// File stem for the descriptor and CSV files.
        #[arg(long, default_value = "scenario")]
        name: String,
    },
    /// Size synthetic scenarios for several horizons and load types and
    /// print a summary table.
    Table {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        days: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "residential")]
        load: Vec<LoadArg>,
        #[arg(long = "pv-variation", value_enum, default_value = "low")]
        pv_variation: VariationArg,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        /// Directory for table.txt and table.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub days: usize,
    #[arg(long, value_enum, default_value = "residential")]
    pub load: LoadArg,
    #[arg(long = "pv-variation", value_enum, default_value = "low")]
    pub pv_variation: VariationArg,
    /// Sampling interval, hours.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario descriptor JSON; a synthetic scenario is generated when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Override a system parameter: eta_pv, eta_b, z, k, t_c_hours, d_watts.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long = "tau-cap", default_value_t = 10.0)]
    pub tau_cap: f64,
    #[arg(long = "tau-cost", default_value_t = 1e-4)]
    pub tau_cost: f64,
    #[arg(long, value_enum, default_value = "bisect")]
    pub algorithm: AlgorithmArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoadArg {
    Residential,
    Commercial,
}

impl From<LoadArg> for LoadKind {
    fn from(l: LoadArg) -> Self {
        match l {
            LoadArg::Residential => LoadKind::Residential,
            LoadArg::Commercial => LoadKind::Commercial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariationArg {
    Low,
    High,
}

impl From<VariationArg> for PvVariation {
    fn from(v: VariationArg) -> Self {
        match v {
            VariationArg::Low => PvVariation::Low,
            VariationArg::High => PvVariation::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Sweep,
    Bisect,
    Both,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Infeasible(String),
    Solver(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Infeasible(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DispatchError> for CliError {
    fn from(e: DispatchError) -> Self {
        match e {
            DispatchError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            DispatchError::Solver(_) => CliError::Solver(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SizingError> for CliError {
    fn from(e: SizingError) -> Self {
        match e {
            SizingError::Config { .. } | SizingError::DtMismatch { .. } => CliError::Validation(e.to_string()),
            SizingError::NotOperable(_) | SizingError::NotEconomic { .. } | SizingError::InfeasibleAtUpperBound { .. } => {
                CliError::Infeasible(e.to_string())
            }
            SizingError::Dispatch(d) => CliError::from(d),
        }
    }
}

/// Applies `name=value` overrides.
pub fn apply_params(mut params: SystemParams, overrides: &[String]) -> Result<SystemParams, CliError> {
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("cli: --param {o:?} must have the form NAME=VALUE")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("cli: --param {name}: {value:?} is not a number")))?;
        let slot = match name.trim() {
            "eta_pv" => &mut params.eta_pv,
            "eta_b" => &mut params.eta_b,
            "z" => &mut params.z,
            "k" => &mut params.k,
            "t_c_hours" => &mut params.t_c,
            "d_watts" => &mut params.d,
            other => {
                return Err(CliError::Validation(format!(
                    "cli: unknown parameter {other:?} (expected eta_pv, eta_b, z, k, t_c_hours or d_watts)"
                )))
            }
        };
        *slot = v;
    }
    params.validate().map_err(|e| CliError::Validation(format!("scenario: {e}")))?;
    Ok(params)
}

fn synthesize(args: &SynthArgs) -> Result<Scenario, CliError> {
    synth_scenario(args.load.into(), args.days, args.dt.unwrap_or(1.0), args.pv_variation.into())
        .map_err(|e| CliError::Validation(format!("scenario: {e}")))
}

pub fn resolve_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let base = match &args.scenario {
        Some(path) => {
            let sc = sio::load_scenario(path)?;
            if let Some(dt) = args.synth.dt {
                if (dt - sc.dt()).abs() > 1e-12 * dt.abs().max(1.0) {
                    return Err(CliError::Validation(format!(
                        "cli: --dt {dt} h does not match the scenario's sampling interval {} h",
                        sc.dt()
                    )));
                }
            }
            sc
        }
        None => synthesize(&args.synth)?,
    };
    let params = apply_params(*base.params(), &args.params)?;
    base.with_params(params).map_err(|e| CliError::Validation(format!("scenario: {e}")))
}

#[derive(Debug, Serialize)]
pub struct CheckOutput {
    pub assumptions: AssumptionCheck,
    pub reason: String,
    pub report: FeasibilityReport,
}

#[derive(Debug, Serialize)]
pub struct BoundsOutput {
    pub bounds: BoundsReport,
    pub k_threshold: f64,
}

#[derive(Debug, Serialize)]
pub struct Agreement {
    pub difference: f64,
    pub tau_cap: f64,
    pub within_tau: bool,
}

#[derive(Debug, Serialize)]
pub struct SizeOutput {
    pub results: Vec<SizingResult>,
    pub agreement: Option<Agreement>,
    pub bounds: BoundsReport,
    pub savings: SavingsReport,
}

fn sizing_config(search: &SearchArgs, scenario: &Scenario, algorithm: Algorithm) -> SizingConfig {
    SizingConfig { tau_cap: search.tau_cap, tau_cost: search.tau_cost, dt: scenario.dt(), algorithm }
}

fn algorithms(arg: AlgorithmArg) -> &'static [Algorithm] {
    match arg {
        AlgorithmArg::Sweep => &[Algorithm::Sweep],
        AlgorithmArg::Bisect => &[Algorithm::Bisect],
        AlgorithmArg::Both => &[Algorithm::Sweep, Algorithm::Bisect],
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Validation(format!("cli: cannot write output: {e}"))
}

fn create_dir(dir: &std::path::Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("cli: cannot create {}: {e}", dir.display())))
}

/// Runs one parsed command, writing JSON to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Check(args) => {
            let sc = resolve_scenario(args)?;
            let assumptions = check_assumptions(&sc);
            let report = partition(&sc);
            let output = CheckOutput { reason: assumptions.reason.describe(), assumptions, report };
            writeln!(out, "{}", json::to_string(&output)).map_err(out_err)?;
            if !output.assumptions.assumption1 {
                return Err(CliError::Infeasible(format!("feasibility: {}", output.reason)));
            }
            Ok(())
        }
        Command::Bounds(args) => {
            let sc = resolve_scenario(args)?;
            let output = BoundsOutput { bounds: bounds_report(&sc), k_threshold: storsize_core::feasibility::k_threshold(&sc) };
            writeln!(out, "{}", json::to_string(&output)).map_err(out_err)
        }
        Command::Dispatch { scenario, c_ref, out: dir } => {
            let sc = resolve_scenario(scenario)?;
            let sol = dispatch::optimal_cost(&sc, *c_ref)?;
            if let Some(dir) = dir {
                sio::save_dispatch(&sc, &sol, dir)?;
            }
            writeln!(out, "{}", json::to_string(&DispatchSummary::from(&sol))).map_err(out_err)
        }
        Command::Size { scenario, search, out: dir } => {
            let sc = resolve_scenario(scenario)?;
            let mut results = Vec::new();
            for &alg in algorithms(search.algorithm) {
                results.push(sizing::size(&sc, &sizing_config(search, &sc, alg))?);
            }
            if let Some(dir) = dir {
                create_dir(dir)?;
                for r in &results {
                    let name = match r.algorithm_used {
                        Algorithm::Sweep => "trace_sweep.csv",
                        Algorithm::Bisect => "trace_bisect.csv",
                    };
                    sio::write_trace_csv(&r.trace, &dir.join(name))?;
                }
            }
            let agreement = (results.len() == 2).then(|| {
                let difference = (results[0].c_critical - results[1].c_critical).abs();
                Agreement { difference, tau_cap: search.tau_cap, within_tau: difference <= search.tau_cap }
            });
            let savings = sizing::savings_report(&sc, &results[0]);
            let output = SizeOutput { results, agreement, bounds: bounds_report(&sc), savings };
            writeln!(out, "{}", json::to_string(&output)).map_err(out_err)
        }
        Command::Synth { synth, params, out: dir, name } => {
            let base = synthesize(synth)?;
            let p = apply_params(*base.params(), params)?;
            let sc = base.with_params(p).map_err(|e| CliError::Validation(format!("scenario: {e}")))?;
            let path = sio::save_scenario(&sc, dir, name)?;
            #[derive(Serialize)]
            struct Written {
                descriptor: String,
                samples: usize,
            }
            let w = Written { descriptor: path.display().to_string(), samples: sc.len() };
            writeln!(out, "{}", json::to_string(&w)).map_err(out_err)
        }
        Command::Table { days, load, pv_variation, dt, params, search, out: dir } => {
            let mut entries = Vec::new();
            for &l in load {
                for &d in days {
                    let synth = SynthArgs { days: d, load: l, pv_variation: *pv_variation, dt: *dt };
                    let sc = resolve_scenario(&ScenarioArgs { scenario: None, synth, params: params.clone() })?;
                    let alg = match search.algorithm {
                        AlgorithmArg::Sweep => Algorithm::Sweep,
                        AlgorithmArg::Bisect | AlgorithmArg::Both => Algorithm::Bisect,
                    };
                    let r = sizing::size(&sc, &sizing_config(search, &sc, alg))?;
                    let s = sizing::savings_report(&sc, &r);
                    entries.push(TableEntry {
                        horizon_hours: sc.horizon(),
                        load: l.into(),
                        c_critical: r.c_critical,
                        j_critical: s.j_critical,
                        j_max: s.j_max,
                    });
                }
            }
            let (text, csv) = emit_table(&entries);
            if let Some(dir) = dir {
                create_dir(dir)?;
                std::fs::write(dir.join("table.txt"), &text).map_err(out_err)?;
                std::fs::write(dir.join("table.csv"), &csv).map_err(out_err)?;
            }
            write!(out, "{text}").map_err(out_err)
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}
