//! `psis`: analysis, control synthesis and simulation of periodic SIS
//! epidemics from the command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 infeasible or uncontrollable
//! request. Stability verdicts are reported in the JSON output, not through
//! the exit code.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use periodic_sis::control::{minimal_gamma, synthesize, GammaSearch, GammaSpec};
use periodic_sis::experiments::{
    default_burn_in, detect_convergence, detect_limit_cycle, generate_synthetic, sweep, write_color_csv,
    write_sweep_csv, write_trajectory_csv, InitSpec, SweepConfig, SweepParam, SyntheticNetSpec,
    DEFAULT_CYCLE_TOL, DEFAULT_MAX_MULTIPLE,
};
use periodic_sis::spectral::monodromy_radius;
use periodic_sis::{
    build_system_matrices, classify, simulate, validate_schedule, ClassifyOptions, Error, PeriodicSchedule,
    FORMAT_VERSION,
};

#[derive(Parser, Debug)]
#[command(name = "psis", version, about = "Periodic SIS epidemics: stability analysis, control and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ScheduleArg {
    /// Schedule JSON file; edges are [i, j, w] meaning j -> i.
    schedule: PathBuf,
    /// Read edges as [source, target, w] instead.
    #[arg(long)]
    transpose: bool,
}

impl ScheduleArg {
    fn load(&self) -> anyhow::Result<PeriodicSchedule> {
        PeriodicSchedule::from_path(&self.schedule, self.transpose)
            .with_context(|| format!("reading schedule {}", self.schedule.display()))
    }
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    /// Longest product length enumerated for the JSR bounds.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=64))]
    jsr_depth: u32,
    /// Half-width of the band around rho = 1 treated as the boundary.
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    tol_eq: f64,
}

impl AnalysisArgs {
    fn options(&self) -> ClassifyOptions {
        ClassifyOptions { tol_eq: self.tol_eq, jsr_depth: self.jsr_depth as usize, ..ClassifyOptions::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the standing assumptions; exit 0 iff A2 and A3 hold.
    Validate {
        #[command(flatten)]
        input: ScheduleArg,
    },
    /// Classify the disease-free equilibrium and print the stability report.
    Analyze {
        #[command(flatten)]
        input: ScheduleArg,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate and write the trajectory CSV.
    Simulate {
        #[command(flatten)]
        input: ScheduleArg,
        /// zero | node:<i> | uniform:<c> | file:<path>
        #[arg(long, value_parser = parse_init)]
        init: InitSpec,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write node colours as k,node,channel rows.
        #[arg(long)]
        color_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        color_every: u64,
    },
    /// Apply the distributed healing-rate law and write the controlled schedule.
    Synthesize {
        #[command(flatten)]
        input: ScheduleArg,
        /// Scalar gain or one value per node, comma separated.
        #[arg(long, value_parser = parse_list)]
        gamma: Floats,
        /// Controlled phases, comma separated (default: all).
        #[arg(long, value_parser = parse_index_list)]
        phases: Option<Indices>,
        /// Healing rate(s) for uncontrolled phases (default: keep the schedule's).
        #[arg(long, value_parser = parse_list)]
        fallback_delta: Option<Floats>,
        #[arg(long)]
        out: PathBuf,
        /// Write the control plan here instead of stdout.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Smallest homogeneous gain with monodromy radius one.
    MinGamma {
        #[command(flatten)]
        input: ScheduleArg,
        #[arg(long, value_parser = parse_index_list)]
        phases: Option<Indices>,
        #[arg(long, value_parser = parse_list)]
        fallback_delta: Option<Floats>,
        #[arg(long, value_parser = nonnegative)]
        lo: f64,
        #[arg(long, value_parser = nonnegative)]
        hi: f64,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
    },
    /// Sweep one parameter and report rho, classification and convergence per value.
    Sweep {
        #[command(flatten)]
        input: ScheduleArg,
        /// delta | gamma | h
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_parser = parse_list)]
        values: Floats,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value = "uniform:0.5", value_parser = parse_init)]
        init: InitSpec,
        /// Controlled phases for gamma sweeps (default: all).
        #[arg(long, value_parser = parse_index_list)]
        phases: Option<Indices>,
        #[arg(long, value_parser = parse_list)]
        fallback_delta: Option<Floats>,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        conv_tol: f64,
        /// CSV summary; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full JSON report including xbar series.
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Generate a seeded synthetic schedule.
    Generate {
        /// Network spec JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate and look for a limit cycle.
    Cycle {
        #[command(flatten)]
        input: ScheduleArg,
        #[arg(long, value_parser = parse_init)]
        init: InitSpec,
        #[arg(long)]
        steps: usize,
        /// Default 10 p / |1 - rho|, capped at 1e5.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CYCLE_TOL, value_parser = positive)]
        cycle_tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_MULTIPLE)]
        max_multiple: usize,
    },
}

/// Failure carrying its exit code.
enum Failure {
    Invalid(anyhow::Error),
    Infeasible(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Invalid(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Invalid(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Invalid(e.into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a nonnegative number")),
    }
}

/// Comma-separated numbers, kept as one argument value.
#[derive(Clone, Debug)]
struct Floats(Vec<f64>);

#[derive(Clone, Debug)]
struct Indices(Vec<usize>);

fn parse_list(s: &str) -> Result<Floats, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{v:?} is not a finite number"))
        })
        .collect::<Result<_, _>>()
        .map(Floats)
}

fn parse_index_list(s: &str) -> Result<Indices, String> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| format!("{v:?} is not a phase index")))
        .collect::<Result<_, _>>()
        .map(Indices)
}

fn parse_init(s: &str) -> Result<InitSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Adds the format tag to a serialized report.
fn tagged<T: Serialize>(value: &T) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(value)?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("spec_version".into(), Value::String(FORMAT_VERSION.into()));
            Ok(v)
        }
        None => Err(anyhow!("report is not a JSON object")),
    }
}

fn emit_json(value: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn gamma_spec(values: &[f64]) -> GammaSpec {
    match values {
        [g] => GammaSpec::Scalar(*g),
        _ => GammaSpec::PerNode(values.to_vec()),
    }
}

fn fallback(values: Option<&[f64]>, n: usize) -> anyhow::Result<Option<Vec<f64>>> {
    match values {
        None => Ok(None),
        Some([d]) => Ok(Some(vec![*d; n])),
        Some(v) if v.len() == n => Ok(Some(v.to_vec())),
        Some(v) => Err(anyhow!("fallback delta has {} entries for {n} nodes", v.len())),
    }
}

fn all_phases(phases: Option<Indices>, p: usize) -> Vec<usize> {
    phases.map_or_else(|| (0..p).collect(), |i| i.0)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { input } => {
            let schedule = input.load()?;
            let report = validate_schedule(&schedule, false)?;
            let mut v = tagged(&report)?;
            v["well_posed"] = Value::Bool(report.well_posed());
            v["connectivity_ok"] = Value::Bool(report.connectivity_ok());
            emit_json(&v, None)?;
            if !report.well_posed() {
                return Err(Failure::Invalid(anyhow!("assumptions A2/A3 fail")));
            }
        }
        Command::Analyze { input, analysis, out } => {
            let schedule = input.load()?;
            let mats = build_system_matrices(&schedule);
            let report = classify(&schedule, &mats, &analysis.options())?;
            emit_json(&tagged(&report)?, out.as_deref())?;
        }
        Command::Simulate { input, init, steps, out, color_out, color_every } => {
            let schedule = input.load()?;
            let mats = build_system_matrices(&schedule);
            let traj = simulate(&mats, &init.resolve(schedule.n())?, steps)?;
            let mut w = create(&out)?;
            write_trajectory_csv(&traj, &mut w)?;
            w.flush()?;
            if let Some(path) = color_out {
                let mut w = create(&path)?;
                write_color_csv(&traj, color_every as usize, &mut w)?;
                w.flush()?;
            }
        }
        Command::Synthesize { input, gamma, phases, fallback_delta, out, plan_out, analysis } => {
            let schedule = input.load()?;
            let phases = all_phases(phases, schedule.p());
            let fb = fallback(fallback_delta.as_ref().map(|f| f.0.as_slice()), schedule.n())?;
            let (mut plan, controlled) = synthesize(&schedule, &gamma_spec(&gamma.0), &phases, fb.as_deref())?;
            controlled.write_to(&out).with_context(|| format!("writing {}", out.display()))?;
            if validate_schedule(&controlled, false)?.well_posed() {
                plan.assess(&controlled, &analysis.options())?;
            }
            emit_json(&tagged(&plan)?, plan_out.as_deref())?;
            if !plan.feasible {
                return Err(Failure::Infeasible(anyhow!(
                    "gain violates h*sum_j bbar_ij + h*gamma_i <= 1 at {} (phase, node) pairs",
                    plan.infeasibilities.len()
                )));
            }
        }
        Command::MinGamma { input, phases, fallback_delta, lo, hi, tol } => {
            let schedule = input.load()?;
            let phases = all_phases(phases, schedule.p());
            let fb = fallback(fallback_delta.as_ref().map(|f| f.0.as_slice()), schedule.n())?;
            let search = GammaSearch { lo, hi, tol, ..GammaSearch::new(lo, hi) };
            match minimal_gamma(&schedule, &phases, fb.as_deref(), &search) {
                Ok(found) => emit_json(&tagged(&found)?, None)?,
                Err(e @ Error::InvalidBracket { .. }) => return Err(Failure::Infeasible(e.into())),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Sweep {
            input,
            param,
            values,
            steps,
            init,
            phases,
            fallback_delta,
            conv_tol,
            out,
            json_out,
            analysis,
        } => {
            let schedule = input.load()?;
            let cfg = SweepConfig {
                steps,
                init,
                conv_tol,
                classify: analysis.options(),
                controllable_phases: phases.map(|p| p.0),
                fallback_delta: fallback(fallback_delta.as_ref().map(|f| f.0.as_slice()), schedule.n())?,
                keep_series: json_out.is_some(),
            };
            let report = sweep(&schedule, param, &values.0, &cfg);
            match &out {
                Some(path) => {
                    let mut w = create(path)?;
                    write_sweep_csv(&report, &mut w)?;
                    w.flush()?;
                }
                None => write_sweep_csv(&report, io::stdout().lock())?,
            }
            if let Some(path) = json_out {
                emit_json(&tagged(&report)?, Some(&path))?;
            }
        }
        Command::Generate { spec, seed, out } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut net: SyntheticNetSpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            if let Some(s) = seed {
                net.seed = s;
            }
            let schedule = generate_synthetic(&net)?;
            schedule.write_to(&out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Cycle { input, init, steps, burn_in, cycle_tol, max_multiple } => {
            let schedule = input.load()?;
            let mats = build_system_matrices(&schedule);
            let rho = monodromy_radius(&mats.m)?;
            let traj = simulate(&mats, &init.resolve(schedule.n())?, steps)?;
            let burn_in = burn_in.unwrap_or_else(|| default_burn_in(schedule.p(), rho));
            let cycle = detect_limit_cycle(&traj, schedule.p(), burn_in, cycle_tol, max_multiple);
            let mut v = tagged(&cycle)?;
            v["rho_monodromy"] = rho.into();
            v["convergence"] = serde_json::to_value(detect_convergence(&traj, 1e-6)).map_err(anyhow::Error::from)?;
            emit_json(&v, None)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(e)) => {
            eprintln!("infeasible: {e:#}");
            ExitCode::from(2)
        }
    }
}
