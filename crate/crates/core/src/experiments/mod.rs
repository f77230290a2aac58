//! Scenario generation, trajectory statistics, sweeps and report emission.

pub mod detect;
pub mod generator;
pub mod report;
pub mod sweep;

pub use detect::{
    default_burn_in, detect_convergence, detect_limit_cycle, ConvergenceReport, CycleReport,
    DEFAULT_CYCLE_TOL, DEFAULT_MAX_MULTIPLE, MAX_BURN_IN,
};
pub use generator::{generate_synthetic, OverlaySpec, SyntheticNetSpec};
pub use report::{node_color, node_color_hex, write_color_csv, write_json, write_sweep_csv, write_trajectory_csv};
pub use sweep::{instantiate, sweep, SweepConfig, SweepParam, SweepReport, SweepRow};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_system_matrices, simulate, PeriodicSchedule, StateVector, Trajectory};
use crate::spectral::monodromy_radius;

/// Initial condition: `zero | node:<i> | uniform:<c> | file:<path>`, or an
/// explicit vector when built in code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    Zero,
    /// Node `i` fully infected, all others healthy.
    Node(usize),
    Uniform(f64),
    /// JSON array of `n` numbers.
    File(PathBuf),
    Vector(Vec<f64>),
}

impl InitSpec {
    pub fn resolve(&self, n: usize) -> Result<StateVector> {
        let values = match self {
            Self::Zero => vec![0.0; n],
            Self::Node(i) if *i < n => {
                let mut v = vec![0.0; n];
                v[*i] = 1.0;
                v
            }
            Self::Node(i) => {
                return Err(Error::InvalidArgument(format!("node {i} out of range for n = {n}")));
            }
            Self::Uniform(c) => vec![*c; n],
            Self::File(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            Self::Vector(v) => v.clone(),
        };
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len() });
        }
        StateVector::new(values)
    }
}

impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad init spec {s:?}; expected zero | node:<i> | uniform:<c> | file:<path>"));
        if s == "zero" {
            return Ok(Self::Zero);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "node" => arg.parse().map(Self::Node).map_err(|_| bad()),
            "uniform" => {
                let c: f64 = arg.parse().map_err(|_| bad())?;
                if (0.0..=1.0).contains(&c) {
                    Ok(Self::Uniform(c))
                } else {
                    Err(Error::InvalidArgument(format!("uniform level {c} outside [0, 1]")))
                }
            }
            "file" if !arg.is_empty() => Ok(Self::File(arg.into())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("zero"),
            Self::Node(i) => write!(f, "node:{i}"),
            Self::Uniform(c) => write!(f, "uniform:{c}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
            Self::Vector(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSource {
    File {
        path: PathBuf,
        #[serde(default)]
        transpose: bool,
    },
    Synthetic(SyntheticNetSpec),
}

impl ScheduleSource {
    pub fn load(&self) -> Result<PeriodicSchedule> {
        match self {
            Self::File { path, transpose } => PeriodicSchedule::from_path(path, *transpose),
            Self::Synthetic(spec) => generate_synthetic(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    /// `None` uses [`default_burn_in`].
    pub burn_in: Option<usize>,
    pub cycle_tol: f64,
    pub max_multiple: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { burn_in: None, cycle_tol: DEFAULT_CYCLE_TOL, max_multiple: DEFAULT_MAX_MULTIPLE }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutputs {
    pub trajectory_csv: Option<PathBuf>,
    pub color_csv: Option<PathBuf>,
    /// Sampling stride of the colour rows.
    pub color_every: Option<usize>,
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schedule: ScheduleSource,
    pub init: InitSpec,
    pub steps: usize,
    /// Threshold for [`detect_convergence`]; `None` skips it.
    pub convergence_tol: Option<f64>,
    /// `None` skips cycle detection.
    pub cycle: Option<CycleOptions>,
    #[serde(default)]
    pub outputs: ScenarioOutputs,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub rho_monodromy: f64,
    pub steps: usize,
    pub final_state: Vec<f64>,
    pub convergence: Option<ConvergenceReport>,
    pub cycle: Option<CycleReport>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

/// Loads the schedule, simulates, runs the enabled detectors and writes the
/// requested files.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let schedule = cfg.schedule.load()?;
    let mats = build_system_matrices(&schedule);
    let x0 = cfg.init.resolve(schedule.n())?;
    let rho = monodromy_radius(&mats.m)?;
    let trajectory = simulate(&mats, &x0, cfg.steps)?;
    let convergence = cfg.convergence_tol.map(|tol| detect_convergence(&trajectory, tol));
    let cycle = cfg.cycle.map(|c| {
        let burn_in = c.burn_in.unwrap_or_else(|| default_burn_in(schedule.p(), rho));
        detect_limit_cycle(&trajectory, schedule.p(), burn_in, c.cycle_tol, c.max_multiple)
    });
    let outcome = ScenarioOutcome {
        rho_monodromy: rho,
        steps: cfg.steps,
        final_state: trajectory.states.last().cloned().unwrap_or_default(),
        convergence,
        cycle,
        trajectory,
    };
    let o = &cfg.outputs;
    if let Some(path) = &o.trajectory_csv {
        report::write_csv_file(path, |w| write_trajectory_csv(&outcome.trajectory, w))?;
    }
    if let Some(path) = &o.color_csv {
        report::write_csv_file(path, |w| write_color_csv(&outcome.trajectory, o.color_every.unwrap_or(1), w))?;
    }
    if let Some(path) = &o.report_json {
        write_json(&outcome, path)?;
    }
    Ok(outcome)
}
