//! One-parameter sweeps over a schedule template.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detect::{detect_convergence, ConvergenceReport};
use super::InitSpec;
use crate::control::{synthesize, GammaSpec};
use crate::error::{Error, Result};
use crate::model::{build_system_matrices, simulate, validate_schedule, PeriodicSchedule};
use crate::stability::{classify, Classification, ClassifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Homogeneous healing rate in every phase.
    DeltaScalar,
    /// Homogeneous control gain on the configured phases.
    GammaScalar,
    H,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" | "delta_scalar" => Ok(Self::DeltaScalar),
            "gamma" | "gamma_scalar" => Ok(Self::GammaScalar),
            "h" => Ok(Self::H),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep parameter {other:?} (expected delta, gamma or h)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub steps: usize,
    pub init: InitSpec,
    /// Threshold on `||x||_inf` for convergence.
    pub conv_tol: f64,
    pub classify: ClassifyOptions,
    /// Controlled phases for gamma sweeps; `None` means all.
    pub controllable_phases: Option<Vec<usize>>,
    pub fallback_delta: Option<Vec<f64>>,
    /// Keep the `xbar` series of every row.
    pub keep_series: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            init: InitSpec::Uniform(0.5),
            conv_tol: 1e-6,
            classify: ClassifyOptions::default(),
            controllable_phases: None,
            fallback_delta: None,
            keep_series: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param_value: f64,
    /// A2-A3 hold for the instantiated schedule.
    pub valid: bool,
    pub rho: Option<f64>,
    pub classification: Option<Classification>,
    pub convergence: Option<ConvergenceReport>,
    pub xbar: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
}

/// The template with the swept parameter set to `value`.
pub fn instantiate(
    template: &PeriodicSchedule,
    param: SweepParam,
    value: f64,
    cfg: &SweepConfig,
) -> Result<PeriodicSchedule> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("sweep value {value} is not finite")));
    }
    match param {
        SweepParam::DeltaScalar => {
            template.with_deltas(vec![vec![value; template.n()]; template.p()])
        }
        SweepParam::H => template.with_h(value),
        SweepParam::GammaScalar => {
            let all: Vec<usize> = (0..template.p()).collect();
            let phases = cfg.controllable_phases.as_deref().unwrap_or(&all);
            synthesize(template, &GammaSpec::Scalar(value), phases, cfg.fallback_delta.as_deref())
                .map(|(_, s)| s)
        }
    }
}

fn run_row(template: &PeriodicSchedule, param: SweepParam, value: f64, cfg: &SweepConfig) -> SweepRow {
    let mut row = SweepRow {
        param_value: value,
        valid: false,
        rho: None,
        classification: None,
        convergence: None,
        xbar: Vec::new(),
        error: None,
    };
    let analysed = (|| -> Result<()> {
        let schedule = instantiate(template, param, value, cfg)?;
        let validation = validate_schedule(&schedule, false)?;
        if !validation.well_posed() {
            return Err(Error::AssumptionViolated {
                assumption: "A2/A3",
                detail: format!("fails at {param:?} = {value}"),
            });
        }
        row.valid = true;
        let mats = build_system_matrices(&schedule);
        let report = classify(&schedule, &mats, &cfg.classify)?;
        row.rho = Some(report.rho_monodromy);
        row.classification = Some(report.classification);
        let traj = simulate(&mats, &cfg.init.resolve(schedule.n())?, cfg.steps)?;
        row.convergence = Some(detect_convergence(&traj, cfg.conv_tol));
        if cfg.keep_series {
            row.xbar = traj.xbar;
        }
        Ok(())
    })();
    if let Err(e) = analysed {
        row.error = Some(e.to_string());
    }
    row
}

/// One row per value, in input order. Rows are computed in parallel.
pub fn sweep(template: &PeriodicSchedule, param: SweepParam, values: &[f64], cfg: &SweepConfig) -> SweepReport {
    let rows = values.par_iter().map(|&v| run_row(template, param, v, cfg)).collect();
    SweepReport { param, rows }
}
