//! Classification of the disease-free equilibrium, Lyapunov certificates,
//! rate bounds and the lifted reformulation.

pub mod certificate;
pub mod lifted;
pub mod rate;

pub use certificate::{
    certificate_defect, lyapunov_certificate, semidefinite_certificate, strict_certificate,
    CertificateMode, LyapunovCertificate, SEMIDEFINITE_DEFECT_TOL,
};
pub use lifted::{lifted_simulate, stacked_prefix, LiftedSystem};
pub use rate::{rate_bound, RateBound};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{validate_schedule, PeriodicSchedule, SystemMatrices};
use crate::spectral::{jsr_bounds_with_budget, lift_radius, monodromy, JsrBounds, DEFAULT_PRODUCT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "GES")]
    Ges,
    #[serde(rename = "GAS_BOUNDARY")]
    GasBoundary,
    #[serde(rename = "UNSTABLE")]
    Unstable,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ges => "GES",
            Self::GasBoundary => "GAS_BOUNDARY",
            Self::Unstable => "UNSTABLE",
            Self::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Half-width of the band around `rho = 1` treated as the boundary.
    pub tol_eq: f64,
    pub jsr_depth: usize,
    pub jsr_budget: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol_eq: 1e-9, jsr_depth: 6, jsr_budget: DEFAULT_PRODUCT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionStatus {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub a5: bool,
}

impl AssumptionStatus {
    pub fn well_posed(&self) -> bool {
        self.a1 && self.a2 && self.a3
    }

    pub fn connectivity_ok(&self) -> bool {
        self.a4 && self.a5
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub rho_monodromy: f64,
    /// Radii of `M_{k+p:k}` for every starting phase.
    pub rho_per_phase: Vec<f64>,
    /// `rho(Mtilde) = rho_monodromy^(1/p)`.
    pub rho_lift: f64,
    pub jsr_lower: f64,
    pub jsr_upper: f64,
    /// `jsr_upper < 1`, the stricter sufficient condition for GES.
    pub jsr_certifies_ges: bool,
    /// `max rho(P)^(1/p)` over products of exactly `p` factors.
    pub jsr_at_period: Option<f64>,
    pub jsr: JsrBounds,
    pub classification: Classification,
    pub assumptions: AssumptionStatus,
    pub certificate: Option<LyapunovCertificate>,
    pub rate_bound: Option<f64>,
    pub sigma: Option<RateBound>,
    pub options: ClassifyOptions,
    pub notes: Vec<String>,
}

/// Classifies the disease-free equilibrium from the monodromy radius and the
/// connectivity assumptions, and attaches a certificate where one exists.
///
/// Numerical trouble in the certificate stage is recorded in `notes`; only
/// failures of the spectral computations themselves are returned as errors.
pub fn classify(schedule: &PeriodicSchedule, mats: &SystemMatrices, opts: &ClassifyOptions) -> Result<StabilityReport> {
    let validation = validate_schedule(schedule, false)?;
    let assumptions = AssumptionStatus {
        a1: validation.a1.passed,
        a2: validation.a2.passed,
        a3: validation.a3.passed,
        a4: validation.a4.passed,
        a5: validation.a5.passed,
    };
    let mono = monodromy(&mats.m)?;
    let rho = mono.radius();
    let jsr = jsr_bounds_with_budget(&mats.m, opts.jsr_depth, opts.jsr_budget)?;
    let tol = opts.tol_eq;

    let mut notes = Vec::new();
    let classification = if !assumptions.well_posed() {
        notes.push("assumptions A1-A3 fail; the linear analysis does not apply".into());
        Classification::Inconclusive
    } else if rho < 1.0 - tol {
        Classification::Ges
    } else if rho <= 1.0 + tol {
        if assumptions.connectivity_ok() {
            Classification::GasBoundary
        } else {
            notes.push("rho is within tol_eq of 1 but A4/A5 fail".into());
            Classification::Inconclusive
        }
    } else if assumptions.connectivity_ok() {
        Classification::Unstable
    } else {
        notes.push("rho exceeds 1 but A4/A5 fail, so instability is not established".into());
        Classification::Inconclusive
    };
    if jsr.truncated {
        notes.push(format!("JSR enumeration stopped at depth {} by the product budget", jsr.depth));
    }

    let (mut certificate, mut sigma) = (None, None);
    match classification {
        Classification::Ges => match strict_certificate(mats) {
            Ok(cert) => {
                match rate_bound(&cert, mats) {
                    Ok(rb) => sigma = Some(rb),
                    Err(e) => notes.push(format!("rate bound unavailable: {e}")),
                }
                certificate = Some(cert);
            }
            Err(e) => notes.push(format!("strict certificate failed: {e}")),
        },
        Classification::GasBoundary => match semidefinite_certificate(mats) {
            Ok(cert) => certificate = Some(cert),
            Err(e) => notes.push(format!("semidefinite certificate failed: {e}")),
        },
        _ => {}
    }

    Ok(StabilityReport {
        rho_monodromy: rho,
        rho_lift: lift_radius(rho, mats.p()),
        rho_per_phase: mono.rho,
        jsr_lower: jsr.lower,
        jsr_upper: jsr.upper,
        jsr_certifies_ges: jsr.upper < 1.0,
        jsr_at_period: jsr.at_length(mats.p()),
        jsr,
        classification,
        assumptions,
        certificate,
        rate_bound: sigma.map(|s| s.rate),
        sigma,
        options: *opts,
        notes,
    })
}
