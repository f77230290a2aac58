use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One directed, weighted contact.
///
/// `Edge { target: i, source: j, weight: w }` sets `a_ij = w`: infection
/// flows FROM node `j` TO node `i`. On disk an edge is the triple `[i, j, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Edge {
    pub target: usize,
    pub source: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(target: usize, source: usize, weight: f64) -> Self {
        Self { target, source, weight }
    }
}

impl From<(usize, usize, f64)> for Edge {
    fn from((target, source, weight): (usize, usize, f64)) -> Self {
        Self { target, source, weight }
    }
}

impl From<Edge> for (usize, usize, f64) {
    fn from(e: Edge) -> Self {
        (e.target, e.source, e.weight)
    }
}

/// Contact graph and epidemic rates for one phase of the period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPhase {
    pub adjacency: Vec<Edge>,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
}

impl GraphPhase {
    pub fn new(adjacency: Vec<Edge>, beta: Vec<f64>, delta: Vec<f64>) -> Self {
        Self { adjacency, beta, delta }
    }

    /// Weighted in-degree of every node scaled by its infection rate,
    /// i.e. the row sums of `B(k) A(k)`.
    pub fn infection_row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.beta.len()];
        for e in &self.adjacency {
            sums[e.target] += self.beta[e.target] * e.weight;
        }
        sums
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(format!("phase {k}: {msg}")));
        if self.beta.len() != n {
            return bad(format!("beta has length {}, expected {n}", self.beta.len()));
        }
        if self.delta.len() != n {
            return bad(format!("delta has length {}, expected {n}", self.delta.len()));
        }
        if let Some(i) = self.beta.iter().position(|b| !b.is_finite() || *b < 0.0) {
            return bad(format!("beta[{i}] = {} is not a finite nonnegative rate", self.beta[i]));
        }
        if let Some(i) = self.delta.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return bad(format!("delta[{i}] = {} is not a finite nonnegative rate", self.delta[i]));
        }
        let mut seen = HashSet::with_capacity(self.adjacency.len());
        for e in &self.adjacency {
            if e.target >= n || e.source >= n {
                return bad(format!("edge ({}, {}) references a node outside 0..{n}", e.target, e.source));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return bad(format!(
                    "edge ({}, {}) has weight {}; weights must be finite and positive",
                    e.target, e.source, e.weight
                ));
            }
            if !seen.insert((e.target, e.source)) {
                return bad(format!("duplicate edge ({}, {})", e.target, e.source));
            }
        }
        Ok(())
    }
}

/// A complete `p`-periodic system: phase `k` applies at every step `t` with
/// `t mod p == k`.
///
/// Construction (including deserialization) enforces the structural
/// invariants only. Whether the step size respects the rate bounds is a
/// separate question answered by [`validate_schedule`](crate::validate_schedule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct PeriodicSchedule {
    n: usize,
    h: f64,
    phases: Vec<GraphPhase>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    n: usize,
    p: usize,
    h: f64,
    phases: Vec<GraphPhase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawSchedule> for PeriodicSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        if raw.p != raw.phases.len() {
            return Err(Error::InvalidSchedule(format!(
                "p = {} but {} phases were given",
                raw.p,
                raw.phases.len()
            )));
        }
        PeriodicSchedule::new(raw.n, raw.h, raw.phases, raw.labels)
    }
}

impl From<PeriodicSchedule> for RawSchedule {
    fn from(s: PeriodicSchedule) -> Self {
        RawSchedule { n: s.n, p: s.phases.len(), h: s.h, phases: s.phases, labels: s.labels }
    }
}

impl PeriodicSchedule {
    pub fn new(
        n: usize,
        h: f64,
        phases: Vec<GraphPhase>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSchedule("n must be positive".into()));
        }
        if phases.is_empty() {
            return Err(Error::InvalidSchedule("period must be at least one phase".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidSchedule(format!("step size h = {h} must be positive")));
        }
        for (k, phase) in phases.iter().enumerate() {
            phase.check(n, k)?;
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidSchedule(format!(
                    "{} labels given for {n} nodes",
                    l.len()
                )));
            }
        }
        Ok(Self { n, h, phases, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.phases.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn phases(&self) -> &[GraphPhase] {
        &self.phases
    }

    /// Phase active at absolute step `t`.
    pub fn phase_at(&self, t: usize) -> &GraphPhase {
        &self.phases[t % self.phases.len()]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.n, h, self.phases.clone(), self.labels.clone())
    }

    /// Replaces the healing rates of every phase.
    pub fn with_deltas(&self, deltas: Vec<Vec<f64>>) -> Result<Self> {
        if deltas.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: deltas.len() });
        }
        let phases = self
            .phases
            .iter()
            .zip(deltas)
            .map(|(ph, delta)| GraphPhase { delta, ..ph.clone() })
            .collect();
        Self::new(self.n, self.h, phases, self.labels.clone())
    }

    /// Swaps every edge's endpoints, for data recorded as `a_ji` (source, target).
    pub fn transposed(&self) -> Self {
        let phases = self
            .phases
            .iter()
            .map(|ph| GraphPhase {
                adjacency: ph
                    .adjacency
                    .iter()
                    .map(|e| Edge::new(e.source, e.target, e.weight))
                    .collect(),
                ..ph.clone()
            })
            .collect();
        Self { phases, ..self.clone() }
    }

    /// Largest `sum_j beta_i a_ij` over all nodes and phases.
    pub fn max_infection_row_sum(&self) -> f64 {
        self.phases
            .iter()
            .flat_map(|ph| ph.infection_row_sums())
            .fold(0.0, f64::max)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a schedule file; `transpose` accepts column-convention edge lists.
    pub fn from_path(path: impl AsRef<Path>, transpose: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let s = Self::from_json_str(&text)?;
        Ok(if transpose { s.transposed() } else { s })
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
