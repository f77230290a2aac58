//! Seeded synthetic networks: a binary nearest-neighbour ring shared by all
//! phases plus an independent random weighted overlay per phase.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Edge, GraphPhase, PeriodicSchedule};

/// Random directed overlay drawn independently for every phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlaySpec {
    /// Probability of each ordered pair `i != j`.
    #[serde(default)]
    pub edge_prob: f64,
    #[serde(default = "one")]
    pub weight_min: f64,
    #[serde(default = "one")]
    pub weight_max: f64,
}

impl Default for OverlaySpec {
    fn default() -> Self {
        Self { edge_prob: 0.0, weight_min: 1.0, weight_max: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticNetSpec {
    pub n: usize,
    pub p: usize,
    /// Each node hears from its `ring_width` neighbours on either side.
    #[serde(default = "default_width")]
    pub ring_width: usize,
    #[serde(default)]
    pub overlay: OverlaySpec,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub delta: f64,
    /// Per-phase healing rates overriding `delta`.
    #[serde(default)]
    pub phase_delta: Option<Vec<f64>>,
    /// Fixed step size; when absent `h = h_scale / max(delta, max row sum)`.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default = "one")]
    pub h_scale: f64,
    #[serde(default)]
    pub seed: u64,
    /// Reject draws in which some phase has no edge between distinct nodes.
    #[serde(default)]
    pub require_a4: bool,
}

fn default_width() -> usize {
    1
}

impl SyntheticNetSpec {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            ring_width: 1,
            overlay: OverlaySpec::default(),
            beta: 1.0,
            delta: 1.0,
            phase_delta: None,
            h: None,
            h_scale: 1.0,
            seed,
            require_a4: false,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n < 2 || self.p < 1 {
            return bad(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p));
        }
        let o = &self.overlay;
        if !(0.0..=1.0).contains(&o.edge_prob) {
            return bad(format!("edge probability {} outside [0, 1]", o.edge_prob));
        }
        if !(o.weight_min > 0.0 && o.weight_min <= o.weight_max && o.weight_max.is_finite()) {
            return bad(format!("bad weight range [{}, {}]", o.weight_min, o.weight_max));
        }
        if !(self.beta >= 0.0 && self.delta >= 0.0 && self.beta.is_finite() && self.delta.is_finite()) {
            return bad("beta and delta must be finite and nonnegative".into());
        }
        if let Some(d) = &self.phase_delta {
            if d.len() != self.p {
                return Err(Error::DimensionMismatch { expected: self.p, found: d.len() });
            }
        }
        if !(self.h_scale > 0.0 && self.h_scale <= 1.0) {
            return bad(format!("h_scale {} outside (0, 1]", self.h_scale));
        }
        Ok(())
    }

    fn phase_delta(&self, k: usize) -> f64 {
        self.phase_delta.as_ref().map_or(self.delta, |d| d[k])
    }
}

fn ring_edges(n: usize, width: usize) -> BTreeMap<(usize, usize), f64> {
    let mut edges = BTreeMap::new();
    for i in 0..n {
        for s in 1..=width.min(n - 1) {
            for j in [(i + s) % n, (i + n - s) % n] {
                if j != i {
                    edges.insert((i, j), 1.0);
                }
            }
        }
    }
    edges
}

/// Deterministic in `spec` (including its seed).
pub fn generate_synthetic(spec: &SyntheticNetSpec) -> Result<PeriodicSchedule> {
    spec.check()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ring = ring_edges(n, spec.ring_width);
    let o = spec.overlay;

    let mut adjacency = Vec::with_capacity(spec.p);
    for k in 0..spec.p {
        let mut edges = ring.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j && o.edge_prob > 0.0 && rng.gen_bool(o.edge_prob) {
                    let w = if o.weight_max > o.weight_min {
                        rng.gen_range(o.weight_min..o.weight_max)
                    } else {
                        o.weight_min
                    };
                    *edges.entry((i, j)).or_insert(0.0) += w;
                }
            }
        }
        if spec.require_a4 && (edges.is_empty() || spec.beta == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "phase {k} has no infection edge; raise the edge probability or ring width"
            )));
        }
        adjacency.push(edges);
    }

    let max_in = adjacency
        .iter()
        .flat_map(|edges| {
            let mut sums = vec![0.0; n];
            for (&(i, _), w) in edges {
                sums[i] += w;
            }
            sums
        })
        .fold(0.0, f64::max);
    let max_delta = (0..spec.p).map(|k| spec.phase_delta(k)).fold(0.0, f64::max);
    let h = match spec.h {
        Some(h) => h,
        None => {
            let worst = max_delta.max(spec.beta * max_in);
            if worst > 0.0 {
                spec.h_scale / worst
            } else {
                spec.h_scale
            }
        }
    };

    let phases = adjacency
        .into_iter()
        .enumerate()
        .map(|(k, edges)| {
            GraphPhase::new(
                edges.into_iter().map(|((i, j), w)| Edge::new(i, j, w)).collect(),
                vec![spec.beta; n],
                vec![spec.phase_delta(k); n],
            )
        })
        .collect();
    PeriodicSchedule::new(n, h, phases, None)
}
