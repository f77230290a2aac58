//! Certified bounds on the joint spectral radius of a finite set of
//! nonnegative matrices, by exhaustive enumeration of products.
//!
//! For every product length `d` the lower bound takes `max rho(P)^(1/d)` and
//! the upper bound `max ||P||^(1/d)` over all `p^d` products `P`. Cyclic
//! rotations of a word share a spectrum, so only one rotation per necklace
//! has its radius computed; every word contributes a norm.
//!
//! Two induced norms are used for the upper bound and the smaller wins: the
//! plain infinity norm and the weighted infinity norm
//! `||P||_w = max_i (P w)_i / w_i`, with `w` the positive Perron-type vector
//! of the sum of the set. The weighted norm is exact for a single irreducible
//! matrix and for simultaneously diagonal sets, where the plain norm can be
//! slack.
//!
//! Every member is block triangular with respect to the strongly connected
//! components of the support of the sum, and the JSR of the set is the largest
//! JSR of its diagonal blocks, so the enumeration runs block by block. Per
//! length values are maxima over blocks.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::power::{check_nonnegative, shifted_power_iteration, spectral_radius, DEFAULT_TOL};
use super::scc::support_components;
use crate::error::{Error, Result};

/// Default cap on the total number of enumerated products.
pub const DEFAULT_PRODUCT_BUDGET: usize = 1_000_000;

/// Relative slack below which an inverted `lower > upper` pair is treated as
/// rounding and collapsed.
const ROUNDING_SLACK: f64 = 1e-12;

/// Bounds found at one product length.
#[derive(Debug, Clone, Serialize)]
pub struct LengthBound {
    pub length: usize,
    /// `max rho(P)^(1/length)` over products of this length.
    pub max_rho_root: f64,
    /// `max ||P||^(1/length)` over products of this length.
    pub max_norm_root: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    /// Longest product length fully enumerated.
    pub depth: usize,
    /// Word achieving `lower`; `witness[0]` is the factor applied first.
    pub witness: Vec<usize>,
    /// Set when the product budget stopped enumeration before the requested depth.
    pub truncated: bool,
    pub per_length: Vec<LengthBound>,
}

impl JsrBounds {
    /// The value `max rho(P)^(1/len)` over products of exactly `len` factors,
    /// if that length was enumerated.
    pub fn at_length(&self, len: usize) -> Option<f64> {
        self.per_length.iter().find(|b| b.length == len).map(|b| b.max_rho_root)
    }
}

fn is_min_rotation(word: &[usize]) -> bool {
    let d = word.len();
    (1..d).all(|s| {
        for t in 0..d {
            let a = word[t];
            let b = word[(t + s) % d];
            if a != b {
                return a < b;
            }
        }
        true
    })
}

fn weighted_norm(p: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let pw = p * w;
    pw.iter().zip(w.iter()).map(|(a, b)| a / b).fold(0.0, f64::max)
}

fn inf_norm(p: &DMatrix<f64>) -> f64 {
    p.row_iter().map(|r| r.sum()).fold(0.0, f64::max)
}

struct LengthScan<'a> {
    set: &'a [DMatrix<f64>],
    weights: DVector<f64>,
    best_rho: f64,
    best_word: Vec<usize>,
    best_norm: f64,
}

impl LengthScan<'_> {
    fn visit(&mut self, word: &mut Vec<usize>, prefix: &DMatrix<f64>, remaining: usize) -> Result<()> {
        if remaining == 0 {
            let norm = inf_norm(prefix).min(weighted_norm(prefix, &self.weights));
            self.best_norm = self.best_norm.max(norm);
            if is_min_rotation(word) {
                let rho = spectral_radius(prefix, DEFAULT_TOL)?;
                if rho > self.best_rho {
                    self.best_rho = rho;
                    self.best_word = word.clone();
                }
            }
            return Ok(());
        }
        for (idx, m) in self.set.iter().enumerate() {
            let next = m * prefix;
            word.push(idx);
            self.visit(word, &next, remaining - 1)?;
            word.pop();
        }
        Ok(())
    }
}

/// Per-length `(max rho root, max norm root, witness)` for one irreducible
/// diagonal block of the set.
fn scan_block(set: &[DMatrix<f64>], depth: usize) -> Result<Vec<(f64, f64, Vec<usize>)>> {
    let n = set[0].nrows();
    let mut sum = DMatrix::zeros(n, n);
    for m in set {
        sum += m;
    }
    let weights = shifted_power_iteration(&sum, 1e-12, 10_000).vector.map(|w| w.max(1e-12));
    let identity = DMatrix::identity(n, n);
    let mut out = Vec::with_capacity(depth);
    for d in 1..=depth {
        let mut scan = LengthScan {
            set,
            weights: weights.clone(),
            best_rho: -1.0,
            best_word: Vec::new(),
            best_norm: 0.0,
        };
        scan.visit(&mut Vec::with_capacity(d), &identity, d)?;
        let exp = 1.0 / d as f64;
        out.push((scan.best_rho.max(0.0).powf(exp), scan.best_norm.powf(exp), scan.best_word));
    }
    Ok(out)
}

/// Bounds `lower <= JSR <= upper` from all products of length `1..=depth`,
/// enumerating at most `budget` products in total.
pub fn jsr_bounds_with_budget(set: &[DMatrix<f64>], depth: usize, budget: usize) -> Result<JsrBounds> {
    let first = set
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty matrix set".into()))?;
    let n = first.nrows();
    for m in set {
        check_nonnegative(m)?;
        if m.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("JSR depth must be at least 1".into()));
    }

    let count = set.len();
    let mut completed = 0;
    let mut spent = 0usize;
    for d in 1..=depth {
        let cost = count.checked_pow(d as u32).unwrap_or(usize::MAX);
        match spent.checked_add(cost) {
            Some(total) if total <= budget => {
                spent = total;
                completed = d;
            }
            _ => break,
        }
    }
    if completed == 0 {
        return Err(Error::InvalidArgument(format!(
            "product budget {budget} is smaller than the set size {count}"
        )));
    }

    let mut sum = DMatrix::zeros(n, n);
    for m in set {
        sum += m;
    }
    let blocks = support_components(&sum);

    let mut per_length: Vec<LengthBound> = (1..=completed)
        .map(|d| LengthBound { length: d, max_rho_root: 0.0, max_norm_root: 0.0 })
        .collect();
    let mut words: Vec<Vec<usize>> = vec![Vec::new(); completed];
    for block in &blocks {
        let restricted: Vec<DMatrix<f64>> = set.iter().map(|m| m.select_rows(block).select_columns(block)).collect();
        for (bound, (rho_root, norm_root, word)) in per_length.iter_mut().zip(scan_block(&restricted, completed)?) {
            let d = bound.length;
            if rho_root > bound.max_rho_root || words[d - 1].is_empty() {
                bound.max_rho_root = rho_root;
                words[d - 1] = word;
            }
            bound.max_norm_root = bound.max_norm_root.max(norm_root);
        }
    }

    let (mut lower, mut upper) = (0.0f64, f64::INFINITY);
    let mut witness = Vec::new();
    for bound in &per_length {
        if bound.max_rho_root > lower || witness.is_empty() {
            lower = bound.max_rho_root;
            witness = words[bound.length - 1].clone();
        }
        upper = upper.min(bound.max_norm_root);
    }
    if lower > upper {
        if lower - upper <= ROUNDING_SLACK * upper.max(1.0) {
            upper = lower;
        } else {
            return Err(Error::InvariantViolation(format!(
                "JSR lower bound {lower} exceeds upper bound {upper}"
            )));
        }
    }
    Ok(JsrBounds { lower, upper, depth: completed, witness, truncated: completed < depth, per_length })
}

pub fn jsr_bounds(set: &[DMatrix<f64>], depth: usize) -> Result<JsrBounds> {
    jsr_bounds_with_budget(set, depth, DEFAULT_PRODUCT_BUDGET)
}
