//! Linear sensitivity of B = TᵀAT to individual edge weights, with T held fixed.

use std::collections::{BTreeMap, BTreeSet};

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError};
use crate::graph::{EdgeParam, Network};
use crate::partition::{check_equitable, Partition};
use crate::transform::CanonicalTransform;

pub const DEFAULT_SENS_TOL: f64 = 1e-10;

/// Affected entries of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSensitivity {
    pub param: String,
    /// `[block, row, col, value]` with block-local row and column.
    pub entries: Vec<(usize, usize, usize, f64)>,
    /// Entries coupling two different blocks, as `[coord_u, coord_v, value]`.
    pub off_block: Vec<(usize, usize, f64)>,
}

impl ParamSensitivity {
    /// (block, row, col) of every in-block entry.
    pub fn entry_set(&self) -> BTreeSet<(usize, usize, usize)> {
        self.entries.iter().map(|&(b, r, c, _)| (b, r, c)).collect()
    }

    /// Affected (row, col) pairs within one block.
    pub fn entries_in_block(&self, block: usize) -> BTreeSet<(usize, usize)> {
        self.entries.iter().filter(|e| e.0 == block).map(|&(_, r, c, _)| (r, c)).collect()
    }

    pub fn n_affected(&self) -> usize {
        self.entries.len() + self.off_block.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub params: Vec<ParamSensitivity>,
    /// Shared affected entries for each pair of parameters, keyed `a|b`.
    pub overlaps: BTreeMap<String, usize>,
    /// Parameters whose perturbation breaks the nominal partition.
    pub warnings: Vec<String>,
}

/// Validates parameters against the network: unique names, distinct
/// endpoints, and edges in the support unless declared addable.
pub fn validate_params(net: &Network, params: &[EdgeParam]) -> Result<()> {
    let mut names = BTreeSet::new();
    for p in params {
        if !names.insert(p.name.as_str()) {
            return Err(SbdError::InvalidArgument(format!("duplicate parameter name {:?}", p.name)));
        }
        let n = net.n_nodes();
        if p.i >= n || p.j >= n || p.i == p.j {
            return Err(SbdError::InvalidArgument(format!("parameter {:?} has invalid endpoints", p.name)));
        }
        if net.weight(p.i, p.j) == 0.0 && !p.addable {
            return Err(SbdError::UnknownEdge { i: p.i, j: p.j });
        }
    }
    Ok(())
}

/// Tᵀ E_(ij) T restricted to its entries above `sens_tol`.
fn derivative_entries(t: &Mat<f64>, pi: usize, pj: usize, sens_tol: f64) -> Vec<(usize, usize, f64)> {
    let n = t.ncols();
    let mut out = Vec::new();
    for a in 0..n {
        let (xa, ya) = (t[(pi, a)], t[(pj, a)]);
        if xa == 0.0 && ya == 0.0 {
            continue;
        }
        for b in 0..n {
            let v = xa * t[(pj, b)] + ya * t[(pi, b)];
            if v.abs() > sens_tol {
                out.push((a, b, v));
            }
        }
    }
    out
}

fn classify(ct: &CanonicalTransform, name: &str, raw: Vec<(usize, usize, f64)>) -> ParamSensitivity {
    let mut entries = Vec::new();
    let mut off_block = Vec::new();
    for (a, b, v) in raw {
        let (ba, bb) = (ct.block_of(a), ct.block_of(b));
        if ba == bb {
            let s = ct.blocks[ba].start;
            entries.push((ba, a - s, b - s, v));
        } else {
            off_block.push((a, b, v));
        }
    }
    ParamSensitivity { param: name.to_string(), entries, off_block }
}

fn overlaps(params: &[ParamSensitivity]) -> BTreeMap<String, usize> {
    let sets: Vec<BTreeSet<(usize, usize, usize)>> = params.iter().map(|p| p.entry_set()).collect();
    let mut out = BTreeMap::new();
    for x in 0..params.len() {
        for y in x + 1..params.len() {
            let key = format!("{}|{}", params[x].param, params[y].param);
            out.insert(key, sets[x].intersection(&sets[y]).count());
        }
    }
    out
}

/// Exact linear sensitivity ∂B/∂q = Tᵀ E_(ij) T for each parameter.
///
/// Parameter endpoints are original node indices. A warning is recorded when
/// moving the weight by ±δ breaks equitability of `part`.
pub fn sensitivity(
    net: &Network,
    part: &Partition,
    ct: &CanonicalTransform,
    params: &[EdgeParam],
    sens_tol: f64,
) -> Result<SensitivityReport> {
    validate_params(net, params)?;
    let perm = part.perm();
    let mut out = Vec::with_capacity(params.len());
    let mut warnings = Vec::new();
    for p in params {
        let raw = derivative_entries(&ct.t, perm[p.i], perm[p.j], sens_tol);
        out.push(classify(ct, &p.name, raw));
        let delta = 1e-3 * p.value.abs().max(1.0);
        for s in [-1.0, 1.0] {
            let moved = net.with_weight(p.i, p.j, p.value + s * delta)?;
            if !check_equitable(&moved, part.cells())?.is_ok() {
                warnings.push(format!(
                    "{}: varying edge ({}, {}) breaks equitability of the nominal partition",
                    p.name,
                    net.labels()[p.i],
                    net.labels()[p.j]
                ));
                break;
            }
        }
    }
    let overlaps = overlaps(&out);
    Ok(SensitivityReport { params: out, overlaps, warnings })
}

/// Affected-entry counts when every block of T is rotated by a random
/// orthogonal matrix, giving a non-canonical transform with the same blocks.
pub fn rotated_entry_counts(
    net: &Network,
    part: &Partition,
    ct: &CanonicalTransform,
    params: &[EdgeParam],
    sens_tol: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    validate_params(net, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ct.t.ncols();
    let mut r = Mat::<f64>::zeros(n, n);
    for blk in &ct.blocks {
        let g = Mat::from_fn(blk.size, blk.size, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let q = g.qr().compute_Q();
        for i in 0..blk.size {
            for j in 0..blk.size {
                r[(blk.start + i, blk.start + j)] = q[(i, j)];
            }
        }
    }
    let mut rotated = ct.clone();
    rotated.t = &ct.t * &r;
    let perm = part.perm();
    Ok(params
        .iter()
        .map(|p| {
            let raw = derivative_entries(&rotated.t, perm[p.i], perm[p.j], sens_tol);
            classify(&rotated, &p.name, raw).n_affected()
        })
        .collect())
}
