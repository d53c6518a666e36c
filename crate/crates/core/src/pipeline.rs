//! End-to-end canonical decomposition for a network and partition.

use serde::{Deserialize, Serialize};

use crate::commutant::{
    self, assemble_problem, nullspace, sample_element, CommutantBasis, CommutantElement, SampleOptions,
};
use crate::error::{Result, SbdError};
use crate::graph::Network;
use crate::partition::{build_indicators, IndicatorSet, Partition};
use crate::transform::{build_transform, CanonicalTransform, DEFAULT_EPS_ZERO_REL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tol_rel: f64,
    pub eps_zero_rel: f64,
    pub gap_tol: f64,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tol_rel: commutant::DEFAULT_TOL_REL,
            eps_zero_rel: DEFAULT_EPS_ZERO_REL,
            gap_tol: commutant::DEFAULT_GAP_TOL,
            max_retries: commutant::DEFAULT_MAX_RETRIES,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol_rel", self.tol_rel), ("eps_zero_rel", self.eps_zero_rel), ("gap_tol", self.gap_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SbdError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub ind: IndicatorSet,
    /// N_r and N_c of the constraint system.
    pub n_rows: usize,
    pub n_cols: usize,
    pub basis: CommutantBasis,
    pub element: CommutantElement,
    pub ct: CanonicalTransform,
}

/// Indicators, commutant basis, one sampled element and the transform.
pub fn run_pipeline(net: &Network, part: &Partition, cfg: &PipelineConfig) -> Result<PipelineResult> {
    cfg.validate()?;
    let ind = build_indicators(net, part)?;
    let prob = assemble_problem(&ind);
    let (n_rows, n_cols) = (prob.n_rows, prob.n_cols);
    let basis = nullspace(&prob, cfg.tol_rel)?;
    drop(prob);
    let element = sample_element(
        &basis,
        cfg.seed,
        SampleOptions { gap_tol: cfg.gap_tol, max_retries: cfg.max_retries },
    )?;
    let ct = build_transform(&ind, &element, cfg.eps_zero_rel)?;
    Ok(PipelineResult { ind, n_rows, n_cols, basis, element, ct })
}

/// Block structure obtained with one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub block_sizes: Vec<usize>,
    pub clusters_per_block: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedConsistency {
    pub outcomes: Vec<SeedOutcome>,
    /// All seeds gave the same block-size multiset and cluster-content multiset.
    pub consistent: bool,
}

/// Runs the decomposition with `k` consecutive seeds starting at `cfg.seed`
/// and reports whether the block structures agree.
pub fn seed_consistency(net: &Network, part: &Partition, cfg: &PipelineConfig, k: usize) -> Result<SeedConsistency> {
    cfg.validate()?;
    let ind = build_indicators(net, part)?;
    let basis = nullspace(&assemble_problem(&ind), cfg.tol_rel)?;
    let mut outcomes = Vec::with_capacity(k);
    for s in 0..k as u64 {
        let seed = cfg.seed.wrapping_add(s * 1000);
        let p = sample_element(&basis, seed, SampleOptions { gap_tol: cfg.gap_tol, max_retries: cfg.max_retries })?;
        let ct = build_transform(&ind, &p, cfg.eps_zero_rel)?;
        outcomes.push(SeedOutcome { seed, block_sizes: ct.block_sizes(), clusters_per_block: ct.block_clusters() });
    }
    let key = |o: &SeedOutcome| {
        let mut sizes = o.block_sizes.clone();
        sizes.sort_unstable();
        let mut cl = o.clusters_per_block.clone();
        cl.sort();
        (sizes, cl)
    };
    let consistent = outcomes.windows(2).all(|w| key(&w[0]) == key(&w[1]));
    Ok(SeedConsistency { outcomes, consistent })
}
