//! Block-structured commutant of {A, E_1..E_C}.
//!
//! Unknowns are the blocks P_1..P_C stacked as vec(P_i) (column-major), so
//! P_i[r, c] lives at `var_offsets[i] + c * n_i + r`. For every ordered pair
//! (i, j) the constraint P_i A_ij - A_ij P_j = 0 contributes the rows
//! [A_ijᵀ ⊗ I, -(I ⊗ A_ij)].

use std::fmt::Write as _;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError};
use crate::linalg;
use crate::partition::IndicatorSet;

/// Defaults for nullspace extraction and sampling.
pub const DEFAULT_TOL_REL: f64 = 1e-9;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_RETRIES: usize = 5;

/// The Gram matrix SᵀS of the block constraint system.
#[derive(Debug, Clone)]
pub struct CommutantProblem {
    pub sizes: Vec<usize>,
    pub var_offsets: Vec<usize>,
    /// N_r = Σ_ij n_i n_j.
    pub n_rows: usize,
    /// N_c = Σ_i n_i².
    pub n_cols: usize,
    pub sts: Mat<f64>,
}

fn var_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut v = vec![0];
    for &s in sizes {
        v.push(v.last().unwrap() + s * s);
    }
    v
}

fn block(ind: &IndicatorSet, i: usize, j: usize) -> Mat<f64> {
    let (oi, oj) = (ind.offsets[i], ind.offsets[j]);
    Mat::from_fn(ind.sizes[i], ind.sizes[j], |r, c| ind.a[(oi + r, oj + c)])
}

fn is_zero(m: &Mat<f64>) -> bool {
    (0..m.ncols()).all(|c| (0..m.nrows()).all(|r| m[(r, c)] == 0.0))
}

/// Accumulates SᵀS pair by pair without forming S.
pub fn assemble_problem(ind: &IndicatorSet) -> CommutantProblem {
    let sizes = ind.sizes.clone();
    let c = sizes.len();
    let offs = var_offsets(&sizes);
    let n_cols = offs[c];
    let n_rows = sizes.iter().map(|&a| sizes.iter().map(|&b| a * b).sum::<usize>()).sum();
    let mut g = Mat::<f64>::zeros(n_cols, n_cols);
    for i in 0..c {
        for j in 0..c {
            let aij = block(ind, i, j);
            if is_zero(&aij) {
                continue;
            }
            let (ni, nj) = (sizes[i], sizes[j]);
            let (vi, vj) = (offs[i], offs[j]);
            // (A Aᵀ) ⊗ I_ni on the P_i block
            let aat = &aij * aij.transpose();
            for cc in 0..ni {
                for c2 in 0..ni {
                    let w = aat[(cc, c2)];
                    if w == 0.0 {
                        continue;
                    }
                    for r in 0..ni {
                        g[(vi + cc * ni + r, vi + c2 * ni + r)] += w;
                    }
                }
            }
            // I_nj ⊗ (Aᵀ A) on the P_j block
            let ata = aij.transpose() * &aij;
            for cc in 0..nj {
                for r in 0..nj {
                    for r2 in 0..nj {
                        let w = ata[(r, r2)];
                        if w != 0.0 {
                            g[(vj + cc * nj + r, vj + cc * nj + r2)] += w;
                        }
                    }
                }
            }
            // cross terms -(A ⊗ A) and its transpose
            for a in 0..ni {
                for b in 0..ni {
                    for c2 in 0..nj {
                        let x = aij[(a, c2)];
                        if x == 0.0 {
                            continue;
                        }
                        for r2 in 0..nj {
                            let w = x * aij[(b, r2)];
                            if w != 0.0 {
                                let (p, q) = (vi + a * ni + b, vj + c2 * nj + r2);
                                g[(p, q)] -= w;
                                g[(q, p)] -= w;
                            }
                        }
                    }
                }
            }
        }
    }
    CommutantProblem { sizes, var_offsets: offs, n_rows, n_cols, sts: g }
}

/// The constraint matrix S built explicitly from Kronecker products.
///
/// Memory is N_r × N_c, so this is only meant for small instances and checks.
pub fn explicit_constraint_matrix(ind: &IndicatorSet) -> Mat<f64> {
    let sizes = &ind.sizes;
    let c = sizes.len();
    let offs = var_offsets(sizes);
    let n_rows: usize = sizes.iter().map(|&a| sizes.iter().map(|&b| a * b).sum::<usize>()).sum();
    let mut s = Mat::<f64>::zeros(n_rows, offs[c]);
    let mut row0 = 0;
    for i in 0..c {
        for j in 0..c {
            let aij = block(ind, i, j);
            let (ni, nj) = (sizes[i], sizes[j]);
            let x = kron(&aij.transpose().to_owned(), &Mat::<f64>::identity(ni, ni));
            let y = kron(&Mat::<f64>::identity(nj, nj), &aij);
            for r in 0..ni * nj {
                for q in 0..ni * ni {
                    s[(row0 + r, offs[i] + q)] += x[(r, q)];
                }
                for q in 0..nj * nj {
                    s[(row0 + r, offs[j] + q)] -= y[(r, q)];
                }
            }
            row0 += ni * nj;
        }
    }
    s
}

/// Kronecker product.
pub fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Orthonormal basis of the numerical nullspace of SᵀS.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    pub sizes: Vec<usize>,
    pub var_offsets: Vec<usize>,
    /// N_c × d, orthonormal columns.
    pub basis: Mat<f64>,
    /// Smallest eigenvalues of SᵀS (up to 2d of them), ascending.
    pub spectrum_tail: Vec<f64>,
    pub lambda_max: f64,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Reshapes a coefficient vector of length N_c into blocks P_1..P_C.
    pub fn unvec(&self, v: &[f64]) -> Vec<Mat<f64>> {
        self.sizes
            .iter()
            .zip(&self.var_offsets)
            .map(|(&n, &o)| Mat::from_fn(n, n, |r, c| v[o + c * n + r]))
            .collect()
    }

    /// Basis element `k` as blocks.
    pub fn element(&self, k: usize) -> Vec<Mat<f64>> {
        let v: Vec<f64> = (0..self.basis.nrows()).map(|r| self.basis[(r, k)]).collect();
        self.unvec(&v)
    }
}

/// Eigenvectors of SᵀS with eigenvalue at most `tol_rel · λ_max`.
pub fn nullspace(prob: &CommutantProblem, tol_rel: f64) -> Result<CommutantBasis> {
    if !(tol_rel > 0.0) {
        return Err(SbdError::InvalidArgument(format!("tol_rel must be positive, got {tol_rel}")));
    }
    let (vals, vecs) = linalg::sym_eigen(prob.sts.as_ref())?;
    let lambda_max = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let thresh = tol_rel * lambda_max;
    let d = vals.iter().take_while(|&&v| v <= thresh).count();
    let tail: Vec<f64> = vals.iter().take((2 * d).max(4).min(vals.len())).copied().collect();
    if d == 0 {
        return Err(SbdError::EmptyNullspace { tail });
    }
    let basis = Mat::from_fn(prob.n_cols, d, |r, c| vecs[(r, c)]);
    Ok(CommutantBasis {
        sizes: prob.sizes.clone(),
        var_offsets: prob.var_offsets.clone(),
        basis,
        spectrum_tail: tail,
        lambda_max,
    })
}

/// CSV dump of the smallest Gram eigenvalues for tolerance debugging.
pub fn spectrum_tail_csv(basis: &CommutantBasis) -> String {
    let mut s = String::from("index,eigenvalue,relative\n");
    for (k, v) in basis.spectrum_tail.iter().enumerate() {
        let rel = if basis.lambda_max > 0.0 { v / basis.lambda_max } else { 0.0 };
        let _ = writeln!(s, "{k},{v:e},{rel:e}");
    }
    s
}

/// A symmetric commutant element P = diag(P_1..P_C).
#[derive(Debug, Clone)]
pub struct CommutantElement {
    pub blocks: Vec<Mat<f64>>,
    pub seed: u64,
    /// Which attempt (0-based) was kept.
    pub attempt: usize,
    /// Smallest consecutive eigenvalue gap divided by the block spread, over
    /// blocks of size at least 2 (infinite when every block is 1×1).
    pub min_rel_gap: f64,
    /// Every block is a multiple of the identity.
    pub fully_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub gap_tol: f64,
    pub max_retries: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { gap_tol: DEFAULT_GAP_TOL, max_retries: DEFAULT_MAX_RETRIES }
    }
}

fn gap_stats(blocks: &[Mat<f64>]) -> Result<(f64, bool)> {
    let mut min_gap = f64::INFINITY;
    let mut all_flat = true;
    for b in blocks.iter().filter(|b| b.nrows() >= 2) {
        let ev = linalg::sym_eigenvalues(b.as_ref())?;
        let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let spread = ev[ev.len() - 1] - ev[0];
        if spread <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            min_gap = 0.0;
            continue;
        }
        all_flat = false;
        let g = ev.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        min_gap = min_gap.min(g / spread);
    }
    Ok((min_gap, all_flat))
}

/// Random symmetric element Σ c_j M_j with standard-normal c_j.
///
/// Attempt `a` draws from a generator seeded with `seed + a`; the first attempt
/// whose relative eigenvalue gaps all reach `gap_tol` is returned, otherwise
/// the attempt with the largest minimum gap.
pub fn sample_element(basis: &CommutantBasis, seed: u64, opts: SampleOptions) -> Result<CommutantElement> {
    if basis.dim() == 0 {
        return Err(SbdError::EmptyNullspace { tail: basis.spectrum_tail.clone() });
    }
    let attempts = opts.max_retries.max(1);
    let mut best: Option<CommutantElement> = None;
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let coef: Vec<f64> = (0..basis.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut v = vec![0.0; basis.basis.nrows()];
        for (k, &ck) in coef.iter().enumerate() {
            for (r, x) in v.iter_mut().enumerate() {
                *x += ck * basis.basis[(r, k)];
            }
        }
        let blocks: Vec<Mat<f64>> = basis.unvec(&v).iter().map(|b| linalg::symmetrize(b.as_ref())).collect();
        let (min_rel_gap, fully_degenerate) = gap_stats(&blocks)?;
        let cand = CommutantElement { blocks, seed, attempt, min_rel_gap, fully_degenerate };
        if min_rel_gap >= opts.gap_tol {
            return Ok(cand);
        }
        if best.as_ref().map_or(true, |b| min_rel_gap > b.min_rel_gap) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one attempt"))
}

/// ‖PA − AP‖_F for a block-diagonal P against the contiguous adjacency.
pub fn commutator_norm(ind: &IndicatorSet, blocks: &[Mat<f64>]) -> f64 {
    let p = linalg::block_diag(blocks);
    let d = &p * &ind.a - &ind.a * &p;
    linalg::frobenius(d.as_ref())
}
