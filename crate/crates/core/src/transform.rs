//! Canonical transformation T, transformed adjacency B and its block tuples.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::commutant::CommutantElement;
use crate::error::{Result, SbdError};
use crate::linalg::{self, UnionFind};
use crate::partition::{self, IndicatorSet};

pub const DEFAULT_EPS_ZERO_REL: f64 = 1e-8;
/// Orthogonality bound for each T_i.
pub const ORTHO_TOL: f64 = 1e-10;
/// Pass threshold used by [`verify_canonical`].
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockClass {
    Parallel,
    Transverse,
}

/// Contiguous run of transformed coordinates forming one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub size: usize,
    pub class: BlockClass,
    /// Clusters whose coordinates the block contains, ascending.
    pub clusters: Vec<usize>,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.size
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalTransform {
    /// T_i per cluster; column 0 is the constant vector.
    pub t_blocks: Vec<Mat<f64>>,
    /// New coordinate position -> unpermuted coordinate `offset_i + column`.
    pub coord_perm: Vec<usize>,
    /// N×N; rows are contiguous node positions, columns permuted coordinates.
    pub t: Mat<f64>,
    /// TᵀAT in permuted coordinates (not thresholded).
    pub b: Mat<f64>,
    pub blocks: Vec<Block>,
    /// Cluster of each permuted coordinate.
    pub coord_clusters: Vec<usize>,
    /// Permuted position of the constant column of each cluster.
    pub quotient_coords: Vec<usize>,
    pub eps_zero: f64,
}

impl CanonicalTransform {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    pub fn block_classes(&self) -> Vec<BlockClass> {
        self.blocks.iter().map(|b| b.class).collect()
    }

    pub fn block_clusters(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.clusters.clone()).collect()
    }

    /// Block containing permuted coordinate `u`.
    pub fn block_of(&self, u: usize) -> usize {
        self.blocks.iter().position(|b| b.range().contains(&u)).expect("coordinate in range")
    }

    /// Coordinates of all parallel blocks.
    pub fn parallel_coords(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| b.class == BlockClass::Parallel)
            .flat_map(|b| b.range())
            .collect()
    }

    /// T with rows in original node order.
    pub fn t_original_order(&self, part: &partition::Partition) -> Mat<f64> {
        let perm = part.perm();
        Mat::from_fn(self.t.nrows(), self.t.ncols(), |v, u| self.t[(perm[v], u)])
    }
}

/// Flips each column so its first near-maximal-magnitude entry is positive.
pub(crate) fn canonical_signs(m: &mut Mat<f64>) {
    for c in 0..m.ncols() {
        let mx = (0..m.nrows()).fold(0.0f64, |a, r| a.max(m[(r, c)].abs()));
        if mx == 0.0 {
            continue;
        }
        let lead = (0..m.nrows()).find(|&r| m[(r, c)].abs() >= mx * (1.0 - 1e-9)).unwrap();
        if m[(lead, c)] < 0.0 {
            for r in 0..m.nrows() {
                m[(r, c)] = -m[(r, c)];
            }
        }
    }
}

/// Eigenvectors of one P_i with the constant direction made an exact column.
fn cluster_transform(p: &Mat<f64>, cluster: usize) -> Result<Mat<f64>> {
    let n = p.nrows();
    if n == 1 {
        return Ok(Mat::from_fn(1, 1, |_, _| 1.0));
    }
    let (vals, u) = linalg::sym_eigen(p.as_ref())?;
    let spread = vals[n - 1] - vals[0];
    let scale = vals.iter().fold(spread, |m, v| m.max(v.abs()));
    let tol = 1e-8 * scale;
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..n {
        if vals[k] - vals[k - 1] <= tol {
            groups.last_mut().unwrap().push(k);
        } else {
            groups.push(vec![k]);
        }
    }
    let cval = 1.0 / (n as f64).sqrt();
    let proj = |g: &[usize]| -> f64 {
        g.iter()
            .map(|&k| {
                let d: f64 = (0..n).map(|r| u[(r, k)]).sum::<f64>() * cval;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    };
    let (best, best_norm) = groups
        .iter()
        .enumerate()
        .map(|(gi, g)| (gi, proj(g)))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if best_norm <= 0.5 {
        return Err(SbdError::ConstantDirectionMissing { cluster, best: best_norm });
    }
    let mut cols: Vec<Vec<f64>> = vec![vec![cval; n]];
    for (gi, g) in groups.iter().enumerate() {
        if gi == best {
            if g.len() > 1 {
                // (I - ccᵀ) U_G has rank |G| - 1; its leading left singular vectors complete c
                let w = Mat::from_fn(n, g.len(), |r, j| {
                    let k = g[j];
                    let d: f64 = (0..n).map(|s| u[(s, k)]).sum::<f64>() * cval;
                    u[(r, k)] - d * cval
                });
                let svd = w
                    .thin_svd()
                    .map_err(|e| SbdError::Linalg(format!("svd of eigenspace: {e:?}")))?;
                let uw = svd.U();
                for j in 0..g.len() - 1 {
                    cols.push((0..n).map(|r| uw[(r, j)]).collect());
                }
            }
        } else {
            for &k in g {
                cols.push((0..n).map(|r| u[(r, k)]).collect());
            }
        }
    }
    // remove the residual overlap with c left by a numerically approximate P
    for col in cols.iter_mut().skip(1) {
        let d: f64 = col.iter().sum::<f64>() * cval;
        for x in col.iter_mut() {
            *x -= d * cval;
        }
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in col.iter_mut() {
            *x /= nrm;
        }
    }
    let mut t = Mat::from_fn(n, n, |r, c| cols[c][r]);
    canonical_signs(&mut t);
    let res = linalg::orthogonality_residual(t.as_ref());
    if !(res <= ORTHO_TOL) {
        return Err(SbdError::NotOrthogonal { cluster, residual: res });
    }
    Ok(t)
}

/// Groups coordinates into connected components of `|B_uv| > eps`, then orders
/// them: parallel first, then descending size, then smallest coordinate.
pub(crate) fn detect_blocks(b: &Mat<f64>, eps: f64, is_quotient: &[bool]) -> Vec<Vec<usize>> {
    let n = b.nrows();
    let mut uf = UnionFind::new(n);
    for v in 0..n {
        for u in 0..v {
            if b[(u, v)].abs() > eps || b[(v, u)].abs() > eps {
                uf.union(u, v);
            }
        }
    }
    let mut comps = uf.components();
    comps.sort_by_key(|c| {
        let parallel = c.iter().any(|&u| is_quotient[u]);
        (!parallel, std::cmp::Reverse(c.len()), c[0])
    });
    comps
}

/// Builds T from the eigenvectors of P and detects the block structure of B.
pub fn build_transform(ind: &IndicatorSet, p: &CommutantElement, eps_zero_rel: f64) -> Result<CanonicalTransform> {
    if !(eps_zero_rel > 0.0) {
        return Err(SbdError::InvalidArgument(format!("eps_zero_rel must be positive, got {eps_zero_rel}")));
    }
    let c = ind.n_cells();
    if p.blocks.len() != c {
        return Err(SbdError::InvalidArgument(format!("element has {} blocks for {c} clusters", p.blocks.len())));
    }
    let mut t_blocks = Vec::with_capacity(c);
    for (i, pi) in p.blocks.iter().enumerate() {
        if pi.nrows() != ind.sizes[i] {
            return Err(SbdError::InvalidArgument(format!("block {i} has the wrong size")));
        }
        t_blocks.push(cluster_transform(pi, i)?);
    }
    let n = ind.n_nodes();
    let t0 = linalg::block_diag(&t_blocks);
    let b0 = t0.transpose() * &ind.a * &t0;
    let eps_zero = eps_zero_rel * linalg::frobenius(ind.a.as_ref());
    let clusters0 = ind.position_clusters();
    let mut is_q = vec![false; n];
    for k in 0..c {
        is_q[ind.offsets[k]] = true;
    }
    let comps = detect_blocks(&b0, eps_zero, &is_q);
    let coord_perm: Vec<usize> = comps.iter().flatten().copied().collect();
    let mut blocks = Vec::with_capacity(comps.len());
    let mut start = 0;
    for comp in &comps {
        let mut cl: Vec<usize> = comp.iter().map(|&u| clusters0[u]).collect();
        cl.sort_unstable();
        cl.dedup();
        let class = if comp.iter().any(|&u| is_q[u]) { BlockClass::Parallel } else { BlockClass::Transverse };
        blocks.push(Block { start, size: comp.len(), class, clusters: cl });
        start += comp.len();
    }
    let t = Mat::from_fn(n, n, |r, u| t0[(r, coord_perm[u])]);
    let b = Mat::from_fn(n, n, |u, v| b0[(coord_perm[u], coord_perm[v])]);
    let coord_clusters: Vec<usize> = coord_perm.iter().map(|&u| clusters0[u]).collect();
    let mut quotient_coords = vec![0; c];
    for (pos, &u) in coord_perm.iter().enumerate() {
        if is_q[u] {
            quotient_coords[clusters0[u]] = pos;
        }
    }
    Ok(CanonicalTransform { t_blocks, coord_perm, t, b, blocks, coord_clusters, quotient_coords, eps_zero })
}

/// One decoupled subproblem (B̂ᵏ, Ĵ₁ᵏ..Ĵ_Cᵏ).
#[derive(Debug, Clone)]
pub struct BlockTuple {
    pub index: usize,
    pub b_hat: Mat<f64>,
    /// Diagonal of each Ĵ_c restricted to the block.
    pub j_hats: Vec<Vec<f64>>,
    pub class: BlockClass,
    pub clusters: Vec<usize>,
}

impl BlockTuple {
    pub fn dim(&self) -> usize {
        self.b_hat.nrows()
    }

    /// Cluster of each coordinate of the block.
    pub fn coord_clusters(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|u| self.j_hats.iter().position(|j| j[u] == 1.0).expect("one cluster per coordinate"))
            .collect()
    }
}

pub fn block_tuples(ct: &CanonicalTransform, ind: &IndicatorSet) -> Vec<BlockTuple> {
    let c = ind.n_cells();
    ct.blocks
        .iter()
        .enumerate()
        .map(|(k, blk)| {
            let coords: Vec<usize> = blk.range().collect();
            let b_hat = linalg::select(ct.b.as_ref(), &coords, &coords);
            let j_hats = (0..c)
                .map(|cl| coords.iter().map(|&u| if ct.coord_clusters[u] == cl { 1.0 } else { 0.0 }).collect())
                .collect();
            BlockTuple { index: k, b_hat, j_hats, class: blk.class, clusters: blk.clusters.clone() }
        })
        .collect()
}

/// Residuals certifying a canonical transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    /// ‖TᵀT − I‖_F.
    pub orthogonality: f64,
    /// max_k ‖TᵀE_kT − J_k‖_F with J_k the coordinate indicator of cluster k.
    pub canonical: f64,
    /// Frobenius mass of TᵀAT outside the blocks.
    pub off_block: f64,
    /// off_block / ‖A‖_F.
    pub off_block_rel: f64,
    /// ‖B[non-quotient, quotient]‖_F.
    pub closure: f64,
    /// Largest deviation of a quotient column from n_k^(-1/2) on its cluster (0 elsewhere).
    pub constant_columns: f64,
    /// Distance between the parallel-block spectrum and eig(Q).
    pub quotient_spectrum: f64,
    pub pass: bool,
}

pub fn verify_canonical(ct: &CanonicalTransform, ind: &IndicatorSet) -> Result<CanonicalReport> {
    let n = ind.n_nodes();
    let t = &ct.t;
    let orthogonality = linalg::orthogonality_residual(t.as_ref());
    let pos_cl = ind.position_clusters();
    let mut canonical = 0.0f64;
    for k in 0..ind.n_cells() {
        let rows: Vec<usize> = (ind.offsets[k]..ind.offsets[k + 1]).collect();
        let all: Vec<usize> = (0..n).collect();
        let tk = linalg::select(t.as_ref(), &rows, &all);
        let mut m = tk.transpose() * &tk;
        for u in 0..n {
            if ct.coord_clusters[u] == k {
                m[(u, u)] -= 1.0;
            }
        }
        canonical = canonical.max(linalg::frobenius(m.as_ref()));
    }
    let b = t.transpose() * &ind.a * t;
    let block_of: Vec<usize> = (0..n).map(|u| ct.block_of(u)).collect();
    let mut off = 0.0;
    for v in 0..n {
        for u in 0..n {
            if block_of[u] != block_of[v] {
                off += b[(u, v)] * b[(u, v)];
            }
        }
    }
    let off_block = off.sqrt();
    let an = linalg::frobenius(ind.a.as_ref());
    let off_block_rel = if an > 0.0 { off_block / an } else { off_block };
    let is_q: Vec<bool> = (0..n).map(|u| ct.quotient_coords.contains(&u)).collect();
    let mut clo = 0.0;
    for u in (0..n).filter(|&u| !is_q[u]) {
        for &q in &ct.quotient_coords {
            clo += b[(u, q)] * b[(u, q)];
        }
    }
    let closure = clo.sqrt();
    let mut constant_columns = 0.0f64;
    for (k, &q) in ct.quotient_coords.iter().enumerate() {
        let target = 1.0 / (ind.sizes[k] as f64).sqrt();
        for r in 0..n {
            let want = if pos_cl[r] == k { target } else { 0.0 };
            constant_columns = constant_columns.max((t[(r, q)] - want).abs());
        }
    }
    let pc = ct.parallel_coords();
    let par = linalg::sym_eigenvalues(linalg::select(b.as_ref(), &pc, &pc).as_ref())?;
    let qs = partition::quotient_spectrum(ind)?;
    let quotient_spectrum = if par.len() == qs.len() {
        let re: Vec<f64> = qs.iter().map(|z| z.re).collect();
        let im = qs.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        linalg::spectrum_distance(&par, &re).max(im)
    } else {
        f64::INFINITY
    };
    let pass = orthogonality <= VERIFY_TOL
        && canonical <= VERIFY_TOL
        && off_block_rel <= VERIFY_TOL
        && constant_columns <= VERIFY_TOL
        && quotient_spectrum <= VERIFY_TOL;
    Ok(CanonicalReport {
        orthogonality,
        canonical,
        off_block,
        off_block_rel,
        closure,
        constant_columns,
        quotient_spectrum,
        pass,
    })
}

/// Parameter counts (p1, p2): entries parametrizing the C+1 transformed
/// matrices under a generic versus a canonical transformation.
pub fn parameter_count(block_sizes: &[usize], c: usize) -> (u64, u64) {
    let p2: u64 = block_sizes.iter().map(|&b| (b * (b + 1) / 2) as u64).sum();
    ((c as u64 + 1) * p2, p2)
}

/// JSON block report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub block_sizes: Vec<usize>,
    pub classes: Vec<BlockClass>,
    /// 0-based cluster indices in partition numbering.
    pub clusters_per_block: Vec<Vec<usize>>,
    pub p1: u64,
    pub p2: u64,
    pub residuals: CanonicalReport,
}

pub fn block_report(ct: &CanonicalTransform, ind: &IndicatorSet) -> Result<BlockReport> {
    let (p1, p2) = parameter_count(&ct.block_sizes(), ind.n_cells());
    Ok(BlockReport {
        block_sizes: ct.block_sizes(),
        classes: ct.block_classes(),
        clusters_per_block: ct.block_clusters(),
        p1,
        p2,
        residuals: verify_canonical(ct, ind)?,
    })
}
