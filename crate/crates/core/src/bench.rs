//! Timing harness: canonical block-structured commutant versus a baseline
//! that solves for P over all N² entries.

use std::fmt::Write as _;
use std::time::Instant;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError};
use crate::graph::{generate_connected_planted, Network, RandomPlanted};
use crate::linalg::{self, UnionFind};
use crate::partition::{build_indicators, IndicatorSet, Partition};
use crate::pipeline::{run_pipeline, PipelineConfig};

pub const CSV_HEADER: &str = "name,N,E,N_ntc,max_cluster,t_baseline_s,t_canonical_s,blocks_agree";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    /// Stop when ‖residual‖ ≤ cg_tol · ‖right-hand side‖.
    pub cg_tol: f64,
    pub max_iter: usize,
    pub eps_zero_rel: f64,
    pub seed: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions { cg_tol: 1e-13, max_iter: 20_000, eps_zero_rel: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    /// Eigenvectors of the sampled commutant element, columns grouped by block.
    pub t: Mat<f64>,
    pub block_sizes: Vec<usize>,
    pub iterations: usize,
    /// Final relative CG residual.
    pub residual: f64,
}

/// X ↦ [A,[A,X]] + Σ_k [E_k,[E_k,X]], the Gram operator of the commutation
/// constraints on all N² entries. The second sum is 2·X on entries joining
/// different clusters.
fn gram_apply(a: &Mat<f64>, cross: &[bool], x: &Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    let c1 = a * x - x * a;
    let mut out = a * &c1 - &c1 * a;
    for j in 0..n {
        for i in 0..n {
            if cross[j * n + i] {
                out[(i, j)] += 2.0 * x[(i, j)];
            }
        }
    }
    out
}

fn dot(x: &Mat<f64>, y: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            s += x[(i, j)] * y[(i, j)];
        }
    }
    s
}

/// Projects a random symmetric matrix onto the commutant of {A, E_1..E_C}
/// with conjugate gradients, eigendecomposes it and detects blocks jointly
/// on T̃ᵀAT̃ and every T̃ᵀE_kT̃.
pub fn baseline_sbd(ind: &IndicatorSet, opts: &BaselineOptions) -> Result<BaselineResult> {
    let n = ind.n_nodes();
    let a = &ind.a;
    let clusters = ind.position_clusters();
    let cross: Vec<bool> = (0..n * n).map(|k| clusters[k % n] != clusters[k / n]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let g = Mat::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let r0 = linalg::symmetrize(g.as_ref());
    // minimum-norm solution of L Y = L R lies in range(L), so R − Y is the
    // projection of R onto the nullspace of L
    let rhs = gram_apply(a, &cross, &r0);
    let bnorm = dot(&rhs, &rhs).sqrt();
    let mut y = Mat::<f64>::zeros(n, n);
    let mut iterations = 0;
    let mut residual = 0.0;
    if bnorm > 0.0 {
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        while iterations < opts.max_iter {
            let ap = gram_apply(a, &cross, &p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rr / pap;
            y += &p * alpha;
            r -= &ap * alpha;
            iterations += 1;
            let rr_new = dot(&r, &r);
            residual = rr_new.sqrt() / bnorm;
            if residual <= opts.cg_tol {
                break;
            }
            p = &r + &p * (rr_new / rr);
            rr = rr_new;
        }
        if residual > opts.cg_tol.sqrt() {
            return Err(SbdError::Linalg(format!(
                "baseline conjugate gradients stalled at relative residual {residual:.3e} after {iterations} iterations"
            )));
        }
    }
    let pt = linalg::symmetrize((&r0 - &y).as_ref());
    let (_, u) = linalg::sym_eigen(pt.as_ref())?;
    let bt = u.transpose() * a * &u;
    let eps_b = opts.eps_zero_rel * linalg::frobenius(a.as_ref());
    let eps_j = opts.eps_zero_rel * (n as f64).sqrt();
    let mut uf = UnionFind::new(n);
    for v in 0..n {
        for w in 0..v {
            if bt[(w, v)].abs() > eps_b {
                uf.union(w, v);
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    for k in 0..ind.n_cells() {
        let rows: Vec<usize> = (ind.offsets[k]..ind.offsets[k + 1]).collect();
        let uk = linalg::select(u.as_ref(), &rows, &all);
        let jk = uk.transpose() * &uk;
        for v in 0..n {
            for w in 0..v {
                if jk[(w, v)].abs() > eps_j {
                    uf.union(w, v);
                }
            }
        }
    }
    let mut comps = uf.components();
    comps.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));
    let order: Vec<usize> = comps.iter().flatten().copied().collect();
    let t = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok(BaselineResult { t, block_sizes: comps.iter().map(Vec::len).collect(), iterations, residual })
}

/// One benchmark input.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub name: String,
    pub net: Network,
    pub part: Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub name: String,
    pub n: usize,
    pub e: usize,
    pub n_ntc: usize,
    pub max_cluster: usize,
    pub t_baseline_s: f64,
    pub t_canonical_s: f64,
    /// Block sizes, descending.
    pub blocks_canonical: Vec<usize>,
    pub blocks_baseline: Vec<usize>,
    pub blocks_agree: bool,
    pub error: Option<String>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn sorted_desc(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn time_canonical(inst: &BenchInstance, cfg: &PipelineConfig) -> Result<(f64, Vec<usize>)> {
    let t0 = Instant::now();
    let r = run_pipeline(&inst.net, &inst.part, cfg)?;
    Ok((t0.elapsed().as_secs_f64(), r.ct.block_sizes()))
}

fn time_baseline(inst: &BenchInstance, opts: &BaselineOptions) -> Result<(f64, Vec<usize>)> {
    let t0 = Instant::now();
    let ind = build_indicators(&inst.net, &inst.part)?;
    let r = baseline_sbd(&ind, opts)?;
    Ok((t0.elapsed().as_secs_f64(), r.block_sizes))
}

/// Times both methods on every instance: one discarded warm-up run, then the
/// median of `repeats` runs. Failures and disagreements are recorded, not fatal.
pub fn run_bench(instances: &[BenchInstance], repeats: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    if repeats < 3 {
        return Err(SbdError::InvalidArgument(format!("repeats must be at least 3, got {repeats}")));
    }
    let cfg = PipelineConfig { seed, ..Default::default() };
    let bopts = BaselineOptions { seed, eps_zero_rel: cfg.eps_zero_rel, ..Default::default() };
    let mut out = Vec::with_capacity(instances.len());
    for inst in instances {
        let sizes = inst.part.sizes();
        let mut rec = BenchRecord {
            name: inst.name.clone(),
            n: inst.net.n_nodes(),
            e: inst.net.n_edges(),
            n_ntc: inst.part.nontrivial_cells(),
            max_cluster: sizes.iter().copied().max().unwrap_or(0),
            t_baseline_s: f64::NAN,
            t_canonical_s: f64::NAN,
            blocks_canonical: Vec::new(),
            blocks_baseline: Vec::new(),
            blocks_agree: false,
            error: None,
        };
        let measure = |f: &dyn Fn() -> Result<(f64, Vec<usize>)>| -> Result<(f64, Vec<usize>)> {
            f()?;
            let mut times = Vec::with_capacity(repeats);
            let mut blocks = Vec::new();
            for _ in 0..repeats {
                let (t, b) = f()?;
                times.push(t);
                blocks = b;
            }
            Ok((median(&mut times), sorted_desc(blocks)))
        };
        let mut errors = Vec::new();
        match measure(&|| time_canonical(inst, &cfg)) {
            Ok((t, b)) => {
                rec.t_canonical_s = t;
                rec.blocks_canonical = b;
            }
            Err(e) => errors.push(format!("canonical: {e}")),
        }
        match measure(&|| time_baseline(inst, &bopts)) {
            Ok((t, b)) => {
                rec.t_baseline_s = t;
                rec.blocks_baseline = b;
            }
            Err(e) => errors.push(format!("baseline: {e}")),
        }
        rec.blocks_agree = errors.is_empty() && rec.blocks_canonical == rec.blocks_baseline;
        if !errors.is_empty() {
            rec.error = Some(errors.join("; "));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Bench CSV with the fixed header.
pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{:.6},{}",
            r.name, r.n, r.e, r.n_ntc, r.max_cluster, r.t_baseline_s, r.t_canonical_s, r.blocks_agree
        );
    }
    s
}

/// Planted parameters used for desk-scale runs of size `n`: at least 10
/// clusters of size 2..=8, the remaining nodes singletons.
pub fn desk_params(n: usize) -> RandomPlanted {
    RandomPlanted { n, nontrivial: (n / 10).max(10), max_cluster: 8, extra_links: 0.5, internal_prob: 0.3 }
}

/// Connected planted instances for each size, analysed under the planted partition.
pub fn desk_instances(sizes: &[usize], seed: u64) -> Result<Vec<BenchInstance>> {
    sizes
        .iter()
        .map(|&n| {
            let (net, part, s) = generate_connected_planted(desk_params(n), seed.wrapping_add(n as u64), 200)?;
            Ok(BenchInstance { name: format!("planted_n{n}_s{s}"), net, part })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::partition::coarsest_equitable_partition;

    fn baseline_blocks(net: &Network, part: &Partition) -> Vec<usize> {
        let ind = build_indicators(net, part).unwrap();
        sorted_desc(baseline_sbd(&ind, &BaselineOptions::default()).unwrap().block_sizes)
    }

    #[test]
    fn four_node_baseline_matches() {
        let net = golden::four_node();
        assert_eq!(baseline_blocks(&net, &coarsest_equitable_partition(&net)), vec![2, 2]);
    }

    #[test]
    fn goldens_agree_with_canonical() {
        for case in golden::catalogue() {
            let mut want = case.block_sizes.to_vec();
            want.sort_unstable_by(|a, b| b.cmp(a));
            assert_eq!(baseline_blocks(&case.net, &case.part), want, "{}", case.name);
        }
    }

    #[test]
    fn planted_two_big_clusters_agree() {
        use crate::graph::{generate_planted, PlantedSpec};
        let (net, part) = (5..)
            .map(|seed| {
                let mut spec = PlantedSpec::new(vec![10, 10], vec![vec![2, 1], vec![1, 2]], seed);
                spec.shuffle = true;
                generate_planted(&spec).unwrap()
            })
            .find(|(net, _)| net.is_connected())
            .unwrap();
        let r = run_bench(&[BenchInstance { name: "two".into(), net, part }], 3, 1).unwrap();
        assert!(r[0].blocks_agree, "{:?}", r[0]);
    }

    #[test]
    fn empty_bench_is_header_only() {
        let r = run_bench(&[], 3, 0).unwrap();
        assert!(r.is_empty());
        assert_eq!(bench_csv(&r), format!("{CSV_HEADER}\n"));
        assert!(run_bench(&[], 2, 0).is_err());
    }

    #[test]
    fn desk_instance_shape() {
        let inst = desk_instances(&[60], 3).unwrap();
        let p = &inst[0].part;
        assert!(p.nontrivial_cells() >= 10);
        assert!(p.sizes().iter().all(|&s| s <= 12));
        assert!(inst[0].net.is_connected());
    }
}
