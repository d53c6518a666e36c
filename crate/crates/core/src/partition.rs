//! Equitable partitions, indicator matrices and the quotient matrix.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError, Witness};
use crate::graph::Network;
use crate::linalg;

/// Relative tolerance for row-sum comparisons on non-integer weights.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Node partition with the cluster-contiguous ordering.
///
/// Cells are numbered by ascending minimum node index and each cell lists its
/// nodes ascending. Position `p` of the contiguous order holds node `order[p]`
/// and `perm[node]` is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    order: Vec<usize>,
    perm: Vec<usize>,
    offsets: Vec<usize>,
}

impl Partition {
    /// Normalizes and validates cells over nodes `0..n`.
    pub fn from_cells(n: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut cells: Vec<Vec<usize>> = cells;
        for c in &mut cells {
            if c.is_empty() {
                return Err(SbdError::NotAPartition("empty cell".into()));
            }
            c.sort_unstable();
            for &v in c.iter() {
                if v >= n {
                    return Err(SbdError::NotAPartition(format!("node {v} out of range 0..{n}")));
                }
                if seen[v] {
                    return Err(SbdError::NotAPartition(format!("node {v} appears in two cells")));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(SbdError::NotAPartition(format!("node {v} is in no cell")));
        }
        cells.sort_by_key(|c| c[0]);
        let mut cluster_of = vec![0; n];
        let mut order = Vec::with_capacity(n);
        let mut offsets = vec![0];
        for (k, c) in cells.iter().enumerate() {
            for &v in c {
                cluster_of[v] = k;
                order.push(v);
            }
            offsets.push(order.len());
        }
        let mut perm = vec![0; n];
        for (p, &v) in order.iter().enumerate() {
            perm[v] = p;
        }
        Ok(Partition { cells, cluster_of, order, perm, offsets })
    }

    /// Partition from per-node colors (any labels).
    pub fn from_colors(colors: &[usize]) -> Self {
        let mut map = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for (v, &c) in colors.iter().enumerate() {
            map.entry(c).or_default().push(v);
        }
        Partition::from_cells(colors.len(), map.into_values().collect()).expect("colors always partition")
    }

    pub fn singletons(n: usize) -> Self {
        Partition::from_cells(n, (0..n).map(|i| vec![i]).collect()).expect("valid")
    }

    pub fn n_nodes(&self) -> usize {
        self.order.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.cluster_of[node]
    }

    /// Node at each contiguous position.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Contiguous position of each node.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Start of each cell in the contiguous order, with a final entry N.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Cluster of each contiguous position.
    pub fn position_clusters(&self) -> Vec<usize> {
        self.order.iter().map(|&v| self.cluster_of[v]).collect()
    }

    /// `M` reindexed to the contiguous order: out[p, q] = M[order[p], order[q]].
    pub fn permute_matrix(&self, m: &Mat<f64>) -> Mat<f64> {
        let o = &self.order;
        Mat::from_fn(o.len(), o.len(), |p, q| m[(o[p], o[q])])
    }

    /// Number of cells with more than one node.
    pub fn nontrivial_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.len() > 1).count()
    }

    pub fn report(&self, net: &Network) -> PartitionReport {
        PartitionReport {
            c: self.n_cells(),
            cells: self
                .cells
                .iter()
                .map(|c| c.iter().map(|&v| net.labels()[v].clone()).collect())
                .collect(),
            sizes: self.sizes(),
        }
    }
}

/// JSON partition report, cells given by node label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    #[serde(rename = "C")]
    pub c: usize,
    pub cells: Vec<Vec<String>>,
    pub sizes: Vec<usize>,
}

fn sums_differ(x: f64, y: f64, exact: bool) -> bool {
    if exact {
        x != y
    } else {
        (x - y).abs() > WEIGHT_TOL * 1f64.max(x.abs()).max(y.abs())
    }
}

/// Color refinement from the given initial colors until stable.
pub fn refine(net: &Network, initial: &[usize]) -> Partition {
    let n = net.n_nodes();
    assert_eq!(initial.len(), n, "one initial color per node");
    let exact = net.has_integer_weights();
    let a = net.adjacency();
    let mut colors = Partition::from_colors(initial).cluster_of;
    let mut count = colors.iter().max().map_or(0, |m| m + 1);
    loop {
        let mut sums = vec![vec![0.0; count]; n];
        for (i, row) in sums.iter_mut().enumerate() {
            for j in 0..n {
                let w = a[(i, j)];
                if w != 0.0 {
                    row[colors[j]] += w;
                }
            }
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| {
            colors[x].cmp(&colors[y]).then_with(|| {
                for c in 0..count {
                    let o = sums[x][c].total_cmp(&sums[y][c]);
                    if o != std::cmp::Ordering::Equal {
                        return o;
                    }
                }
                x.cmp(&y)
            })
        });
        let mut next = vec![0usize; n];
        let mut k = 0;
        for w in 0..n {
            if w > 0 {
                let (p, q) = (idx[w - 1], idx[w]);
                let split = colors[p] != colors[q] || (0..count).any(|c| sums_differ(sums[p][c], sums[q][c], exact));
                if split {
                    k += 1;
                }
            }
            next[idx[w]] = k;
        }
        let new_count = k + 1;
        colors = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    Partition::from_colors(&colors)
}

/// The coarsest equitable partition (refinement from a single cell).
pub fn coarsest_equitable_partition(net: &Network) -> Partition {
    refine(net, &vec![0; net.n_nodes()])
}

/// Outcome of [`check_equitable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquitableCheck {
    pub witness: Option<Witness>,
}

impl EquitableCheck {
    pub fn is_ok(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks the equal-row-sum condition for every pair of nodes in a cell and
/// every target cell. Cell indices in the witness follow the given order.
pub fn check_equitable(net: &Network, cells: &[Vec<usize>]) -> Result<EquitableCheck> {
    let n = net.n_nodes();
    let mut seen = vec![false; n];
    for c in cells {
        if c.is_empty() {
            return Err(SbdError::NotAPartition("empty cell".into()));
        }
        for &v in c {
            if v >= n || seen[v] {
                return Err(SbdError::NotAPartition(format!("node {v} missing or repeated")));
            }
            seen[v] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(SbdError::NotAPartition("cells do not cover every node".into()));
    }
    let exact = net.has_integer_weights();
    let a = net.adjacency();
    let row_sum = |i: usize, cell: &[usize]| cell.iter().map(|&h| a[(i, h)]).sum::<f64>();
    for cell in cells {
        let mut sorted = cell.clone();
        sorted.sort_unstable();
        let i = sorted[0];
        for &j in &sorted[1..] {
            for (l, target) in cells.iter().enumerate() {
                let (si, sj) = (row_sum(i, target), row_sum(j, target));
                if sums_differ(si, sj, exact) {
                    return Ok(EquitableCheck {
                        witness: Some(Witness { i, j, cell: l, sum_i: si, sum_j: sj }),
                    });
                }
            }
        }
    }
    Ok(EquitableCheck { witness: None })
}

/// Reads a cells file: one line per cell, whitespace-separated node labels.
pub fn parse_cells(text: &str, net: &Network) -> Result<Partition> {
    let mut cells = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let mut cell = Vec::with_capacity(toks.len());
        for t in toks {
            let v = net.index_of(t).ok_or_else(|| SbdError::Parse {
                line: ln + 1,
                msg: format!("unknown node label {t:?}"),
            })?;
            cell.push(v);
        }
        cells.push(cell);
    }
    Partition::from_cells(net.n_nodes(), cells)
}

/// Writes a cells file using node labels.
pub fn format_cells(part: &Partition, net: &Network) -> String {
    let mut s = String::new();
    for c in part.cells() {
        let line: Vec<&str> = c.iter().map(|&v| net.labels()[v].as_str()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Indicator data in the cluster-contiguous node order.
#[derive(Debug, Clone)]
pub struct IndicatorSet {
    /// Diagonal of each E_k.
    pub e: Vec<Vec<f64>>,
    /// N×C encoding matrix.
    pub o: Mat<f64>,
    /// C×C quotient matrix.
    pub q: Mat<f64>,
    /// C×N matrix (OᵀO)^(-1/2) Oᵀ.
    pub delta: Mat<f64>,
    /// Adjacency reindexed to the contiguous order.
    pub a: Mat<f64>,
    pub sizes: Vec<usize>,
    pub offsets: Vec<usize>,
}

impl IndicatorSet {
    pub fn n_cells(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.a.nrows()
    }

    /// Cluster of each contiguous position.
    pub fn position_clusters(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_nodes());
        for (k, &s) in self.sizes.iter().enumerate() {
            out.extend(std::iter::repeat(k).take(s));
        }
        out
    }
}

/// Builds E_k, O, Q and Δ after checking equitability.
pub fn build_indicators(net: &Network, part: &Partition) -> Result<IndicatorSet> {
    if part.n_nodes() != net.n_nodes() {
        return Err(SbdError::NotAPartition(format!(
            "partition covers {} nodes, network has {}",
            part.n_nodes(),
            net.n_nodes()
        )));
    }
    if let Some(w) = check_equitable(net, part.cells())?.witness {
        return Err(SbdError::NotEquitable(w));
    }
    let n = net.n_nodes();
    let c = part.n_cells();
    let sizes = part.sizes();
    let offsets = part.offsets().to_vec();
    let a = part.permute_matrix(net.adjacency());
    let clusters = part.position_clusters();
    let e: Vec<Vec<f64>> = (0..c)
        .map(|k| clusters.iter().map(|&x| if x == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let o = Mat::from_fn(n, c, |p, k| if clusters[p] == k { 1.0 } else { 0.0 });
    let mut q = Mat::<f64>::zeros(c, c);
    for k in 0..c {
        for l in 0..c {
            let mut s = 0.0;
            for p in offsets[k]..offsets[k + 1] {
                for r in offsets[l]..offsets[l + 1] {
                    s += a[(p, r)];
                }
            }
            q[(k, l)] = s / sizes[k] as f64;
        }
    }
    let delta = Mat::from_fn(c, n, |k, p| {
        if clusters[p] == k {
            1.0 / (sizes[k] as f64).sqrt()
        } else {
            0.0
        }
    });
    Ok(IndicatorSet { e, o, q, delta, a, sizes, offsets })
}

/// Eigenvalues of Q sorted by (real, imag).
pub fn quotient_spectrum(ind: &IndicatorSet) -> Result<Vec<Complex64>> {
    linalg::eigenvalues_sorted(ind.q.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;

    fn cells_1based(p: &Partition) -> Vec<Vec<usize>> {
        p.cells().iter().map(|c| c.iter().map(|v| v + 1).collect()).collect()
    }

    #[test]
    fn path_partition() {
        let p = coarsest_equitable_partition(&golden::path3());
        assert_eq!(cells_1based(&p), vec![vec![1, 3], vec![2]]);
        assert_eq!(p.order(), &[0, 2, 1]);
        assert_eq!(p.perm(), &[0, 2, 1]);
    }

    #[test]
    fn regular_graphs_single_cell() {
        assert_eq!(coarsest_equitable_partition(&golden::k4()).n_cells(), 1);
        let c5 = Network::from_unit_edges_1based(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]).unwrap();
        assert_eq!(coarsest_equitable_partition(&c5).n_cells(), 1);
    }

    #[test]
    fn four_node_partition() {
        let p = coarsest_equitable_partition(&golden::four_node());
        assert_eq!(cells_1based(&p), vec![vec![1, 2], vec![3, 4]]);
        assert!(check_equitable(&golden::four_node(), p.cells()).unwrap().is_ok());
    }

    #[test]
    fn witness_on_path() {
        let chk = check_equitable(&golden::path3(), &[vec![0, 1], vec![2]]).unwrap();
        let w = chk.witness.unwrap();
        assert_eq!((w.i, w.j, w.cell), (0, 1, 1));
        assert_eq!((w.sum_i, w.sum_j), (0.0, 1.0));
    }

    #[test]
    fn singletons_always_equitable() {
        let net = golden::eight_node();
        assert!(check_equitable(&net, Partition::singletons(8).cells()).unwrap().is_ok());
    }

    #[test]
    fn not_a_partition() {
        assert!(check_equitable(&golden::path3(), &[vec![0, 1]]).is_err());
        assert!(Partition::from_cells(3, vec![vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn weighted_edges_split_cells() {
        let net = Network::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0 + 1e-6)], 1).unwrap();
        assert_eq!(coarsest_equitable_partition(&net).n_cells(), 3);
        let near = Network::from_edges(3, &[(0, 1, 0.1), (1, 2, 0.1 + 1e-12)], 1).unwrap();
        assert_eq!(coarsest_equitable_partition(&near).n_cells(), 2);
    }

    fn mat_eq(m: &Mat<f64>, rows: &[&[f64]]) -> bool {
        rows.iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| (m[(i, j)] - v).abs() < 1e-14))
    }

    #[test]
    fn quotient_matrices() {
        let net = golden::four_node();
        let ind = build_indicators(&net, &coarsest_equitable_partition(&net)).unwrap();
        assert!(mat_eq(&ind.q, &[&[0.0, 1.0], &[1.0, 1.0]]));
        let ev = quotient_spectrum(&ind).unwrap();
        let s5 = 5f64.sqrt();
        assert!((ev[0].re - (1.0 - s5) / 2.0).abs() < 1e-12 && (ev[1].re - (1.0 + s5) / 2.0).abs() < 1e-12);

        let p3 = golden::path3();
        let ind = build_indicators(&p3, &coarsest_equitable_partition(&p3)).unwrap();
        assert!(mat_eq(&ind.q, &[&[0.0, 1.0], &[2.0, 0.0]]));
        let ev = quotient_spectrum(&ind).unwrap();
        assert!((ev[0].re + 2f64.sqrt()).abs() < 1e-12 && (ev[1].re - 2f64.sqrt()).abs() < 1e-12);

        let k4 = golden::k4();
        let ind = build_indicators(&k4, &coarsest_equitable_partition(&k4)).unwrap();
        assert!(mat_eq(&ind.q, &[&[3.0]]));
        assert_eq!(quotient_spectrum(&ind).unwrap()[0].re, 3.0);
    }

    #[test]
    fn indicator_invariants() {
        let net = golden::ten_node();
        let ind = build_indicators(&net, &coarsest_equitable_partition(&net)).unwrap();
        let n = net.n_nodes();
        for p in 0..n {
            assert_eq!(ind.e.iter().map(|e| e[p]).sum::<f64>(), 1.0);
            assert_eq!((0..ind.n_cells()).map(|k| ind.o[(p, k)]).sum::<f64>(), 1.0);
        }
        let otao = ind.o.transpose() * &ind.o;
        let inv = Mat::from_fn(ind.n_cells(), ind.n_cells(), |i, j| if i == j { 1.0 / otao[(i, i)] } else { 0.0 });
        let q2 = &inv * ind.o.transpose() * &ind.a * &ind.o;
        assert!(linalg::frobenius((&q2 - &ind.q).as_ref()) < 1e-13);
        let dd = &ind.delta * ind.delta.transpose();
        let eye = Mat::<f64>::identity(ind.n_cells(), ind.n_cells());
        assert!(linalg::frobenius((&dd - &eye).as_ref()) < 1e-12);
    }

    #[test]
    fn non_equitable_rejected() {
        let p = Partition::from_cells(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert!(matches!(build_indicators(&golden::path3(), &p), Err(SbdError::NotEquitable(_))));
    }

    #[test]
    fn cells_file_roundtrip() {
        let net = golden::eight_node();
        let p = parse_cells(golden::EIGHT_NODE_ORBITAL_CELLS, &net).unwrap();
        assert_eq!(p.n_cells(), 3);
        assert_eq!(parse_cells(&format_cells(&p, &net), &net).unwrap(), p);
        assert!(parse_cells("1 2\n99\n", &net).is_err());
    }

    #[test]
    fn report_json_shape() {
        let net = golden::path3();
        let r = coarsest_equitable_partition(&net).report(&net);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"C":2,"cells":[["1","3"],["2"]],"sizes":[2,1]}"#);
    }
}
