//! Network data model, edge-list and JSON I/O, and planted-partition generators.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

use faer::Mat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError};
use crate::partition::Partition;

/// Undirected weighted network with a dense symmetric adjacency matrix.
#[derive(Debug, Clone)]
pub struct Network {
    adjacency: Mat<f64>,
    labels: Vec<String>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.adjacency == other.adjacency
    }
}

impl Network {
    /// Builds a network, checking symmetry (bitwise), zero diagonal and label count.
    pub fn new(adjacency: Mat<f64>, labels: Vec<String>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 {
            return Err(SbdError::InvalidNetwork("network has no nodes".into()));
        }
        if adjacency.ncols() != n {
            return Err(SbdError::InvalidNetwork("adjacency is not square".into()));
        }
        if labels.len() != n {
            return Err(SbdError::InvalidNetwork(format!(
                "{} labels for {} nodes",
                labels.len(),
                n
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(SbdError::InvalidNetwork(format!("self-loop on node {}", labels[i])));
            }
            for j in 0..i {
                let w = adjacency[(i, j)];
                if !w.is_finite() {
                    return Err(SbdError::InvalidNetwork(format!("non-finite weight at ({i}, {j})")));
                }
                if w.to_bits() != adjacency[(j, i)].to_bits() {
                    return Err(SbdError::InvalidNetwork(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(Network { adjacency, labels })
    }

    /// Network on `n` nodes labelled `base..base+n` from 0-based weighted edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], base: usize) -> Result<Self> {
        let mut a = Mat::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(SbdError::InvalidNetwork(format!("edge ({i}, {j}) out of range")));
            }
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        Network::new(a, default_labels(n, base))
    }

    /// Unweighted network from 1-based edges; labels are `1..=n`.
    pub fn from_unit_edges_1based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let e: Vec<_> = edges.iter().map(|&(i, j)| (i - 1, j - 1, 1.0)).collect();
        Network::from_edges(n, &e, 1)
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Mat<f64> {
        &self.adjacency
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    /// Edges with i < j and nonzero weight, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.adjacency[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_nodes()).filter(move |&j| self.adjacency[(i, j)] != 0.0)
    }

    /// True when every weight is an integer (exact comparisons are then safe).
    pub fn has_integer_weights(&self) -> bool {
        self.edges().iter().all(|&(_, _, w)| w.fract() == 0.0 && w.abs() < 2f64.powi(40))
    }

    pub fn is_connected(&self) -> bool {
        components(self).len() == 1
    }

    /// Same network with one symmetric entry replaced.
    pub fn with_weight(&self, i: usize, j: usize, w: f64) -> Result<Network> {
        if i == j {
            return Err(SbdError::InvalidArgument(format!("self-loop on node {}", self.labels[i])));
        }
        let mut a = self.adjacency.clone();
        a[(i, j)] = w;
        a[(j, i)] = w;
        Network::new(a, self.labels.clone())
    }

    /// Index of the node carrying `label`.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn to_json(&self) -> NetworkJson {
        NetworkJson {
            n: self.n_nodes(),
            labels: self.labels.clone(),
            edges: self.edges().into_iter().map(|(i, j, w)| (i, j, w)).collect(),
        }
    }

    pub fn from_json(j: &NetworkJson) -> Result<Network> {
        let mut a = Mat::zeros(j.n, j.n);
        let mut seen = HashSet::new();
        for &(u, v, w) in &j.edges {
            if u >= j.n || v >= j.n {
                return Err(SbdError::InvalidNetwork(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(SbdError::InvalidNetwork(format!("self-loop on node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(SbdError::InvalidNetwork(format!("duplicate edge ({u}, {v})")));
            }
            a[(u, v)] = w;
            a[(v, u)] = w;
        }
        Network::new(a, j.labels.clone())
    }
}

fn default_labels(n: usize, base: usize) -> Vec<String> {
    (0..n).map(|i| (i + base).to_string()).collect()
}

/// JSON form: 0-based indices, each edge once with i < j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub n: usize,
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

/// A named edge weight, the unit of sensitivity analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeParam {
    pub name: String,
    pub i: usize,
    pub j: usize,
    pub value: f64,
    /// Allow the edge to be absent from the network support.
    #[serde(default)]
    pub addable: bool,
}

impl EdgeParam {
    pub fn new(name: impl Into<String>, i: usize, j: usize, value: f64) -> Self {
        EdgeParam { name: name.into(), i, j, value, addable: false }
    }

    /// Parses `name:i,j=w` with labels in the given indexing base.
    pub fn parse(text: &str, base: usize) -> Result<EdgeParam> {
        let bad = || SbdError::InvalidArgument(format!("expected name:i,j=w, got {text:?}"));
        let (name, rest) = text.split_once(':').ok_or_else(bad)?;
        let (pair, w) = rest.split_once('=').ok_or_else(bad)?;
        let (i, j) = pair.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let j: usize = j.trim().parse().map_err(|_| bad())?;
        let value: f64 = w.trim().parse().map_err(|_| bad())?;
        if i < base || j < base || name.trim().is_empty() {
            return Err(bad());
        }
        Ok(EdgeParam::new(name.trim(), i - base, j - base, value))
    }
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// 0 or 1: the label of the first node.
    pub base: usize,
    /// When false a third column is ignored and every edge gets weight 1.
    pub weighted: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { base: 1, weighted: true }
    }
}

/// Parses the edge-list dialect.
///
/// Each non-comment line is `u v` or `u v w`; `#` starts a comment. A comment
/// of the form `# N=<int>` fixes the node count so isolated nodes survive;
/// otherwise N is one past the largest index seen. Node labels are the
/// indices as written.
pub fn load_edge_list(text: &str, opts: LoadOptions) -> Result<Network> {
    if opts.base > 1 {
        return Err(SbdError::InvalidArgument(format!("indexing base must be 0 or 1, got {}", opts.base)));
    }
    let mut declared_n: Option<usize> = None;
    let mut edges: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut max_idx: Option<usize> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let (body, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("N=").or_else(|| c.strip_prefix("N =")) {
                let n: usize = v.trim().parse().map_err(|_| SbdError::Parse {
                    line: line_no,
                    msg: format!("bad node-count header {c:?}"),
                })?;
                declared_n = Some(n);
            }
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(SbdError::Parse {
                line: line_no,
                msg: format!("expected 2 or 3 fields, found {}", toks.len()),
            });
        }
        let parse_node = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| SbdError::Parse {
                line: line_no,
                msg: format!("bad node index {t:?}"),
            })?;
            v.checked_sub(opts.base).ok_or_else(|| SbdError::Parse {
                line: line_no,
                msg: format!("node index {v} below base {}", opts.base),
            })
        };
        let u = parse_node(toks[0])?;
        let v = parse_node(toks[1])?;
        let w = if toks.len() == 3 && opts.weighted {
            let w: f64 = toks[2].parse().map_err(|_| SbdError::Parse {
                line: line_no,
                msg: format!("bad weight {:?}", toks[2]),
            })?;
            if !w.is_finite() || w == 0.0 {
                return Err(SbdError::Parse { line: line_no, msg: format!("weight must be finite and nonzero, got {w}") });
            }
            w
        } else {
            1.0
        };
        if u == v {
            return Err(SbdError::SelfLoop { line: line_no, node: toks[0].to_string() });
        }
        let key = (u.min(v), u.max(v));
        if let Some(&(first, _)) = edges.get(&key) {
            let (lu, lv) = (toks[0].to_string(), toks[1].to_string());
            if first != w {
                return Err(SbdError::ConflictingWeight { line: line_no, u: lu, v: lv, first, second: w });
            }
            return Err(SbdError::DuplicateEdge { line: line_no, u: lu, v: lv });
        }
        edges.insert(key, (w, line_no));
        max_idx = Some(max_idx.map_or(key.1, |m: usize| m.max(key.1)));
    }
    let n = match (declared_n, max_idx) {
        (Some(n), Some(m)) if m >= n => {
            return Err(SbdError::InvalidNetwork(format!(
                "header declares N={n} but node index {} appears",
                m + opts.base
            )))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    let mut a = Mat::zeros(n, n);
    for (&(u, v), &(w, _)) in &edges {
        a[(u, v)] = w;
        a[(v, u)] = w;
    }
    Network::new(a, default_labels(n, opts.base))
}

/// Writes the edge-list dialect read by [`load_edge_list`], with an `N=` header.
///
/// Unit weights are written as bare pairs. Labels are not stored; indices are
/// positions offset by `base`.
pub fn save_edge_list(net: &Network, base: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# N={}", net.n_nodes());
    for (i, j, w) in net.edges() {
        if w == 1.0 {
            let _ = writeln!(s, "{} {}", i + base, j + base);
        } else {
            let _ = writeln!(s, "{} {} {}", i + base, j + base, w);
        }
    }
    s
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(net: &Network) -> Vec<Vec<usize>> {
    let n = net.n_nodes();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for y in net.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                    q.push_back(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Induced subnetwork on `nodes` (kept in the given order), labels carried over.
pub fn induced_subnetwork(net: &Network, nodes: &[usize]) -> Network {
    let a = Mat::from_fn(nodes.len(), nodes.len(), |i, j| net.adjacency[(nodes[i], nodes[j])]);
    let labels = nodes.iter().map(|&i| net.labels[i].clone()).collect();
    Network { adjacency: a, labels }
}

/// Largest connected component; ties go to the component with the smallest node.
pub fn largest_connected_component(net: &Network) -> Network {
    let comps = components(net);
    // components are ordered by smallest member, so the first maximum wins ties
    let mut best = 0;
    for (k, c) in comps.iter().enumerate() {
        if c.len() > comps[best].len() {
            best = k;
        }
    }
    if comps[best].len() == net.n_nodes() {
        return net.clone();
    }
    induced_subnetwork(net, &comps[best])
}

/// Specification of a network with a planted equitable partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub sizes: Vec<usize>,
    /// `quotient_degrees[k][l]`: neighbours in cluster l of every node of cluster k.
    pub quotient_degrees: Vec<Vec<usize>>,
    pub seed: u64,
    #[serde(default = "default_retries")]
    pub retries: usize,
    /// Randomly relabel nodes so clusters are not contiguous.
    #[serde(default)]
    pub shuffle: bool,
}

fn default_retries() -> usize {
    100
}

impl PlantedSpec {
    pub fn new(sizes: Vec<usize>, quotient_degrees: Vec<Vec<usize>>, seed: u64) -> Self {
        PlantedSpec { sizes, quotient_degrees, seed, retries: 100, shuffle: false }
    }

    /// Checks the counting constraints, naming the first violated one.
    pub fn validate(&self) -> Result<()> {
        let c = self.sizes.len();
        if c == 0 {
            return Err(SbdError::Infeasible("no clusters".into()));
        }
        if self.quotient_degrees.len() != c || self.quotient_degrees.iter().any(|r| r.len() != c) {
            return Err(SbdError::Infeasible(format!("quotient_degrees must be {c}x{c}")));
        }
        if let Some(k) = self.sizes.iter().position(|&s| s == 0) {
            return Err(SbdError::Infeasible(format!("cluster {k} is empty")));
        }
        let d = &self.quotient_degrees;
        for k in 0..c {
            let nk = self.sizes[k];
            if d[k][k] > nk - 1 {
                return Err(SbdError::Infeasible(format!("d[{k}][{k}] = {} exceeds n_{k} - 1 = {}", d[k][k], nk - 1)));
            }
            if nk * d[k][k] % 2 != 0 {
                return Err(SbdError::Infeasible(format!("n_{k} * d[{k}][{k}] = {} is odd", nk * d[k][k])));
            }
            for l in 0..c {
                if l == k {
                    continue;
                }
                let nl = self.sizes[l];
                if d[k][l] > nl {
                    return Err(SbdError::Infeasible(format!("d[{k}][{l}] = {} exceeds n_{l} = {nl}", d[k][l])));
                }
                if nk * d[k][l] != nl * d[l][k] {
                    return Err(SbdError::Infeasible(format!(
                        "edge count mismatch: n_{k} * d[{k}][{l}] = {} != n_{l} * d[{l}][{k}] = {}",
                        nk * d[k][l],
                        nl * d[l][k]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Random simple graph realising `spec`, together with the planted partition.
///
/// Each cluster pair is placed independently by randomized stub pairing with
/// up to `spec.retries` restarts; dense pairs are built as complements of
/// sparse ones.
pub fn generate_planted(spec: &PlantedSpec) -> Result<(Network, Partition)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.sizes.len();
    let n: usize = spec.sizes.iter().sum();
    let mut offs = vec![0usize; c + 1];
    for k in 0..c {
        offs[k + 1] = offs[k] + spec.sizes[k];
    }
    let mut a = Mat::<f64>::zeros(n, n);
    let d = &spec.quotient_degrees;
    for k in 0..c {
        for l in k..c {
            let pairs = if k == l {
                regular_edges(spec.sizes[k], d[k][k], spec.retries, &mut rng)
                    .ok_or(SbdError::PlacementFailed { k, l, retries: spec.retries })?
            } else {
                biregular_edges(spec.sizes[k], spec.sizes[l], d[k][l], d[l][k], spec.retries, &mut rng)
                    .ok_or(SbdError::PlacementFailed { k, l, retries: spec.retries })?
            };
            for (u, v) in pairs {
                let (gu, gv) = (offs[k] + u, offs[l] + v);
                a[(gu, gv)] = 1.0;
                a[(gv, gu)] = 1.0;
            }
        }
    }
    let mut relabel: Vec<usize> = (0..n).collect();
    if spec.shuffle {
        relabel.shuffle(&mut rng);
    }
    let mut b = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(relabel[i], relabel[j])] = a[(i, j)];
        }
    }
    let net = Network::new(b, default_labels(n, 1))?;
    let cells: Vec<Vec<usize>> = (0..c).map(|k| (offs[k]..offs[k + 1]).map(|i| relabel[i]).collect()).collect();
    let part = Partition::from_cells(n, cells)?;
    Ok((net, part))
}

/// Random d-regular simple graph on n nodes as local index pairs.
fn regular_edges(n: usize, d: usize, retries: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    if d == 0 {
        return Some(Vec::new());
    }
    if 2 * d > n - 1 {
        let sparse = regular_edges(n, n - 1 - d, retries, rng)?;
        let set: HashSet<(usize, usize)> = sparse.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if !set.contains(&(u, v)) {
                    out.push((u, v));
                }
            }
        }
        return Some(out);
    }
    for _ in 0..=retries {
        let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat(u).take(d)).collect();
        if let Some(e) = pair_stubs(&mut stubs, None, rng) {
            return Some(e);
        }
    }
    None
}

/// Random bipartite graph where left nodes have degree dl and right nodes dr.
fn biregular_edges(
    nl: usize,
    nr: usize,
    dl: usize,
    dr: usize,
    retries: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(usize, usize)>> {
    if dl == 0 {
        return Some(Vec::new());
    }
    if 2 * dl > nr {
        let sparse = biregular_edges(nl, nr, nr - dl, nl - dr, retries, rng)?;
        let set: HashSet<(usize, usize)> = sparse.into_iter().collect();
        let mut out = Vec::new();
        for u in 0..nl {
            for v in 0..nr {
                if !set.contains(&(u, v)) {
                    out.push((u, v));
                }
            }
        }
        return Some(out);
    }
    for _ in 0..=retries {
        let mut left: Vec<usize> = (0..nl).flat_map(|u| std::iter::repeat(u).take(dl)).collect();
        let mut right: Vec<usize> = (0..nr).flat_map(|u| std::iter::repeat(u).take(dr)).collect();
        if let Some(e) = pair_stubs(&mut left, Some(&mut right), rng) {
            return Some(e);
        }
    }
    None
}

/// Sequential stub pairing: each left stub is matched with a uniformly chosen
/// admissible remaining stub; returns None when stuck.
fn pair_stubs(
    left: &mut Vec<usize>,
    right: Option<&mut Vec<usize>>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(usize, usize)>> {
    let bipartite = right.is_some();
    let mut other: Vec<usize> = match right {
        Some(r) => std::mem::take(r),
        None => Vec::new(),
    };
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::new();
    left.shuffle(rng);
    if bipartite {
        while let Some(u) = left.pop() {
            let cand: Vec<usize> = (0..other.len()).filter(|&k| !used.contains(&(u, other[k]))).collect();
            if cand.is_empty() {
                return None;
            }
            let k = cand[rng.gen_range(0..cand.len())];
            let v = other.swap_remove(k);
            used.insert((u, v));
            out.push((u, v));
        }
    } else {
        while let Some(u) = left.pop() {
            let cand: Vec<usize> = (0..left.len())
                .filter(|&k| {
                    let v = left[k];
                    v != u && !used.contains(&(u.min(v), u.max(v)))
                })
                .collect();
            if cand.is_empty() {
                return None;
            }
            let k = cand[rng.gen_range(0..cand.len())];
            let v = left.swap_remove(k);
            used.insert((u.min(v), u.max(v)));
            out.push((u, v));
        }
    }
    Some(out)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Parameters for [`random_planted_spec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPlanted {
    pub n: usize,
    /// Number of clusters with more than one node.
    pub nontrivial: usize,
    pub max_cluster: usize,
    /// Expected number of extra cluster-pair links beyond a spanning tree, per cluster.
    pub extra_links: f64,
    /// Probability that a cluster of size at least 3 gets an internal cycle.
    pub internal_prob: f64,
}

/// Draws a feasible planted spec: `nontrivial` clusters of random size in
/// `2..=max_cluster`, singletons for the remaining nodes, cluster pairs linked
/// along a random spanning tree plus extra random pairs. A linked pair (k, l)
/// uses the smallest consistent degrees `d_kl = n_l/g`, `d_lk = n_k/g`.
pub fn random_planted_spec(p: RandomPlanted, seed: u64) -> Result<PlantedSpec> {
    if p.max_cluster < 2 || p.nontrivial * 2 > p.n {
        return Err(SbdError::InvalidArgument(format!(
            "cannot fit {} nontrivial clusters in {} nodes with max size {}",
            p.nontrivial, p.n, p.max_cluster
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_c1a5);
    let mut sizes: Vec<usize> = Vec::new();
    let mut budget = p.n;
    for k in 0..p.nontrivial {
        let remaining_min = 2 * (p.nontrivial - k - 1);
        let hi = p.max_cluster.min(budget - remaining_min);
        let s = rng.gen_range(2..=hi);
        sizes.push(s);
        budget -= s;
    }
    sizes.extend(std::iter::repeat(1).take(budget));
    sizes.shuffle(&mut rng);
    let c = sizes.len();
    let mut d = vec![vec![0usize; c]; c];
    let link = |d: &mut Vec<Vec<usize>>, k: usize, l: usize| {
        let g = gcd(sizes[k], sizes[l]);
        d[k][l] = sizes[l] / g;
        d[l][k] = sizes[k] / g;
    };
    let mut order: Vec<usize> = (0..c).collect();
    order.shuffle(&mut rng);
    for t in 1..c {
        let parent = order[rng.gen_range(0..t)];
        link(&mut d, order[t], parent);
    }
    let extra = (p.extra_links * c as f64).round() as usize;
    for _ in 0..extra {
        let k = rng.gen_range(0..c);
        let l = rng.gen_range(0..c);
        if k != l && d[k][l] == 0 {
            link(&mut d, k, l);
        }
    }
    for k in 0..c {
        if sizes[k] >= 3 && rng.gen_bool(p.internal_prob) {
            d[k][k] = 2;
        }
    }
    let mut spec = PlantedSpec::new(sizes, d, seed);
    spec.shuffle = true;
    Ok(spec)
}

/// Generates connected planted networks, advancing the seed until connected.
pub fn generate_connected_planted(p: RandomPlanted, seed: u64, max_tries: usize) -> Result<(Network, Partition, u64)> {
    for t in 0..max_tries as u64 {
        let s = seed.wrapping_add(t.wrapping_mul(0x9e37_79b9));
        let spec = random_planted_spec(p, s)?;
        match generate_planted(&spec) {
            Ok((net, part)) if net.is_connected() => return Ok((net, part, s)),
            Ok(_) | Err(SbdError::PlacementFailed { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SbdError::InvalidArgument(format!("no connected planted network after {max_tries} seeds")))
}
