//! Brute-force helpers shared by the oracle and acceptance tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use sbd_core::graph::Network;
use sbd_core::Partition;

/// Unordered node pairs (i < j) of an n-node graph, in a fixed order.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn mask_connected(n: usize, mask: u32, pairs: &[(usize, usize)]) -> bool {
    let mut seen = 1u32;
    loop {
        let mut grown = seen;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if seen >> i & 1 == 1 {
                    grown |= 1 << j;
                }
                if seen >> j & 1 == 1 {
                    grown |= 1 << i;
                }
            }
        }
        if grown == seen {
            break;
        }
        seen = grown;
    }
    seen == (1u32 << n) - 1
}

/// Every connected simple graph on `n` nodes, one per isomorphism class,
/// as 0-based edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 1 {
        return vec![Vec::new()];
    }
    let pr = pairs(n);
    let index = |i: usize, j: usize| pr.iter().position(|&p| p == (i.min(j), i.max(j))).unwrap();
    let perms = permutations(n);
    // image of each pair slot under each permutation
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| pr.iter().map(|&(i, j)| index(p[i], p[j])).collect()).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pr.len() {
        if !mask_connected(n, mask, &pr) {
            continue;
        }
        let canon = maps
            .iter()
            .map(|m| (0..pr.len()).filter(|&k| mask >> k & 1 == 1).fold(0u32, |acc, k| acc | 1 << m[k]))
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push((0..pr.len()).filter(|&k| mask >> k & 1 == 1).map(|k| pr[k]).collect());
        }
    }
    out
}

pub fn network(n: usize, edges: &[(usize, usize)]) -> Network {
    let e: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
    Network::from_edges(n, &e, 1).unwrap()
}

/// All set partitions of 0..n as cell lists (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(k: usize, n: usize, cells: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == n {
            out.push(cells.clone());
            return;
        }
        for c in 0..cells.len() {
            cells[c].push(k);
            rec(k + 1, n, cells, out);
            cells[c].pop();
        }
        cells.push(vec![k]);
        rec(k + 1, n, cells, out);
        cells.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Direct equitability test from the definition.
pub fn is_equitable_direct(net: &Network, cells: &[Vec<usize>]) -> bool {
    cells.iter().all(|ck| {
        cells.iter().all(|cl| {
            let s = |i: usize| cl.iter().map(|&j| net.weight(i, j)).sum::<f64>();
            ck.iter().all(|&i| s(i) == s(ck[0]))
        })
    })
}

/// Equitable partitions of a small network, by exhaustive search.
pub fn equitable_partitions(net: &Network) -> Vec<Vec<Vec<usize>>> {
    set_partitions(net.n_nodes()).into_iter().filter(|p| is_equitable_direct(net, p)).collect()
}

/// Coarsest equitable partition by exhaustive search; panics if the minimum
/// cell count is attained by more than one partition.
pub fn coarsest_by_search(net: &Network) -> Vec<Vec<usize>> {
    let all = equitable_partitions(net);
    let best = all.iter().map(|p| p.len()).min().unwrap();
    let winners: Vec<_> = all.into_iter().filter(|p| p.len() == best).collect();
    assert_eq!(winners.len(), 1, "coarsest equitable partition not unique");
    canonical_cells(winners.into_iter().next().unwrap())
}

/// Cells sorted internally and by smallest member.
pub fn canonical_cells(mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut cells {
        c.sort_unstable();
    }
    cells.sort();
    cells
}

/// Integer constraint rows of P_i A_ij − A_ij P_j = 0 for every ordered cell
/// pair, one row per entry, built by index loops on the original node labels.
/// Unknown (i, r, c) is entry (r, c) of P_i.
pub fn direct_constraints(net: &Network, part: &Partition) -> (Vec<Vec<i64>>, usize) {
    let cells = part.cells();
    let mut off = vec![0usize];
    for c in cells {
        off.push(off.last().unwrap() + c.len() * c.len());
    }
    let n_unknowns = *off.last().unwrap();
    let var = |k: usize, r: usize, c: usize| off[k] + r * cells[k].len() + c;
    let w = |u: usize, v: usize| {
        let x = net.weight(u, v);
        assert_eq!(x.fract(), 0.0);
        x as i64
    };
    let mut rows = Vec::new();
    for (i, ci) in cells.iter().enumerate() {
        for (j, cj) in cells.iter().enumerate() {
            for r in 0..ci.len() {
                for c in 0..cj.len() {
                    // (P_i A_ij)[r, c] − (A_ij P_j)[r, c]
                    let mut row = vec![0i64; n_unknowns];
                    for s in 0..ci.len() {
                        row[var(i, r, s)] += w(ci[s], cj[c]);
                    }
                    for s in 0..cj.len() {
                        row[var(j, s, c)] -= w(ci[r], cj[s]);
                    }
                    if row.iter().any(|&x| x != 0) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    (rows, n_unknowns)
}

/// Exact rank by fraction-free Gaussian elimination.
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    if m.is_empty() {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for c in col + 1..ncols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Commutant dimension from the exact rank of the direct constraint system.
pub fn exact_commutant_dim(net: &Network, part: &Partition) -> usize {
    let (rows, n) = direct_constraints(net, part);
    n - exact_rank(&rows)
}
