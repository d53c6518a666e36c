//! Exhaustive oracles over all small connected graphs.

mod common;

use common::*;
use sbd_core::commutant::{assemble_problem, explicit_constraint_matrix, nullspace, DEFAULT_TOL_REL};
use sbd_core::linalg;
use sbd_core::partition::{build_indicators, coarsest_equitable_partition};
use sbd_core::Partition;

#[test]
fn enumeration_counts_match_known_sequence() {
    let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let counts: Vec<usize> = (1..=6).map(|n| set_partitions(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 15, 52, 203]);
}

#[test]
fn exact_rank_small_cases() {
    assert_eq!(exact_rank(&[vec![1, 2], vec![2, 4]]), 1);
    assert_eq!(exact_rank(&[vec![0, 1, 0], vec![0, 0, 1], vec![0, 1, 1]]), 2);
    assert_eq!(exact_rank(&[vec![2, 0, 1], vec![1, 3, 0], vec![0, 1, 5]]), 3);
}

#[test]
fn refinement_matches_exhaustive_search() {
    for n in 1..=6 {
        for edges in connected_graphs(n) {
            let net = network(n, &edges);
            let got = canonical_cells(coarsest_equitable_partition(&net).cells().to_vec());
            assert_eq!(got, coarsest_by_search(&net), "n={n} edges={edges:?}");
        }
    }
}

#[test]
fn nullspace_dimension_matches_exact_rank() {
    let mut checked = 0;
    for n in 1..=6 {
        for edges in connected_graphs(n) {
            let net = network(n, &edges);
            for cells in equitable_partitions(&net) {
                let part = Partition::from_cells(n, cells.clone()).unwrap();
                let ind = build_indicators(&net, &part).unwrap();
                let basis = nullspace(&assemble_problem(&ind), DEFAULT_TOL_REL).unwrap();
                assert_eq!(basis.dim(), exact_commutant_dim(&net, &part), "n={n} edges={edges:?} cells={cells:?}");
                checked += 1;
            }
        }
    }
    assert!(checked > 143);
}

#[test]
fn gram_matches_explicit_product() {
    for n in 2..=5 {
        for edges in connected_graphs(n) {
            let net = network(n, &edges);
            let part = coarsest_equitable_partition(&net);
            let ind = build_indicators(&net, &part).unwrap();
            let s = explicit_constraint_matrix(&ind);
            let sts = s.transpose() * &s;
            let prob = assemble_problem(&ind);
            assert!(linalg::frobenius((&sts - &prob.sts).as_ref()) < 1e-12);
            assert_eq!(s.nrows(), prob.n_rows);
        }
    }
}
