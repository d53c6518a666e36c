use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sbd_core::commutant::{assemble_problem, commutator_norm, explicit_constraint_matrix, nullspace, DEFAULT_TOL_REL};
use sbd_core::graph::{
    generate_connected_planted, largest_connected_component, load_edge_list, save_edge_list, LoadOptions,
    RandomPlanted,
};
use sbd_core::linalg;
use sbd_core::partition::{build_indicators, check_equitable, coarsest_equitable_partition, quotient_spectrum, refine};
use sbd_core::pipeline::{run_pipeline, PipelineConfig};
use sbd_core::sensitivity::{sensitivity, DEFAULT_SENS_TOL};
use sbd_core::transform::verify_canonical;
use sbd_core::{EdgeParam, Mat, Network, Partition};

fn planted(n: usize, seed: u64) -> (Network, Partition) {
    let p = RandomPlanted { n, nontrivial: (n / 5).max(1), max_cluster: 5, extra_links: 0.5, internal_prob: 0.3 };
    let (net, part, _) = generate_connected_planted(p, seed, 200).unwrap();
    (net, part)
}

fn random_network(n: usize, seed: u64, p: f64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rand::Rng::gen_bool(&mut rng, p) {
                edges.push((i, j, rand::Rng::gen_range(&mut rng, 1..4) as f64));
            }
        }
    }
    Network::from_edges(n, &edges, 1).unwrap()
}

fn relabel(net: &Network, part: &Partition, seed: u64) -> (Network, Partition) {
    let n = net.n_nodes();
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let edges: Vec<_> = net.edges().into_iter().map(|(i, j, w)| (map[i], map[j], w)).collect();
    let cells = part.cells().iter().map(|c| c.iter().map(|&v| map[v]).collect()).collect();
    (Network::from_edges(n, &edges, 1).unwrap(), Partition::from_cells(n, cells).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edge_list_roundtrip(n in 2usize..15, seed in any::<u64>(), p in 0.1f64..0.7) {
        let net = random_network(n, seed, p);
        let text = format!("# N={n}\n{}", save_edge_list(&net, 1));
        let back = load_edge_list(&text, LoadOptions::default()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn largest_component_idempotent(n in 2usize..20, seed in any::<u64>(), p in 0.05f64..0.4) {
        let lcc = largest_connected_component(&random_network(n, seed, p));
        prop_assert!(lcc.is_connected());
        prop_assert_eq!(largest_connected_component(&lcc), lcc);
    }

    #[test]
    fn planted_partition_is_equitable(n in 6usize..40, seed in any::<u64>()) {
        let (net, part) = planted(n, seed);
        prop_assert!(check_equitable(&net, part.cells()).unwrap().is_ok());
    }

    #[test]
    fn refinement_is_equitable_fixed_point(n in 2usize..25, seed in any::<u64>(), p in 0.1f64..0.6) {
        let net = random_network(n, seed, p);
        let part = coarsest_equitable_partition(&net);
        prop_assert!(check_equitable(&net, part.cells()).unwrap().is_ok());
        let colors: Vec<usize> = (0..n).map(|v| part.cluster_of(v)).collect();
        let again = refine(&net, &colors);
        prop_assert_eq!(again.cells(), part.cells());
    }

    #[test]
    fn symmetric_quotient_is_similar_to_q(n in 6usize..40, seed in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let ind = build_indicators(&net, &part).unwrap();
        let q1 = &ind.delta * &ind.a * ind.delta.transpose();
        prop_assert!(linalg::frobenius((&q1 - q1.transpose()).as_ref()) < 1e-12);
        let ev = linalg::sym_eigenvalues(q1.as_ref()).unwrap();
        let qs = quotient_spectrum(&ind).unwrap();
        let re: Vec<f64> = qs.iter().map(|z| z.re).collect();
        prop_assert!(linalg::spectrum_distance(&ev, &re) < 1e-9);
        prop_assert!(qs.iter().all(|z| z.im.abs() < 1e-9));
    }

    #[test]
    fn gram_equals_explicit_route(n in 4usize..16, seed in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let ind = build_indicators(&net, &part).unwrap();
        let s = explicit_constraint_matrix(&ind);
        let prob = assemble_problem(&ind);
        prop_assert!(linalg::frobenius((s.transpose() * &s - &prob.sts).as_ref()) < 1e-10);
    }

    #[test]
    fn commutant_dimension_invariant_under_relabelling(n in 4usize..30, seed in any::<u64>(), s2 in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let (net2, part2) = relabel(&net, &part, s2);
        let d = |net: &Network, part: &Partition| {
            nullspace(&assemble_problem(&build_indicators(net, part).unwrap()), DEFAULT_TOL_REL).unwrap().dim()
        };
        prop_assert_eq!(d(&net, &part), d(&net2, &part2));
    }

    #[test]
    fn sampled_element_commutes(n in 4usize..40, seed in any::<u64>(), s in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let r = run_pipeline(&net, &part, &PipelineConfig { seed: s, ..Default::default() }).unwrap();
        let p = linalg::block_diag(&r.element.blocks);
        let scale = linalg::frobenius(r.ind.a.as_ref()) * linalg::frobenius(p.as_ref());
        prop_assert!(commutator_norm(&r.ind, &r.element.blocks) <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn transform_preserves_spectrum_and_closes(n in 4usize..40, seed in any::<u64>(), s in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let r = run_pipeline(&net, &part, &PipelineConfig { seed: s, ..Default::default() }).unwrap();
        let rep = verify_canonical(&r.ct, &r.ind).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
        prop_assert!(rep.closure <= 1e-8 * linalg::frobenius(r.ind.a.as_ref()).max(1.0));
        let ea = linalg::sym_eigenvalues(r.ind.a.as_ref()).unwrap();
        let eb = linalg::sym_eigenvalues(linalg::symmetrize(r.ct.b.as_ref()).as_ref()).unwrap();
        prop_assert!(linalg::spectrum_distance(&ea, &eb) < 1e-9 * ea.iter().fold(1.0f64, |m, v| m.max(v.abs())));
        let sum: usize = r.ct.block_sizes().iter().sum();
        prop_assert_eq!(sum, n);
    }

    #[test]
    fn sensitivity_invariant_under_column_sign_flips(n in 4usize..30, seed in any::<u64>(), flips in any::<u64>()) {
        let (net, part) = planted(n, seed);
        let r = run_pipeline(&net, &part, &PipelineConfig::default()).unwrap();
        let params: Vec<EdgeParam> = net
            .edges()
            .into_iter()
            .take(4)
            .enumerate()
            .map(|(k, (i, j, w))| EdgeParam::new(format!("q{k}"), i, j, w))
            .collect();
        let base = sensitivity(&net, &part, &r.ct, &params, DEFAULT_SENS_TOL).unwrap();
        let mut flipped = r.ct.clone();
        let t: &mut Mat<f64> = &mut flipped.t;
        for u in 0..n {
            if flips >> (u % 64) & 1 == 1 {
                for row in 0..n {
                    t[(row, u)] = -t[(row, u)];
                }
            }
        }
        let rep = sensitivity(&net, &part, &flipped, &params, DEFAULT_SENS_TOL).unwrap();
        for (x, y) in base.params.iter().zip(&rep.params) {
            prop_assert_eq!(x.entry_set(), y.entry_set());
            prop_assert_eq!(x.off_block.len(), y.off_block.len());
        }
        prop_assert_eq!(base.overlaps, rep.overlaps);
    }
}
