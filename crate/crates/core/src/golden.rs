//! Small reference networks with known block structure.
//!
//! Labels are 1-based. The same topologies ship as edge-list and cells files
//! under `data/` for use with the CLI.

use crate::graph::{EdgeParam, Network};
use crate::partition::{parse_cells, Partition};

pub const FOUR_NODE_EDGES: &[(usize, usize)] = &[(1, 4), (2, 3), (3, 4)];

pub const PATH3_EDGES: &[(usize, usize)] = &[(1, 2), (2, 3)];

pub const K4_EDGES: &[(usize, usize)] = &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Two triangles whose hubs (1 and 6) are joined by the path 1-4-5-6.
pub const EIGHT_NODE_EDGES: &[(usize, usize)] =
    &[(1, 2), (1, 3), (2, 3), (1, 4), (4, 5), (5, 6), (6, 7), (6, 8), (7, 8)];

/// Orbits of the eight-node network's automorphism group.
pub const EIGHT_NODE_ORBITAL_CELLS: &str = "1 6\n2 3 7 8\n4 5\n";

/// Six nodes in three clusters of two; coarsest and orbital partitions coincide.
pub const SIX_NODE_EDGES: &[(usize, usize)] = &[(1, 4), (1, 5), (2, 5), (2, 6), (3, 4), (3, 5), (4, 6)];

pub const SIX_NODE_CELLS: &str = "1 3\n2 6\n4 5\n";

/// Two degree-4 hubs, each with a pendant triangle edge, joined through two leaf pairs.
pub const TEN_NODE_EDGES: &[(usize, usize)] = &[
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (6, 7),
    (6, 8),
    (6, 9),
    (6, 10),
    (7, 8),
    (4, 9),
    (5, 10),
];

pub const TEN_NODE_ORBITAL_CELLS: &str = "1 6\n2 3 7 8\n4 5 9 10\n";

/// Eleven nodes with six orbits and one two-dimensional intertwined transverse block.
pub const ELEVEN_NODE_EDGES: &[(usize, usize)] = &[
    (1, 3),
    (1, 7),
    (1, 8),
    (1, 11),
    (2, 3),
    (2, 5),
    (2, 7),
    (2, 10),
    (3, 4),
    (3, 6),
    (5, 10),
    (7, 9),
    (8, 11),
];

pub const ELEVEN_NODE_CELLS: &str = "1 2\n3\n4 6\n5 8 10 11\n7\n9\n";

fn build(n: usize, edges: &[(usize, usize)]) -> Network {
    Network::from_unit_edges_1based(n, edges).expect("golden network is valid")
}

pub fn four_node() -> Network {
    build(4, FOUR_NODE_EDGES)
}

pub fn path3() -> Network {
    build(3, PATH3_EDGES)
}

pub fn k4() -> Network {
    build(4, K4_EDGES)
}

pub fn eight_node() -> Network {
    build(8, EIGHT_NODE_EDGES)
}

pub fn eight_node_orbital() -> Partition {
    parse_cells(EIGHT_NODE_ORBITAL_CELLS, &eight_node()).expect("valid cells")
}

pub fn six_node() -> Network {
    build(6, SIX_NODE_EDGES)
}

pub fn six_node_cells() -> Partition {
    parse_cells(SIX_NODE_CELLS, &six_node()).expect("valid cells")
}

pub fn ten_node() -> Network {
    build(10, TEN_NODE_EDGES)
}

pub fn ten_node_orbital() -> Partition {
    parse_cells(TEN_NODE_ORBITAL_CELLS, &ten_node()).expect("valid cells")
}

pub fn eleven_node() -> Network {
    build(11, ELEVEN_NODE_EDGES)
}

pub fn eleven_node_cells() -> Partition {
    parse_cells(ELEVEN_NODE_CELLS, &eleven_node()).expect("valid cells")
}

/// The two edge parameters of the eleven-node network at nominal weight 1.
pub fn eleven_node_params() -> Vec<EdgeParam> {
    vec![EdgeParam::new("q1", 0, 7, 1.0), EdgeParam::new("q2", 4, 9, 1.0)]
}

/// Single-node network.
pub fn trivial() -> Network {
    build(1, &[])
}

/// Every golden network with the partition it is analysed under and its
/// recorded block sizes (parallel blocks first, then descending size).
pub fn catalogue() -> Vec<GoldenCase> {
    use crate::partition::coarsest_equitable_partition as cep;
    let case = |name: &'static str, net: Network, part: Partition, blocks: &'static [usize], parallel: usize| GoldenCase {
        name,
        net,
        part,
        block_sizes: blocks,
        parallel_dim: parallel,
    };
    vec![
        case("four_node", four_node(), cep(&four_node()), &[2, 2], 2),
        case("path3", path3(), cep(&path3()), &[2, 1], 2),
        case("k4", k4(), cep(&k4()), &[1, 1, 1, 1], 1),
        case("eight_node_coarsest", eight_node(), cep(&eight_node()), &[2, 3, 1, 1, 1], 2),
        case("eight_node_orbital", eight_node(), eight_node_orbital(), &[3, 3, 1, 1], 3),
        case("six_node", six_node(), six_node_cells(), &[3, 2, 1], 3),
        case("ten_node_coarsest", ten_node(), cep(&ten_node()), &[2, 3, 1, 1, 1, 1, 1], 2),
        case("ten_node_orbital", ten_node(), ten_node_orbital(), &[3, 3, 1, 1, 1, 1], 3),
        case("eleven_node", eleven_node(), eleven_node_cells(), &[6, 2, 1, 1, 1], 6),
        case("trivial", trivial(), Partition::singletons(1), &[1], 1),
    ]
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: &'static str,
    pub net: Network,
    pub part: Partition,
    pub block_sizes: &'static [usize],
    /// Total size of the parallel blocks (equals the number of cells).
    pub parallel_dim: usize,
}
