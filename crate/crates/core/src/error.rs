use thiserror::Error;

/// Row-sum mismatch proving a partition is not equitable.
///
/// Node and cell indices are 0-based; `cell` follows the partition numbering.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub cell: usize,
    pub sum_i: f64,
    pub sum_j: f64,
}

#[derive(Debug, Error)]
pub enum SbdError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },
    #[error("line {line}: edge ({u}, {v}) listed more than once")]
    DuplicateEdge { line: usize, u: String, v: String },
    #[error("line {line}: edge ({u}, {v}) repeated with conflicting weights {first} and {second}")]
    ConflictingWeight {
        line: usize,
        u: String,
        v: String,
        first: f64,
        second: f64,
    },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("infeasible planted spec: {0}")]
    Infeasible(String),
    #[error("edge placement failed for cluster pair ({k}, {l}) after {retries} retries")]
    PlacementFailed { k: usize, l: usize, retries: usize },
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error(
        "partition is not equitable: nodes {} and {} send {} vs {} into cell {}",
        .0.i, .0.j, .0.sum_i, .0.sum_j, .0.cell
    )]
    NotEquitable(Witness),
    #[error("commutant nullspace is empty; smallest Gram eigenvalues {tail:?}")]
    EmptyNullspace { tail: Vec<f64> },
    #[error("constant direction not found in any eigenspace of block {cluster} (best projection {best:.3e})")]
    ConstantDirectionMissing { cluster: usize, best: f64 },
    #[error("transform block {cluster} is not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { cluster: usize, residual: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("trajectory diverged at t = {time}")]
    Diverged { time: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("edge ({i}, {j}) is not in the network and was not declared addable")]
    UnknownEdge { i: usize, j: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SbdError>;
