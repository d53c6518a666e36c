//! Canonical simultaneous block diagonalization for cluster synchronization.
//!
//! Given a network and an equitable partition of its nodes, the crate finds an
//! orthogonal, cluster-preserving change of coordinates T that splits the
//! variational equation about the cluster-synchronous state into independent
//! blocks, one of which (or a group of which) carries the quotient dynamics.
//!
//! ```
//! use sbd_core::{golden, partition, pipeline};
//!
//! let net = golden::four_node();
//! let part = partition::coarsest_equitable_partition(&net);
//! let r = pipeline::run_pipeline(&net, &part, &Default::default()).unwrap();
//! assert_eq!(r.ct.block_sizes(), vec![2, 2]);
//! ```

pub mod bench;
pub mod commutant;
pub mod error;
pub mod export;
pub mod golden;
pub mod graph;
pub mod linalg;
pub mod partition;
pub mod pipeline;
pub mod sensitivity;
pub mod stability;
pub mod transform;

pub use error::{Result, SbdError, Witness};
pub use graph::{EdgeParam, Network};
pub use partition::{IndicatorSet, Partition};
pub use transform::{BlockClass, BlockTuple, CanonicalTransform};

pub use faer::Mat;
pub use num_complex::Complex64;
