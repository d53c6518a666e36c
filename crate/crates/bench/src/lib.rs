//! Shared instance construction for the criterion benches.

use sbd_core::bench::{desk_instances, BenchInstance};
use sbd_core::golden;

/// Golden networks under their recorded partitions, excluding the trivial one.
pub fn golden_instances() -> Vec<BenchInstance> {
    golden::catalogue()
        .into_iter()
        .filter(|c| c.net.n_nodes() > 1)
        .map(|c| BenchInstance { name: c.name.to_string(), net: c.net, part: c.part })
        .collect()
}

/// Planted desk-scale instances with a fixed seed.
pub fn planted(sizes: &[usize]) -> Vec<BenchInstance> {
    desk_instances(sizes, 7).expect("planted instances")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_build() {
        assert_eq!(golden_instances().len(), 9);
        let p = planted(&[60]);
        assert_eq!(p[0].net.n_nodes(), 60);
    }
}
