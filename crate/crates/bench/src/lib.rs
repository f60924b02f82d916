//! Shared fixtures for the benchmarks.

use cologne::graph::random_edges;
use cologne::Graph;

/// Undirected random multigraph with `avg_degree * n / 2` edges.
pub fn fixture(n: usize, avg_degree: usize, seed: u64) -> Graph {
    random_edges(n, n * avg_degree / 2, seed, false)
}
