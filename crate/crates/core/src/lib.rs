//! Coordinated local graph-neighborhood sampling.
//!
//! Every node receives a sample drawn from its k-hop neighborhood. Samples
//! for different nodes share randomness, so the probability that two nodes
//! pick the same sample reflects how similar their neighborhoods are.
//! Repeating with `d` independent seeds yields a `d`-dimensional discrete
//! embedding whose coordinates are graph nodes.
//!
//! Three samplers are provided on top of one propagation engine:
//!
//! * `L0`: minwise (uniform) sampling from the k-hop ball; collisions
//!   estimate Jaccard similarity.
//! * `L1` / `L2`: reweighted walk-count vectors summarized with mergeable
//!   heavy-hitter summaries; sampling probability follows the number of
//!   walks (or its square).
//! * `RW`: an uncoordinated random-walk baseline.
//!
//! The [`oracle`] module holds brute-force reference computations used by
//! the test suites.

pub mod embeddings;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod randomness;
pub mod samplers;
pub mod summaries;

pub use embeddings::{collision_similarity, embed, substitute_attributes, EmbeddingMatrix, EmbeddingMeta};
pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, NodeAttributes, NodeId};
pub use randomness::SeedContext;
pub use samplers::{
    exact_walk_count_norm, sample, Method, Mode, NeighborhoodParams, NormSource, Recurrence,
    SampleVector, SamplerConfig,
};
pub use summaries::{CountSketch, FrequentSummary};
