//! The neighborhood propagation engine and the samplers built on it.
//!
//! Every sampler follows the same template: initialize a sketch at each node
//! with the node itself, then for `k` rounds replace each node's sketch by the
//! combination of its own and its out-neighbors' previous-round sketches,
//! and finally draw one sample per node from the sketch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::randomness::SeedContext;

mod lp;
mod minwise;
mod walk;

pub use lp::{
    exact_walk_count_norm, propagate_weighted, propagate_weighted_with, sample_lp, sample_lp_with,
    WeightedPropagation,
};
pub use minwise::propagate_l0;
pub use walk::{random_walk_sample, random_walks};

/// Summary capacity used when none is given.
pub const DEFAULT_CAPACITY: usize = 10;
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Uniform sampling from the k-hop ball via minwise ranks.
    L0,
    /// Sampling proportional to walk counts.
    L1,
    /// Sampling proportional to squared walk counts.
    L2,
    /// Endpoint of an independent random walk.
    RandomWalk,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::L0 => "l0",
            Method::L1 => "l1",
            Method::L2 => "l2",
            Method::RandomWalk => "rw",
        }
    }

    /// Exponent `p` of the sampling distribution, for weighted methods.
    pub fn exponent(&self) -> Option<u32> {
        match self {
            Method::L1 => Some(1),
            Method::L2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(Method::L0),
            "l1" => Ok(Method::L1),
            "l2" => Ok(Method::L2),
            "rw" => Ok(Method::RandomWalk),
            _ => Err(Error::Usage(format!("unknown method {s:?}"))),
        }
    }
}

/// How a weighted sampler turns a summary into a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Heaviest summary entry.
    #[default]
    Argmax,
    /// The unique entry whose reweighted weight reaches the norm of the
    /// walk-count vector; none when zero or several entries qualify.
    Threshold,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "argmax" => Ok(Mode::Argmax),
            "threshold" => Ok(Mode::Threshold),
            _ => Err(Error::Usage(format!("unknown mode {s:?}"))),
        }
    }
}

/// Per-round update of the walk-count vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Recurrence {
    /// `f_u^k = e_u + sum_{v in N(u)} f_v^{k-1}`: rows of `sum_{i<=k} A^i`.
    #[default]
    Canonical,
    /// `f_u^k = f_u^{k-1} + sum_{v in N(u)} f_v^{k-1}`: rows of `(I + A)^k`.
    Binomial,
}

/// Where threshold-mode L2 gets the norm of the walk-count vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormSource {
    #[default]
    Sketch,
    /// Dense exact vectors; only for small graphs (oracle limits apply).
    Exact,
}

/// Parameters that fix the walk-count vectors `f_u^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodParams {
    pub k: usize,
    /// Per-hop decay in `[0, 1]`; 1 disables decay.
    pub lambda: f64,
    pub use_node_weights: bool,
    pub use_edge_weights: bool,
    pub recurrence: Recurrence,
}

impl NeighborhoodParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            lambda: 1.0,
            use_node_weights: false,
            use_edge_weights: false,
            recurrence: Recurrence::Canonical,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Domain(format!("lambda {} must lie in [0, 1]", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub method: Method,
    pub k: usize,
    pub capacity: usize,
    pub mode: Mode,
    pub lambda: f64,
    pub epsilon: f64,
    pub use_node_weights: bool,
    pub use_edge_weights: bool,
    pub recurrence: Recurrence,
    pub norm_source: NormSource,
}

impl SamplerConfig {
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k,
            capacity: DEFAULT_CAPACITY,
            mode: Mode::Argmax,
            lambda: 1.0,
            epsilon: DEFAULT_EPSILON,
            use_node_weights: false,
            use_edge_weights: false,
            recurrence: Recurrence::Canonical,
            norm_source: NormSource::Sketch,
        }
    }

    pub fn with_capacity(self, capacity: usize) -> Self {
        Self { capacity, ..self }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Capacity `2 * ceil(log2 n) + 1`, large enough for the threshold-mode
    /// heavy hitter to survive with high probability.
    pub fn theory_capacity(n: usize) -> usize {
        2 * (n.max(2) as f64).log2().ceil() as usize + 1
    }

    pub fn neighborhood(&self) -> NeighborhoodParams {
        NeighborhoodParams {
            k: self.k,
            lambda: self.lambda,
            use_node_weights: self.use_node_weights,
            use_edge_weights: self.use_edge_weights,
            recurrence: self.recurrence,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.neighborhood().validate()?;
        if self.capacity == 0 {
            return Err(Error::Domain("capacity must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }

    /// Rounds of propagation actually performed. With `lambda = 0` nothing
    /// beyond the node itself carries weight.
    pub fn effective_k(&self) -> usize {
        if self.lambda == 0.0 {
            0
        } else {
            self.k
        }
    }
}

/// One sample per node. `weights` holds the score of the winning entry
/// (normalized rank for L0, reweighted weight for L1/L2, 1 for walks).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub samples: Vec<Option<NodeId>>,
    pub weights: Vec<f64>,
}

impl SampleVector {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, u: NodeId) -> Option<NodeId> {
        self.samples[u as usize]
    }
}

/// Run the configured sampler for one seed context.
pub fn sample(g: &Graph, ctx: SeedContext, cfg: &SamplerConfig) -> Result<SampleVector> {
    cfg.validate()?;
    match cfg.method {
        Method::L0 => Ok(propagate_l0(g, ctx, cfg.effective_k())),
        Method::L1 | Method::L2 => sample_lp(g, ctx, cfg),
        Method::RandomWalk => {
            let k = cfg.effective_k();
            let samples = (0..g.node_count() as NodeId)
                .map(|u| Some(random_walk_sample(g, ctx, k, u, cfg.use_edge_weights)))
                .collect();
            Ok(SampleVector { samples, weights: vec![1.0; g.node_count()] })
        }
    }
}

/// Double-buffered propagation: round `i` reads only round `i - 1` values.
pub(crate) fn propagate<T, F>(k: usize, init: Vec<T>, mut step: F) -> Vec<T>
where
    F: FnMut(NodeId, &[T]) -> T,
{
    let mut prev = init;
    for _ in 0..k {
        let next = (0..prev.len() as NodeId).map(|u| step(u, &prev)).collect();
        prev = next;
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_method_and_mode() {
        assert_eq!("L1".parse::<Method>().unwrap(), Method::L1);
        assert_eq!("rw".parse::<Method>().unwrap(), Method::RandomWalk);
        assert!("l3".parse::<Method>().is_err());
        assert_eq!("threshold".parse::<Mode>().unwrap(), Mode::Threshold);
        assert_eq!(Method::L2.to_string(), "l2");
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(Method::L1, 2).validate().is_ok());
        assert!(SamplerConfig::new(Method::L1, 2).with_lambda(1.5).validate().is_err());
        assert!(SamplerConfig::new(Method::L1, 2).with_capacity(0).validate().is_err());
        let mut cfg = SamplerConfig::new(Method::L2, 2);
        cfg.epsilon = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn theory_capacity_grows_logarithmically() {
        assert_eq!(SamplerConfig::theory_capacity(1024), 21);
        assert_eq!(SamplerConfig::theory_capacity(1000), 21);
        assert_eq!(SamplerConfig::theory_capacity(1), 3);
    }
}
