//! Keyed, stateless randomness shared by every node's sampling run.
//!
//! All draws are pure functions of `(global_seed, repetition, entity)`.
//! Two nodes that both reach a node `x` see bit-identical values for `x`,
//! which is what couples (coordinates) their samples.

use crate::error::{Error, Result};
use crate::graph::NodeId;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

// Domain tags keep node, attribute, walk and sketch hashes independent.
const NODE_DOMAIN: u64 = 0x6e6f_6465_0000_0001;
const ATTRIBUTE_DOMAIN: u64 = 0x6174_7472_0000_0002;
const WALK_DOMAIN: u64 = 0x7761_6c6b_0000_0003;
const SKETCH_DOMAIN: u64 = 0x736b_6574_0000_0004;

/// The shared seed of one embedding coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedContext {
    pub global_seed: u64,
    pub repetition: u64,
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn to_unit_interval(x: u64) -> f64 {
    // (x + 1) / 2^64 without overflowing at u64::MAX; rounds to at most 1.
    (x as f64 + 1.0) / TWO_POW_64
}

impl SeedContext {
    pub fn new(global_seed: u64, repetition: u64) -> Self {
        Self { global_seed, repetition }
    }

    #[inline]
    fn key(&self, domain: u64) -> u64 {
        let h = mix64(self.global_seed ^ domain);
        mix64(h ^ self.repetition.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    #[inline]
    fn hash(&self, domain: u64, a: u64, b: u64) -> u64 {
        let h = mix64(self.key(domain).wrapping_add(a.wrapping_mul(0xd6e8_feb8_6659_fd93)));
        mix64(h ^ b.wrapping_mul(0xa076_1d64_78bd_642f).wrapping_add(0xe703_7ed1_a0b4_28db))
    }

    /// Uniform 64-bit rank of node `u`. Smaller ranks win minwise sampling.
    #[inline]
    pub fn node_rank(&self, u: NodeId) -> u64 {
        self.hash(NODE_DOMAIN, u as u64, 0)
    }

    /// `(node_rank + 1) / 2^64`, a value in `(0, 1]`.
    #[inline]
    pub fn node_uniform(&self, u: NodeId) -> f64 {
        to_unit_interval(self.node_rank(u))
    }

    /// Base uniform of attribute `a`, independent of which node carries it.
    #[inline]
    pub fn attribute_uniform(&self, a: u32) -> f64 {
        to_unit_interval(self.hash(ATTRIBUTE_DOMAIN, a as u64, 0))
    }

    /// Exponential-race rank `-ln(u_a) / w`. The attribute with the smallest
    /// rank in a weighted set is a weighted minwise sample: attribute `i`
    /// wins with probability `w_i / sum(w)`.
    pub fn attribute_rank(&self, a: u32, w: f64) -> Result<f64> {
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::Domain(format!("attribute weight {w} must be positive")));
        }
        Ok(-self.attribute_uniform(a).ln() / w)
    }

    /// Uniform in `(0, 1]` for step `step` of the walk started at `start`.
    /// Walks from different start nodes use unrelated values.
    #[inline]
    pub fn walk_uniform(&self, start: NodeId, step: usize) -> f64 {
        to_unit_interval(self.hash(WALK_DOMAIN, start as u64, step as u64))
    }

    /// Raw 64-bit hash for sketch row `row` and key `key`.
    #[inline]
    pub fn sketch_hash(&self, row: usize, key: NodeId) -> u64 {
        self.hash(SKETCH_DOMAIN, row as u64, key as u64)
    }
}
