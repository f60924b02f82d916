use crate::graph::{Graph, NodeId};
use crate::randomness::SeedContext;

use super::{propagate, SampleVector};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Minwise sampling: after `k` rounds every node holds the node of smallest
/// `(rank, id)` in its k-hop ball. Edge and node weights are ignored.
pub fn propagate_l0(g: &Graph, ctx: SeedContext, k: usize) -> SampleVector {
    let init: Vec<(u64, NodeId)> =
        (0..g.node_count() as NodeId).map(|u| (ctx.node_rank(u), u)).collect();
    let best = propagate(k, init, |u, prev| {
        g.raw_targets(u).iter().fold(prev[u as usize], |m, &v| m.min(prev[v as usize]))
    });
    SampleVector {
        samples: best.iter().map(|&(_, v)| Some(v)).collect(),
        weights: best.iter().map(|&(r, _)| r as f64 / TWO_POW_64).collect(),
    }
}
