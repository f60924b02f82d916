use crate::graph::{Graph, NodeId};
use crate::randomness::SeedContext;

/// Endpoint of a `k`-step walk from `u`. Each step picks an out-neighbor
/// uniformly, or proportionally to edge weight when `use_edge_weights` is
/// set. A node without usable out-edges ends the walk early.
///
/// Walks from different start nodes draw unrelated randomness, so this
/// baseline is not coordinated.
pub fn random_walk_sample(g: &Graph, ctx: SeedContext, k: usize, u: NodeId, use_edge_weights: bool) -> NodeId {
    let mut current = u;
    for step in 0..k {
        let r = ctx.walk_uniform(u, step);
        match pick_neighbor(g, current, r, use_edge_weights) {
            Some(next) => current = next,
            None => break,
        }
    }
    current
}

/// Walk endpoints for every node.
pub fn random_walks(g: &Graph, ctx: SeedContext, k: usize, use_edge_weights: bool) -> Vec<NodeId> {
    (0..g.node_count() as NodeId).map(|u| random_walk_sample(g, ctx, k, u, use_edge_weights)).collect()
}

fn pick_neighbor(g: &Graph, u: NodeId, r: f64, use_edge_weights: bool) -> Option<NodeId> {
    let targets = g.raw_targets(u);
    if targets.is_empty() {
        return None;
    }
    if !(use_edge_weights && g.has_edge_weights()) {
        // r in (0, 1] maps to index ceil(r * deg) - 1.
        let idx = ((r * targets.len() as f64).ceil() as usize).saturating_sub(1);
        return Some(targets[idx.min(targets.len() - 1)]);
    }
    let total: f64 = g.weighted_targets(u, true).map(|(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let goal = r * total;
    let mut cumulative = 0.0;
    let mut last = None;
    for (v, w) in g.weighted_targets(u, true) {
        if w <= 0.0 {
            continue;
        }
        cumulative += w;
        last = Some(v);
        if cumulative >= goal {
            return last;
        }
    }
    last
}
