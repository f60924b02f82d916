//! Brute-force reference computations.
//!
//! Everything here materializes full walk-count vectors and is only meant
//! for small graphs; each entry point enforces a hard size limit and fails
//! with [`Error::Resource`] beyond it.

use std::collections::{BTreeMap, BTreeSet};

use crate::embeddings::{collision_similarity, embed};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::randomness::SeedContext;
use crate::samplers::{sample, Method, NeighborhoodParams, Recurrence, SamplerConfig};

pub mod stats;

/// Limit on `n * n` for the sparse dynamic program.
pub const DP_BUDGET: usize = 4_000_000;
/// Limit on `n` for dense matrix powers.
pub const MATRIX_NODE_LIMIT: usize = 500;
/// Limit on the number of enumerated walks.
pub const WALK_LIMIT: u64 = 1_000_000;

/// Exact walk-count vector `f_u^k` of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    pub owner: NodeId,
    pub k: usize,
    /// Strictly positive counts, keyed by node.
    pub entries: BTreeMap<NodeId, f64>,
}

impl FrequencyVector {
    /// `||f||_p` for `p >= 1`.
    pub fn norm(&self, p: u32) -> f64 {
        match p {
            1 => self.entries.values().sum(),
            2 => self.entries.values().map(|c| c * c).sum::<f64>().sqrt(),
            _ => self.entries.values().map(|c| c.powi(p as i32)).sum::<f64>().powf(1.0 / p as f64),
        }
    }

    pub fn get(&self, x: NodeId) -> f64 {
        self.entries.get(&x).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }

    /// True if every count is an integer.
    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|c| c.fract() == 0.0)
    }
}

/// Fails with [`Error::Resource`] when `g` is too large for the exact
/// similarity and frequency oracles.
pub fn check_dp_budget(g: &Graph) -> Result<()> {
    let n = g.node_count();
    if n.saturating_mul(n) > DP_BUDGET {
        return Err(Error::Resource(format!(
            "exact frequency vectors for {n} nodes exceed the oracle budget of {DP_BUDGET} entries"
        )));
    }
    Ok(())
}

/// Walk-count vectors of every node by sparse dynamic programming over the
/// propagation recurrence.
pub fn exact_frequency_vectors(g: &Graph, params: &NeighborhoodParams) -> Result<Vec<FrequencyVector>> {
    params.validate()?;
    check_dp_budget(g)?;
    let n = g.node_count() as NodeId;
    let own = |u: NodeId| {
        let w = g.node_weight(u, params.use_node_weights);
        if w > 0.0 {
            BTreeMap::from([(u, w)])
        } else {
            BTreeMap::new()
        }
    };
    let mut prev: Vec<BTreeMap<NodeId, f64>> = (0..n).map(own).collect();
    for _ in 0..params.k {
        let next = (0..n)
            .map(|u| {
                let mut row = match params.recurrence {
                    Recurrence::Canonical => own(u),
                    Recurrence::Binomial => prev[u as usize].clone(),
                };
                for (v, w) in g.weighted_targets(u, params.use_edge_weights) {
                    let scale = params.lambda * w;
                    if scale == 0.0 {
                        continue;
                    }
                    for (&x, &c) in &prev[v as usize] {
                        *row.entry(x).or_insert(0.0) += scale * c;
                    }
                }
                row
            })
            .collect();
        prev = next;
    }
    Ok(prev
        .into_iter()
        .enumerate()
        .map(|(u, entries)| FrequencyVector { owner: u as NodeId, k: params.k, entries })
        .collect())
}

/// Dense `sum_{i<=k} (lambda A)^i D` (or `(I + lambda A)^k D` for the binomial
/// recurrence), where `A` holds edge weights and `D` node weights. Row `u`
/// is `f_u^k`.
pub fn matrix_power_frequencies(g: &Graph, params: &NeighborhoodParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let n = g.node_count();
    if n > MATRIX_NODE_LIMIT {
        return Err(Error::Resource(format!("dense matrix powers limited to {MATRIX_NODE_LIMIT} nodes, got {n}")));
    }
    let mut a = vec![vec![0.0; n]; n];
    for (u, row) in a.iter_mut().enumerate() {
        for (v, w) in g.weighted_targets(u as NodeId, params.use_edge_weights) {
            row[v as usize] += params.lambda * w;
        }
    }
    let matmul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| {
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                if x[i][l] != 0.0 {
                    for j in 0..n {
                        out[i][j] += x[i][l] * y[l][j];
                    }
                }
            }
        }
        out
    };
    let mut d = vec![vec![0.0; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = g.node_weight(u as NodeId, params.use_node_weights);
    }
    match params.recurrence {
        Recurrence::Canonical => {
            let mut power = d.clone();
            let mut total = d;
            for _ in 0..params.k {
                power = matmul(&a, &power);
                for (t, p) in total.iter_mut().zip(&power) {
                    t.iter_mut().zip(p).for_each(|(t, p)| *t += p);
                }
            }
            Ok(total)
        }
        Recurrence::Binomial => {
            let mut step = a;
            for (i, row) in step.iter_mut().enumerate() {
                row[i] += 1.0;
            }
            let mut total = d;
            for _ in 0..params.k {
                total = matmul(&step, &total);
            }
            Ok(total)
        }
    }
}

/// Literal enumeration of every walk of length at most `k` from `u`. Each
/// walk contributes `lambda^len * prod(edge weights) * node_weight(end)`.
pub fn walk_enumeration(g: &Graph, u: NodeId, params: &NeighborhoodParams) -> Result<FrequencyVector> {
    params.validate()?;
    if params.recurrence != Recurrence::Canonical {
        return Err(Error::Usage("walk enumeration counts walks of the canonical recurrence only".into()));
    }
    g.khop_set(u, 0)?;
    let mut walks: u64 = 0;
    let mut layer: Vec<u64> = vec![0; g.node_count()];
    layer[u as usize] = 1;
    for _ in 0..=params.k {
        walks = walks.saturating_add(layer.iter().fold(0u64, |a, &b| a.saturating_add(b)));
        if walks > WALK_LIMIT {
            return Err(Error::Resource(format!("more than {WALK_LIMIT} walks from node {u}")));
        }
        let mut next = vec![0u64; g.node_count()];
        for (x, &c) in layer.iter().enumerate() {
            if c > 0 {
                for &y in g.raw_targets(x as NodeId) {
                    next[y as usize] = next[y as usize].saturating_add(c);
                }
            }
        }
        layer = next;
    }

    let mut entries = BTreeMap::new();
    let mut stack = vec![(u, 0usize, 1.0f64)];
    while let Some((x, len, weight)) = stack.pop() {
        let end = weight * g.node_weight(x, params.use_node_weights);
        if end > 0.0 {
            *entries.entry(x).or_insert(0.0) += end;
        }
        if len < params.k {
            for (y, w) in g.weighted_targets(x, params.use_edge_weights) {
                stack.push((y, len + 1, weight * (params.lambda * w)));
            }
        }
    }
    Ok(FrequencyVector { owner: u, k: params.k, entries })
}

pub fn jaccard(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Jaccard similarity of the k-hop balls of `u` and `v`.
pub fn jaccard_khop(g: &Graph, u: NodeId, v: NodeId, k: usize) -> Result<f64> {
    Ok(jaccard(&g.khop_set(u, k)?, &g.khop_set(v, k)?))
}

/// `sum_x min(f[x]^p / ||f||_p^p, h[x]^p / ||h||_p^p)`.
pub fn minratio(f: &FrequencyVector, h: &FrequencyVector, p: u32) -> f64 {
    let nf = f.norm(p).powi(p as i32);
    let nh = h.norm(p).powi(p as i32);
    if nf == 0.0 || nh == 0.0 {
        return 0.0;
    }
    f.entries
        .iter()
        .filter_map(|(x, &a)| h.entries.get(x).map(|&b| (a.powi(p as i32) / nf).min(b.powi(p as i32) / nh)))
        .sum()
}

pub fn cosine(f: &FrequencyVector, h: &FrequencyVector) -> f64 {
    let denom = f.norm(2) * h.norm(2);
    if denom == 0.0 {
        return 0.0;
    }
    dot(f, h, |a, b| a * b) / denom
}

/// `sum_x sqrt(f[x] h[x]) / sqrt(||f||_1 ||h||_1)`.
pub fn sqrt_cosine(f: &FrequencyVector, h: &FrequencyVector) -> f64 {
    let denom = (f.norm(1) * h.norm(1)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    dot(f, h, |a, b| (a * b).sqrt()) / denom
}

fn dot(f: &FrequencyVector, h: &FrequencyVector, term: impl Fn(f64, f64) -> f64) -> f64 {
    f.entries.iter().filter_map(|(x, &a)| h.entries.get(x).map(|&b| term(a, b))).sum()
}

/// Min-ratio similarity of two nodes' exact walk-count vectors.
pub fn minratio_similarity(g: &Graph, u: NodeId, v: NodeId, params: &NeighborhoodParams, p: u32) -> Result<f64> {
    let f = exact_frequency_vectors(g, params)?;
    Ok(minratio(&f[u as usize], &f[v as usize], p))
}

pub fn cosine_similarity(g: &Graph, u: NodeId, v: NodeId, params: &NeighborhoodParams) -> Result<f64> {
    let f = exact_frequency_vectors(g, params)?;
    Ok(cosine(&f[u as usize], &f[v as usize]))
}

pub fn sqrt_cosine_similarity(g: &Graph, u: NodeId, v: NodeId, params: &NeighborhoodParams) -> Result<f64> {
    let f = exact_frequency_vectors(g, params)?;
    Ok(sqrt_cosine(&f[u as usize], &f[v as usize]))
}

/// Full-vector Lp sampler: `argmax_x f[x] / r_x^(1/p)`, ties to the smaller id.
pub fn reference_lp_sample(f: &FrequencyVector, p: u32, uniforms: impl Fn(NodeId) -> f64) -> Option<NodeId> {
    let score = |x: NodeId, c: f64| match p {
        1 => c / uniforms(x),
        _ => c / uniforms(x).sqrt(),
    };
    f.entries
        .iter()
        .map(|(&x, &c)| (x, score(x, c)))
        .fold(None, |best: Option<(NodeId, f64)>, e| match best {
            Some(b) if b.1 >= e.1 => Some(b),
            _ => Some(e),
        })
        .map(|b| b.0)
}

/// Reference argmax samples of every node for one seed context.
pub fn reference_lp_samples(g: &Graph, ctx: SeedContext, cfg: &SamplerConfig) -> Result<Vec<Option<NodeId>>> {
    let p = cfg
        .method
        .exponent()
        .ok_or_else(|| Error::Usage(format!("method {} has no reference Lp sampler", cfg.method)))?;
    let vectors = exact_frequency_vectors(g, &cfg.neighborhood())?;
    Ok(vectors.iter().map(|f| reference_lp_sample(f, p, |x| ctx.node_uniform(x))).collect())
}

/// Sample frequencies of node `u` over repetitions `0..trials`. Threshold
/// misses are not counted, so frequencies may sum to less than 1.
pub fn empirical_distribution(
    g: &Graph,
    u: NodeId,
    cfg: &SamplerConfig,
    global_seed: u64,
    trials: usize,
) -> Result<BTreeMap<NodeId, f64>> {
    g.khop_set(u, 0)?;
    tabulate(trials, |rep| Ok(sample(g, SeedContext::new(global_seed, rep), cfg)?.get(u)))
}

/// Like [`empirical_distribution`] but drawing from [`reference_lp_samples`].
pub fn reference_distribution(
    g: &Graph,
    u: NodeId,
    cfg: &SamplerConfig,
    global_seed: u64,
    trials: usize,
) -> Result<BTreeMap<NodeId, f64>> {
    let p = cfg.method.exponent().ok_or_else(|| Error::Usage("reference sampler needs L1 or L2".into()))?;
    let f = exact_frequency_vectors(g, &cfg.neighborhood())?.swap_remove(u as usize);
    tabulate(trials, |rep| {
        let ctx = SeedContext::new(global_seed, rep);
        Ok(reference_lp_sample(&f, p, |x| ctx.node_uniform(x)))
    })
}

fn tabulate(trials: usize, mut draw: impl FnMut(u64) -> Result<Option<NodeId>>) -> Result<BTreeMap<NodeId, f64>> {
    if trials == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    let mut counts = BTreeMap::new();
    for rep in 0..trials as u64 {
        if let Some(x) = draw(rep)? {
            *counts.entry(x).or_insert(0usize) += 1;
        }
    }
    Ok(counts.into_iter().map(|(x, c)| (x, c as f64 / trials as f64)).collect())
}

/// Pairwise collision rates over `d` coordinated repetitions.
pub fn empirical_collision_matrix(g: &Graph, cfg: &SamplerConfig, global_seed: u64, d: usize) -> Result<Vec<Vec<f64>>> {
    let emb = embed(g, cfg, d, global_seed)?;
    let n = g.node_count();
    Ok((0..n)
        .map(|u| (0..n).map(|v| if u == v { 1.0 } else { collision_similarity(&emb, u, v) }).collect())
        .collect())
}

/// Exact similarity matching a method's collision probability: Jaccard for
/// L0, min-ratio with `p = 1` for L1 and walks, `p = 2` for L2.
pub fn exact_similarity_matrix(g: &Graph, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>> {
    check_dp_budget(g)?;
    let n = g.node_count();
    let mut out = vec![vec![0.0; n]; n];
    match cfg.method {
        Method::L0 => {
            let balls = (0..n as NodeId).map(|u| g.khop_set(u, cfg.k)).collect::<Result<Vec<_>>>()?;
            for u in 0..n {
                for v in 0..n {
                    out[u][v] = jaccard(&balls[u], &balls[v]);
                }
            }
        }
        method => {
            let p = method.exponent().unwrap_or(1);
            let f = exact_frequency_vectors(g, &cfg.neighborhood())?;
            for u in 0..n {
                for v in 0..n {
                    out[u][v] = minratio(&f[u], &f[v], p);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::load_edge_list("0 1\n1 2\n2 0\n", false).unwrap()
    }

    fn path() -> Graph {
        Graph::load_edge_list("0 1\n1 2\n", false).unwrap()
    }

    fn entries(f: &FrequencyVector) -> Vec<(NodeId, f64)> {
        f.entries.iter().map(|(&x, &c)| (x, c)).collect()
    }

    #[test]
    fn dp_examples() {
        let p2 = NeighborhoodParams::new(2);
        let f = exact_frequency_vectors(&triangle(), &p2).unwrap();
        assert_eq!(entries(&f[0]), [(0, 3.0), (1, 2.0), (2, 2.0)]);
        let f = exact_frequency_vectors(&path(), &p2).unwrap();
        assert_eq!(entries(&f[1]), [(0, 1.0), (1, 3.0), (2, 1.0)]);
        for f in exact_frequency_vectors(&triangle(), &NeighborhoodParams::new(0)).unwrap() {
            assert_eq!(entries(&f), [(f.owner, 1.0)]);
        }
    }

    #[test]
    fn enumeration_examples() {
        let f = walk_enumeration(&triangle(), 0, &NeighborhoodParams::new(2)).unwrap();
        assert_eq!(entries(&f), [(0, 3.0), (1, 2.0), (2, 2.0)]);
        let f = walk_enumeration(&path(), 0, &NeighborhoodParams::new(3)).unwrap();
        assert_eq!(entries(&f), [(0, 2.0), (1, 3.0), (2, 1.0)]);
        let multi = Graph::load_edge_list("a b\na b\na c\n", true).unwrap();
        let f = walk_enumeration(&multi, 0, &NeighborhoodParams::new(1)).unwrap();
        assert_eq!(entries(&f), [(0, 1.0), (1, 2.0), (2, 1.0)]);
    }

    #[test]
    fn enumeration_guard() {
        let g = crate::graph::erdos_renyi(40, 0.5, 1, false);
        let err = walk_enumeration(&g, 0, &NeighborhoodParams::new(6)).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn dp_guard() {
        let g = crate::graph::GraphBuilder::with_nodes(2001, false).build();
        assert!(matches!(exact_frequency_vectors(&g, &NeighborhoodParams::new(1)), Err(Error::Resource(_))));
    }

    #[test]
    fn matrix_power_matches_hand_values() {
        let m = matrix_power_frequencies(&triangle(), &NeighborhoodParams::new(2)).unwrap();
        assert_eq!(m[0], [3.0, 2.0, 2.0]);
        let binomial = NeighborhoodParams { recurrence: Recurrence::Binomial, ..NeighborhoodParams::new(2) };
        let m = matrix_power_frequencies(&triangle(), &binomial).unwrap();
        assert_eq!(m[0], [3.0, 3.0, 3.0]);
        let f = exact_frequency_vectors(&triangle(), &binomial).unwrap();
        assert_eq!(entries(&f[0]), [(0, 3.0), (1, 3.0), (2, 3.0)]);
    }

    #[test]
    fn decay_and_weights() {
        // Path with lambda 1/2: f_1^2 = e_1 + 1/2 (f_0^1 + f_2^1) = (1/2, 3/2, 1/2).
        let p = NeighborhoodParams::new(2).with_lambda(0.5);
        let f = exact_frequency_vectors(&path(), &p).unwrap();
        assert_eq!(entries(&f[1]), [(0, 0.5), (1, 1.5), (2, 0.5)]);
        assert_eq!(walk_enumeration(&path(), 1, &p).unwrap(), f[1]);

        let g = Graph::load_edge_list("a b 2\nb c 3\n", true).unwrap().with_node_weights(vec![1.0, 1.0, 0.5]).unwrap();
        let p = NeighborhoodParams { use_node_weights: true, use_edge_weights: true, ..NeighborhoodParams::new(2) };
        let f = exact_frequency_vectors(&g, &p).unwrap();
        assert_eq!(entries(&f[0]), [(0, 1.0), (1, 2.0), (2, 3.0)]);
        assert_eq!(walk_enumeration(&g, 0, &p).unwrap(), f[0]);
        assert_eq!(matrix_power_frequencies(&g, &p).unwrap()[0], [1.0, 2.0, 3.0]);
    }

    #[test]
    fn similarity_examples() {
        let star = Graph::load_edge_list("c l1\nc l2\nc l3\n", false).unwrap();
        assert_eq!(jaccard_khop(&star, 1, 1, 1).unwrap(), 1.0);
        assert!((jaccard_khop(&star, 1, 2, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let two = Graph::load_edge_list("a b\nc d\n", false).unwrap();
        assert_eq!(jaccard_khop(&two, 0, 2, 3).unwrap(), 0.0);

        let p1 = NeighborhoodParams::new(1);
        assert_eq!(minratio_similarity(&path(), 0, 2, &p1, 1).unwrap(), 0.5);
        assert_eq!(minratio_similarity(&path(), 1, 1, &p1, 2).unwrap(), 1.0);
        assert_eq!(minratio_similarity(&two, 0, 2, &p1, 1).unwrap(), 0.0);
        assert!((cosine_similarity(&path(), 1, 1, &p1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&two, 0, 3, &p1).unwrap(), 0.0);
        assert!((sqrt_cosine_similarity(&path(), 0, 0, &p1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_sampler_tie_break() {
        let f = FrequencyVector { owner: 0, k: 1, entries: BTreeMap::from([(3, 2.0), (1, 2.0)]) };
        assert_eq!(reference_lp_sample(&f, 1, |_| 1.0), Some(1));
        assert_eq!(reference_lp_sample(&f, 2, |x| if x == 3 { 0.5 } else { 1.0 }), Some(3));
    }

    #[test]
    fn empirical_distribution_k_zero() {
        let cfg = SamplerConfig::new(Method::L0, 0);
        let d = empirical_distribution(&path(), 2, &cfg, 1, 100).unwrap();
        assert_eq!(d, BTreeMap::from([(2, 1.0)]));
        assert!(empirical_distribution(&path(), 2, &cfg, 1, 0).is_err());
    }

    #[test]
    fn collision_matrix_basics() {
        let two = Graph::load_edge_list("a b\nc d\n", false).unwrap();
        let m = empirical_collision_matrix(&two, &SamplerConfig::new(Method::L0, 2), 3, 200).unwrap();
        assert!((0..4).all(|u| m[u][u] == 1.0));
        assert_eq!(m[0][2], 0.0);
        assert_eq!(m[0][1], 1.0);
    }
}
