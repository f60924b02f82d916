use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle;
use crate::randomness::SeedContext;
use crate::summaries::{CountSketch, FrequentSummary, SummaryAccumulator};

use super::{propagate, Method, Mode, NeighborhoodParams, NormSource, Recurrence, SampleVector, SamplerConfig};

/// Per-node state after weighted propagation.
#[derive(Debug, Clone)]
pub struct WeightedPropagation {
    /// Summaries of the reweighted vectors `f_u^k[x] / r_x^(1/p)`.
    pub summaries: Vec<FrequentSummary>,
    /// Sketches of the unweighted vectors `f_u^k`; only for L2 threshold
    /// mode with the sketch norm source.
    pub sketches: Option<Vec<CountSketch>>,
}

fn exponent(cfg: &SamplerConfig) -> Result<u32> {
    cfg.method
        .exponent()
        .ok_or_else(|| Error::Usage(format!("method {} is not a weighted sampler", cfg.method)))
}

#[inline]
fn reweight(r: f64, p: u32) -> f64 {
    match p {
        1 => 1.0 / r,
        _ => 1.0 / r.sqrt(),
    }
}

/// Weighted propagation with `r_x` drawn from `ctx`.
pub fn propagate_weighted(g: &Graph, ctx: SeedContext, cfg: &SamplerConfig) -> Result<WeightedPropagation> {
    propagate_weighted_with(g, ctx, cfg, |x| ctx.node_uniform(x))
}

/// Weighted propagation with caller-supplied `r_x` in `(0, 1]`.
/// Passing `|_| 1.0` makes the summaries track the raw walk counts.
pub fn propagate_weighted_with<R>(
    g: &Graph,
    ctx: SeedContext,
    cfg: &SamplerConfig,
    uniforms: R,
) -> Result<WeightedPropagation>
where
    R: Fn(NodeId) -> f64,
{
    cfg.validate()?;
    let p = exponent(cfg)?;
    let n = g.node_count();
    let k = cfg.effective_k();
    let lambda = cfg.lambda;
    let canonical = cfg.recurrence == Recurrence::Canonical;

    let init_weight: Vec<f64> = (0..n as NodeId)
        .map(|u| {
            let r = uniforms(u);
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Domain(format!("uniform {r} for node {u} outside (0, 1]")));
            }
            Ok(g.node_weight(u, cfg.use_node_weights) * reweight(r, p))
        })
        .collect::<Result<_>>()?;

    let mut acc = SummaryAccumulator::new(n);
    let init: Vec<FrequentSummary> = init_weight
        .iter()
        .enumerate()
        .map(|(u, &w)| {
            acc.add(u as NodeId, w);
            acc.finish(cfg.capacity)
        })
        .collect();
    let summaries = propagate(k, init, |u, prev| {
        if canonical {
            acc.add(u, init_weight[u as usize]);
        } else {
            acc.add_summary(&prev[u as usize], 1.0);
        }
        for (v, w) in g.weighted_targets(u, cfg.use_edge_weights) {
            acc.add_summary(&prev[v as usize], lambda * w);
        }
        acc.finish(cfg.capacity)
    });

    let needs_sketch =
        cfg.method == Method::L2 && cfg.mode == Mode::Threshold && cfg.norm_source == NormSource::Sketch;
    let sketches = if needs_sketch {
        let empty = CountSketch::with_epsilon(cfg.epsilon, ctx)?;
        let seed_sketch = |u: NodeId| {
            let mut s = empty.clone();
            s.update(u, g.node_weight(u, cfg.use_node_weights));
            s
        };
        let init = (0..n as NodeId).map(seed_sketch).collect();
        let sketches = propagate(k, init, |u, prev: &[CountSketch]| {
            let mut s = if canonical { seed_sketch(u) } else { prev[u as usize].clone() };
            for (v, w) in g.weighted_targets(u, cfg.use_edge_weights) {
                s.add_scaled(&prev[v as usize], lambda * w).expect("sketches share one shape");
            }
            s
        });
        Some(sketches)
    } else {
        None
    };

    Ok(WeightedPropagation { summaries, sketches })
}

/// L1/L2 sampling with `r_x` drawn from `ctx`.
pub fn sample_lp(g: &Graph, ctx: SeedContext, cfg: &SamplerConfig) -> Result<SampleVector> {
    sample_lp_with(g, ctx, cfg, |x| ctx.node_uniform(x))
}

/// L1/L2 sampling with caller-supplied uniforms.
pub fn sample_lp_with<R>(g: &Graph, ctx: SeedContext, cfg: &SamplerConfig, uniforms: R) -> Result<SampleVector>
where
    R: Fn(NodeId) -> f64,
{
    let p = exponent(cfg)?;
    let state = propagate_weighted_with(g, ctx, cfg, uniforms)?;
    let n = g.node_count();
    let mut samples = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    match cfg.mode {
        Mode::Argmax => {
            for s in &state.summaries {
                let best = s.heaviest();
                samples.push(best.map(|b| b.0));
                weights.push(best.map_or(0.0, |b| b.1));
            }
        }
        Mode::Threshold => {
            let params = NeighborhoodParams { k: cfg.effective_k(), ..cfg.neighborhood() };
            let thresholds: Vec<f64> = match (p, cfg.norm_source, &state.sketches) {
                (1, _, _) => exact_walk_count_norm(g, &params),
                (_, NormSource::Sketch, Some(sketches)) => sketches.iter().map(CountSketch::l2_estimate).collect(),
                _ => oracle::exact_frequency_vectors(g, &params)?
                    .iter()
                    .map(|f| f.norm(2))
                    .collect(),
            };
            for (s, &t) in state.summaries.iter().zip(&thresholds) {
                let mut hits = s.entries().iter().filter(|e| e.1 >= t);
                match (hits.next(), hits.next()) {
                    (Some(&(x, w)), None) => {
                        samples.push(Some(x));
                        weights.push(w);
                    }
                    _ => {
                        samples.push(None);
                        weights.push(0.0);
                    }
                }
            }
        }
    }
    Ok(SampleVector { samples, weights })
}

/// Exact `||f_u^k||_1` for every node via the scalar form of the propagation
/// recurrence, in `O(mk)` total work.
pub fn exact_walk_count_norm(g: &Graph, params: &NeighborhoodParams) -> Vec<f64> {
    let n = g.node_count();
    let init: Vec<f64> = (0..n as NodeId).map(|u| g.node_weight(u, params.use_node_weights)).collect();
    let k = if params.lambda == 0.0 { 0 } else { params.k };
    propagate(k, init.clone(), |u, prev| {
        let own = match params.recurrence {
            Recurrence::Canonical => init[u as usize],
            Recurrence::Binomial => prev[u as usize],
        };
        g.weighted_targets(u, params.use_edge_weights)
            .fold(own, |acc, (v, w)| acc + params.lambda * w * prev[v as usize])
    })
}
