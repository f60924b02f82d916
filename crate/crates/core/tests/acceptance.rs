//! Exit criteria. Each test prints one `PASS`/`FAIL` line and asserts.
//! Tests hold a shared lock so timings are not disturbed by each other.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use cologne::graph::{erdos_renyi, random_edges, GraphBuilder};
use cologne::oracle::{
    self, empirical_collision_matrix, exact_frequency_vectors, exact_similarity_matrix, matrix_power_frequencies,
    reference_distribution, reference_lp_samples, stats, walk_enumeration,
};
use cologne::samplers::sample_lp;
use cologne::{embed, sample, CountSketch, FrequentSummary, Graph, Method, NeighborhoodParams, SamplerConfig, SeedContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("{} [{id:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

/// The 30-node test graph shared by several criteria.
fn er30() -> Graph {
    erdos_renyi(30, 0.15, 2024, false)
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

#[test]
fn c01_walk_counts_three_ways() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut checked = 0;
    for i in 0..50 {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(0..=4);
        let directed = i % 2 == 1;
        let g = erdos_renyi(n, 0.3, rng.random(), directed);
        // lambda = 1/2 keeps every count a short dyadic rational, so equality is exact.
        let lambda = if i % 4 < 2 { 1.0 } else { 0.5 };
        let params = NeighborhoodParams::new(k).with_lambda(lambda);
        let dp = exact_frequency_vectors(&g, &params).unwrap();
        let dense = matrix_power_frequencies(&g, &params).unwrap();
        for u in 0..n {
            let walks = walk_enumeration(&g, u as u32, &params).unwrap();
            let row: BTreeMap<u32, f64> =
                dense[u].iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(x, &c)| (x as u32, c)).collect();
            if dp[u] != walks || dp[u].entries != row {
                mismatches += 1;
            }
            if lambda == 1.0 && !dp[u].is_integral() {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "DP == enumeration == matrix powers",
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{checked} vectors, {mismatches} mismatches, {elapsed:.2?}"),
    );
}

#[test]
fn c02_l0_marginal_on_star() {
    let _g = serial();
    let mut b = GraphBuilder::with_nodes(6, false);
    for leaf in 1..6 {
        b.edge(0, leaf);
    }
    let g = b.build();
    let cfg = SamplerConfig::new(Method::L0, 1);
    let dist = oracle::empirical_distribution(&g, 0, &cfg, 42, 20_000).unwrap();
    let worst = (0..6).map(|x| (dist.get(&x).copied().unwrap_or(0.0) - 1.0 / 6.0).abs()).fold(0.0, f64::max);
    report(2, "L0 star marginal", worst <= 0.02, format!("max |freq - 1/6| = {worst:.4}"));
}

#[test]
fn c03_l0_collision_matches_jaccard() {
    let _g = serial();
    let start = Instant::now();
    let g = er30();
    let cfg = SamplerConfig::new(Method::L0, 2);
    let collisions = empirical_collision_matrix(&g, &cfg, 42, 2000).unwrap();
    let exact = exact_similarity_matrix(&g, &cfg).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut worst: f64 = 0.0;
    for (u, v) in pairs(30) {
        worst = worst.max((collisions[u][v] - exact[u][v]).abs());
        xs.push(collisions[u][v]);
        ys.push(exact[u][v]);
    }
    let r = stats::pearson(&xs, &ys);
    let elapsed = start.elapsed();
    report(
        3,
        "L0 collision vs Jaccard",
        worst <= 0.05 && r >= 0.97 && elapsed < Duration::from_secs(60),
        format!("max deviation {worst:.4}, pearson {r:.4}, {elapsed:.2?}"),
    );
}

#[test]
fn c04_sketch_equals_full_vector_sampler() {
    let _g = serial();
    let g = er30();
    let k = 2;
    let largest = (0..30).map(|u| g.khop_set(u, k).unwrap().len()).max().unwrap();
    let mut mismatches = 0;
    for method in [Method::L1, Method::L2] {
        let cfg = SamplerConfig::new(method, k).with_capacity(largest);
        for seed in 0..1000 {
            let ctx = SeedContext::new(seed, 0);
            let fast = sample_lp(&g, ctx, &cfg).unwrap();
            let reference = reference_lp_samples(&g, ctx, &cfg).unwrap();
            mismatches += fast.samples.iter().zip(&reference).filter(|(a, b)| a != b).count();
        }
    }
    report(
        4,
        "sketch sampler == full-vector sampler",
        mismatches == 0,
        format!("capacity {largest}, 2 x 1000 seeds x 30 nodes, {mismatches} mismatches"),
    );
}

#[test]
fn c05_misra_gries_bound_under_merges() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut checks = 0u64;
    for stream in 0..10_000 {
        let capacity = [2, 5, 10][stream % 3];
        let keys = rng.random_range(1..=30u32);
        // Pool of partial summaries with their exact counterparts.
        let mut pool: Vec<(FrequentSummary, HashMap<u32, f64>)> = Vec::new();
        for _ in 0..rng.random_range(1..=60) {
            if pool.len() >= 2 && rng.random_bool(0.2) {
                let a = pool.swap_remove(rng.random_range(0..pool.len()));
                let b = pool.swap_remove(rng.random_range(0..pool.len()));
                let mut exact = a.1;
                for (k, w) in b.1 {
                    *exact.entry(k).or_insert(0.0) += w;
                }
                pool.push((a.0.merge(&b.0).unwrap(), exact));
            } else {
                if pool.is_empty() || rng.random_bool(0.1) {
                    pool.push((FrequentSummary::new(capacity).unwrap(), HashMap::new()));
                }
                let i = rng.random_range(0..pool.len());
                let key = rng.random_range(0..keys);
                // Integer weights keep all arithmetic exact.
                let w = rng.random_range(0..=10) as f64;
                pool[i].0.update(key, w).unwrap();
                *pool[i].1.entry(key).or_insert(0.0) += w;
            }
        }
        while pool.len() > 1 {
            let (b, eb) = pool.pop().unwrap();
            let (a, ea) = pool.pop().unwrap();
            let mut exact = ea;
            for (k, w) in eb {
                *exact.entry(k).or_insert(0.0) += w;
            }
            pool.push((a.merge(&b).unwrap(), exact));
        }
        let (summary, exact) = &pool[0];
        let slack = summary.total_weight() / (capacity + 1) as f64;
        violations += (summary.len() > capacity) as usize;
        for key in 0..keys {
            let truth = exact.get(&key).copied().unwrap_or(0.0);
            let est = summary.estimate(key);
            checks += 1;
            if est > truth || est < truth - slack {
                violations += 1;
            }
        }
    }
    report(5, "Misra-Gries error bound", violations == 0, format!("{checks} key checks, {violations} violations"));
}

#[test]
fn c06_count_sketch_accuracy_and_linearity() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut within = 0;
    let mut identity_failures = 0;
    for trial in 0..200u64 {
        let ctx = SeedContext::new(trial, 0);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-100..=100) as f64).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.random_range(-100..=100) as f64).collect();
        let sketch = |v: &[f64], scale: f64| {
            let mut s = CountSketch::new(5, 400, ctx).unwrap();
            for (i, &w) in v.iter().enumerate() {
                s.update(i as u32, scale * w);
            }
            s
        };
        let sx = sketch(&x, 1.0);
        let truth = x.iter().map(|w| w * w).sum::<f64>().sqrt();
        if (sx.l2_estimate() / truth - 1.0).abs() <= 0.15 {
            within += 1;
        }
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        if sx.merge(&sketch(&y, 1.0)).unwrap().counters() != sketch(&sum, 1.0).counters() {
            identity_failures += 1;
        }
        for factor in [0.0, 0.5, 4.0] {
            if sx.scale(factor).counters() != sketch(&x, factor).counters() {
                identity_failures += 1;
            }
        }
    }
    let rate = within as f64 / 200.0;
    report(
        6,
        "CountSketch 2-norm accuracy",
        rate >= 0.95 && identity_failures == 0,
        format!("{:.1}% within 1±0.15, {identity_failures} linearity/scaling failures", rate * 100.0),
    );
}

#[test]
fn c07_l1_distribution_on_path() {
    let _g = serial();
    let g = Graph::load_edge_list("0 1\n1 2\n", false).unwrap();
    let cfg = SamplerConfig::new(Method::L1, 2);
    let sketch = oracle::empirical_distribution(&g, 1, &cfg, 42, 50_000).unwrap();
    let reference = reference_distribution(&g, 1, &cfg, 42, 50_000).unwrap();
    let tv = stats::total_variation(&sketch, &reference);
    let p = |x| sketch.get(&x).copied().unwrap_or(0.0);
    let ordered = p(1) > p(0) && p(1) > p(2);
    report(
        7,
        "L1 distribution on path",
        tv <= 0.02 && ordered,
        format!("TV {tv:.4}, p = ({:.3}, {:.3}, {:.3})", p(0), p(1), p(2)),
    );
}

#[test]
fn c08_collision_rank_agreement() {
    let _g = serial();
    let g = er30();
    for method in [Method::L1, Method::L2] {
        let cfg = SamplerConfig::new(method, 2);
        let collisions = empirical_collision_matrix(&g, &cfg, 42, 2000).unwrap();
        let exact = exact_similarity_matrix(&g, &cfg).unwrap();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (u, v) in pairs(30) {
            if (0.05..=0.95).contains(&exact[u][v]) {
                xs.push(collisions[u][v]);
                ys.push(exact[u][v]);
            }
        }
        let rho = stats::spearman(&xs, &ys);
        report(8, &format!("{method} collision rank agreement"), rho >= 0.9, format!("spearman {rho:.4} over {} pairs", xs.len()));
    }
}

#[test]
fn c09_similarity_inequalities() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    let mut checked = 0;
    const ROUNDING: f64 = 1e-12;
    for i in 0..50 {
        let n = rng.random_range(2..=20);
        let g = erdos_renyi(n, 0.25, rng.random(), i % 2 == 1);
        let f = exact_frequency_vectors(&g, &NeighborhoodParams::new(rng.random_range(1..=3))).unwrap();
        for u in 0..n {
            for v in 0..n {
                let m1 = oracle::minratio(&f[u], &f[v], 1);
                let m2 = oracle::minratio(&f[u], &f[v], 2);
                let cos = oracle::cosine(&f[u], &f[v]);
                let in_range = |m: f64| (-ROUNDING..=1.0 + ROUNDING).contains(&m);
                if !in_range(m1) || !in_range(m2) || m2 > cos + ROUNDING {
                    violations += 1;
                }
                checked += 1;
            }
        }
    }
    report(9, "min-ratio bounds", violations == 0, format!("{checked} ordered pairs, {violations} violations"));
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

/// Fastest of `runs` timings.
fn best_time(runs: usize, mut f: impl FnMut()) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn c10_scaling() {
    let _g = serial();
    let methods = [Method::L0, Method::L1, Method::L2, Method::RandomWalk];
    let small = random_edges(10_000, 100_000, 10, false);
    let large = random_edges(10_000, 200_000, 11, false);
    for method in methods {
        let cfg = SamplerConfig::new(method, 4);
        let t_small = single_threaded(|| best_time(5, || drop(embed(&small, &cfg, 4, 1).unwrap())));
        let t_large = single_threaded(|| best_time(5, || drop(embed(&large, &cfg, 4, 1).unwrap())));
        let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
        report(10, &format!("{method} time ratio for m x2"), ratio <= 2.5, format!("{t_small:.2?} -> {t_large:.2?}, ratio {ratio:.2}"));
    }
    for method in methods {
        let cfg = SamplerConfig::new(method, 4);
        let t25 = single_threaded(|| best_time(5, || drop(embed(&small, &cfg, 25, 1).unwrap())));
        let t50 = single_threaded(|| best_time(5, || drop(embed(&small, &cfg, 50, 1).unwrap())));
        let ratio = t50.as_secs_f64() / t25.as_secs_f64();
        report(
            10,
            &format!("{method} time ratio for d 25 -> 50"),
            (1.6..=2.5).contains(&ratio),
            format!("{t25:.2?} -> {t50:.2?}, ratio {ratio:.2}"),
        );
    }
}

#[test]
fn c11_decay() {
    let _g = serial();
    let g = er30();
    let mut mismatches = 0;
    for method in [Method::L0, Method::L1, Method::L2, Method::RandomWalk] {
        for seed in 0..50 {
            let ctx = SeedContext::new(seed, 0);
            let plain = SamplerConfig::new(method, 3);
            let decayed = plain.with_lambda(1.0);
            if sample(&g, ctx, &plain).unwrap() != sample(&g, ctx, &decayed).unwrap() {
                mismatches += 1;
            }
            let off = sample(&g, ctx, &plain.with_lambda(0.0)).unwrap();
            mismatches += off.samples.iter().enumerate().filter(|(u, s)| **s != Some(*u as u32)).count();
        }
    }
    // lambda = 1 also reproduces the undecayed full-vector sampler.
    for method in [Method::L1, Method::L2] {
        let cfg = SamplerConfig::new(method, 3).with_lambda(1.0).with_capacity(30);
        for seed in 0..50 {
            let ctx = SeedContext::new(seed, 0);
            let undecayed = SamplerConfig::new(method, 3).with_capacity(30);
            let reference = reference_lp_samples(&g, ctx, &undecayed).unwrap();
            if sample_lp(&g, ctx, &cfg).unwrap().samples != reference {
                mismatches += 1;
            }
        }
    }
    report(11, "decay identities", mismatches == 0, format!("{mismatches} mismatches"));
}
