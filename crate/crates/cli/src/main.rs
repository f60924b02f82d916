use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cologne::graph::{erdos_renyi, random_edges};
use cologne::oracle::{self, check_dp_budget, exact_frequency_vectors};
use cologne::{
    collision_similarity, embed, substitute_attributes, EmbeddingMatrix, Graph, Method, Mode, NodeAttributes,
    NodeId, SamplerConfig,
};

#[derive(Parser, Debug)]
#[command(name = "cologne", version, about = "Coordinated local graph-neighborhood sampling")]
struct Cli {
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a discrete embedding and write it as TSV.
    Embed(EmbedArgs),
    /// Collision similarity of node pairs, optionally next to the exact value.
    Similarity(SimilarityArgs),
    /// Exact frequency vectors, similarities and sampling distributions.
    Oracle(OracleArgs),
    /// Time the samplers on a graph file or a generated graph.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list: `u v` or `u v weight` per line, `#` comments.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Treat edges as directed.
    #[arg(long)]
    directed: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    L0,
    L1,
    L2,
    Rw,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::L0 => Method::L0,
            MethodArg::L1 => Method::L1,
            MethodArg::L2 => Method::L2,
            MethodArg::Rw => Method::RandomWalk,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Argmax,
    Threshold,
}

#[derive(Args, Debug)]
struct SamplerArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Neighborhood radius.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "l0")]
    method: MethodArg,
    /// Summary size for L1/L2.
    #[arg(long, default_value_t = cologne::samplers::DEFAULT_CAPACITY)]
    capacity: usize,
    #[arg(long, value_enum, default_value = "argmax")]
    mode: ModeArg,
    /// Per-hop decay factor in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// CountSketch accuracy for L2 threshold mode.
    #[arg(long, default_value_t = cologne::samplers::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Use the third edge-list column as edge weights.
    #[arg(long)]
    edge_weights: bool,
}

impl SamplerArgs {
    fn config(&self) -> Result<SamplerConfig> {
        let Some(k) = self.k else { bail!("--k is required") };
        let mut cfg = SamplerConfig::new(self.method.into(), k)
            .with_capacity(self.capacity)
            .with_lambda(self.lambda)
            .with_mode(match self.mode {
                ModeArg::Argmax => Mode::Argmax,
                ModeArg::Threshold => Mode::Threshold,
            });
        cfg.epsilon = self.epsilon;
        cfg.use_edge_weights = self.edge_weights;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Number of embedding columns.
    #[arg(long, default_value_t = 25)]
    dim: usize,
    /// Node attributes, `node<TAB>attr[:weight],...` per line.
    #[arg(long)]
    attributes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimilarityArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 25)]
    dim: usize,
    /// Read a previously written embedding instead of computing one.
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Pairs of node labels, one pair per line.
    #[arg(long, conflicts_with = "all_pairs", required_unless_present = "all_pairs")]
    pairs: Option<PathBuf>,
    /// Every unordered pair of distinct nodes.
    #[arg(long)]
    all_pairs: bool,
    /// Add the exact similarity the collision rate estimates.
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FreqFormat {
    /// `node: neighbor=count,...`
    Rows,
    /// `node<TAB>neighbor<TAB>count`
    Tsv,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("table").required(true).args(["freq", "similarity", "distribution"]))]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Walk-count vectors of every node.
    #[arg(long)]
    freq: bool,
    #[arg(long, value_enum, default_value = "rows")]
    format: FreqFormat,
    /// Exact pairwise similarities.
    #[arg(long)]
    similarity: bool,
    /// Empirical sample distribution of `--node`.
    #[arg(long, requires = "node")]
    distribution: bool,
    #[arg(long)]
    node: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 25)]
    dim: usize,
    /// Methods to time; all of them when omitted.
    #[arg(long = "methods", value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    /// Generate a random graph with this many nodes.
    #[arg(long, conflicts_with = "graph")]
    random_n: Option<usize>,
    /// Number of random edges.
    #[arg(long, requires = "random_n", conflicts_with = "random_p")]
    random_m: Option<usize>,
    /// Edge probability of an Erdős–Rényi graph.
    #[arg(long, requires = "random_n")]
    random_p: Option<f64>,
    /// Repetitions per method; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("cologne: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let mut out = open_output(cli.output.as_deref())?;
    match cli.command {
        Command::Embed(args) => cmd_embed(&args, &mut out)?,
        Command::Similarity(args) => cmd_similarity(&args, &mut out)?,
        Command::Oracle(args) => cmd_oracle(&args, &mut out)?,
        Command::Bench(args) => cmd_bench(&args, &mut out)?,
    }
    out.flush().context("writing output")?;
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(args: &GraphArgs) -> Result<Graph> {
    let Some(path) = &args.graph else { bail!("--graph is required") };
    Graph::load_edge_list(&read_text(path)?, args.directed).with_context(|| format!("loading {}", path.display()))
}

fn cmd_embed(args: &EmbedArgs, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let cfg = args.sampler.config()?;
    let mut emb = embed(&g, &cfg, args.dim, args.sampler.seed)?;
    if let Some(path) = &args.attributes {
        let attrs = NodeAttributes::load(&read_text(path)?, &g).with_context(|| format!("loading {}", path.display()))?;
        emb = substitute_attributes(&emb, &g, &attrs, args.sampler.seed)?;
    }
    emb.write_tsv(out)?;
    Ok(())
}

fn cmd_similarity(args: &SimilarityArgs, out: &mut dyn Write) -> Result<()> {
    let graph = args.graph.graph.as_ref().map(|_| load_graph(&args.graph)).transpose()?;
    let emb = match (&args.embedding, &graph) {
        (Some(path), _) => {
            EmbeddingMatrix::read_tsv(&read_text(path)?).with_context(|| format!("loading {}", path.display()))?
        }
        (None, Some(g)) => embed(g, &args.sampler.config()?, args.dim, args.sampler.seed)?,
        (None, None) => bail!("either --embedding or --graph is required"),
    };

    let pairs: Vec<(usize, usize)> = match &args.pairs {
        Some(path) => parse_pairs(&read_text(path)?, &emb).with_context(|| format!("reading {}", path.display()))?,
        None => (0..emb.rows()).flat_map(|u| (u + 1..emb.rows()).map(move |v| (u, v))).collect(),
    };

    let exact = if args.exact {
        let Some(g) = &graph else { bail!("--exact needs --graph") };
        let mut cfg = SamplerConfig::new(emb.meta.method, emb.meta.k).with_lambda(emb.meta.lambda);
        cfg.use_edge_weights = args.sampler.edge_weights;
        let table = ExactTable::new(g, &cfg).map_err(|e| {
            anyhow::Error::new(e).context("exact similarity is out of reach for this graph; drop --exact")
        })?;
        Some((g, table))
    } else {
        None
    };

    write!(out, "u\tv\tcollision")?;
    if exact.is_some() {
        write!(out, "\texact")?;
    }
    writeln!(out)?;
    for (u, v) in pairs {
        write!(out, "{}\t{}\t{:.4}", emb.row_label(u), emb.row_label(v), collision_similarity(&emb, u, v))?;
        if let Some((g, table)) = &exact {
            let node = |row: usize| {
                g.node_id(emb.row_label(row))
                    .with_context(|| format!("node {:?} is not in the graph", emb.row_label(row)))
            };
            write!(out, "\t{:.4}", table.get(node(u)?, node(v)?))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Exact similarity matching a method: Jaccard of k-hop balls for L0,
/// min-ratio otherwise.
enum ExactTable {
    Balls(Vec<std::collections::BTreeSet<NodeId>>),
    Vectors(Vec<oracle::FrequencyVector>, u32),
}

impl ExactTable {
    fn new(g: &Graph, cfg: &SamplerConfig) -> cologne::Result<Self> {
        check_dp_budget(g)?;
        match cfg.method {
            Method::L0 => Ok(Self::Balls(
                (0..g.node_count() as NodeId).map(|u| g.khop_set(u, cfg.effective_k())).collect::<cologne::Result<_>>()?,
            )),
            m => Ok(Self::Vectors(exact_frequency_vectors(g, &cfg.neighborhood())?, m.exponent().unwrap_or(1))),
        }
    }

    fn get(&self, u: NodeId, v: NodeId) -> f64 {
        match self {
            Self::Balls(b) => oracle::jaccard(&b[u as usize], &b[v as usize]),
            Self::Vectors(f, p) => oracle::minratio(&f[u as usize], &f[v as usize], *p),
        }
    }
}

fn parse_pairs(text: &str, emb: &EmbeddingMatrix) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields[..] else {
            bail!("line {}: expected two node labels, found {} fields", i + 1, fields.len());
        };
        let row = |label: &str| emb.row_index(label).with_context(|| format!("line {}: unknown node {label:?}", i + 1));
        pairs.push((row(a)?, row(b)?));
    }
    Ok(pairs)
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let cfg = args.sampler.config()?;
    if args.freq {
        let vectors = exact_frequency_vectors(&g, &cfg.neighborhood())?;
        for f in &vectors {
            let owner = g.label(f.owner);
            match args.format {
                FreqFormat::Rows => {
                    let cells: Vec<String> = f.entries.iter().map(|(&x, c)| format!("{}={c}", g.label(x))).collect();
                    writeln!(out, "{owner}: {}", cells.join(","))?;
                }
                FreqFormat::Tsv => {
                    for (&x, c) in &f.entries {
                        writeln!(out, "{owner}\t{}\t{c}", g.label(x))?;
                    }
                }
            }
        }
    }
    if args.similarity {
        let params = cfg.neighborhood();
        let vectors = exact_frequency_vectors(&g, &params)?;
        let balls = (0..g.node_count() as NodeId).map(|u| g.khop_set(u, cfg.effective_k())).collect::<Result<Vec<_>, _>>()?;
        writeln!(out, "u\tv\tjaccard\tminratio_l1\tminratio_l2\tcosine\tsqrt_cosine")?;
        for u in 0..vectors.len() {
            for v in u + 1..vectors.len() {
                let (f, h) = (&vectors[u], &vectors[v]);
                writeln!(
                    out,
                    "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                    g.label(u as NodeId),
                    g.label(v as NodeId),
                    oracle::jaccard(&balls[u], &balls[v]),
                    oracle::minratio(f, h, 1),
                    oracle::minratio(f, h, 2),
                    oracle::cosine(f, h),
                    oracle::sqrt_cosine(f, h),
                )?;
            }
        }
    }
    if args.distribution {
        let label = args.node.as_deref().unwrap_or_default();
        let u = g.node_id(label).with_context(|| format!("unknown node {label:?}"))?;
        check_dp_budget(&g)?;
        let empirical = oracle::empirical_distribution(&g, u, &cfg, args.sampler.seed, args.trials)?;
        let reference = match cfg.method.exponent() {
            Some(_) => Some(oracle::reference_distribution(&g, u, &cfg, args.sampler.seed, args.trials)?),
            None => None,
        };
        writeln!(out, "node\tsample\tempirical\treference")?;
        for x in g.khop_set(u, cfg.k)? {
            let e = empirical.get(&x).copied().unwrap_or(0.0);
            let r = reference.as_ref().map_or("-".to_owned(), |r| format!("{:.6}", r.get(&x).copied().unwrap_or(0.0)));
            writeln!(out, "{label}\t{}\t{e:.6}\t{r}", g.label(x))?;
        }
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.sampler.config()?;
    let (g, source) = match (args.random_n, &args.graph.graph) {
        (Some(n), _) => match (args.random_m, args.random_p) {
            (Some(m), _) => (random_edges(n, m, args.sampler.seed, args.graph.directed), format!("random n={n} m={m}")),
            (None, Some(p)) => {
                if !(0.0..=1.0).contains(&p) {
                    bail!("--random-p must lie in [0, 1]");
                }
                (erdos_renyi(n, p, args.sampler.seed, args.graph.directed), format!("erdos-renyi n={n} p={p}"))
            }
            (None, None) => bail!("--random-n needs --random-m or --random-p"),
        },
        (None, Some(path)) => (load_graph(&args.graph)?, path.display().to_string()),
        (None, None) => bail!("either --graph or --random-n is required"),
    };
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let methods: Vec<Method> = if args.methods.is_empty() {
        vec![Method::L0, Method::L1, Method::L2, Method::RandomWalk]
    } else {
        args.methods.iter().map(|&m| m.into()).collect()
    };

    eprintln!("graph: {source}, {} nodes, {} adjacency entries", g.node_count(), g.adjacency_len());
    writeln!(out, "method\tk\td\tnodes\tadjacency\tseconds\tedges_per_sec")?;
    for method in methods {
        let cfg = SamplerConfig { method, ..cfg };
        let mut best = f64::INFINITY;
        for _ in 0..args.trials {
            let start = Instant::now();
            embed(&g, &cfg, args.dim, args.sampler.seed)?;
            best = best.min(start.elapsed().as_secs_f64());
        }
        let edges = (g.adjacency_len() * cfg.effective_k() * args.dim) as f64;
        let rate = if best > 0.0 { edges / best } else { 0.0 };
        eprintln!("{:>3}: {best:.4} s for k={} d={}, {rate:.3e} edges/s", method.as_str(), cfg.k, args.dim);
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{best:.6}\t{rate:.1}",
            method,
            cfg.k,
            args.dim,
            g.node_count(),
            g.adjacency_len()
        )?;
    }
    Ok(())
}
