//! Immutable compressed adjacency graphs, edge-list and attribute parsing.

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense internal node identifier in `0..n`.
pub type NodeId = u32;

/// A graph in compressed sparse row form.
///
/// Out-neighbors of `u` occupy `targets[offsets[u]..offsets[u + 1]]`.
/// Undirected graphs store every edge in both directions, except self-loops
/// which are a single adjacency entry. Parallel edges are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edge_weights: Option<Vec<f64>>,
    node_weights: Option<Vec<f64>>,
    directed: bool,
    vocab: IndexSet<String>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.vocab.len()
    }

    /// Number of adjacency entries (an undirected edge counts twice).
    pub fn adjacency_len(&self) -> usize {
        self.targets.len()
    }

    /// Number of input edges: adjacency entries for directed graphs,
    /// unordered pairs (self-loops once) for undirected graphs.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            return self.targets.len();
        }
        let loops = (0..self.node_count() as NodeId)
            .map(|u| self.raw_targets(u).iter().filter(|&&v| v == u).count())
            .sum::<usize>();
        (self.targets.len() - loops) / 2 + loops
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge_weights(&self) -> bool {
        self.edge_weights.is_some()
    }

    pub fn has_node_weights(&self) -> bool {
        self.node_weights.is_some()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Out-neighbors of `u` in adjacency order with their edge weights
    /// (1 when the graph is unweighted).
    pub fn neighbors(&self, u: NodeId) -> Result<impl Iterator<Item = (NodeId, f64)> + '_> {
        self.check_node(u)?;
        Ok(self.weighted_targets(u, true))
    }

    /// Out-neighbor ids without bounds checking beyond the slice index.
    pub fn raw_targets(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Neighbors with weights; `use_weights = false` reports 1 for every edge.
    pub fn weighted_targets(
        &self,
        u: NodeId,
        use_weights: bool,
    ) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[u as usize]..self.offsets[u as usize + 1];
        let weights = if use_weights { self.edge_weights.as_deref() } else { None };
        range.map(move |i| (self.targets[i], weights.map_or(1.0, |w| w[i])))
    }

    /// Node weight of `u`, or 1 when absent or not requested.
    pub fn node_weight(&self, u: NodeId, use_weights: bool) -> f64 {
        match (&self.node_weights, use_weights) {
            (Some(w), true) => w[u as usize],
            _ => 1.0,
        }
    }

    /// The ball of radius `k` around `u` under out-edges. Always contains `u`.
    pub fn khop_set(&self, u: NodeId, k: usize) -> Result<BTreeSet<NodeId>> {
        self.check_node(u)?;
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::from([u]);
        dist[u as usize] = 0;
        let mut ball = BTreeSet::from([u]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            if dx == k {
                continue;
            }
            for &y in self.raw_targets(x) {
                if dist[y as usize] == usize::MAX {
                    dist[y as usize] = dx + 1;
                    ball.insert(y);
                    queue.push_back(y);
                }
            }
        }
        Ok(ball)
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.vocab[u as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.vocab.get_index_of(label).map(|i| i as NodeId)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    /// Attach per-node weights. All weights must be finite and nonnegative.
    pub fn with_node_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.node_count() {
            return Err(Error::Usage(format!(
                "{} node weights for {} nodes",
                weights.len(),
                self.node_count()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !is_valid_weight(**w)) {
            return Err(Error::Domain(format!("node weight {w} is not a nonnegative real")));
        }
        self.node_weights = Some(weights);
        Ok(self)
    }

    /// Parse an edge list. Lines are `u v` or `u v w`; `#` starts a comment.
    pub fn load_edge_list(text: &str, directed: bool) -> Result<Self> {
        Self::load_edge_list_with_vocab(text, std::iter::empty::<&str>(), directed)
    }

    /// Like [`Graph::load_edge_list`] but interns `vocab` first, so ids follow
    /// the vocabulary order and isolated nodes survive.
    pub fn load_edge_list_with_vocab<'a>(
        text: &str,
        vocab: impl IntoIterator<Item = &'a str>,
        directed: bool,
    ) -> Result<Self> {
        let mut builder = GraphBuilder::new(directed);
        for label in vocab {
            builder.intern(label);
        }
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let weight = match fields.len() {
                2 => None,
                3 => {
                    let w: f64 = fields[2].parse().map_err(|_| {
                        Error::parse(line_no, format!("invalid edge weight {:?}", fields[2]))
                    })?;
                    if !is_valid_weight(w) {
                        return Err(Error::Domain(format!(
                            "line {line_no}: edge weight {w} is not a nonnegative real"
                        )));
                    }
                    Some(w)
                }
                n => {
                    return Err(Error::parse(line_no, format!("expected 2 or 3 fields, found {n}")))
                }
            };
            let u = builder.intern(fields[0]);
            let v = builder.intern(fields[1]);
            builder.push_edge(u, v, weight);
        }
        Ok(builder.build())
    }

    /// Write the edge list; each undirected edge is written once.
    pub fn write_edge_list(&self, mut sink: impl Write) -> Result<()> {
        for u in 0..self.node_count() as NodeId {
            for (v, w) in self.weighted_targets(u, true) {
                if !self.directed && v < u {
                    continue;
                }
                match self.edge_weights {
                    Some(_) => writeln!(sink, "{}\t{}\t{}", self.label(u), self.label(v), w)?,
                    None => writeln!(sink, "{}\t{}", self.label(u), self.label(v))?,
                }
            }
        }
        Ok(())
    }

    /// One label per line; line index is the internal id.
    pub fn write_vocab(&self, mut sink: impl Write) -> Result<()> {
        for label in &self.vocab {
            writeln!(sink, "{label}")?;
        }
        Ok(())
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::Domain(format!("node id {u} out of range for {} nodes", self.node_count())))
        }
    }
}

fn is_valid_weight(w: f64) -> bool {
    w.is_finite() && w >= 0.0
}

/// Incremental construction of a [`Graph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    directed: bool,
    vocab: IndexSet<String>,
    edges: Vec<(NodeId, NodeId, Option<f64>)>,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        Self { directed, ..Default::default() }
    }

    /// Builder over `n` nodes labelled `"0".."n-1"`.
    pub fn with_nodes(n: usize, directed: bool) -> Self {
        let mut b = Self::new(directed);
        for i in 0..n {
            b.intern(&i.to_string());
        }
        b
    }

    pub fn intern(&mut self, label: &str) -> NodeId {
        match self.vocab.get_index_of(label) {
            Some(i) => i as NodeId,
            None => {
                self.vocab.insert(label.to_owned());
                (self.vocab.len() - 1) as NodeId
            }
        }
    }

    /// Add an edge between existing ids. Panics if an id was never interned.
    pub fn edge(&mut self, u: NodeId, v: NodeId) -> &mut Self {
        self.push_edge(u, v, None);
        self
    }

    pub fn weighted_edge(&mut self, u: NodeId, v: NodeId, w: f64) -> Result<&mut Self> {
        if !is_valid_weight(w) {
            return Err(Error::Domain(format!("edge weight {w} is not a nonnegative real")));
        }
        self.push_edge(u, v, Some(w));
        Ok(self)
    }

    fn push_edge(&mut self, u: NodeId, v: NodeId, w: Option<f64>) {
        let n = self.vocab.len() as NodeId;
        assert!(u < n && v < n, "edge ({u}, {v}) references an unknown node");
        self.edges.push((u, v, w));
    }

    pub fn build(self) -> Graph {
        let n = self.vocab.len();
        let weighted = self.edges.iter().any(|e| e.2.is_some());
        let mut degree = vec![0usize; n];
        for &(u, v, _) in &self.edges {
            degree[u as usize] += 1;
            if !self.directed && u != v {
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = offsets[n];
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0; total];
        let mut weights = vec![1.0; if weighted { total } else { 0 }];
        let mut place = |from: NodeId, to: NodeId, w: f64| {
            let slot = cursor[from as usize];
            cursor[from as usize] += 1;
            targets[slot] = to;
            if weighted {
                weights[slot] = w;
            }
        };
        for &(u, v, w) in &self.edges {
            let w = w.unwrap_or(1.0);
            place(u, v, w);
            if !self.directed && u != v {
                place(v, u, w);
            }
        }
        Graph {
            offsets,
            targets,
            edge_weights: weighted.then_some(weights),
            node_weights: None,
            directed: self.directed,
            vocab: self.vocab,
        }
    }
}

/// Parse a vocabulary file (one label per line).
pub fn read_vocab(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.is_empty()).collect()
}

/// Weighted attributes per node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeAttributes {
    per_node: Vec<Vec<(u32, f64)>>,
    vocab: IndexSet<String>,
}

impl NodeAttributes {
    /// Parse `node<TAB>attr[:weight],attr[:weight],...` lines for the nodes of `g`.
    /// A missing weight means 1. Nodes without a line have no attributes.
    pub fn load(text: &str, g: &Graph) -> Result<Self> {
        let mut attrs = NodeAttributes { per_node: vec![Vec::new(); g.node_count()], ..Default::default() };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (node, list) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected node<TAB>attributes"))?;
            let u = g
                .node_id(node.trim())
                .ok_or_else(|| Error::Domain(format!("line {line_no}: unknown node {node:?}")))?;
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, weight) = match item.rsplit_once(':') {
                    Some((name, w)) => {
                        let w: f64 = w.parse().map_err(|_| {
                            Error::parse(line_no, format!("invalid attribute weight {w:?}"))
                        })?;
                        (name, w)
                    }
                    None => (item, 1.0),
                };
                if !is_valid_weight(weight) {
                    return Err(Error::Domain(format!(
                        "line {line_no}: attribute weight {weight} is not a nonnegative real"
                    )));
                }
                if name.is_empty() {
                    return Err(Error::parse(line_no, "empty attribute name"));
                }
                let (a, _) = attrs.vocab.insert_full(name.to_owned());
                attrs.per_node[u as usize].push((a as u32, weight));
            }
        }
        Ok(attrs)
    }

    pub fn of(&self, u: NodeId) -> &[(u32, f64)] {
        self.per_node.get(u as usize).map_or(&[], Vec::as_slice)
    }

    pub fn attribute_label(&self, a: u32) -> &str {
        &self.vocab[a as usize]
    }

    pub fn attribute_count(&self) -> usize {
        self.vocab.len()
    }
}

/// Erdős–Rényi `G(n, p)` over labels `"0".."n-1"`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64, directed: bool) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::with_nodes(n, directed);
    for u in 0..n as NodeId {
        let start = if directed { 0 } else { u + 1 };
        for v in start..n as NodeId {
            if u != v && rng.random_bool(p) {
                b.edge(u, v);
            }
        }
    }
    b.build()
}

/// Uniform random multigraph with exactly `m` edges (no self-loops) over `n` nodes.
pub fn random_edges(n: usize, m: usize, seed: u64, directed: bool) -> Graph {
    assert!(n >= 2 || m == 0, "need two nodes to place an edge");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::with_nodes(n, directed);
    let mut placed = 0;
    while placed < m {
        let u = rng.random_range(0..n) as NodeId;
        let v = rng.random_range(0..n) as NodeId;
        if u != v {
            b.edge(u, v);
            placed += 1;
        }
    }
    b.build()
}
