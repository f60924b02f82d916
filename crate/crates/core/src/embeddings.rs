//! Discrete node embeddings: `d` coordinated samples per node.

use std::io::Write;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeAttributes, NodeId};
use crate::randomness::SeedContext;
use crate::samplers::{sample, Method, SamplerConfig};

/// Marker stored for threshold-mode misses. Never equal to anything.
pub const MISSING: &str = "∅";
const HEADER_TAG: &str = "#cologne";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMeta {
    pub method: Method,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
    pub lambda: f64,
    pub capacity: usize,
}

/// `n x d` table of sampled labels. Column `j` was produced with
/// `SeedContext::new(seed, j)`.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub meta: EmbeddingMeta,
    row_labels: Vec<String>,
    values: IndexSet<String>,
    /// Row-major indices into `values`.
    cells: Vec<Option<u32>>,
}

impl PartialEq for EmbeddingMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.row_labels == other.row_labels
            && self.cells.len() == other.cells.len()
            && (0..self.cells.len()).all(|i| self.cell_label(i) == other.cell_label(i))
    }
}

impl EmbeddingMatrix {
    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn dim(&self) -> usize {
        self.meta.d
    }

    pub fn row_label(&self, row: usize) -> &str {
        &self.row_labels[row]
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    /// Label at `(row, col)`, `None` for a miss.
    pub fn get(&self, row: usize, col: usize) -> Option<&str> {
        self.cell_label(row * self.meta.d + col)
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = Option<&str>> {
        (0..self.meta.d).map(move |c| self.get(row, c))
    }

    fn cell_label(&self, i: usize) -> Option<&str> {
        self.cells[i].map(|v| self.values[v as usize].as_str())
    }

    /// Write the header line and one `label<TAB>s_1<TAB>...<TAB>s_d` line per node.
    pub fn write_tsv(&self, mut sink: impl Write) -> Result<()> {
        let m = &self.meta;
        writeln!(
            sink,
            "{HEADER_TAG}\tmethod={}\tk={}\td={}\tseed={}\tlambda={}\tcapacity={}",
            m.method, m.k, m.d, m.seed, m.lambda, m.capacity
        )?;
        for row in 0..self.rows() {
            sink.write_all(self.row_labels[row].as_bytes())?;
            for value in self.row(row) {
                write!(sink, "\t{}", value.unwrap_or(MISSING))?;
            }
            sink.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let meta = parse_header(header)?;
        let mut row_labels = Vec::new();
        let mut values = IndexSet::new();
        let mut cells = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != meta.d + 1 {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {} samples, found {}", meta.d, fields.len() - 1),
                ));
            }
            row_labels.push(fields[0].to_owned());
            for &f in &fields[1..] {
                cells.push((f != MISSING).then(|| values.insert_full(f.to_owned()).0 as u32));
            }
        }
        Ok(Self { meta, row_labels, values, cells })
    }
}

fn parse_header(line: &str) -> Result<EmbeddingMeta> {
    let mut fields = line.split('\t');
    if fields.next() != Some(HEADER_TAG) {
        return Err(Error::parse(1, format!("header must start with {HEADER_TAG}")));
    }
    let mut kv = std::collections::HashMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| Error::parse(1, format!("malformed header field {f:?}")))?;
        kv.insert(k, v);
    }
    fn field<T: std::str::FromStr>(kv: &std::collections::HashMap<&str, &str>, key: &str) -> Result<T> {
        kv.get(key)
            .ok_or_else(|| Error::parse(1, format!("header lacks {key}")))?
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid header value for {key}")))
    }
    Ok(EmbeddingMeta {
        method: kv
            .get("method")
            .ok_or_else(|| Error::parse(1, "header lacks method"))?
            .parse()
            .map_err(|_| Error::parse(1, "invalid header value for method"))?,
        k: field(&kv, "k")?,
        d: field(&kv, "d")?,
        seed: field(&kv, "seed")?,
        lambda: field(&kv, "lambda")?,
        capacity: field(&kv, "capacity")?,
    })
}

/// Build a `d`-column embedding. Columns are computed on the current rayon
/// pool.
pub fn embed(g: &Graph, cfg: &SamplerConfig, d: usize, global_seed: u64) -> Result<EmbeddingMatrix> {
    if d == 0 {
        return Err(Error::Usage("embedding dimension must be at least 1".into()));
    }
    cfg.validate()?;
    let columns = (0..d as u64)
        .into_par_iter()
        .map(|j| sample(g, SeedContext::new(global_seed, j), cfg))
        .collect::<Result<Vec<_>>>()?;
    let n = g.node_count();
    let mut cells = Vec::with_capacity(n * d);
    for u in 0..n {
        cells.extend(columns.iter().map(|c| c.samples[u]));
    }
    Ok(EmbeddingMatrix {
        meta: EmbeddingMeta {
            method: cfg.method,
            k: cfg.k,
            d,
            seed: global_seed,
            lambda: cfg.lambda,
            capacity: cfg.capacity,
        },
        row_labels: g.labels().map(str::to_owned).collect(),
        values: g.labels().map(str::to_owned).collect(),
        cells,
    })
}

/// Replace each sampled node by one of its attributes, chosen by a weighted
/// minwise draw keyed by `(global_seed, column)` and the attribute alone, so
/// equal samples in a column map to equal attributes. Nodes without
/// positive-weight attributes keep their own label.
pub fn substitute_attributes(
    emb: &EmbeddingMatrix,
    g: &Graph,
    attrs: &NodeAttributes,
    global_seed: u64,
) -> Result<EmbeddingMatrix> {
    let mut values = IndexSet::new();
    let mut cells = Vec::with_capacity(emb.cells.len());
    let d = emb.meta.d;
    for row in 0..emb.rows() {
        for col in 0..d {
            let Some(label) = emb.get(row, col) else {
                cells.push(None);
                continue;
            };
            let node: NodeId = g
                .node_id(label)
                .ok_or_else(|| Error::Domain(format!("embedding value {label:?} is not a graph node")))?;
            let ctx = SeedContext::new(global_seed, col as u64);
            let mut best: Option<(f64, u32)> = None;
            for &(a, w) in attrs.of(node) {
                if w > 0.0 {
                    let r = ctx.attribute_rank(a, w)?;
                    if best.is_none_or(|b| (r, a) < b) {
                        best = Some((r, a));
                    }
                }
            }
            let chosen = best.map_or(label, |(_, a)| attrs.attribute_label(a));
            cells.push(Some(values.insert_full(chosen.to_owned()).0 as u32));
        }
    }
    Ok(EmbeddingMatrix { meta: emb.meta.clone(), row_labels: emb.row_labels.clone(), values, cells })
}

/// Fraction of columns where rows `u` and `v` agree. Misses never agree.
pub fn collision_similarity(emb: &EmbeddingMatrix, u: usize, v: usize) -> f64 {
    let d = emb.meta.d;
    let a = &emb.cells[u * d..(u + 1) * d];
    let b = &emb.cells[v * d..(v + 1) * d];
    let agree = a.iter().zip(b).filter(|(x, y)| x.is_some() && x == y).count();
    agree as f64 / d as f64
}
