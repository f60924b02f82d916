use std::fmt;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Weighted Misra-Gries ("Frequent") heavy-hitter summary.
///
/// Holds at most `capacity` counters. For every key `x`,
/// `true(x) - W / (capacity + 1) <= estimate(x) <= true(x)`, where `W` is the
/// total weight that went into the summary, including through merges.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequentSummary {
    capacity: usize,
    /// Sorted by key; every weight is strictly positive.
    entries: Vec<(NodeId, f64)>,
    total: f64,
    drained: f64,
}

impl FrequentSummary {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Usage("summary capacity must be at least 1".into()));
        }
        Ok(Self { capacity, entries: Vec::new(), total: 0.0, drained: 0.0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total weight processed, `W`.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Weight removed by reductions. `sum(entries) + drained == total` up to rounding.
    pub fn drained(&self) -> f64 {
        self.drained
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    /// Lower estimate of the true weight of `key`; 0 when not retained.
    pub fn estimate(&self, key: NodeId) -> f64 {
        self.entries
            .binary_search_by_key(&key, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// Add `w` to `key`. If that creates `capacity + 1` counters, the smallest
    /// counter value is subtracted from all counters and non-positive ones
    /// are evicted.
    pub fn update(&mut self, key: NodeId, w: f64) -> Result<()> {
        check_weight(w)?;
        self.total += w;
        if w == 0.0 {
            return Ok(());
        }
        match self.entries.binary_search_by_key(&key, |e| e.0) {
            Ok(i) => self.entries[i].1 += w,
            Err(i) => {
                self.entries.insert(i, (key, w));
                self.drained += reduce(&mut self.entries, self.capacity);
            }
        }
        Ok(())
    }

    /// Keywise sum followed by one reduction: if more than `capacity` keys
    /// remain, the `(capacity + 1)`-th largest weight is subtracted from all.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.capacity != other.capacity {
            return Err(Error::Usage(format!(
                "cannot merge summaries of capacity {} and {}",
                self.capacity, other.capacity
            )));
        }
        let mut entries = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(ka, wa)), Some(&(kb, wb))) if ka == kb => {
                    entries.push((ka, wa + wb));
                    i += 1;
                    j += 1;
                }
                (Some(&a), Some(&(kb, _))) if a.0 < kb => {
                    entries.push(a);
                    i += 1;
                }
                (Some(&a), None) => {
                    entries.push(a);
                    i += 1;
                }
                (_, Some(&b)) => {
                    entries.push(b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        let drained = self.drained + other.drained + reduce(&mut entries, self.capacity);
        Ok(Self { capacity: self.capacity, entries, total: self.total + other.total, drained })
    }

    /// Multiply every counter (and the bookkeeping totals) by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_weight(factor)?;
        if factor == 0.0 {
            return Ok(Self { entries: Vec::new(), total: 0.0, drained: 0.0, ..*self });
        }
        Ok(Self {
            capacity: self.capacity,
            entries: self.entries.iter().map(|&(k, w)| (k, w * factor)).collect(),
            total: self.total * factor,
            drained: self.drained * factor,
        })
    }

    /// Entry of maximum weight; ties go to the smaller key.
    pub fn heaviest(&self) -> Option<(NodeId, f64)> {
        heaviest(&self.entries)
    }
}

fn heaviest(entries: &[(NodeId, f64)]) -> Option<(NodeId, f64)> {
    // Entries are sorted by key, so keeping the first maximum breaks ties by id.
    entries.iter().copied().fold(None, |best, e| match best {
        Some(b) if b.1 >= e.1 => Some(b),
        _ => Some(e),
    })
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("summary weight {w} must be finite and nonnegative")))
    }
}

/// Shrink `entries` to at most `capacity` keys. Returns the weight removed.
fn reduce(entries: &mut Vec<(NodeId, f64)>, capacity: usize) -> f64 {
    if entries.len() <= capacity {
        return 0.0;
    }
    let mut weights: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let (_, &mut cut, _) = weights.select_nth_unstable_by(capacity, |a, b| b.total_cmp(a));
    let mut removed = 0.0;
    entries.retain_mut(|e| {
        removed += e.1.min(cut);
        e.1 -= cut;
        e.1 > 0.0
    });
    removed
}

/// Scratch space for combining many scaled summaries into one with a single
/// reduction. Sized for the whole node range and reused across nodes.
#[derive(Debug, Clone)]
pub(crate) struct SummaryAccumulator {
    dense: Vec<f64>,
    touched: Vec<NodeId>,
    total: f64,
    drained: f64,
}

impl SummaryAccumulator {
    pub(crate) fn new(n: usize) -> Self {
        Self { dense: vec![0.0; n], touched: Vec::new(), total: 0.0, drained: 0.0 }
    }

    #[inline]
    pub(crate) fn add(&mut self, key: NodeId, w: f64) {
        self.total += w;
        self.add_entry(key, w);
    }

    #[inline]
    fn add_entry(&mut self, key: NodeId, w: f64) {
        if w <= 0.0 {
            return;
        }
        let slot = &mut self.dense[key as usize];
        if *slot == 0.0 {
            self.touched.push(key);
        }
        *slot += w;
    }

    pub(crate) fn add_summary(&mut self, s: &FrequentSummary, scale: f64) {
        if scale == 0.0 {
            return;
        }
        self.total += s.total * scale;
        self.drained += s.drained * scale;
        for &(k, w) in &s.entries {
            self.add_entry(k, w * scale);
        }
    }

    /// Drain the accumulated mass into a summary and reset the scratch space.
    pub(crate) fn finish(&mut self, capacity: usize) -> FrequentSummary {
        let mut entries: Vec<(NodeId, f64)> =
            self.touched.iter().map(|&k| (k, std::mem::take(&mut self.dense[k as usize]))).collect();
        self.touched.clear();
        let drained = self.drained + reduce(&mut entries, capacity);
        entries.sort_unstable_by_key(|e| e.0);
        let s = FrequentSummary { capacity, entries, total: self.total, drained };
        self.total = 0.0;
        self.drained = 0.0;
        s
    }
}

impl fmt::Display for FrequentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "capacity={} total={} drained={}", self.capacity, self.total, self.drained)?;
        for (k, w) in &self.entries {
            write!(f, " {k}:{w}")?;
        }
        Ok(())
    }
}
