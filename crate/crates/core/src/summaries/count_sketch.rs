use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::randomness::SeedContext;

pub const DEFAULT_ROWS: usize = 5;

/// Linear CountSketch of a real vector indexed by node id.
///
/// Each row hashes a key to one bucket with a random sign. Sketches built
/// from the same `(rows, width, seed)` add and scale exactly like the
/// vectors they summarize.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSketch {
    rows: usize,
    width: usize,
    seed: SeedContext,
    counters: Vec<f64>,
}

impl CountSketch {
    pub fn new(rows: usize, width: usize, seed: SeedContext) -> Result<Self> {
        if rows == 0 || width == 0 {
            return Err(Error::Usage(format!("count sketch shape {rows}x{width} is empty")));
        }
        Ok(Self { rows, width, seed, counters: vec![0.0; rows * width] })
    }

    /// Five rows of width `ceil(1 / epsilon^2)`.
    pub fn with_epsilon(epsilon: f64, seed: SeedContext) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon {epsilon} must lie in (0, 1)")));
        }
        Self::new(DEFAULT_ROWS, (1.0 / (epsilon * epsilon)).ceil() as usize, seed)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn counters(&self) -> &[f64] {
        &self.counters
    }

    #[inline]
    fn slot(&self, row: usize, key: NodeId) -> (usize, f64) {
        let h = self.seed.sketch_hash(row, key);
        let bucket = ((h as u128 * self.width as u128) >> 64) as usize;
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        (row * self.width + bucket, sign)
    }

    pub fn update(&mut self, key: NodeId, w: f64) {
        for row in 0..self.rows {
            let (i, sign) = self.slot(row, key);
            self.counters[i] += sign * w;
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.width != other.width || self.seed != other.seed {
            return Err(Error::Usage("count sketches differ in shape or seed".into()));
        }
        Ok(())
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0)?;
        Ok(out)
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.counters.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Median over rows of the row's root sum of squares.
    pub fn l2_estimate(&self) -> f64 {
        let mut per_row: Vec<f64> = self
            .counters
            .chunks_exact(self.width)
            .map(|row| row.iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect();
        per_row.sort_by(f64::total_cmp);
        let mid = per_row.len() / 2;
        if per_row.len() % 2 == 1 {
            per_row[mid]
        } else {
            (per_row[mid - 1] + per_row[mid]) / 2.0
        }
    }
}
