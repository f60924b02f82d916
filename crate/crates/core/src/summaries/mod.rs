//! Mergeable summaries: a weighted heavy-hitter summary and a CountSketch.

mod count_sketch;
mod frequent;

pub use count_sketch::{CountSketch, DEFAULT_ROWS};
pub use frequent::FrequentSummary;

pub(crate) use frequent::SummaryAccumulator;
