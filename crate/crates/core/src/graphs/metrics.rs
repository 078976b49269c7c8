use alloc::format;

use super::cpdag::Cpdag;
use crate::error::{Error, Result};

/// Edge-level agreement between an estimated and a true CPDAG.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureMetrics {
    pub true_positive: usize,
    pub estimated_edges: usize,
    pub true_edges: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Orientation-aware F1: an estimated edge counts only if the true graph has
/// the same adjacency with the same mark (same direction, or both undirected).
pub fn f1_score(estimated: &Cpdag, truth: &Cpdag) -> Result<StructureMetrics> {
    if estimated.p() != truth.p() {
        return Err(Error::DimensionMismatch(format!(
            "estimated graph has {} nodes, truth has {}",
            estimated.p(),
            truth.p()
        )));
    }
    let tp = estimated.directed().intersection(truth.directed()).count()
        + estimated.undirected().intersection(truth.undirected()).count();
    let est = estimated.num_edges();
    let tru = truth.num_edges();
    let precision = if est == 0 { 1.0 } else { tp as f64 / est as f64 };
    let recall = if tru == 0 { 1.0 } else { tp as f64 / tru as f64 };
    let denom = precision + recall;
    let f1 = if denom > 0.0 { 2.0 * precision * recall / denom } else { 0.0 };
    Ok(StructureMetrics { true_positive: tp, estimated_edges: est, true_edges: tru, precision, recall, f1 })
}
