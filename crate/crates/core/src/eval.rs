//! Accuracy: matched context–sketch pairs over the number of gold contexts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Mapping;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchTally {
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub accuracy: f64,
    pub n_correct: usize,
    pub n_total: usize,
    /// Predicted contexts absent from gold; ignored for scoring.
    pub n_extraneous: usize,
    /// Keyed by gold sketch id.
    pub per_sketch: BTreeMap<String, SketchTally>,
}

impl ScoreReport {
    /// Accuracy with four fractional digits, e.g. `0.7000`.
    pub fn formatted(&self) -> String {
        format!("{:.4}", self.accuracy)
    }
}

/// Scores `pred` against `gold`. Missing predictions count as wrong; empty
/// gold gives accuracy 0.
pub fn accuracy(pred: &Mapping, gold: &Mapping) -> ScoreReport {
    let mut per_sketch: BTreeMap<String, SketchTally> = BTreeMap::new();
    let mut n_correct = 0;
    for (ctx, sk) in gold.iter() {
        let tally = per_sketch.entry(sk.to_owned()).or_default();
        tally.total += 1;
        if pred.get(ctx) == Some(sk) {
            tally.correct += 1;
            n_correct += 1;
        }
    }
    let n_total = gold.len();
    let n_extraneous = pred.iter().filter(|(c, _)| gold.get(c).is_none()).count();
    ScoreReport {
        accuracy: if n_total == 0 {
            0.0
        } else {
            n_correct as f64 / n_total as f64
        },
        n_correct,
        n_total,
        n_extraneous,
        per_sketch,
    }
}
