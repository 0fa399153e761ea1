//! Hypothesis quality: cross-entropy and description-length costs,
//! confusion counts at a threshold, F1, and threshold selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::Label;
use crate::logic::{program_size, HypothesisProgram};

/// Clamp applied to predicted probabilities before taking logarithms.
pub const BCE_EPS: f64 = 1e-7;

/// Number of candidate thresholds, `i / 16` for `i = 1..=15`.
pub const THRESHOLD_STEPS: usize = 15;

pub fn threshold_candidates() -> impl Iterator<Item = f64> {
    (1..=THRESHOLD_STEPS).map(|i| i as f64 / (THRESHOLD_STEPS + 1) as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn correct(&self) -> usize {
        self.tp + self.tn
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }
}

/// Mean negated log-likelihood of the labels; lower is better.
pub fn bce(results: &[(Label, f64)]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Empty("cross-entropy needs at least one prediction"));
    }
    let total: f64 = results
        .iter()
        .map(|&(y, p)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            let y = y.as_f64();
            y * p.ln() + (1.0 - y) * (1.0 - p).ln()
        })
        .sum();
    Ok(-total / results.len() as f64)
}

/// Counts with a prediction positive iff `prob >= threshold`.
pub fn confusion(results: &[(Label, f64)], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for &(y, p) in results {
        match (y, p >= threshold) {
            (Label::Positive, true) => c.tp += 1,
            (Label::Positive, false) => c.fn_ += 1,
            (Label::Negative, true) => c.fp += 1,
            (Label::Negative, false) => c.tn += 1,
        }
    }
    c
}

pub fn mdl(h: &HypothesisProgram, conf: &Confusion) -> f64 {
    mdl_sized(program_size(h), conf)
}

/// Description length for a program of `size` literals.
pub fn mdl_sized(size: usize, conf: &Confusion) -> f64 {
    (size + conf.fn_ + conf.fp) as f64
}

/// The candidate maximizing `tp + tn`, smallest on ties.
pub fn select_threshold(results: &[(Label, f64)]) -> f64 {
    let mut best = (0, f64::NAN);
    for t in threshold_candidates() {
        let correct = confusion(results, t).correct();
        if best.1.is_nan() || correct > best.0 {
            best = (correct, t);
        }
    }
    best.1
}

pub fn f1(conf: &Confusion) -> f64 {
    let denom = 2 * conf.tp + conf.fp + conf.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * conf.tp) as f64 / denom as f64
    }
}

/// Predictions of one hypothesis on a dataset, binarized at `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub per_example: Vec<(String, Label, f64)>,
    pub threshold: f64,
    pub confusion: Confusion,
}

impl TestResult {
    pub fn at_threshold(per_example: Vec<(String, Label, f64)>, threshold: f64) -> Self {
        let confusion = confusion(&Self::pairs_of(&per_example), threshold);
        TestResult {
            per_example,
            threshold,
            confusion,
        }
    }

    /// Binarizes at the threshold chosen by [`select_threshold`].
    pub fn selected(per_example: Vec<(String, Label, f64)>) -> Self {
        let t = select_threshold(&Self::pairs_of(&per_example));
        Self::at_threshold(per_example, t)
    }

    pub fn pairs(&self) -> Vec<(Label, f64)> {
        Self::pairs_of(&self.per_example)
    }

    fn pairs_of(per_example: &[(String, Label, f64)]) -> Vec<(Label, f64)> {
        per_example.iter().map(|(_, y, p)| (*y, *p)).collect()
    }

    pub fn bce(&self) -> f64 {
        bce(&self.pairs()).unwrap_or(0.0)
    }
}
