use crate::data::UserFlag;
use crate::{Error, Result};

/// Confusion counts with `User` as the positive class.
///
/// A rate whose denominator is empty (no users or no non-users in the truth)
/// is `None` rather than a made-up 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMetrics {
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy_product: Option<f64>,
}

impl ConfusionMetrics {
    pub fn total(&self) -> usize {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

pub fn confusion_metrics(predicted: &[UserFlag], truth: &[UserFlag]) -> Result<ConfusionMetrics> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (p, t) in predicted.iter().zip(truth) {
        match (p.is_user(), t.is_user()) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let rate = |hit: usize, miss: usize| (hit + miss > 0).then(|| hit as f64 / (hit + miss) as f64);
    let sensitivity = rate(tp, fn_);
    let specificity = rate(tn, fp);
    Ok(ConfusionMetrics {
        true_positives: tp,
        true_negatives: tn,
        false_positives: fp,
        false_negatives: fn_,
        sensitivity,
        specificity,
        accuracy_product: sensitivity.zip(specificity).map(|(a, b)| a * b),
    })
}
