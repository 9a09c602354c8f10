//! Stratified k-fold assignment.
//!
//! Each class is shuffled independently with a seeded generator and dealt
//! round-robin into the folds. The deal position carries over from the
//! positive class to the negative class, so total fold sizes differ by at
//! most one and per-fold class counts differ by at most one.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::data::UserFlag;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldSplit {
    pub k: usize,
    /// Fold index of every record.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Every record outside `fold`, in ascending index order.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn stratified_folds(labels: &[UserFlag], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::invalid("k", "at least two folds are required"));
    }
    let mut positives: Vec<usize> = Vec::new();
    let mut negatives: Vec<usize> = Vec::new();
    for (i, y) in labels.iter().enumerate() {
        if y.is_user() {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    let minority = positives.len().min(negatives.len());
    if minority < k {
        return Err(Error::TooManyFolds { k, minority });
    }

    let mut rng = rng::seeded(seed);
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let mut assignments = vec![0; labels.len()];
    for (slot, &i) in positives.iter().chain(negatives.iter()).enumerate() {
        assignments[i] = slot % k;
    }
    Ok(FoldSplit { k, assignments, seed })
}
