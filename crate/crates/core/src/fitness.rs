//! Chromosome decoding and the weighted wrapper fitness
//!
//! ```text
//! fitness = w_accuracy * (sensitivity * specificity) + w_features / selected_count
//! ```
//!
//! A chromosome that selects no feature is not trained and scores
//! [`EMPTY_MASK_FITNESS`], strictly below every attainable value.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{Dataset, UserFlag};
use crate::folds::FoldSplit;
use crate::ga::Chromosome;
use crate::svm::{self, SolverConfig, SvmParams};
use crate::{Error, Matrix, Result};

/// Score of a chromosome with an empty feature mask.
pub const EMPTY_MASK_FITNESS: f64 = -1.0;

/// Feature genes at or above this value select their feature.
pub const SELECTION_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub feature_mask: Vec<bool>,
    pub params: SvmParams,
}

impl ModelSpec {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.feature_mask
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(i, _)| i)
    }

    pub fn feature_count(&self) -> usize {
        self.feature_mask.iter().filter(|&&on| on).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitnessWeights {
    pub accuracy: f64,
    pub features: f64,
}

impl FitnessWeights {
    pub fn new(accuracy: f64, features: f64) -> Result<Self> {
        let w = Self { accuracy, features };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("accuracy weight", self.accuracy), ("feature weight", self.features)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("weights", format!("{name} {v} outside [0, 1]")));
            }
        }
        if (self.accuracy + self.features - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("weights", "accuracy and feature weights must sum to 1"));
        }
        Ok(())
    }

    /// The five accuracy/feature splits 80:20, 65:35, 50:50, 35:65, 20:80.
    pub fn standard_conditions() -> Vec<FitnessWeights> {
        [(0.8, 0.2), (0.65, 0.35), (0.5, 0.5), (0.35, 0.65), (0.2, 0.8)]
            .into_iter()
            .map(|(a, f)| FitnessWeights {
                accuracy: a,
                features: f,
            })
            .collect()
    }

    /// Short label such as `A:80 F:20`.
    pub fn label(&self) -> String {
        format!(
            "A:{} F:{}",
            libm::round(self.accuracy * 100.0) as i64,
            libm::round(self.features * 100.0) as i64
        )
    }

    /// Weighted score for an accuracy product and a selected-feature count.
    pub fn score(&self, accuracy_product: f64, feature_count: usize) -> f64 {
        if feature_count == 0 {
            return EMPTY_MASK_FITNESS;
        }
        self.accuracy * accuracy_product + self.features / feature_count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationResult {
    /// Zero when no model was trained (empty mask); likewise below.
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy_product: f64,
    pub feature_count: usize,
    pub fitness: f64,
    pub spec: ModelSpec,
}

/// Sensitivity times specificity.
pub fn accuracy(sensitivity: f64, specificity: f64) -> Result<f64> {
    for (name, v) in [("sensitivity", sensitivity), ("specificity", specificity)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(name, format!("{v} outside [0, 1]")));
        }
    }
    Ok(sensitivity * specificity)
}

/// Mask genes first, then cost, then gamma (copied verbatim).
pub fn decode(c: &Chromosome, feature_count: usize) -> Result<ModelSpec> {
    if c.len() != feature_count + 2 {
        return Err(Error::DimensionMismatch {
            expected: feature_count + 2,
            found: c.len(),
        });
    }
    let feature_mask = c.genes[..feature_count]
        .iter()
        .map(|&g| g >= SELECTION_CUTOFF)
        .collect();
    let params = SvmParams::new(c.genes[feature_count], c.genes[feature_count + 1])?;
    Ok(ModelSpec { feature_mask, params })
}

/// Train/test matrices of one fold over the full predictor set.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub feature_names: Vec<String>,
    pub train_x: Matrix,
    pub train_y: Vec<UserFlag>,
    pub test_x: Matrix,
    pub test_y: Vec<UserFlag>,
}

impl FoldData {
    /// Trains on every fold except `fold`, tests on `fold`.
    pub fn from_split(ds: &Dataset, split: &FoldSplit, fold: usize) -> Result<Self> {
        if split.assignments.len() != ds.len() {
            return Err(Error::LengthMismatch {
                left: split.assignments.len(),
                right: ds.len(),
            });
        }
        if fold >= split.k {
            return Err(Error::invalid(
                "fold",
                format!("{fold} out of range for k = {}", split.k),
            ));
        }
        let train = split.train_indices(fold);
        let test = split.test_indices(fold);
        Ok(Self {
            feature_names: ds.feature_names.clone(),
            train_x: ds.x.select_rows(&train),
            train_y: train.iter().map(|&i| ds.y[i]).collect(),
            test_x: ds.x.select_rows(&test),
            test_y: test.iter().map(|&i| ds.y[i]).collect(),
        })
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }
}

fn describe(c: &Chromosome) -> String {
    let mut s = String::from("[");
    for (i, g) in c.genes.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("{g:.4}"));
    }
    s.push(']');
    s
}

/// Decodes, trains on the fold's training part restricted to the selected
/// columns, and scores predictions on the test part.
pub fn evaluate(
    c: &Chromosome,
    fold: &FoldData,
    weights: &FitnessWeights,
    solver: &SolverConfig,
) -> Result<EvaluationResult> {
    let spec = decode(c, fold.feature_count())?;
    let cols: Vec<usize> = spec.selected().collect();
    if cols.is_empty() {
        return Ok(EvaluationResult {
            sensitivity: 0.0,
            specificity: 0.0,
            accuracy_product: 0.0,
            feature_count: 0,
            fitness: EMPTY_MASK_FITNESS,
            spec,
        });
    }

    let with_context = |e: Error| Error::Evaluation {
        chromosome: describe(c),
        source: Box::new(e),
    };
    let train_x = fold.train_x.select_cols(&cols);
    let test_x = fold.test_x.select_cols(&cols);
    let model = svm::train(&train_x, &fold.train_y, spec.params, solver).map_err(with_context)?;
    let predicted = model.predict(&test_x).map_err(with_context)?;
    let m = svm::confusion_metrics(&predicted, &fold.test_y).map_err(with_context)?;
    let sensitivity = m
        .sensitivity
        .ok_or(Error::DegenerateFold("users"))
        .map_err(with_context)?;
    let specificity = m
        .specificity
        .ok_or(Error::DegenerateFold("non-users"))
        .map_err(with_context)?;
    let accuracy_product = sensitivity * specificity;

    Ok(EvaluationResult {
        sensitivity,
        specificity,
        accuracy_product,
        feature_count: cols.len(),
        fitness: weights.score(accuracy_product, cols.len()),
        spec,
    })
}
