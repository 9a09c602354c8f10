//! Aggregations over run records. Every function here is a pure function of
//! its inputs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::experiment::RunRecord;
use crate::fitness::{FitnessWeights, FoldData};
use crate::folds::FoldSplit;
use crate::stats;
use crate::svm::{self, ConfusionMetrics, SolverConfig, SvmParams};
use crate::{Error, Result};

/// Records grouped by condition index, in ascending condition order.
pub fn by_condition(records: &[RunRecord]) -> BTreeMap<usize, Vec<&RunRecord>> {
    let mut groups: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.key.condition).or_default().push(r);
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionAverages {
    pub condition: usize,
    pub weights: FitnessWeights,
    pub runs: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub feature_count: f64,
    /// Mean of the per-run fitness values.
    pub fitness: f64,
}

pub fn fold_averages(records: &[RunRecord]) -> Result<Vec<ConditionAverages>> {
    if records.is_empty() {
        return Err(Error::Empty("run records"));
    }
    Ok(by_condition(records)
        .into_iter()
        .map(|(condition, rs)| {
            let n = rs.len() as f64;
            let avg = |f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            ConditionAverages {
                condition,
                weights: rs[0].weights,
                runs: rs.len(),
                sensitivity: avg(&|r| r.evaluation.sensitivity),
                specificity: avg(&|r| r.evaluation.specificity),
                feature_count: avg(&|r| r.evaluation.feature_count as f64),
                fitness: avg(&|r| r.evaluation.fitness),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrequency {
    /// Per condition, how many runs' best model selected each feature.
    pub per_condition: BTreeMap<usize, Vec<u32>>,
    pub pooled: Vec<u32>,
}

impl FeatureFrequency {
    /// Feature indices ordered by pooled count, most frequent first; ties
    /// keep column order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.pooled.len()).collect();
        idx.sort_by(|&a, &b| self.pooled[b].cmp(&self.pooled[a]));
        idx
    }
}

pub fn feature_frequency(records: &[RunRecord], feature_count: usize) -> FeatureFrequency {
    let mut per_condition: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    let mut pooled = vec![0u32; feature_count];
    for r in records {
        let counts = per_condition
            .entry(r.key.condition)
            .or_insert_with(|| vec![0; feature_count]);
        for (i, &on) in r.evaluation.spec.feature_mask.iter().enumerate().take(feature_count) {
            if on {
                counts[i] += 1;
                pooled[i] += 1;
            }
        }
    }
    FeatureFrequency { per_condition, pooled }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestModel {
    pub condition: usize,
    pub record: RunRecord,
    pub sensitivity: f64,
    pub specificity: f64,
    pub fitness: f64,
    pub feature_count: usize,
    /// `(1 - selected / total) * 100`.
    pub feature_reduction_percent: f64,
    pub cost: f64,
    pub gamma: f64,
    pub selected: Vec<usize>,
    /// Sensitivity plus specificity, in percent.
    pub total_accuracy_percent: f64,
}

/// Per condition, the record with the highest accuracy product; ties go to
/// fewer features, then the lower fold index.
pub fn best_models(records: &[RunRecord]) -> Vec<BestModel> {
    by_condition(records)
        .into_iter()
        .map(|(condition, rs)| {
            let best = rs
                .iter()
                .copied()
                .reduce(|a, b| {
                    let (ea, eb) = (&a.evaluation, &b.evaluation);
                    let better = eb
                        .accuracy_product
                        .total_cmp(&ea.accuracy_product)
                        .then(ea.feature_count.cmp(&eb.feature_count))
                        .then(a.key.fold.cmp(&b.key.fold));
                    if better.is_gt() {
                        b
                    } else {
                        a
                    }
                })
                .expect("groups are non-empty");
            let e = &best.evaluation;
            let total = e.spec.feature_mask.len().max(1) as f64;
            BestModel {
                condition,
                record: best.clone(),
                sensitivity: e.sensitivity,
                specificity: e.specificity,
                fitness: e.fitness,
                feature_count: e.feature_count,
                feature_reduction_percent: (1.0 - e.feature_count as f64 / total) * 100.0,
                cost: e.spec.params.cost,
                gamma: e.spec.params.gamma,
                selected: e.spec.selected().collect(),
                total_accuracy_percent: (e.sensitivity + e.specificity) * 100.0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub condition: usize,
    /// 1-based generation index.
    pub generation: usize,
    pub mean_best: f64,
    /// Half-width of the 95% t-interval of the mean; zero for a single run.
    pub ci_half_width: f64,
}

/// Mean best-fitness per generation for each condition. Runs that stopped
/// early are extended flat at their final best.
pub fn convergence_curves(records: &[RunRecord]) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for (condition, rs) in by_condition(records) {
        let rs: Vec<&RunRecord> = rs.into_iter().filter(|r| !r.ga.history.is_empty()).collect();
        let horizon = rs.iter().map(|r| r.ga.history.len()).max().unwrap_or(0);
        let n = rs.len();
        let t_crit = if n > 1 {
            stats::student_t_quantile(0.975, (n - 1) as f64)
        } else {
            0.0
        };
        for g in 0..horizon {
            let values: Vec<f64> = rs
                .iter()
                .map(|r| {
                    let h = &r.ga.history;
                    h[g.min(h.len() - 1)].best
                })
                .collect();
            let mean = stats::mean(&values);
            let ci = if n > 1 {
                t_crit * libm::sqrt(stats::sample_variance(&values) / n as f64)
            } else {
                0.0
            };
            out.push(CurvePoint {
                condition,
                generation: g + 1,
                mean_best: mean,
                ci_half_width: ci,
            });
        }
    }
    out
}

/// Sensitivity samples per condition, labelled, for the pairwise test matrix.
pub fn sensitivity_groups(records: &[RunRecord]) -> Vec<(String, Vec<f64>)> {
    by_condition(records)
        .into_values()
        .map(|rs| {
            (
                rs[0].weights.label(),
                rs.iter().map(|r| r.evaluation.sensitivity).collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub params: SvmParams,
    pub per_fold: Vec<ConfusionMetrics>,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// All-features SVM with fixed parameters, averaged over the folds.
pub fn baseline_svm(
    ds: &Dataset,
    split: &FoldSplit,
    params: SvmParams,
    solver: &SolverConfig,
) -> Result<BaselineResult> {
    let mut per_fold = Vec::with_capacity(split.k);
    for f in 0..split.k {
        let fold = FoldData::from_split(ds, split, f)?;
        let model = svm::train(&fold.train_x, &fold.train_y, params, solver)?;
        let predicted = model.predict(&fold.test_x)?;
        per_fold.push(svm::confusion_metrics(&predicted, &fold.test_y)?);
    }
    let mean_of = |pick: fn(&ConfusionMetrics) -> Option<f64>, what: &'static str| {
        per_fold
            .iter()
            .map(|m| pick(m).ok_or(Error::DegenerateFold(what)))
            .sum::<Result<f64>>()
            .map(|s| s / per_fold.len() as f64)
    };
    Ok(BaselineResult {
        params,
        sensitivity: mean_of(|m| m.sensitivity, "users")?,
        specificity: mean_of(|m| m.specificity, "non-users")?,
        per_fold,
    })
}
