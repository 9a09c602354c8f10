//! One GA-SVM run per (condition, fold, replication).

use alloc::vec::Vec;

use crate::data::{Drug, DrugEncoding};
use crate::fitness::{self, EvaluationResult, FitnessWeights, FoldData};
use crate::ga::{self, Chromosome, Evaluator, GaConfig, GaResult, GeneBounds, Sequential};
use crate::rng::derive_seed;
use crate::svm::SolverConfig;
use crate::{Error, Result};

/// Salt that separates the fold-shuffle stream from run seeds.
const FOLD_STREAM: u64 = 0xF01D;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub conditions: Vec<FitnessWeights>,
    /// `seed` is ignored; every run gets a derived child seed.
    pub ga: GaConfig,
    pub folds: usize,
    /// Explicit shuffle seed for the folds; derived from the master seed when absent.
    pub fold_seed: Option<u64>,
    pub replications_per_fold: usize,
    pub gene_bounds: GeneBounds,
    pub target: Drug,
    pub drug_encoding: DrugEncoding,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    /// Five weight conditions, the default GA, 3 folds with 30 replications,
    /// heroin as target.
    pub fn standard(master_seed: u64) -> Self {
        Self {
            master_seed,
            conditions: FitnessWeights::standard_conditions(),
            ga: GaConfig::default(),
            folds: 3,
            fold_seed: None,
            replications_per_fold: 30,
            gene_bounds: GeneBounds::default_for(30),
            target: Drug::Heroin,
            drug_encoding: DrugEncoding::Binary,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::Empty("conditions"));
        }
        for w in &self.conditions {
            w.validate()?;
        }
        self.ga.validate()?;
        self.solver.validate()?;
        if self.folds < 2 {
            return Err(Error::invalid("folds", "at least two folds are required"));
        }
        if self.replications_per_fold == 0 {
            return Err(Error::invalid("replications_per_fold", "must be at least 1"));
        }
        let genes = self.gene_bounds.len();
        if genes < 3 {
            return Err(Error::invalid(
                "gene_bounds",
                "need at least one feature gene plus cost and gamma",
            ));
        }
        for gene in genes - 2..genes {
            if self.gene_bounds.get(gene).0 <= 0.0 {
                return Err(Error::invalid("gene_bounds", "cost and gamma bounds must be positive"));
            }
        }
        Ok(())
    }

    pub fn fold_seed(&self) -> u64 {
        self.fold_seed
            .unwrap_or_else(|| derive_seed(self.master_seed, &[FOLD_STREAM]))
    }

    /// Every run of the sweep, condition-major.
    pub fn run_keys(&self) -> Vec<RunKey> {
        let mut keys = Vec::with_capacity(self.conditions.len() * self.folds * self.replications_per_fold);
        for condition in 0..self.conditions.len() {
            keys.extend(self.condition_keys(condition));
        }
        keys
    }

    pub fn condition_keys(&self, condition: usize) -> impl Iterator<Item = RunKey> + '_ {
        (0..self.folds).flat_map(move |fold| {
            (0..self.replications_per_fold).map(move |replication| RunKey {
                condition,
                fold,
                replication,
            })
        })
    }

    pub fn run_seed(&self, key: RunKey) -> u64 {
        derive_seed(
            self.master_seed,
            &[key.condition as u64, key.fold as u64, key.replication as u64],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunKey {
    pub condition: usize,
    pub fold: usize,
    pub replication: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub key: RunKey,
    pub weights: FitnessWeights,
    pub seed: u64,
    pub ga: GaResult,
    /// Evaluation of `ga.best_chromosome` on the run's fold.
    pub evaluation: EvaluationResult,
    pub duration_ms: u64,
}

/// Fitness closure for one fold and weight condition.
pub fn fitness_fn<'a>(
    fold: &'a FoldData,
    weights: FitnessWeights,
    solver: &'a SolverConfig,
) -> impl Fn(&Chromosome) -> Result<f64> + Sync + 'a {
    move |c: &Chromosome| fitness::evaluate(c, fold, &weights, solver).map(|r| r.fitness)
}

/// Runs the GA for `key` on the calling thread.
pub fn execute_run(fold: &FoldData, cfg: &ExperimentConfig, key: RunKey) -> Result<RunRecord> {
    let weights = condition(cfg, key)?;
    execute_run_with(fold, cfg, key, &Sequential(fitness_fn(fold, weights, &cfg.solver)))
}

/// Runs the GA for `key` with a caller-supplied evaluator, which must score
/// chromosomes with [`fitness_fn`] for the same fold and condition.
pub fn execute_run_with(
    fold: &FoldData,
    cfg: &ExperimentConfig,
    key: RunKey,
    evaluator: &impl Evaluator,
) -> Result<RunRecord> {
    let weights = condition(cfg, key)?;
    if cfg.gene_bounds.len() != fold.feature_count() + 2 {
        return Err(Error::DimensionMismatch {
            expected: fold.feature_count() + 2,
            found: cfg.gene_bounds.len(),
        });
    }
    let seed = cfg.run_seed(key);
    let ga_cfg = GaConfig { seed, ..cfg.ga.clone() };
    let result = ga::evolve(&ga_cfg, &cfg.gene_bounds, evaluator)?;
    let evaluation = fitness::evaluate(&result.best_chromosome, fold, &weights, &cfg.solver)?;
    Ok(RunRecord {
        key,
        weights,
        seed,
        ga: result,
        evaluation,
        duration_ms: 0,
    })
}

fn condition(cfg: &ExperimentConfig, key: RunKey) -> Result<FitnessWeights> {
    cfg.conditions
        .get(key.condition)
        .copied()
        .ok_or_else(|| Error::invalid("condition", alloc::format!("index {} out of range", key.condition)))
}

/// Re-evaluates the stored best chromosome and compares with the stored metrics.
pub fn verify_record(record: &RunRecord, fold: &FoldData, solver: &SolverConfig) -> Result<bool> {
    let again = fitness::evaluate(&record.ga.best_chromosome, fold, &record.weights, solver)?;
    Ok(again == record.evaluation)
}
