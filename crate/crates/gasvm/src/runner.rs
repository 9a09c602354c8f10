//! Sweep execution on a rayon pool. Runs execute concurrently; a single
//! writer on the calling thread persists results as they arrive.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use gasvm_core::data::{build_matrix, Dataset, Record};
use gasvm_core::experiment::{execute_run_with, fitness_fn, ExperimentConfig, RunKey, RunRecord};
use gasvm_core::fitness::FoldData;
use gasvm_core::folds::{stratified_folds, FoldSplit};
use gasvm_core::ga::{Chromosome, Evaluator};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::store::{file_stem, RunStore};

/// Scores a population with rayon. Results keep input order, so a GA run
/// is bit-identical to one using `Sequential`.
#[derive(Debug, Clone, Copy)]
pub struct Parallel<F>(pub F);

impl<F> Evaluator for Parallel<F>
where
    F: Fn(&Chromosome) -> gasvm_core::Result<f64> + Sync,
{
    fn evaluate(&self, population: &[Chromosome]) -> Vec<gasvm_core::Result<f64>> {
        population.par_iter().map(&self.0).collect()
    }
}

/// Dataset, fold assignment and per-fold matrices for one experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub split: FoldSplit,
    pub folds: Vec<FoldData>,
}

pub fn prepare(records: &[Record], exp: &ExperimentConfig) -> Result<Prepared> {
    let dataset = build_matrix(records, exp.target, exp.drug_encoding);
    let split = stratified_folds(&dataset.y, exp.folds, exp.fold_seed())?;
    let folds = (0..split.k)
        .map(|f| FoldData::from_split(&dataset, &split, f))
        .collect::<gasvm_core::Result<Vec<_>>>()?;
    Ok(Prepared { dataset, split, folds })
}

pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Store(format!("cannot start worker pool: {e}")))
}

/// Runs one key with population-level parallelism inside the current pool.
pub fn run_one(prepared: &Prepared, exp: &ExperimentConfig, key: RunKey) -> Result<RunRecord> {
    let fold = prepared
        .folds
        .get(key.fold)
        .ok_or_else(|| Error::Store(format!("fold {} does not exist", key.fold)))?;
    let weights = *exp
        .conditions
        .get(key.condition)
        .ok_or_else(|| Error::Store(format!("condition {} does not exist", key.condition)))?;
    let start = Instant::now();
    let mut record = execute_run_with(fold, exp, key, &Parallel(fitness_fn(fold, weights, &exp.solver)))?;
    record.duration_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSummary {
    pub completed: usize,
    pub skipped: usize,
    pub failed: Vec<(RunKey, String)>,
}

/// Runs every key of `exp` that has no record in `store` yet.
pub fn run_sweep(
    store: &RunStore,
    prepared: &Prepared,
    exp: &ExperimentConfig,
    pool: &rayon::ThreadPool,
) -> Result<SweepSummary> {
    let done = store.completed()?;
    let all = exp.run_keys();
    let pending: Vec<RunKey> = all.iter().copied().filter(|k| !done.contains(k)).collect();
    let mut summary = SweepSummary {
        skipped: all.len() - pending.len(),
        ..SweepSummary::default()
    };
    if summary.skipped > 0 {
        log::info!("{} of {} runs already recorded", summary.skipped, all.len());
    }
    if pending.is_empty() {
        return Ok(summary);
    }

    let (tx, rx) = mpsc::channel::<(RunKey, Result<RunRecord>)>();
    // set when the writer gives up, so workers stop taking new runs
    let cancelled = AtomicBool::new(false);
    let outcome = std::thread::scope(|s| -> Result<()> {
        s.spawn(|| {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, &key| {
                    if cancelled.load(Ordering::Relaxed) {
                        return;
                    }
                    // the receiver outlives every sender
                    let _ = tx.send((key, run_one(prepared, exp, key)));
                });
            });
        });
        let total = pending.len();
        let result = rx.iter().enumerate().try_for_each(|(n, (key, outcome))| -> Result<()> {
            match outcome {
                Ok(record) => {
                    store.write_record(&record, &prepared.dataset.feature_names)?;
                    summary.completed += 1;
                    log::info!(
                        "[{}/{total}] {} fitness {:.4} sens {:.3} spec {:.3} features {} ({} gens, {:.1} s)",
                        n + 1,
                        file_stem(key),
                        record.evaluation.fitness,
                        record.evaluation.sensitivity,
                        record.evaluation.specificity,
                        record.evaluation.feature_count,
                        record.ga.generations_run,
                        record.duration_ms as f64 / 1000.0,
                    );
                }
                Err(e) => {
                    let reason = e.to_string();
                    log::warn!("[{}/{total}] {} failed: {reason}", n + 1, file_stem(key));
                    store.write_failure(key, &reason)?;
                    summary.failed.push((key, reason));
                }
            }
            Ok(())
        });
        if result.is_err() {
            cancelled.store(true, Ordering::Relaxed);
        }
        result
    });
    outcome?;
    summary.failed.sort_by_key(|f| f.0);
    Ok(summary)
}
