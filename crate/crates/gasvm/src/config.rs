//! TOML experiment configuration. Every field has a default, and the
//! defaults reproduce the published heroin sweep.

use std::path::{Path, PathBuf};

use gasvm_core::data::{feature_layout, Drug, DrugEncoding};
use gasvm_core::experiment::ExperimentConfig;
use gasvm_core::fitness::FitnessWeights;
use gasvm_core::ga::{GaConfig, GeneBounds};
use gasvm_core::svm::{SolverConfig, SvmParams};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Error, Result};

pub const DEFAULT_SEED: u64 = 20_190_715;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub target: String,
    pub drug_encoding: DrugEncoding,
    pub replications_per_fold: usize,
    /// Data file; the command line `--data` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub folds: FoldsSection,
    pub ga: GaSection,
    pub bounds: BoundsSection,
    pub solver: SolverConfig,
    pub baseline: BaselineSection,
    pub conditions: Vec<ConditionSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldsSection {
    pub k: usize,
    /// Shuffle seed for the folds; derived from `seed` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population_size: usize,
    pub max_generations: usize,
    pub elitism_count: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub stagnation_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub feature: (f64, f64),
    pub cost: (f64, f64),
    pub gamma: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub cost: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSection {
    pub accuracy: f64,
    pub features: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            target: "heroin".into(),
            drug_encoding: DrugEncoding::Binary,
            replications_per_fold: 30,
            data: None,
            folds: FoldsSection::default(),
            ga: GaSection::default(),
            bounds: BoundsSection::default(),
            solver: SolverConfig::default(),
            baseline: BaselineSection::default(),
            conditions: FitnessWeights::standard_conditions()
                .into_iter()
                .map(|w| ConditionSection {
                    accuracy: w.accuracy,
                    features: w.features,
                })
                .collect(),
        }
    }
}

impl Default for FoldsSection {
    fn default() -> Self {
        Self { k: 3, seed: None }
    }
}

impl Default for GaSection {
    fn default() -> Self {
        let ga = GaConfig::default();
        Self {
            population_size: ga.population_size,
            max_generations: ga.max_generations,
            elitism_count: ga.elitism_count,
            crossover_rate: ga.crossover_rate,
            mutation_rate: ga.mutation_rate,
            stagnation_limit: ga.stagnation_limit,
        }
    }
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            feature: (0.0, 1.0),
            cost: (1.0, 100.0),
            gamma: (0.01, 10.0),
        }
    }
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self { cost: 1.0, gamma: 0.33 }
    }
}

fn field(name: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{name}: {e}"))
}

impl Config {
    /// Parses TOML, reporting the offending field path on type errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner().message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn target(&self) -> Result<Drug> {
        self.target.parse().map_err(|e| field("target", e))
    }

    pub fn baseline_params(&self) -> Result<SvmParams> {
        SvmParams::new(self.baseline.cost, self.baseline.gamma).map_err(|e| field("baseline", e))
    }

    /// Checks every field and names the first one that is out of range.
    pub fn validate(&self) -> Result<()> {
        self.experiment()?;
        self.baseline_params()?;
        Ok(())
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let target = self.target()?;
        let conditions = self
            .conditions
            .iter()
            .enumerate()
            .map(|(i, c)| {
                FitnessWeights::new(c.accuracy, c.features).map_err(|e| field(&format!("conditions[{i}]"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        if conditions.is_empty() {
            return Err(field("conditions", "at least one condition is required"));
        }
        let g = &self.ga;
        let ga = GaConfig {
            population_size: g.population_size,
            max_generations: g.max_generations,
            elitism_count: g.elitism_count,
            crossover_rate: g.crossover_rate,
            mutation_rate: g.mutation_rate,
            stagnation_limit: g.stagnation_limit,
            seed: 0,
        };
        ga.validate().map_err(|e| field("ga", e))?;
        self.solver.validate().map_err(|e| field("solver", e))?;

        let (lo, hi) = self.bounds.feature;
        if !(lo < 0.5 && hi >= 0.5) {
            return Err(field(
                "bounds.feature",
                "interval must straddle the 0.5 selection cutoff",
            ));
        }
        for (name, (lo, hi)) in [("bounds.cost", self.bounds.cost), ("bounds.gamma", self.bounds.gamma)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(field(name, format!("need 0 < low <= high, got [{lo}, {hi}]")));
            }
        }
        let (drugs, attrs) = feature_layout(target);
        let features = drugs.len() + attrs.len();
        let mut bounds = vec![self.bounds.feature; features];
        bounds.extend([self.bounds.cost, self.bounds.gamma]);
        let gene_bounds = GeneBounds::new(bounds).map_err(|e| field("bounds", e))?;

        if self.folds.k < 2 {
            return Err(field("folds.k", "at least 2 folds are required"));
        }
        if self.replications_per_fold == 0 {
            return Err(field("replications_per_fold", "must be at least 1"));
        }
        let cfg = ExperimentConfig {
            master_seed: self.seed,
            conditions,
            ga,
            folds: self.folds.k,
            fold_seed: self.folds.seed,
            replications_per_fold: self.replications_per_fold,
            gene_bounds,
            target,
            drug_encoding: self.drug_encoding,
            solver: self.solver,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}
