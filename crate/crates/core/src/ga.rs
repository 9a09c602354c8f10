//! Real-coded genetic algorithm.
//!
//! Generational scheme with elitism: the `elitism_count` best individuals are
//! copied unchanged, the remaining slots are filled with children produced by
//! linear-rank selection, whole-arithmetic crossover and uniform-redraw
//! mutation. The run stops at `max_generations` or once the best fitness has
//! not strictly improved for `stagnation_limit` consecutive generations.
//!
//! All randomness comes from one generator seeded with [`GaConfig::seed`] and
//! is consumed in a fixed order, so results do not depend on how the
//! [`Evaluator`] schedules its work.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Chromosome {
    pub genes: Vec<f64>,
}

impl Chromosome {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }
}

/// Closed interval per gene.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneBounds {
    bounds: Vec<(f64, f64)>,
}

impl GeneBounds {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Empty("gene bounds"));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(
                    "gene_bounds",
                    format!("[{lo}, {hi}] is not a proper interval"),
                ));
            }
        }
        Ok(Self { bounds })
    }

    /// `features` mask genes in `[0, 1]`, then the cost gene, then the
    /// kernel-width gene.
    pub fn for_feature_selection(features: usize, cost: (f64, f64), gamma: (f64, f64)) -> Result<Self> {
        let mut bounds = alloc::vec![(0.0, 1.0); features];
        bounds.push(cost);
        bounds.push(gamma);
        Self::new(bounds)
    }

    /// Cost in `[1, 100]`, gamma in `[0.01, 10]`.
    pub fn default_for(features: usize) -> Self {
        Self::for_feature_selection(features, (1.0, 100.0), (0.01, 10.0)).expect("constant bounds are valid")
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn get(&self, gene: usize) -> (f64, f64) {
        self.bounds[gene]
    }

    pub fn as_slice(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, c: &Chromosome) -> bool {
        c.len() == self.len()
            && c.genes
                .iter()
                .zip(&self.bounds)
                .all(|(&g, &(lo, hi))| lo <= g && g <= hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub elitism_count: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub stagnation_limit: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 100,
            elitism_count: 10,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            stagnation_limit: 20,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population_size", "must be at least 2"));
        }
        if self.elitism_count == 0 || self.elitism_count >= self.population_size {
            return Err(Error::invalid(
                "elitism_count",
                format!(
                    "must lie strictly between 0 and population_size ({})",
                    self.population_size
                ),
            ));
        }
        if self.max_generations == 0 {
            return Err(Error::invalid("max_generations", "must be at least 1"));
        }
        if self.stagnation_limit == 0 {
            return Err(Error::invalid("stagnation_limit", "must be at least 1"));
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid(name, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationStats {
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaResult {
    pub best_chromosome: Chromosome,
    pub best_fitness: f64,
    pub generations_run: usize,
    /// One entry per generation, the initial population included.
    pub history: Vec<GenerationStats>,
}

/// Scores a batch of chromosomes. Implementations may evaluate in any order
/// or concurrently but must return results aligned with the input.
pub trait Evaluator {
    fn evaluate(&self, population: &[Chromosome]) -> Vec<Result<f64>>;
}

/// Evaluates one chromosome after another on the calling thread.
#[derive(Debug, Clone, Copy)]
pub struct Sequential<F>(pub F);

impl<F> Evaluator for Sequential<F>
where
    F: Fn(&Chromosome) -> Result<f64>,
{
    fn evaluate(&self, population: &[Chromosome]) -> Vec<Result<f64>> {
        population.iter().map(&self.0).collect()
    }
}

fn uniform_in(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn initialize_population(cfg: &GaConfig, bounds: &GeneBounds, rng: &mut Rng) -> Vec<Chromosome> {
    (0..cfg.population_size)
        .map(|_| Chromosome::new(bounds.as_slice().iter().map(|&b| uniform_in(rng, b)).collect()))
        .collect()
}

/// Draws `pairs` parent pairs by linear rank: the individual of rank `r`
/// (1 = worst) is picked with probability proportional to `r`. Ties in
/// fitness are ranked in random order. Sampling is with replacement.
pub fn select_parents(fitnesses: &[f64], pairs: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    let n = fitnesses.len();
    if n < 2 {
        return Err(Error::invalid(
            "population",
            "rank selection needs at least two individuals",
        ));
    }
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.shuffle(rng);
    by_rank.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));

    // cumulative weights 1, 1+2, ..., n(n+1)/2
    let total = (n * (n + 1) / 2) as u64;
    let draw = |rng: &mut Rng| {
        let u = rng.random_range(0..total);
        // smallest r with r(r+1)/2 > u
        let mut r = ((libm::sqrt(8.0 * u as f64 + 1.0) - 1.0) / 2.0) as u64;
        while r * (r + 1) / 2 <= u {
            r += 1;
        }
        while r > 1 && (r - 1) * r / 2 > u {
            r -= 1;
        }
        by_rank[(r - 1) as usize]
    };
    Ok((0..pairs).map(|_| (draw(rng), draw(rng))).collect())
}

/// `c1 = a p1 + (1 - a) p2`, `c2 = (1 - a) p1 + a p2`, gene by gene. Results are
/// clamped to the parents' hull to absorb rounding.
pub fn blend(p1: &Chromosome, p2: &Chromosome, a: f64) -> (Chromosome, Chromosome) {
    let (c1, c2) = p1
        .genes
        .iter()
        .zip(&p2.genes)
        .map(|(&x, &y)| {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let u = (a * x + (1.0 - a) * y).clamp(lo, hi);
            let v = ((1.0 - a) * x + a * y).clamp(lo, hi);
            (u, v)
        })
        .unzip();
    (Chromosome::new(c1), Chromosome::new(c2))
}

/// Whole-arithmetic crossover with a fresh weight, applied with probability
/// `rate`; otherwise the parents are copied.
pub fn crossover(p1: &Chromosome, p2: &Chromosome, rate: f64, rng: &mut Rng) -> (Chromosome, Chromosome) {
    if rng.random::<f64>() < rate {
        let a = rng.random::<f64>();
        blend(p1, p2, a)
    } else {
        (p1.clone(), p2.clone())
    }
}

/// Redraws each gene uniformly within its bounds with probability `rate`.
pub fn mutate(mut c: Chromosome, rate: f64, bounds: &GeneBounds, rng: &mut Rng) -> Chromosome {
    for (g, &b) in c.genes.iter_mut().zip(bounds.as_slice()) {
        if rng.random::<f64>() < rate {
            *g = uniform_in(rng, b);
        }
    }
    c
}

fn score(evaluator: &impl Evaluator, batch: &[Chromosome], generation: usize) -> Result<Vec<f64>> {
    let results = evaluator.evaluate(batch);
    if results.len() != batch.len() {
        return Err(Error::LengthMismatch {
            left: batch.len(),
            right: results.len(),
        });
    }
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| match r {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(value) => Err(Error::NonFiniteFitness {
                generation,
                index,
                value,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

fn stats(fitness: &[f64]) -> GenerationStats {
    let best = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
    GenerationStats { best, mean }
}

/// Runs the GA to termination and returns the best individual seen.
pub fn evolve(cfg: &GaConfig, bounds: &GeneBounds, evaluator: &impl Evaluator) -> Result<GaResult> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);

    let mut population = initialize_population(cfg, bounds, &mut rng);
    let mut fitness = score(evaluator, &population, 1)?;
    let mut history = alloc::vec![stats(&fitness)];

    let argmax = |f: &[f64]| {
        // first index among equals
        f.iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > f[best] { i } else { best })
    };
    let mut best_idx = argmax(&fitness);
    let mut best = (population[best_idx].clone(), fitness[best_idx]);
    let mut stale = 0;

    let children_needed = cfg.population_size - cfg.elitism_count;
    while history.len() < cfg.max_generations && stale < cfg.stagnation_limit {
        let generation = history.len() + 1;

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));

        let parents = select_parents(&fitness, children_needed.div_ceil(2), &mut rng)?;
        let mut children = Vec::with_capacity(children_needed + 1);
        for (a, b) in parents {
            let (c1, c2) = crossover(&population[a], &population[b], cfg.crossover_rate, &mut rng);
            children.push(mutate(c1, cfg.mutation_rate, bounds, &mut rng));
            children.push(mutate(c2, cfg.mutation_rate, bounds, &mut rng));
        }
        children.truncate(children_needed);
        let child_fitness = score(evaluator, &children, generation)?;

        let mut next = Vec::with_capacity(cfg.population_size);
        let mut next_fitness = Vec::with_capacity(cfg.population_size);
        for &e in &order[..cfg.elitism_count] {
            next.push(population[e].clone());
            next_fitness.push(fitness[e]);
        }
        next.extend(children);
        next_fitness.extend(child_fitness);
        population = next;
        fitness = next_fitness;

        history.push(stats(&fitness));
        best_idx = argmax(&fitness);
        if fitness[best_idx] > best.1 {
            best = (population[best_idx].clone(), fitness[best_idx]);
            stale = 0;
        } else {
            stale += 1;
        }
    }

    Ok(GaResult {
        best_chromosome: best.0,
        best_fitness: best.1,
        generations_run: history.len(),
        history,
    })
}
