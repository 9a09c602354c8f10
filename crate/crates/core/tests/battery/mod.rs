//! Checks of the library against the references in `oracle`. Each returns a
//! one-line summary on success and the first violation on failure.
#![allow(dead_code)]

use std::sync::atomic::{AtomicBool, Ordering};

use gasvm_core::data::UserFlag;
use gasvm_core::fitness::{self, FitnessWeights, EMPTY_MASK_FITNESS};
use gasvm_core::ga::{self, Chromosome, Evaluator, GaConfig, GaResult, GeneBounds, Sequential};
use gasvm_core::stats::{self, Sidedness};
use gasvm_core::svm::{self, SolverConfig, SvmParams};
use gasvm_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{self, DualQp};

pub type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub struct SolverInstance {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<f64>,
    pub cost: f64,
    pub gamma: f64,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> SolverInstance {
    let n = rng.random_range(2..=12);
    let points: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let mut labels: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    labels[0] = 1.0;
    labels[1] = -1.0;
    SolverInstance {
        points,
        labels,
        cost: rng.random_range(0.5..=50.0),
        gamma: rng.random_range(0.1..=5.0),
    }
}

/// Trains through the public API and compares with the reference QP.
pub fn solver_oracle(instances: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_gap = 0.0f64;
    let mut worst_balance = 0.0f64;
    let mut sign_checks = 0usize;
    for case in 0..instances {
        let inst = random_instance(&mut rng);
        let qp = DualQp::new(&inst.points, &inst.labels, inst.cost, inst.gamma);
        let reference = qp.solve(20_000);
        let ref_obj = qp.objective(&reference);

        let x = Matrix::from_rows(&inst.points, 2).unwrap();
        let y: Vec<UserFlag> = inst.labels.iter().map(|&l| UserFlag::from(l > 0.0)).collect();
        let model = svm::train(
            &x,
            &y,
            SvmParams::new(inst.cost, inst.gamma).unwrap(),
            &SolverConfig::default(),
        )
        .map_err(|e| format!("case {case}: training failed: {e}"))?;

        // recover alpha per training row (points are distinct almost surely)
        let mut alpha = vec![0.0; inst.points.len()];
        for (sv, coef) in model.support_vectors.iter_rows().zip(&model.dual_coefs) {
            let i = inst.points.iter().position(|p| p.as_slice() == sv).unwrap();
            alpha[i] = coef.abs();
            ensure(coef.signum() == inst.labels[i], || {
                format!("case {case}: coefficient sign mismatch")
            })?;
        }
        for &a in &alpha {
            ensure((0.0..=inst.cost * (1.0 + 1e-12)).contains(&a), || {
                format!("case {case}: alpha {a} outside [0, {}]", inst.cost)
            })?;
        }
        let balance: f64 = alpha.iter().zip(&inst.labels).map(|(a, y)| a * y).sum();
        ensure(balance.abs() <= 1e-3, || {
            format!("case {case}: |sum alpha y| = {balance:e}")
        })?;
        worst_balance = worst_balance.max(balance.abs());

        let obj = qp.objective(&alpha);
        ensure((obj - model.dual_objective).abs() <= 1e-9 * (1.0 + obj.abs()), || {
            format!(
                "case {case}: reported objective {} vs recomputed {obj}",
                model.dual_objective
            )
        })?;
        let gap = (obj - ref_obj).abs();
        ensure(gap <= 1e-3, || {
            format!("case {case}: objective {obj} vs reference {ref_obj}")
        })?;
        worst_gap = worst_gap.max(gap);

        // decision signs away from the boundary, when the reference bias is pinned
        let tol = 1e-6 * inst.cost;
        if reference.iter().any(|&a| a > tol && a < inst.cost - tol) {
            let b = qp.bias(&reference);
            for gx in 0..=20 {
                for gy in 0..=20 {
                    let p = [-2.0 + 0.2 * gx as f64, -2.0 + 0.2 * gy as f64];
                    let f: f64 = (0..inst.points.len())
                        .map(|i| reference[i] * inst.labels[i] * oracle::rbf(&inst.points[i], &p, inst.gamma))
                        .sum::<f64>()
                        + b;
                    if f.abs() < 0.1 {
                        continue;
                    }
                    let ours = model.decision_value(&p).unwrap();
                    ensure(ours.signum() == f.signum(), || {
                        format!("case {case}: sign differs at {p:?}")
                    })?;
                    sign_checks += 1;
                }
            }
        }
    }
    Ok(format!(
        "{instances} instances, max objective gap {worst_gap:.2e}, max |sum alpha y| {worst_balance:.2e}, {sign_checks} sign checks"
    ))
}

/// XOR with C = 3, gamma = 1 against a 0.01-step grid over the dual.
pub fn xor_grid() -> Outcome {
    let points = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
    let labels = [1.0, 1.0, -1.0, -1.0];
    let qp = DualQp::new(&points, &labels, 3.0, 1.0);
    let grid = oracle::xor_grid_minimum(&qp, 300);
    let x = Matrix::from_rows(&points, 2).unwrap();
    let y: Vec<UserFlag> = labels.iter().map(|&l| UserFlag::from(l > 0.0)).collect();
    let model = svm::train(&x, &y, SvmParams::new(3.0, 1.0).unwrap(), &SolverConfig::default()).unwrap();
    let obj = model.dual_objective;
    ensure(obj <= grid + 1e-9, || format!("solver {obj} above grid minimum {grid}"))?;
    ensure(grid - obj <= 5e-3, || {
        format!("solver {obj} far below grid minimum {grid}")
    })?;
    Ok(format!("objective {obj:.6}, grid minimum {grid:.6}"))
}

/// Chromosome from mask genes plus cost and gamma.
pub fn genes(mask: &[f64], cost: f64, gamma: f64) -> Chromosome {
    let mut g = mask.to_vec();
    g.extend([cost, gamma]);
    Chromosome::new(g)
}

pub fn fitness_battery() -> Outcome {
    const TOL: f64 = 1e-12;
    let close = |a: f64, b: f64| (a - b).abs() <= TOL;

    // genotype (0.8, 0.2, 0.6, ..., 42, 2.33) -> phenotype (1, 0, 1, ..., 42, 2.33)
    let mut mask = vec![0.3; 30];
    mask[..3].copy_from_slice(&[0.8, 0.2, 0.6]);
    let spec = fitness::decode(&genes(&mask, 42.0, 2.33), 30).map_err(|e| e.to_string())?;
    ensure(spec.feature_mask[..3] == [true, false, true], || "mask prefix".into())?;
    ensure(spec.feature_count() == 2, || "selected count".into())?;
    ensure(spec.params.cost == 42.0 && spec.params.gamma == 2.33, || {
        "parameters not copied".into()
    })?;

    let mut edge = vec![0.0; 30];
    edge[7] = 0.5;
    edge[8] = 0.5 - 1e-12;
    let spec = fitness::decode(&genes(&edge, 1.0, 1.0), 30).map_err(|e| e.to_string())?;
    ensure(spec.selected().collect::<Vec<_>>() == [7], || "cutoff handling".into())?;

    // empty mask sentinel, no model trained
    let fold = fitness::FoldData {
        feature_names: vec!["a".into(), "b".into()],
        train_x: Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]], 2).unwrap(),
        train_y: vec![UserFlag::NonUser, UserFlag::User],
        test_x: Matrix::from_rows(&[[0.0, 0.0]], 2).unwrap(),
        test_y: vec![UserFlag::NonUser],
    };
    let w = FitnessWeights::new(0.8, 0.2).unwrap();
    let empty = fitness::evaluate(&genes(&[0.1, 0.4], 5.0, 1.0), &fold, &w, &SolverConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(
        empty.fitness == EMPTY_MASK_FITNESS && EMPTY_MASK_FITNESS == -1.0,
        || "sentinel".into(),
    )?;
    ensure(empty.feature_count == 0, || "sentinel feature count".into())?;

    let cases: [(f64, f64, f64, usize, f64); 6] = [
        (0.8, 0.9, 0.8, 4, 0.8 * 0.72 + 0.2 * 0.25),
        (0.8, 0.9, 0.8, 4, 0.626),
        (0.5, 1.0, 1.0, 1, 1.0),
        (0.8, 0.725, 0.934, 7, 0.8 * 0.67715 + 0.2 / 7.0),
        (0.2, 0.5, 0.5, 2, 0.2 * 0.25 + 0.8 * 0.5),
        (0.35, 0.0, 1.0, 3, 0.65 / 3.0),
    ];
    for (wa, se, sp, n, expected) in cases {
        let w = FitnessWeights::new(wa, 1.0 - wa).map_err(|e| e.to_string())?;
        let acc = fitness::accuracy(se, sp).map_err(|e| e.to_string())?;
        ensure(close(acc, se * sp), || format!("accuracy({se}, {sp})"))?;
        let got = w.score(acc, n);
        ensure(close(got, expected), || {
            format!("score {got} vs {expected} for w_a {wa}")
        })?;
    }
    ensure(close(fitness::accuracy(0.725, 0.934).unwrap(), 0.67715), || {
        "0.725 * 0.934".into()
    })?;
    Ok(format!("decode, sentinel and {} score cases within 1e-12", cases.len()))
}

/// Deterministic sample pairs of assorted sizes, locations and spreads.
pub fn welch_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E57);
    let mut draw = |n: usize, loc: f64, scale: f64| -> Vec<f64> {
        (0..n)
            .map(|_| loc + scale * (rng.random::<f64>() * 2.0 - 1.0))
            .collect()
    };
    let shapes: [(usize, f64, f64, usize, f64, f64); 20] = [
        (2, 0.0, 1.0, 2, 0.5, 1.0),
        (3, 0.7, 0.1, 4, 0.6, 0.2),
        (5, 0.6, 0.05, 5, 0.62, 0.05),
        (10, 0.725, 0.1, 10, 0.36, 0.2),
        (90, 0.725, 0.15, 90, 0.71, 0.15),
        (90, 0.6, 0.2, 90, 0.2, 0.3),
        (15, 0.0, 1.0, 30, 0.0, 10.0),
        (30, 100.0, 1.0, 2, 101.0, 0.1),
        (4, -5.0, 2.0, 40, -4.0, 0.5),
        (7, 1.0, 1e-3, 8, 1.0005, 1e-3),
        (20, 3.0, 1.0, 3, -3.0, 1.0),
        (6, 0.5, 0.5, 6, 0.5, 0.5),
        (50, 0.9, 0.01, 60, 0.8, 0.1),
        (12, 1e3, 50.0, 9, 1.1e3, 80.0),
        (2, 0.1, 0.05, 25, 0.4, 0.3),
        (8, 0.0, 0.2, 8, 2.0, 0.2),
        (33, 0.25, 0.25, 17, 0.3, 0.05),
        (3, 10.0, 3.0, 3, 0.0, 3.0),
        (45, 0.0, 1.0, 45, 0.01, 1.0),
        (11, -0.3, 0.4, 13, 0.3, 0.6),
    ];
    shapes
        .iter()
        .map(|&(na, la, sa, nb, lb, sb)| (draw(na, la, sa), draw(nb, lb, sb)))
        .collect()
}

pub fn welch_battery() -> Outcome {
    let pairs = welch_pairs();
    let mut worst = 0.0f64;
    for (i, (a, b)) in pairs.iter().enumerate() {
        let ours = stats::welch_t_test(a, b, Sidedness::TwoSided).map_err(|e| format!("pair {i}: {e}"))?;
        let reference = oracle::welch(a, b);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        let errs = [
            rel(ours.t_statistic, reference.t),
            rel(ours.degrees_of_freedom, reference.df),
            (ours.p_value - reference.p_two_sided).abs(),
        ];
        let max = errs.iter().copied().fold(0.0, f64::max);
        ensure(max <= 1e-6, || {
            format!(
                "pair {i}: (t, df, p) = ({}, {}, {}) vs ({}, {}, {})",
                ours.t_statistic,
                ours.degrees_of_freedom,
                ours.p_value,
                reference.t,
                reference.df,
                reference.p_two_sided
            )
        })?;
        worst = worst.max(max);
    }
    Ok(format!("{} pairs, max deviation {worst:.2e}", pairs.len()))
}

/// Swapping samples negates t; affine rescaling changes nothing.
pub fn welch_invariances(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let na = rng.random_range(2..40);
        let nb = rng.random_range(2..40);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(-0.5..1.5)).collect();
        let scale = rng.random_range(0.01..100.0);
        let shift = rng.random_range(-50.0..50.0);
        let ab = stats::welch_t_test(&a, &b, Sidedness::TwoSided).map_err(|e| e.to_string())?;
        let ba = stats::welch_t_test(&b, &a, Sidedness::TwoSided).map_err(|e| e.to_string())?;
        let sa: Vec<f64> = a.iter().map(|x| x * scale + shift).collect();
        let sb: Vec<f64> = b.iter().map(|x| x * scale + shift).collect();
        let scaled = stats::welch_t_test(&sa, &sb, Sidedness::TwoSided).map_err(|e| e.to_string())?;

        let near = |x: f64, y: f64| (x - y).abs() <= 1e-8 * x.abs().max(1.0);
        ensure(near(ab.t_statistic, -ba.t_statistic), || {
            format!("trial {trial}: t not antisymmetric")
        })?;
        ensure(near(ab.degrees_of_freedom, ba.degrees_of_freedom), || {
            format!("trial {trial}: df not symmetric")
        })?;
        ensure(near(ab.p_value, ba.p_value), || {
            format!("trial {trial}: p not symmetric")
        })?;
        ensure(near(ab.t_statistic, scaled.t_statistic), || {
            format!("trial {trial}: t changes under scaling")
        })?;
        ensure(near(ab.degrees_of_freedom, scaled.degrees_of_freedom), || {
            format!("trial {trial}: df changes under scaling")
        })?;
        ensure((ab.p_value - scaled.p_value).abs() <= 1e-8, || {
            format!("trial {trial}: p changes under scaling")
        })?;
    }
    Ok(format!("{trials} randomized trials"))
}

/// A smooth multimodal function over the genes.
#[derive(Clone)]
pub struct Landscape {
    weights: Vec<f64>,
    freqs: Vec<f64>,
    phases: Vec<f64>,
}

impl Landscape {
    pub fn random(genes: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            weights: (0..genes).map(|_| rng.random_range(-1.0..1.0)).collect(),
            freqs: (0..genes).map(|_| rng.random_range(0.5..6.0)).collect(),
            phases: (0..genes).map(|_| rng.random_range(0.0..6.3)).collect(),
        }
    }

    pub fn value(&self, c: &Chromosome) -> f64 {
        c.genes
            .iter()
            .enumerate()
            .map(|(i, g)| self.weights[i] * (self.freqs[i] * g + self.phases[i]).sin())
            .sum()
    }
}

fn small_ga(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 24,
        elitism_count: 3,
        max_generations: 40,
        stagnation_limit: 15,
        seed,
        ..GaConfig::default()
    }
}

fn history_is_monotone(r: &GaResult) -> bool {
    r.history.windows(2).all(|w| w[1].best >= w[0].best)
        && r.history.len() == r.generations_run
        && r.history.iter().map(|h| h.best).fold(f64::NEG_INFINITY, f64::max) == r.best_fitness
}

/// Evaluates chunks of the population on scoped threads.
pub struct Threaded<F>(pub F, pub usize);

impl<F> Evaluator for Threaded<F>
where
    F: Fn(&Chromosome) -> gasvm_core::Result<f64> + Sync,
{
    fn evaluate(&self, population: &[Chromosome]) -> Vec<gasvm_core::Result<f64>> {
        let chunk = population.len().div_ceil(self.1.max(1)).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = population
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(&self.0).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        })
    }
}

pub fn ga_monotone(landscapes: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in 0..landscapes {
        let genes = rng.random_range(2..12);
        let land = Landscape::random(genes, &mut rng);
        let bounds = GeneBounds::new(vec![(-2.0, 2.0); genes]).unwrap();
        let r = ga::evolve(
            &small_ga(l as u64),
            &bounds,
            &Sequential(|c: &Chromosome| Ok(land.value(c))),
        )
        .map_err(|e| e.to_string())?;
        ensure(history_is_monotone(&r), || {
            format!("landscape {l}: best fitness decreased")
        })?;
        ensure(land.value(&r.best_chromosome) == r.best_fitness, || {
            format!("landscape {l}: best chromosome does not score best_fitness")
        })?;
    }
    Ok(format!("{landscapes} landscapes"))
}

pub fn ga_bounds_closure(seed: u64) -> Outcome {
    let mut bounds: Vec<(f64, f64)> = vec![(0.0, 1.0); 30];
    bounds.extend([(1.0, 100.0), (0.01, 10.0)]);
    let bounds = GeneBounds::new(bounds).unwrap();
    let escaped = AtomicBool::new(false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let land = Landscape::random(32, &mut rng);
    let cfg = GaConfig {
        population_size: 30,
        elitism_count: 3,
        max_generations: 100,
        stagnation_limit: 1_000,
        mutation_rate: 0.3,
        seed,
        ..GaConfig::default()
    };
    let eval = |c: &Chromosome| {
        if !bounds.contains(c) {
            escaped.store(true, Ordering::Relaxed);
        }
        Ok(land.value(c))
    };
    let r = ga::evolve(&cfg, &bounds, &Sequential(eval)).map_err(|e| e.to_string())?;
    ensure(r.generations_run == 100, || {
        format!("ran {} generations", r.generations_run)
    })?;
    ensure(!escaped.load(Ordering::Relaxed), || {
        "a chromosome left its bounds".into()
    })?;
    ensure(bounds.contains(&r.best_chromosome), || {
        "best chromosome out of bounds".into()
    })?;
    Ok("100 generations, every evaluated chromosome within bounds".into())
}

/// Repeated seeds give identical results, sequential or through `parallel`.
pub fn ga_determinism<E: Evaluator>(parallel: impl Fn(Landscape) -> E, label: &str) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for s in 0..5u64 {
        let land = Landscape::random(8, &mut rng);
        let bounds = GeneBounds::new(vec![(0.0, 1.0); 8]).unwrap();
        let cfg = small_ga(1000 + s);
        let seq = Sequential(|c: &Chromosome| Ok(land.value(c)));
        let a = ga::evolve(&cfg, &bounds, &seq).map_err(|e| e.to_string())?;
        let b = ga::evolve(&cfg, &bounds, &seq).map_err(|e| e.to_string())?;
        let p = ga::evolve(&cfg, &bounds, &parallel(land.clone())).map_err(|e| e.to_string())?;
        let bits = |r: &GaResult| {
            let mut v: Vec<u64> = r.best_chromosome.genes.iter().map(|g| g.to_bits()).collect();
            v.push(r.best_fitness.to_bits());
            v.extend(r.history.iter().flat_map(|h| [h.best.to_bits(), h.mean.to_bits()]));
            v.push(r.generations_run as u64);
            v
        };
        ensure(bits(&a) == bits(&b), || format!("seed {s}: repeated run differs"))?;
        ensure(bits(&a) == bits(&p), || format!("seed {s}: {label} evaluation differs"))?;
    }
    Ok(format!("5 seeds bit-identical, sequential and {label}"))
}

pub fn ga_stagnation() -> Outcome {
    let bounds = GeneBounds::new(vec![(0.0, 1.0); 4]).unwrap();
    for limit in [1usize, 2, 5, 20] {
        let cfg = GaConfig {
            population_size: 10,
            elitism_count: 2,
            stagnation_limit: limit,
            max_generations: 100,
            ..GaConfig::default()
        };
        let r = ga::evolve(&cfg, &bounds, &Sequential(|_: &Chromosome| Ok(0.25))).map_err(|e| e.to_string())?;
        ensure(r.generations_run == limit + 1, || {
            format!("limit {limit}: ran {} generations", r.generations_run)
        })?;
    }
    Ok("constant fitness stops after stagnation_limit + 1 generations".into())
}
