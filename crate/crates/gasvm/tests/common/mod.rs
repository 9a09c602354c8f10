//! Synthetic files in the survey layout. Heroin use is planted to follow
//! crack and methadone use so the sweep has something to find.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HEROIN: usize = 10;
const CRACK: usize = 8;
const METHADONE: usize = 14;

pub fn synthetic_text(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for id in 1..=rows {
        write!(out, "{id}").unwrap();
        for _ in 0..12 {
            write!(out, ",{:.5}", rng.random_range(-2.5..2.5)).unwrap();
        }
        let mut classes: Vec<u8> = (0..19).map(|_| rng.random_range(0..=6)).collect();
        let heavy = rng.random::<f64>() < 0.2;
        classes[CRACK] = if heavy {
            rng.random_range(2..=6)
        } else {
            rng.random_range(0..=1)
        };
        classes[METHADONE] = if heavy || rng.random::<f64>() < 0.1 {
            rng.random_range(2..=6)
        } else {
            rng.random_range(0..=1)
        };
        classes[HEROIN] = if heavy && rng.random::<f64>() < 0.85 {
            rng.random_range(2..=6)
        } else if rng.random::<f64>() < 0.03 {
            2
        } else {
            rng.random_range(0..=1)
        };
        for c in classes {
            write!(out, ",CL{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_synthetic(dir: &Path, rows: usize, seed: u64) -> PathBuf {
    let path = dir.join("synthetic.data");
    std::fs::write(&path, synthetic_text(rows, seed)).unwrap();
    path
}

/// A sweep small enough for a test: 2 conditions, 3 folds, `reps` replications.
pub fn tiny_config(reps: usize) -> String {
    format!(
        r#"
seed = 11
replications_per_fold = {reps}

[ga]
population_size = 12
max_generations = 6
elitism_count = 2
stagnation_limit = 3

[[conditions]]
accuracy = 0.8
features = 0.2

[[conditions]]
accuracy = 0.2
features = 0.8
"#
    )
}
