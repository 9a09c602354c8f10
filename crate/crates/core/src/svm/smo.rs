//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= u_i
//! ```
//!
//! with `Q_ij = y_i y_j K_ij`. The working pair is chosen as the maximal
//! KKT violator `i` plus the partner `j` with the largest second-order gain,
//! and the two-variable subproblem is solved analytically with clipping to
//! the box. Per-variable upper bounds `u_i` let duplicate training points be
//! merged into a single weighted variable.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

/// Source of kernel values for the solver.
pub trait Gram {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes `K(i, t)` for every `t` into `out`.
    fn column(&self, i: usize, out: &mut [f64]);

    fn diagonal(&self, i: usize) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    /// Stop when the maximal KKT violation falls below this value.
    pub tolerance: f64,
    /// Hard cap on pair updates.
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", "must be positive and finite"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    /// Dual objective `1/2 a'Qa - e'a` at `alpha`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct ColumnCache<'g, G: Gram> {
    gram: &'g G,
    columns: Vec<Option<Vec<f64>>>,
}

impl<'g, G: Gram> ColumnCache<'g, G> {
    fn new(gram: &'g G) -> Self {
        Self {
            gram,
            columns: (0..gram.len()).map(|_| None).collect(),
        }
    }

    fn get(&mut self, i: usize) -> &[f64] {
        let gram = self.gram;
        self.columns[i].get_or_insert_with(|| {
            let mut col = vec![0.0; gram.len()];
            gram.column(i, &mut col);
            col
        })
    }

    /// Both columns at once; `i != j`.
    fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.get(i);
        self.get(j);
        let (a, b) = (&self.columns[i], &self.columns[j]);
        (a.as_deref().unwrap(), b.as_deref().unwrap())
    }
}

/// Solves the dual. `labels` are `+1.0` / `-1.0`; `upper` holds the per-variable
/// box bound (the cost times the multiplicity of the point).
pub fn solve<G: Gram>(gram: &G, labels: &[f64], upper: &[f64], cfg: &SolverConfig) -> Result<SmoSolution> {
    let n = gram.len();
    if labels.len() != n || upper.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: if labels.len() != n { labels.len() } else { upper.len() },
        });
    }
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    if !labels.iter().any(|&y| y > 0.0) || !labels.iter().any(|&y| y < 0.0) {
        return Err(Error::SingleClass);
    }
    cfg.validate()?;

    let y = labels;
    let diag: Vec<f64> = (0..n).map(|i| gram.diagonal(i)).collect();
    let mut alpha = vec![0.0; n];
    // gradient of the dual objective, Q a - e
    let mut grad = vec![-1.0; n];
    let mut cache = ColumnCache::new(gram);

    let at_upper = |a: f64, u: f64| a >= u;
    let at_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                if at_upper(alpha[t], upper[t]) {
                    continue;
                }
                -grad[t]
            } else {
                if at_lower(alpha[t]) {
                    continue;
                }
                grad[t]
            };
            if v >= gmax {
                gmax = v;
                i_sel = t;
            }
        }
        if i_sel == usize::MAX {
            converged = true;
            break;
        }
        let i = i_sel;
        let k_i = cache.get(i);

        // j: second-order choice among I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            let (v, grad_diff, quad) = if y[t] > 0.0 {
                if at_lower(alpha[t]) {
                    continue;
                }
                // y_i * Q_it = y_t K_it, here y_t = +1
                (grad[t], gmax + grad[t], diag[i] + diag[t] - 2.0 * k_i[t])
            } else {
                if at_upper(alpha[t], upper[t]) {
                    continue;
                }
                (-grad[t], gmax - grad[t], diag[i] + diag[t] - 2.0 * k_i[t])
            };
            if v >= gmax2 {
                gmax2 = v;
            }
            if grad_diff > 0.0 {
                let q = if quad > 0.0 { quad } else { TAU };
                let gain = -(grad_diff * grad_diff) / q;
                if gain <= best_gain {
                    best_gain = gain;
                    j_sel = t;
                }
            }
        }
        if gmax + gmax2 < cfg.tolerance || j_sel == usize::MAX {
            converged = true;
            break;
        }
        let j = j_sel;
        iterations += 1;

        let (k_i, k_j) = cache.pair(i, j);
        let (ci, cj) = (upper[i], upper[j]);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);
        let q_ij = y[i] * y[j] * k_i[j];

        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let (dai, daj) = (ai - old_ai, aj - old_aj);
        // Q_it = y_i y_t K_it
        let (si, sj) = (y[i] * dai, y[j] * daj);
        for t in 0..n {
            grad[t] += y[t] * (si * k_i[t] + sj * k_j[t]);
        }
    }

    let rho = compute_rho(y, &alpha, upper, &grad);
    let objective = alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
    Ok(SmoSolution {
        alpha,
        rho,
        objective,
        iterations,
        converged,
    })
}

fn compute_rho(y: &[f64], alpha: &[f64], upper: &[f64], grad: &[f64]) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}
