//! Soft-margin RBF support vector machine.
//!
//! Training merges identical `(row, label)` pairs into one dual variable whose
//! box bound is the cost times the multiplicity; the fitted coefficients are
//! then spread evenly back over the duplicates. This is exact for the dual and
//! makes low-dimensional, mostly binary feature subsets cheap to fit.

mod kernel;
mod metrics;
pub mod smo;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use kernel::rbf_kernel;
pub use metrics::{confusion_metrics, ConfusionMetrics};
pub use smo::{Gram, SmoSolution, SolverConfig};

use crate::data::UserFlag;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvmParams {
    /// Soft-margin penalty `C`.
    pub cost: f64,
    /// RBF width.
    pub gamma: f64,
}

impl SvmParams {
    pub fn new(cost: f64, gamma: f64) -> Result<Self> {
        let p = Self { cost, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::invalid("cost", "must be positive and finite"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be positive and finite"));
        }
        Ok(())
    }
}

/// RBF Gram matrix over the rows of a matrix, computed column by column.
#[derive(Debug, Clone, Copy)]
pub struct RbfGram<'a> {
    x: &'a Matrix,
    gamma: f64,
}

impl<'a> RbfGram<'a> {
    pub fn new(x: &'a Matrix, gamma: f64) -> Self {
        Self { x, gamma }
    }
}

impl Gram for RbfGram<'_> {
    fn len(&self) -> usize {
        self.x.rows()
    }

    fn column(&self, i: usize, out: &mut [f64]) {
        let xi = self.x.row(i);
        for (t, o) in out.iter_mut().enumerate() {
            *o = kernel::rbf_unchecked(xi, self.x.row(t), self.gamma);
        }
    }

    fn diagonal(&self, _i: usize) -> f64 {
        1.0
    }
}

/// Fitted decision function `sum_i coef_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrainedSvm {
    pub support_vectors: Matrix,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub params: SvmParams,
    pub feature_count: usize,
    pub dual_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Distinct support vectors with summed coefficients; same function, fewer terms.
    #[cfg_attr(feature = "serde", serde(skip))]
    merged_vectors: Matrix,
    #[cfg_attr(feature = "serde", serde(skip))]
    merged_coefs: Vec<f64>,
}

type RowKey = Vec<u64>;

fn row_key(row: &[f64]) -> RowKey {
    // +0.0 and -0.0 are the same point
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

pub fn train(x: &Matrix, y: &[UserFlag], params: SvmParams, cfg: &SolverConfig) -> Result<TrainedSvm> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::Empty("training set"));
    }
    params.validate()?;
    for (r, row) in x.iter_rows().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }
    if y.iter().all(|f| f.is_user()) || !y.iter().any(|f| f.is_user()) {
        return Err(Error::SingleClass);
    }

    // group duplicates; BTreeMap keeps the first-seen row as representative
    let mut groups: BTreeMap<(RowKey, bool), usize> = BTreeMap::new();
    let mut representative: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (r, flag) in y.iter().enumerate() {
        let key = (row_key(x.row(r)), flag.is_user());
        let g = *groups.entry(key).or_insert_with(|| {
            representative.push(r);
            members.push(Vec::new());
            representative.len() - 1
        });
        members[g].push(r);
    }

    let unique_x = x.select_rows(&representative);
    let labels: Vec<f64> = representative.iter().map(|&r| y[r].sign()).collect();
    let upper: Vec<f64> = members.iter().map(|m| params.cost * m.len() as f64).collect();
    let gram = RbfGram::new(&unique_x, params.gamma);
    let sol = smo::solve(&gram, &labels, &upper, cfg)?;

    let mut sv_rows = Vec::new();
    let mut dual_coefs = Vec::new();
    let mut merged_rows = Vec::new();
    let mut merged_coefs = Vec::new();
    for (g, &a) in sol.alpha.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        merged_rows.push(representative[g]);
        merged_coefs.push(a * labels[g]);
        let share = a / members[g].len() as f64 * labels[g];
        for &r in &members[g] {
            sv_rows.push(r);
            dual_coefs.push(share);
        }
    }
    // report support vectors in training order
    let mut order: Vec<usize> = (0..sv_rows.len()).collect();
    order.sort_by_key(|&i| sv_rows[i]);
    let sv_rows: Vec<usize> = order.iter().map(|&i| sv_rows[i]).collect();
    let dual_coefs: Vec<f64> = order.iter().map(|&i| dual_coefs[i]).collect();

    Ok(TrainedSvm {
        support_vectors: x.select_rows(&sv_rows),
        dual_coefs,
        bias: -sol.rho,
        params,
        feature_count: x.cols(),
        dual_objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
        merged_vectors: x.select_rows(&merged_rows),
        merged_coefs,
    })
}

impl TrainedSvm {
    /// Raw score; positive means `User`.
    pub fn decision_value(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: row.len(),
            });
        }
        Ok(self.decision_unchecked(row))
    }

    fn decision_unchecked(&self, row: &[f64]) -> f64 {
        self.merged_vectors
            .iter_rows()
            .zip(&self.merged_coefs)
            .map(|(sv, c)| c * kernel::rbf_unchecked(sv, row, self.params.gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Labels for every row; a score of exactly zero is `NonUser`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<UserFlag>> {
        if x.rows() > 0 && x.cols() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: x.cols(),
            });
        }
        let mut seen: BTreeMap<RowKey, UserFlag> = BTreeMap::new();
        Ok(x.iter_rows()
            .map(|row| {
                *seen
                    .entry(row_key(row))
                    .or_insert_with(|| UserFlag::from(self.decision_unchecked(row) > 0.0))
            })
            .collect())
    }

    /// `sum_i alpha_i y_i`, zero at a feasible dual point.
    pub fn coefficient_balance(&self) -> f64 {
        self.dual_coefs.iter().sum()
    }
}
