//! Welch's unequal-variance t-test and the pairwise comparison matrix.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

const BETA_REL_TOL: f64 = 1e-10;
const BETA_MAX_TERMS: usize = 10_000;

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Evaluated with the modified Lentz continued fraction, switching to the
/// symmetric form `1 - I_{1-x}(b, a)` where the fraction converges faster.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    if x < (a + 1.0) / (a + b + 2.0) {
        libm::exp(ln_front) * beta_fraction(a, b, x) / a
    } else {
        1.0 - libm::exp(ln_front) * beta_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_TERMS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_REL_TOL {
            break;
        }
    }
    h
}

/// `P(T <= t)` for Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `P(|T| >= |t|)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Quantile of Student's t by bisection on the CDF.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while student_t_cdf(lo, df) > p {
        lo *= 2.0;
    }
    while student_t_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    #[default]
    TwoSided,
    /// Alternative: mean of `a` below mean of `b`.
    Less,
    /// Alternative: mean of `a` above mean of `b`.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub t_statistic: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn welch_t_test(a: &[f64], b: &[f64], sidedness: Sidedness) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSamples("each sample needs at least two values"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSamples("samples contain non-finite values"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return Err(Error::DegenerateSamples("both samples have zero variance"));
    }
    let t = (mean(a) - mean(b)) / libm::sqrt(se2);
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = match sidedness {
        Sidedness::TwoSided => student_t_two_sided(t, df),
        Sidedness::Less => student_t_cdf(t, df),
        Sidedness::Greater => 1.0 - student_t_cdf(t, df),
    };
    Ok(TestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p.clamp(0.0, 1.0),
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// `***` below .001, `**` below .01, `*` below .05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Holm step-down adjustment; output aligned with the input.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = alloc::vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let v = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(v);
        adjusted[i] = running;
    }
    adjusted
}

/// Lower-triangular matrix of pairwise Welch tests. Row `r` compares group
/// `r + 1` with each earlier group `c <= r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<Result<TestResult>>>,
}

impl PairwiseMatrix {
    /// Test comparing groups `i > j`.
    pub fn cell(&self, i: usize, j: usize) -> Option<&Result<TestResult>> {
        if j >= i {
            return None;
        }
        self.rows.get(i - 1)?.get(j)
    }

    /// Every populated cell as `(i, j, result)` with `i > j`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &Result<TestResult>)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, res)| (r + 1, c, res)))
    }

    /// Holm-adjusted p-values for the successful cells, in [`cells`](Self::cells) order
    /// (`None` for failed cells).
    pub fn holm(&self) -> Vec<Option<f64>> {
        let ok: Vec<f64> = self
            .cells()
            .filter_map(|(_, _, r)| r.as_ref().ok().map(|t| t.p_value))
            .collect();
        let mut adj = holm_adjust(&ok).into_iter();
        self.cells()
            .map(|(_, _, r)| r.as_ref().ok().map(|_| adj.next().expect("one per success")))
            .collect()
    }
}

/// Two-sided Welch test for every unordered pair of groups. Cells that fail
/// keep their error; the matrix is still produced.
pub fn pairwise_sensitivity_matrix(groups: &[(String, Vec<f64>)]) -> Result<PairwiseMatrix> {
    if groups.len() < 2 {
        return Err(Error::DegenerateSamples("at least two groups are required"));
    }
    let rows = (1..groups.len())
        .map(|i| {
            (0..i)
                .map(|j| welch_t_test(&groups[i].1, &groups[j].1, Sidedness::TwoSided))
                .collect()
        })
        .collect();
    Ok(PairwiseMatrix {
        labels: groups.iter().map(|g| g.0.clone()).collect(),
        rows,
    })
}
