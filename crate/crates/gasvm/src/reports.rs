//! CSV renderings of the aggregations in `gasvm_core::report`.

use std::fmt;
use std::str::FromStr;

use gasvm_core::experiment::RunRecord;
use gasvm_core::report::{self, BaselineResult};
use gasvm_core::stats::{self, PairwiseMatrix};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Averages,
    Features,
    Best,
    Curves,
    Stats,
    Baseline,
}

impl ReportKind {
    pub const ALL: [ReportKind; 6] = [
        ReportKind::Averages,
        ReportKind::Features,
        ReportKind::Best,
        ReportKind::Curves,
        ReportKind::Stats,
        ReportKind::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Averages => "averages",
            ReportKind::Features => "features",
            ReportKind::Best => "best",
            ReportKind::Curves => "curves",
            ReportKind::Stats => "stats",
            ReportKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ReportKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown report {s:?}"))
    }
}

fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Store(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn strings<const N: usize>(cells: [&str; N]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

/// Fold averages, one row per condition.
pub fn averages(records: &[RunRecord]) -> Result<String> {
    let rows = report::fold_averages(records)?.into_iter().map(|a| {
        vec![
            a.weights.label(),
            format!("{:.4}", a.sensitivity),
            format!("{:.4}", a.specificity),
            format!("{:.3}", a.feature_count),
            format!("{:.4}", a.fitness),
            a.runs.to_string(),
        ]
    });
    csv_text(
        &strings(["Group", "Sensitivity", "Specificity", "Features", "Fit", "Runs"]),
        rows,
    )
}

fn condition_labels(records: &[RunRecord]) -> Vec<(usize, String)> {
    report::by_condition(records)
        .into_iter()
        .map(|(c, rs)| (c, rs[0].weights.label()))
        .collect()
}

/// Selection counts per feature and condition, plus the pooled total.
pub fn features(records: &[RunRecord], feature_names: &[String]) -> Result<String> {
    let freq = report::feature_frequency(records, feature_names.len());
    let labels = condition_labels(records);
    let mut header = vec!["Feature".to_string()];
    header.extend(labels.iter().map(|(_, l)| l.clone()));
    header.push("Pooled".into());
    let rows = freq.ranking().into_iter().map(|i| {
        let mut row = vec![feature_names[i].clone()];
        row.extend(labels.iter().map(|(c, _)| freq.per_condition[c][i].to_string()));
        row.push(freq.pooled[i].to_string());
        row
    });
    csv_text(&header, rows)
}

/// Best model per condition: metrics as rows, one column per condition.
pub fn best(records: &[RunRecord], feature_names: &[String]) -> Result<(String, String)> {
    let models = report::best_models(records);
    let mut header = vec![String::new()];
    header.extend(models.iter().map(|m| m.record.weights.label()));
    let metric = |name: &str, f: &dyn Fn(&report::BestModel) -> String| {
        let mut row = vec![name.to_string()];
        row.extend(models.iter().map(f));
        row
    };
    let summary = csv_text(
        &header,
        [
            metric("Sensitivity", &|m| format!("{:.4}", m.sensitivity)),
            metric("Specificity", &|m| format!("{:.4}", m.specificity)),
            metric("Fit", &|m| format!("{:.4}", m.fitness)),
            metric("Feature Reduce%", &|m| format!("{:.2}", m.feature_reduction_percent)),
            metric("SVM Cost", &|m| format!("{:.4}", m.cost)),
            metric("SVM Gamma", &|m| format!("{:.4}", m.gamma)),
            metric("Total Accuracy%", &|m| format!("{:.1}", m.total_accuracy_percent)),
            metric("Fold", &|m| m.record.key.fold.to_string()),
            metric("Replication", &|m| m.record.key.replication.to_string()),
        ],
    )?;
    // an X where the best model of a condition uses the feature
    let mut feature_header = header.clone();
    feature_header[0] = "Feature".into();
    let selected = csv_text(
        &feature_header,
        feature_names.iter().enumerate().map(|(i, name)| {
            let mut row = vec![name.clone()];
            row.extend(
                models
                    .iter()
                    .map(|m| if m.selected.contains(&i) { "X" } else { "" }.to_string()),
            );
            row
        }),
    )?;
    Ok((summary, selected))
}

pub fn curves(records: &[RunRecord]) -> Result<String> {
    let labels: std::collections::BTreeMap<usize, String> = condition_labels(records).into_iter().collect();
    let rows = report::convergence_curves(records).into_iter().map(|p| {
        vec![
            labels[&p.condition].clone(),
            p.generation.to_string(),
            format!("{:.6}", p.mean_best),
            format!("{:.6}", p.ci_half_width),
        ]
    });
    csv_text(&strings(["condition", "generation", "mean", "ci"]), rows)
}

/// `.375`, `.002**`, `<.001***`.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        return "<.001***".into();
    }
    let digits = format!("{p:.3}");
    let digits = digits.strip_prefix('0').unwrap_or(&digits);
    format!("{digits}{}", stats::significance_stars(p))
}

/// Lower triangle of pairwise sensitivity p-values, and a long
/// form with t, df, raw p and Holm-adjusted p.
pub fn stats(records: &[RunRecord]) -> Result<(String, String)> {
    let groups = report::sensitivity_groups(records);
    let matrix: PairwiseMatrix = stats::pairwise_sensitivity_matrix(&groups)?;
    let n = matrix.labels.len();

    let mut header = vec![String::new()];
    header.extend(matrix.labels[..n - 1].iter().cloned());
    let table = csv_text(
        &header,
        (1..n).map(|i| {
            let mut row = vec![matrix.labels[i].clone()];
            row.extend((0..n - 1).map(|j| match matrix.cell(i, j) {
                Some(Ok(t)) => format_p(t.p_value),
                Some(Err(_)) => "error".into(),
                None => "-".into(),
            }));
            row
        }),
    )?;

    let holm = matrix.holm();
    let long = csv_text(
        &strings(["a", "b", "n_a", "n_b", "t", "df", "p", "p_holm", "stars", "error"]),
        matrix.cells().zip(holm).map(|((i, j, cell), adj)| {
            let (a, b) = (matrix.labels[i].clone(), matrix.labels[j].clone());
            match cell {
                Ok(t) => vec![
                    a,
                    b,
                    t.n_a.to_string(),
                    t.n_b.to_string(),
                    format!("{:.6}", t.t_statistic),
                    format!("{:.4}", t.degrees_of_freedom),
                    format!("{:.6e}", t.p_value),
                    adj.map(|p| format!("{p:.6e}")).unwrap_or_default(),
                    stats::significance_stars(t.p_value).into(),
                    String::new(),
                ],
                Err(e) => {
                    let mut row = vec![a, b];
                    row.extend(std::iter::repeat_n(String::new(), 7));
                    row.push(e.to_string());
                    row
                }
            }
        }),
    )?;
    Ok((table, long))
}

pub fn baseline(result: &BaselineResult) -> Result<String> {
    let (cost, gamma) = (result.params.cost.to_string(), result.params.gamma.to_string());
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "undefined".into());
    let mut rows: Vec<Vec<String>> = result
        .per_fold
        .iter()
        .enumerate()
        .map(|(f, m)| {
            vec![
                f.to_string(),
                cost.clone(),
                gamma.clone(),
                rate(m.sensitivity),
                rate(m.specificity),
                m.true_positives.to_string(),
                m.false_negatives.to_string(),
                m.true_negatives.to_string(),
                m.false_positives.to_string(),
            ]
        })
        .collect();
    let mut mean = vec![
        "mean".into(),
        cost,
        gamma,
        rate(Some(result.sensitivity)),
        rate(Some(result.specificity)),
    ];
    mean.extend(std::iter::repeat_n(String::new(), 4));
    rows.push(mean);
    csv_text(
        &strings([
            "fold",
            "cost",
            "gamma",
            "sensitivity",
            "specificity",
            "tp",
            "fn",
            "tn",
            "fp",
        ]),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_formatting() {
        assert_eq!(format_p(0.375), ".375");
        assert_eq!(format_p(0.002), ".002**");
        assert_eq!(format_p(0.0649), ".065");
        assert_eq!(format_p(0.04), ".040*");
        assert_eq!(format_p(0.0004), "<.001***");
        assert_eq!(format_p(1.0), "1.000");
    }

    #[test]
    fn kinds_parse() {
        for k in ReportKind::ALL {
            assert_eq!(k.name().parse::<ReportKind>().unwrap(), k);
        }
        assert!("table".parse::<ReportKind>().is_err());
    }
}
