use serde::{Deserialize, Serialize};

use super::{AnalysisError, MetricReport};
use crate::rating::RatingReport;

/// One labeled metric, with one value per model (same model order across
/// columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricColumn {
    pub name: String,
    pub values: Vec<f64>,
}

impl MetricColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

/// Square, symmetric correlation matrix. `None` marks an undefined entry
/// (a constant column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub metric_names: Vec<String>,
    pub entries: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.metric_names.iter().position(|n| n == a)?;
        let j = self.metric_names.iter().position(|n| n == b)?;
        self.entries[i][j]
    }
}

/// Pearson's r, or `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.is_empty() || is_constant(x) || is_constant(y) {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Pairwise correlation between per-model metric columns. Needs at least
/// three models and complete, finite columns.
pub fn metric_correlations(
    columns: &[MetricColumn],
    method: CorrelationMethod,
) -> Result<CorrelationMatrix, AnalysisError> {
    let n_models = columns.first().map_or(0, |c| c.values.len());
    if n_models < 3 {
        return Err(AnalysisError::TooFewModels(n_models));
    }
    for c in columns {
        if c.values.len() != n_models || c.values.iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::IncompleteColumn(c.name.clone()));
        }
    }
    let corr = |a: &[f64], b: &[f64]| match method {
        CorrelationMethod::Pearson => pearson(a, b),
        CorrelationMethod::Spearman => spearman(a, b),
    };
    let k = columns.len();
    let mut entries = vec![vec![None; k]; k];
    for i in 0..k {
        if !is_constant(&columns[i].values) {
            entries[i][i] = Some(1.0);
        }
        for j in i + 1..k {
            let r = corr(&columns[i].values, &columns[j].values);
            entries[i][j] = r;
            entries[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        metric_names: columns.iter().map(|c| c.name.clone()).collect(),
        entries,
    })
}

/// Builds the labeled columns reported alongside the score tables: the voting
/// set's Cos, R-1, R-2, R-L, ELO, WP and, when given, the general set's Cos,
/// R-1, R-2, R-L. Models are those of the rating report, in its order.
pub fn score_columns(
    voting: &MetricReport,
    ratings: &RatingReport,
    general: Option<&MetricReport>,
) -> Result<(Vec<String>, Vec<MetricColumn>), AnalysisError> {
    let models: Vec<String> = ratings.rows.iter().map(|r| r.model.clone()).collect();
    let lookup = |report: &MetricReport, model: &str| {
        report
            .get(model)
            .cloned()
            .ok_or_else(|| AnalysisError::MissingModel {
                model: model.to_string(),
                report: report.dataset_name.clone(),
            })
    };
    let metric_cols =
        |report: &MetricReport, prefix: &str| -> Result<Vec<MetricColumn>, AnalysisError> {
            let rows = models
                .iter()
                .map(|m| lookup(report, m))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(vec![
                MetricColumn::new(
                    format!("{prefix}-Cos"),
                    rows.iter().map(|r| r.cos_mean).collect(),
                ),
                MetricColumn::new(
                    format!("{prefix}-R-1"),
                    rows.iter().map(|r| r.rouge1_f1_mean).collect(),
                ),
                MetricColumn::new(
                    format!("{prefix}-R-2"),
                    rows.iter().map(|r| r.rouge2_f1_mean).collect(),
                ),
                MetricColumn::new(
                    format!("{prefix}-R-L"),
                    rows.iter().map(|r| r.rouge_l_f1_mean).collect(),
                ),
            ])
        };

    let mut cols = metric_cols(voting, "V")?;
    cols.push(MetricColumn::new(
        "V-ELO",
        ratings.rows.iter().map(|r| r.elo_mean).collect(),
    ));
    cols.push(MetricColumn::new(
        "V-WP",
        ratings.rows.iter().map(|r| r.winpct).collect(),
    ));
    if let Some(g) = general {
        cols.extend(metric_cols(g, "G")?);
    }
    Ok((models, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_pearson() {
        // mean x = 2.5, mean y = 5; sxy = 11, sxx = 5, syy = 26
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 9.0]).unwrap();
        let oracle = 11.0 / (5.0f64 * 26.0).sqrt();
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_constant() {
        let x = [1.0, 2.5, -3.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[2.0; 4]), None);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 30.0]),
            [1.5, 3.0, 1.5, 4.0]
        );
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_shape_and_errors() {
        let cols = vec![
            MetricColumn::new("a", vec![1.0, 2.0, 3.0]),
            MetricColumn::new("b", vec![3.0, 1.0, 2.0]),
            MetricColumn::new("flat", vec![5.0, 5.0, 5.0]),
        ];
        let m = metric_correlations(&cols, CorrelationMethod::Pearson).unwrap();
        assert_eq!(m.get("a", "a"), Some(1.0));
        assert_eq!(m.get("a", "flat"), None);
        assert_eq!(m.get("flat", "flat"), None);
        assert_eq!(m.get("a", "b"), m.get("b", "a"));

        let two = vec![MetricColumn::new("a", vec![1.0, 2.0])];
        assert!(matches!(
            metric_correlations(&two, CorrelationMethod::Pearson),
            Err(AnalysisError::TooFewModels(2))
        ));
        let ragged = vec![
            MetricColumn::new("a", vec![1.0, 2.0, 3.0]),
            MetricColumn::new("b", vec![1.0, f64::NAN, 3.0]),
        ];
        assert!(matches!(
            metric_correlations(&ragged, CorrelationMethod::Pearson),
            Err(AnalysisError::IncompleteColumn(_))
        ));
    }
}
