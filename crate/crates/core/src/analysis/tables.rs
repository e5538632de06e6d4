//! Flat string tables for every report, in the column layouts the tabular
//! outputs use.

use super::{CategoryBreakdown, CorrelationMatrix, MetricReport};
use crate::rating::RatingReport;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Space-padded columns for terminal display.
    pub fn to_aligned(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let fmt_row = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = fmt_row(&self.headers);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        out
    }
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Voting-set score table: `Model, Cos, R-1, R-2, R-L, ELO, WP`, ordered by
/// Elo. ELO is the permutation mean rounded to an integer; WP is a
/// percentage.
pub fn voting_score_table(metrics: &MetricReport, ratings: &RatingReport) -> Table {
    let mut t = Table::new(&["Model", "Cos", "R-1", "R-2", "R-L", "ELO", "WP"]);
    for r in &ratings.rows {
        let Some(m) = metrics.get(&r.model) else {
            continue;
        };
        t.rows.push(vec![
            r.model.clone(),
            f3(m.cos_mean),
            f3(m.rouge1_f1_mean),
            f3(m.rouge2_f1_mean),
            f3(m.rouge_l_f1_mean),
            format!("{:.0}", r.elo_mean),
            format!("{:.2}", r.winpct * 100.0),
        ]);
    }
    t
}

/// General-set score table: `Model, Cos, R-1, R-2, R-L`.
pub fn general_score_table(metrics: &MetricReport) -> Table {
    let mut t = Table::new(&["Model", "Cos", "R-1", "R-2", "R-L"]);
    for m in &metrics.rows {
        t.rows.push(vec![
            m.model.clone(),
            f3(m.cos_mean),
            f3(m.rouge1_f1_mean),
            f3(m.rouge2_f1_mean),
            f3(m.rouge_l_f1_mean),
        ]);
    }
    t
}

pub fn metric_table(report: &MetricReport) -> Table {
    let mut t = Table::new(&[
        "model",
        "cos_mean",
        "rouge1_f1_mean",
        "rouge2_f1_mean",
        "rougeL_f1_mean",
        "scored_count",
        "skipped_count",
    ]);
    for m in &report.rows {
        t.rows.push(vec![
            m.model.clone(),
            format!("{:.6}", m.cos_mean),
            format!("{:.6}", m.rouge1_f1_mean),
            format!("{:.6}", m.rouge2_f1_mean),
            format!("{:.6}", m.rouge_l_f1_mean),
            m.scored_count.to_string(),
            m.skipped_count.to_string(),
        ]);
    }
    t
}

pub fn rating_table(report: &RatingReport) -> Table {
    let mut t = Table::new(&[
        "model",
        "elo_sequential",
        "elo_mean",
        "ci_low",
        "ci_high",
        "winpct",
        "vote_count",
    ]);
    for r in &report.rows {
        t.rows.push(vec![
            r.model.clone(),
            f4(r.elo_sequential),
            f4(r.elo_mean),
            f4(r.ci_low),
            f4(r.ci_high),
            format!("{:.6}", r.winpct),
            r.vote_count.to_string(),
        ]);
    }
    t
}

pub fn category_table(breakdown: &CategoryBreakdown) -> Table {
    let mut t = Table::new(&["model", "category", "winpct", "vote_count"]);
    for c in &breakdown.cells {
        t.rows.push(vec![
            c.model.clone(),
            c.category.clone(),
            format!("{:.6}", c.winpct),
            c.vote_count.to_string(),
        ]);
    }
    t
}

/// Marker written for correlations that are undefined (constant column).
pub const UNDEFINED: &str = "undefined";

pub fn correlation_table(matrix: &CorrelationMatrix) -> Table {
    let mut headers = vec!["metric".to_string()];
    headers.extend(matrix.metric_names.iter().cloned());
    let rows = matrix
        .metric_names
        .iter()
        .zip(&matrix.entries)
        .map(|(name, row)| {
            std::iter::once(name.clone())
                .chain(row.iter().map(|e| match e {
                    Some(r) => format!("{r:.6}"),
                    None => UNDEFINED.to_string(),
                }))
                .collect()
        })
        .collect();
    Table { headers, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_output() {
        let t = Table {
            headers: vec!["model".into(), "x".into()],
            rows: vec![vec!["long-name".into(), "1".into()]],
        };
        assert_eq!(t.to_aligned(), "model      x\nlong-name  1\n");
    }
}
