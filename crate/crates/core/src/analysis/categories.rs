use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::EvalDataset;
use crate::rating::{Vote, WinTally};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCell {
    pub model: String,
    pub category: String,
    pub winpct: f64,
    pub vote_count: usize,
    pub win: usize,
    pub both: usize,
}

/// WinPct per (model, category). Cells are ordered by the dataset's category
/// order, then model name; only categories with votes appear.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryBreakdown {
    pub cells: Vec<CategoryCell>,
}

impl CategoryBreakdown {
    pub fn get(&self, model: &str, category: &str) -> Option<&CategoryCell> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.category == category)
    }

    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.category.as_str()) {
                out.push(&c.category);
            }
        }
        out
    }
}

/// Partitions votes by their record's category and computes WinPct within
/// each partition.
pub fn category_winpct(
    votes: &[Vote],
    dataset: &EvalDataset,
) -> Result<CategoryBreakdown, AnalysisError> {
    let mut buckets: BTreeMap<usize, Vec<&Vote>> = BTreeMap::new();
    let order = dataset.categories();
    for v in votes {
        let record = dataset
            .get(&v.record_id)
            .ok_or_else(|| AnalysisError::UnknownRecord(v.record_id.clone()))?;
        let category = record
            .category
            .as_deref()
            .ok_or_else(|| AnalysisError::MissingCategory(v.record_id.clone()))?;
        let pos = order.iter().position(|c| c == category).unwrap();
        buckets.entry(pos).or_default().push(v);
    }

    let mut cells = Vec::new();
    for (pos, bucket) in buckets {
        let models: BTreeSet<&str> = bucket
            .iter()
            .flat_map(|v| [v.model_a.as_str(), v.model_b.as_str()])
            .collect();
        for model in models {
            let t = WinTally::of(bucket.iter().copied(), model);
            cells.push(CategoryCell {
                model: model.to_string(),
                category: order[pos].clone(),
                winpct: t.ratio(),
                vote_count: t.total,
                win: t.win,
                both: t.both,
            });
        }
    }
    Ok(CategoryBreakdown { cells })
}
