use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{EvalDataset, ResponseSet};
use crate::metrics::{
    cosine_similarity, rouge_l, rouge_n, tokenize, CachedEmbedder, EmbeddingProvider,
    EmbeddingVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub cos_mean: f64,
    pub rouge1_f1_mean: f64,
    pub rouge2_f1_mean: f64,
    #[serde(rename = "rougeL_f1_mean")]
    pub rouge_l_f1_mean: f64,
    pub scored_count: usize,
    pub skipped_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset_name: String,
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn get(&self, model: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

/// ROUGE F1 values for one (response, reference) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RecordScores {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

pub fn rouge_f1s(response: &str, reference: &str) -> RecordScores {
    let cand = tokenize(response);
    let refr = tokenize(reference);
    RecordScores {
        rouge1: rouge_n(&cand, &refr, 1).f1,
        rouge2: rouge_n(&cand, &refr, 2).f1,
        rouge_l: rouge_l(&cand, &refr).f1,
    }
}

fn is_blank(text: Option<&str>) -> bool {
    text.is_none_or(|t| t.trim().is_empty())
}

/// Scores every response set against the dataset's reference answers.
///
/// Only records carrying a reference answer take part. A missing or blank
/// response scores 0 on every ROUGE variant and is left out of the cosine
/// mean; it is counted in `skipped_count`. ROUGE means average over all
/// reference-bearing records, the cosine mean over scored records only (0
/// when none were scored).
pub fn score_models<P: EmbeddingProvider>(
    dataset: &EvalDataset,
    sets: &[ResponseSet],
    embedder: &CachedEmbedder<P>,
) -> Result<MetricReport, AnalysisError> {
    let refs: Vec<(&str, &str)> = dataset
        .records()
        .iter()
        .filter_map(|r| r.reference_answer.as_deref().map(|a| (r.id.as_str(), a)))
        .collect();
    if refs.is_empty() {
        return Err(AnalysisError::NoReferences(dataset.name().to_string()));
    }
    for set in sets {
        if set.dataset_name != dataset.name() {
            return Err(AnalysisError::DatasetMismatch {
                model: set.model_name.clone(),
                expected: dataset.name().to_string(),
                found: set.dataset_name.clone(),
            });
        }
    }

    let mut texts: Vec<String> = refs.iter().map(|(_, a)| a.to_string()).collect();
    for set in sets {
        for (id, _) in &refs {
            let resp = set.get(id);
            if !is_blank(resp) {
                texts.push(resp.unwrap().to_string());
            }
        }
    }
    texts.sort();
    texts.dedup();
    let vectors = embedder.embed_many(&texts)?;
    let by_text: HashMap<&str, Arc<EmbeddingVector>> =
        texts.iter().map(String::as_str).zip(vectors).collect();

    let rows = sets
        .par_iter()
        .map(|set| {
            let per_record = refs
                .par_iter()
                .map(|(id, reference)| {
                    let resp = set.get(id);
                    if is_blank(resp) {
                        return Ok((RecordScores::default(), None));
                    }
                    let resp = resp.unwrap();
                    let cos = cosine_similarity(&by_text[resp], &by_text[reference])?;
                    Ok((rouge_f1s(resp, reference), Some(cos)))
                })
                .collect::<Result<Vec<_>, AnalysisError>>()?;

            let n = refs.len() as f64;
            let mut row = MetricRow {
                model: set.model_name.clone(),
                cos_mean: 0.0,
                rouge1_f1_mean: 0.0,
                rouge2_f1_mean: 0.0,
                rouge_l_f1_mean: 0.0,
                scored_count: 0,
                skipped_count: 0,
            };
            let mut cos_sum = 0.0;
            for (scores, cos) in &per_record {
                row.rouge1_f1_mean += scores.rouge1;
                row.rouge2_f1_mean += scores.rouge2;
                row.rouge_l_f1_mean += scores.rouge_l;
                match cos {
                    Some(c) => {
                        cos_sum += c;
                        row.scored_count += 1;
                    }
                    None => row.skipped_count += 1,
                }
            }
            row.rouge1_f1_mean /= n;
            row.rouge2_f1_mean /= n;
            row.rouge_l_f1_mean /= n;
            if row.scored_count > 0 {
                row.cos_mean = cos_sum / row.scored_count as f64;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    Ok(MetricReport {
        dataset_name: dataset.name().to_string(),
        rows,
    })
}
