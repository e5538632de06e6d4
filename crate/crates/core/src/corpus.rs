//! Instruction datasets, finetune pairs and model response sets.
//!
//! Every on-disk format here is UTF-8 JSON Lines:
//!
//! - evaluation datasets: one `{id, category, instruction, reference_answer}`
//!   object per line;
//! - finetune files: one `{id, instruction, response, source, quality_score}`
//!   object per line;
//! - response files: a `{model_name, dataset_name}` header line followed by
//!   `{id, response}` lines.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_jsonl, to_jsonl, write_atomic, IoError};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId {
        path: String,
        line: usize,
        id: String,
    },
    #[error("duplicate id {0:?} within one part")]
    DuplicatePartId(String),
    #[error("{context}: empty id")]
    EmptyId { context: String },
    #[error("record {id:?}: instruction is empty")]
    EmptyInstruction { id: String },
    #[error("record {id:?}: reference_answer is present but empty")]
    EmptyReference { id: String },
    #[error("pair {id:?}: {field} is empty")]
    EmptyField { id: String, field: &'static str },
    #[error("pair {id:?}: quality_score {score} outside [0, 1]")]
    ScoreOutOfRange { id: String, score: f64 },
    #[error("threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("scorer failed on pair {id:?}: {source}")]
    Scorer {
        id: String,
        #[source]
        source: ScorerError,
    },
    #[error("combine needs at least one part")]
    NoParts,
    #[error("{path}: missing response header line")]
    MissingHeader { path: String },
    #[error("{path}: model_name is empty")]
    MissingModelName { path: String },
    #[error("{path}: response set targets dataset {found:?}, expected {expected:?}")]
    DatasetMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: response id {id:?} is not in dataset {dataset:?}")]
    UnknownId {
        path: String,
        line: usize,
        id: String,
        dataset: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub id: String,
    #[serde(default)]
    pub category: Option<String>,
    pub instruction: String,
    #[serde(default)]
    pub reference_answer: Option<String>,
}

impl InstructionRecord {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(CorpusError::EmptyId {
                context: "instruction record".into(),
            });
        }
        if self.instruction.trim().is_empty() {
            return Err(CorpusError::EmptyInstruction {
                id: self.id.clone(),
            });
        }
        if let Some(r) = &self.reference_answer {
            if r.trim().is_empty() {
                return Err(CorpusError::EmptyReference {
                    id: self.id.clone(),
                });
            }
        }
        Ok(())
    }
}

/// An ordered evaluation dataset with unique record ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalDataset {
    name: String,
    records: Vec<InstructionRecord>,
    index: HashMap<String, usize>,
}

impl EvalDataset {
    pub fn new(
        name: impl Into<String>,
        records: Vec<InstructionRecord>,
    ) -> Result<Self, CorpusError> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            rec.validate()?;
            if index.insert(rec.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId {
                    path: "<memory>".into(),
                    line: i + 1,
                    id: rec.id.clone(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            records,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[InstructionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&InstructionRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Distinct category labels in first-appearance order.
    pub fn categories(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .filter_map(|r| r.category.as_ref())
            .filter(|c| seen.insert(c.as_str()))
            .cloned()
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        write_atomic(path, &to_jsonl(&self.records))?;
        Ok(())
    }
}

/// Loads an evaluation dataset. The dataset name is the file stem
/// (`v.jsonl` → `"v"`).
pub fn load_dataset(path: &Path) -> Result<EvalDataset, CorpusError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_dataset_named(path, name)
}

pub fn load_dataset_named(
    path: &Path,
    name: impl Into<String>,
) -> Result<EvalDataset, CorpusError> {
    let rows: Vec<(usize, InstructionRecord)> = read_jsonl(path)?;
    let mut seen = HashSet::with_capacity(rows.len());
    let mut records = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        rec.validate()?;
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.display().to_string(),
                line,
                id: rec.id,
            });
        }
        records.push(rec);
    }
    EvalDataset::new(name, records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetunePair {
    pub id: String,
    pub instruction: String,
    pub response: String,
    pub source: String,
    #[serde(default)]
    pub quality_score: Option<f64>,
}

impl FinetunePair {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(CorpusError::EmptyId {
                context: "finetune pair".into(),
            });
        }
        for (field, value) in [
            ("instruction", &self.instruction),
            ("response", &self.response),
            ("source", &self.source),
        ] {
            if value.trim().is_empty() {
                return Err(CorpusError::EmptyField {
                    id: self.id.clone(),
                    field,
                });
            }
        }
        if let Some(s) = self.quality_score {
            if !(0.0..=1.0).contains(&s) {
                return Err(CorpusError::ScoreOutOfRange {
                    id: self.id.clone(),
                    score: s,
                });
            }
        }
        Ok(())
    }
}

pub fn load_finetune(path: &Path) -> Result<Vec<FinetunePair>, CorpusError> {
    let rows: Vec<(usize, FinetunePair)> = read_jsonl(path)?;
    let mut seen = HashSet::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (line, pair) in rows {
        pair.validate()?;
        if !seen.insert(pair.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.display().to_string(),
                line,
                id: pair.id,
            });
        }
        out.push(pair);
    }
    Ok(out)
}

pub fn save_finetune(path: &Path, pairs: &[FinetunePair]) -> Result<(), CorpusError> {
    write_atomic(path, &to_jsonl(pairs))?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ScorerError {
    #[error("pair has no precomputed quality_score")]
    MissingScore,
    #[error("score {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("scorer endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("malformed scorer response: {0}")]
    Malformed(String),
}

/// Assigns a quality score in `[0, 1]` to an instruction/response pair.
pub trait QualityScorer: Sync {
    fn score(&self, pair: &FinetunePair) -> Result<f64, ScorerError>;
}

/// Uses the `quality_score` already stored on each pair.
#[derive(Debug, Default, Clone, Copy)]
pub struct PrecomputedScorer;

impl QualityScorer for PrecomputedScorer {
    fn score(&self, pair: &FinetunePair) -> Result<f64, ScorerError> {
        pair.quality_score.ok_or(ScorerError::MissingScore)
    }
}

impl<F> QualityScorer for F
where
    F: Fn(&FinetunePair) -> Result<f64, ScorerError> + Sync,
{
    fn score(&self, pair: &FinetunePair) -> Result<f64, ScorerError> {
        self(pair)
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    instruction: &'a str,
    response: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

/// Remote classifier: `POST {instruction, response}` → `{score}`.
#[derive(Debug, Clone)]
pub struct HttpScorer {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpScorer {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            agent,
        }
    }
}

impl QualityScorer for HttpScorer {
    fn score(&self, pair: &FinetunePair) -> Result<f64, ScorerError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(ScoreRequest {
                instruction: &pair.instruction,
                response: &pair.response,
            })
            .map_err(|e| ScorerError::Unreachable(e.to_string()))?;
        let body: ScoreResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ScorerError::Malformed(e.to_string()))?;
        Ok(body.score)
    }
}

/// Keeps the pairs whose score is at least `threshold`, in input order, with
/// `quality_score` set to the scorer's value. A scorer failure on any pair
/// aborts the whole call.
pub fn filter_by_score(
    pairs: &[FinetunePair],
    scorer: &dyn QualityScorer,
    threshold: f64,
) -> Result<Vec<FinetunePair>, CorpusError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CorpusError::BadThreshold(threshold));
    }
    let scores = pairs
        .par_iter()
        .map(|p| {
            let s = scorer.score(p).map_err(|source| CorpusError::Scorer {
                id: p.id.clone(),
                source,
            })?;
            if !(0.0..=1.0).contains(&s) {
                return Err(CorpusError::Scorer {
                    id: p.id.clone(),
                    source: ScorerError::OutOfRange(s),
                });
            }
            Ok(s)
        })
        .collect::<Result<Vec<f64>, CorpusError>>()?;

    Ok(pairs
        .iter()
        .zip(scores)
        .filter(|(_, s)| *s >= threshold)
        .map(|(p, s)| FinetunePair {
            quality_score: Some(s),
            ..p.clone()
        })
        .collect())
}

/// Concatenates datasets in order, rewriting ids to `<source>/<id>`.
/// No deduplication is performed.
pub fn combine(parts: &[Vec<FinetunePair>]) -> Result<Vec<FinetunePair>, CorpusError> {
    if parts.is_empty() {
        return Err(CorpusError::NoParts);
    }
    let total = parts.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    for part in parts {
        let mut seen = HashSet::with_capacity(part.len());
        for pair in part {
            pair.validate()?;
            if !seen.insert(pair.id.as_str()) {
                return Err(CorpusError::DuplicatePartId(pair.id.clone()));
            }
            out.push(FinetunePair {
                id: format!("{}/{}", pair.source, pair.id),
                ..pair.clone()
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseHeader {
    pub model_name: String,
    pub dataset_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ResponseLine {
    id: String,
    response: String,
}

/// One model's answers to one dataset. Missing ids are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSet {
    pub model_name: String,
    pub dataset_name: String,
    pub responses: BTreeMap<String, String>,
}

impl ResponseSet {
    pub fn get(&self, id: &str) -> Option<&str> {
        self.responses.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Writes the set, ordering lines by the dataset's record order.
    pub fn save(&self, path: &Path, dataset: &EvalDataset) -> Result<(), CorpusError> {
        let mut buf = to_jsonl([&ResponseHeader {
            model_name: self.model_name.clone(),
            dataset_name: self.dataset_name.clone(),
        }]);
        let lines: Vec<ResponseLine> = dataset
            .records()
            .iter()
            .filter_map(|r| {
                self.responses.get(&r.id).map(|text| ResponseLine {
                    id: r.id.clone(),
                    response: text.clone(),
                })
            })
            .collect();
        buf.extend(to_jsonl(&lines));
        write_atomic(path, &buf)?;
        Ok(())
    }
}

pub fn load_response_set(path: &Path, dataset: &EvalDataset) -> Result<ResponseSet, CorpusError> {
    let display = path.display().to_string();
    let rows: Vec<(usize, serde_json::Value)> = read_jsonl(path)?;
    let mut rows = rows.into_iter();
    let (hline, header) = rows.next().ok_or_else(|| CorpusError::MissingHeader {
        path: display.clone(),
    })?;
    let header: ResponseHeader = serde_json::from_value(header).map_err(|e| IoError::Parse {
        path: display.clone(),
        line: hline,
        message: format!("bad header: {e}"),
    })?;
    if header.model_name.trim().is_empty() {
        return Err(CorpusError::MissingModelName { path: display });
    }
    if header.dataset_name != dataset.name() {
        return Err(CorpusError::DatasetMismatch {
            path: display,
            expected: dataset.name().to_string(),
            found: header.dataset_name,
        });
    }
    let mut responses = BTreeMap::new();
    for (line, value) in rows {
        let row: ResponseLine = serde_json::from_value(value).map_err(|e| IoError::Parse {
            path: display.clone(),
            line,
            message: e.to_string(),
        })?;
        if dataset.get(&row.id).is_none() {
            return Err(CorpusError::UnknownId {
                path: display,
                line,
                id: row.id,
                dataset: dataset.name().to_string(),
            });
        }
        if responses.insert(row.id.clone(), row.response).is_some() {
            return Err(CorpusError::DuplicateId {
                path: display,
                line,
                id: row.id,
            });
        }
    }
    Ok(ResponseSet {
        model_name: header.model_name,
        dataset_name: header.dataset_name,
        responses,
    })
}

/// Loads every `*.jsonl` response file in `dir`, sorted by file name.
pub fn load_response_dir(
    dir: &Path,
    dataset: &EvalDataset,
) -> Result<Vec<ResponseSet>, CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|e| IoError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| IoError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "jsonl") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| load_response_set(p, dataset))
        .collect()
}
