//! Report artifacts built from metrics and votes: per-model score tables,
//! per-category WinPct and metric correlation matrices.

mod categories;
mod correlation;
pub mod plot;
mod scoring;
pub mod tables;

pub use categories::{category_winpct, CategoryBreakdown, CategoryCell};
pub use correlation::{
    average_ranks, metric_correlations, pearson, score_columns, spearman, CorrelationMatrix,
    CorrelationMethod, MetricColumn,
};
pub use scoring::{rouge_f1s, score_models, MetricReport, MetricRow, RecordScores};

use crate::metrics::EmbeddingError;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("dataset {0:?} has no reference answers")]
    NoReferences(String),
    #[error("response set of {model:?} targets dataset {found:?}, expected {expected:?}")]
    DatasetMismatch {
        model: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("vote references unknown record {0:?}")]
    UnknownRecord(String),
    #[error("record {0:?} has no category")]
    MissingCategory(String),
    #[error("correlation needs at least 3 models, got {0}")]
    TooFewModels(usize),
    #[error("metric column {0:?} is incomplete")]
    IncompleteColumn(String),
    #[error("model {model:?} missing from {report:?} metric report")]
    MissingModel { model: String, report: String },
}
