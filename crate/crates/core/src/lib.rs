//! Evaluation toolkit for instruction-following language models.
//!
//! The crate is organised around the data flow of a pairwise-preference
//! evaluation:
//!
//! - [`corpus`]: instruction datasets, finetune pairs, model response sets,
//!   quality filtering and dataset combination.
//! - [`metrics`]: tokenization, ROUGE-1/2/L and embedding cosine similarity.
//! - [`rating`]: vote log, Elo (sequential and permutation-resampled) and WinPct.
//! - [`analysis`]: per-model metric tables, per-category WinPct and metric
//!   correlation matrices.
//! - [`arena`]: the blind matchup scheduler and durable vote recording that back
//!   the HTTP voting service.
//! - [`simulate`]: synthetic Bradley–Terry vote generation for testing and fixtures.

pub mod analysis;
pub mod arena;
pub mod corpus;
pub mod io;
pub mod metrics;
pub mod rating;
pub mod simulate;

pub use analysis::{
    category_winpct, metric_correlations, score_models, CategoryBreakdown, CorrelationMatrix,
    MetricColumn, MetricReport, MetricRow,
};
pub use arena::{Arena, ArenaConfig, ClientMatchup, SchedulerPolicy, SideOutcome};
pub use corpus::{
    combine, filter_by_score, load_dataset, load_response_set, EvalDataset, FinetunePair,
    InstructionRecord, QualityScorer, ResponseSet,
};
pub use metrics::{
    cosine_similarity, rouge_l, rouge_n, tokenize, CachedEmbedder, EmbeddingProvider,
    EmbeddingVector, RougeScore, TokenSequence,
};
pub use rating::{
    elo_permuted, elo_sequential, elo_update, rating_report, winpct, EloConfig, Outcome,
    RatingReport, RatingRow, Vote, VoteLog,
};
