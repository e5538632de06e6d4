//! Automatic similarity metrics between a model response and a reference
//! answer.

mod embedding;
mod rouge;
mod tokenize;

pub use embedding::{
    content_key, cosine_similarity, CachedEmbedder, EmbeddingError, EmbeddingProvider,
    EmbeddingVector, HttpEmbeddingProvider, StubEmbeddingProvider,
};
pub use rouge::{lcs_len, rouge_l, rouge_n, RougeScore};
pub use tokenize::{tokenize, turkish_lowercase, TokenSequence};
