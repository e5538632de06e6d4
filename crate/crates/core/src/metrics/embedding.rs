//! Embedding vectors, cosine similarity and the provider cache.
//!
//! Vectors come from an external provider (`POST {texts}` → `{vectors}`) and
//! are cached on disk, one file per SHA-256 of the text, as raw little-endian
//! `f64` bytes so that reruns read back bit-identical values.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::write_atomic;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding provider unreachable: {0}")]
    Unreachable(String),
    #[error("malformed embedding response: {0}")]
    Malformed(String),
    #[error("embedding dimension changed within run: expected {expected}, got {found}")]
    DimensionInconsistent { expected: usize, found: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("empty embedding vector")]
    Empty,
    #[error("embedding cache {path}: {message}")]
    Cache { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    components: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EmbeddingError> {
        if components.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(EmbeddingError::Malformed("non-finite component".into()));
        }
        Ok(Self { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dimension() != b.dimension() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (aa, bb) = (
        dot(&a.components, &a.components),
        dot(&b.components, &b.components),
    );
    if aa == 0.0 || bb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    // sqrt(aa * bb) rather than |a|·|b| keeps cos(v, v) exactly 1.
    Ok((dot(&a.components, &b.components) / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}

/// Source of sentence embeddings.
pub trait EmbeddingProvider: Send + Sync {
    /// Returns one vector per input text, in order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct HttpEmbeddingProvider {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpEmbeddingProvider {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            agent,
        }
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { texts })
            .map_err(|e| EmbeddingError::Unreachable(e.to_string()))?;
        let body: EmbedResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| EmbeddingError::Malformed(e.to_string()))?;
        if body.vectors.len() != texts.len() {
            return Err(EmbeddingError::Malformed(format!(
                "sent {} texts, received {} vectors",
                texts.len(),
                body.vectors.len()
            )));
        }
        Ok(body.vectors)
    }
}

/// Deterministic offline provider: a bias component plus signed feature
/// hashing of the text's tokens. Texts sharing vocabulary get similar vectors.
#[derive(Debug, Clone, Copy)]
pub struct StubEmbeddingProvider {
    pub dimension: usize,
}

impl Default for StubEmbeddingProvider {
    fn default() -> Self {
        Self { dimension: 64 }
    }
}

impl StubEmbeddingProvider {
    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let dim = self.dimension.max(2);
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        for token in super::tokenize(text).iter() {
            let h = Sha256::digest(token.as_bytes());
            let mut idx_bytes = [0u8; 8];
            idx_bytes.copy_from_slice(&h[..8]);
            let idx = 1 + (u64::from_le_bytes(idx_bytes) % (dim as u64 - 1)) as usize;
            let sign = if h[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[idx] += sign;
        }
        v
    }
}

impl EmbeddingProvider for StubEmbeddingProvider {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Hex SHA-256 of the exact text bytes; names the cache file.
pub fn content_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Wraps a provider with an in-memory and on-disk cache and enforces a single
/// embedding dimension per run.
pub struct CachedEmbedder<P> {
    provider: P,
    cache_dir: Option<PathBuf>,
    memory: RwLock<HashMap<String, Arc<EmbeddingVector>>>,
    dimension: Mutex<Option<usize>>,
    write_lock: Mutex<()>,
    batch_size: usize,
}

impl<P: EmbeddingProvider> CachedEmbedder<P> {
    pub fn new(provider: P, cache_dir: Option<PathBuf>) -> Self {
        Self {
            provider,
            cache_dir,
            memory: RwLock::new(HashMap::new()),
            dimension: Mutex::new(None),
            write_lock: Mutex::new(()),
            batch_size: 64,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn dimension(&self) -> Option<usize> {
        *self.dimension.lock().unwrap()
    }

    fn check_dimension(&self, found: usize) -> Result<(), EmbeddingError> {
        let mut dim = self.dimension.lock().unwrap();
        match *dim {
            Some(expected) if expected != found => {
                Err(EmbeddingError::DimensionInconsistent { expected, found })
            }
            Some(_) => Ok(()),
            None => {
                *dim = Some(found);
                Ok(())
            }
        }
    }

    fn cache_path(&self, key: &str) -> Option<PathBuf> {
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("{key}.f64")))
    }

    fn read_disk(&self, key: &str) -> Result<Option<EmbeddingVector>, EmbeddingError> {
        let Some(path) = self.cache_path(key) else {
            return Ok(None);
        };
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(cache_err(&path, e.to_string())),
        };
        if bytes.is_empty() || bytes.len() % 8 != 0 {
            return Err(cache_err(
                &path,
                format!("{} bytes is not a f64 array", bytes.len()),
            ));
        }
        let comps = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        EmbeddingVector::new(comps).map(Some)
    }

    fn write_disk(&self, key: &str, v: &EmbeddingVector) -> Result<(), EmbeddingError> {
        let Some(path) = self.cache_path(key) else {
            return Ok(());
        };
        let _guard = self.write_lock.lock().unwrap();
        if path.exists() {
            return Ok(());
        }
        let dir = path.parent().unwrap();
        std::fs::create_dir_all(dir).map_err(|e| cache_err(dir, e.to_string()))?;
        let bytes: Vec<u8> = v
            .components()
            .iter()
            .flat_map(|c| c.to_le_bytes())
            .collect();
        write_atomic(&path, &bytes).map_err(|e| cache_err(&path, e.to_string()))
    }

    fn lookup(&self, key: &str) -> Result<Option<Arc<EmbeddingVector>>, EmbeddingError> {
        if let Some(v) = self.memory.read().unwrap().get(key) {
            return Ok(Some(v.clone()));
        }
        if let Some(v) = self.read_disk(key)? {
            self.check_dimension(v.dimension())?;
            let v = Arc::new(v);
            self.memory
                .write()
                .unwrap()
                .insert(key.to_string(), v.clone());
            return Ok(Some(v));
        }
        Ok(None)
    }

    pub fn embed(&self, text: &str) -> Result<Arc<EmbeddingVector>, EmbeddingError> {
        let mut out = self.embed_many(&[text.to_string()])?;
        Ok(out.pop().unwrap())
    }

    /// Embeds `texts`, consulting the cache first and sending the misses to the
    /// provider in batches.
    pub fn embed_many(
        &self,
        texts: &[String],
    ) -> Result<Vec<Arc<EmbeddingVector>>, EmbeddingError> {
        let keys: Vec<String> = texts.iter().map(|t| content_key(t)).collect();
        let mut found: Vec<Option<Arc<EmbeddingVector>>> = Vec::with_capacity(texts.len());
        let mut misses: Vec<usize> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for (i, key) in keys.iter().enumerate() {
            let hit = self.lookup(key)?;
            if hit.is_none() && queued.insert(key.as_str()) {
                misses.push(i);
            }
            found.push(hit);
        }

        for chunk in misses.chunks(self.batch_size) {
            let batch: Vec<String> = chunk.iter().map(|&i| texts[i].clone()).collect();
            let vectors = self.provider.embed_batch(&batch)?;
            if vectors.len() != batch.len() {
                return Err(EmbeddingError::Malformed(format!(
                    "provider returned {} vectors for {} texts",
                    vectors.len(),
                    batch.len()
                )));
            }
            for (&i, comps) in chunk.iter().zip(vectors) {
                let v = EmbeddingVector::new(comps)?;
                self.check_dimension(v.dimension())?;
                self.write_disk(&keys[i], &v)?;
                self.memory
                    .write()
                    .unwrap()
                    .insert(keys[i].clone(), Arc::new(v));
            }
        }

        let memory = self.memory.read().unwrap();
        Ok(found
            .into_iter()
            .zip(&keys)
            .map(|(hit, key)| hit.unwrap_or_else(|| memory[key].clone()))
            .collect())
    }
}

fn cache_err(path: &Path, message: String) -> EmbeddingError {
    EmbeddingError::Cache {
        path: path.display().to_string(),
        message,
    }
}
