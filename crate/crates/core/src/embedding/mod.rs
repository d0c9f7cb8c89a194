//! Name embeddings: the deterministic n-gram baseline, a client for a remote
//! embedding service, and the binary embedding store.

mod baseline;
mod remote;
mod store;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{char_ngrams, embed_baseline, fnv1a64};
pub use remote::{embed_remote, RemoteError};
pub use store::{
    decode_store, encode_store, load_embeddings, load_embeddings_with_provider, store_embeddings,
    StoreError, STORED_PROVIDER_ID, STORE_MAGIC, STORE_VERSION,
};

/// A fixed-dimension vector tagged with the provider that produced it.
/// Non-zero embeddings are unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub values: Vec<f32>,
    pub provider_id: String,
}

impl Embedding {
    pub fn new(values: Vec<f32>, provider_id: impl Into<String>) -> Self {
        Self {
            values,
            provider_id: provider_id.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| f64::from(*v)).collect()
    }

    /// Rescales to unit L2 norm; the zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let norm = self.values.iter().map(|v| f64::from(*v).powi(2)).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut self.values {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[serde(alias = "baselinengram")]
    Baseline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    /// Baseline output dimension.
    pub dim: usize,
    /// Inclusive character n-gram lengths for the baseline.
    pub ngram_range: (usize, usize),
    pub endpoint_url: String,
    pub batch_size: usize,
    pub timeout_ms: u64,
    /// Remote only: send normalized names instead of the raw text.
    pub send_normalized: bool,
    /// Remote only: batches allowed in flight at once.
    pub max_in_flight: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Baseline,
            dim: 512,
            ngram_range: (3, 5),
            endpoint_url: String::new(),
            batch_size: 32,
            timeout_ms: 30_000,
            send_normalized: false,
            max_in_flight: 4,
        }
    }
}

impl ProviderConfig {
    pub fn remote(endpoint_url: impl Into<String>) -> Self {
        Self {
            kind: ProviderKind::Remote,
            endpoint_url: endpoint_url.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        match self.kind {
            ProviderKind::Baseline => {
                if self.dim == 0 {
                    return bad("dim must be positive");
                }
                if self.ngram_range.0 == 0 || self.ngram_range.0 > self.ngram_range.1 {
                    return bad("ngram_range must satisfy 1 <= lower <= upper");
                }
            }
            ProviderKind::Remote => {
                if self.endpoint_url.is_empty() {
                    return bad("remote provider requires an endpoint URL");
                }
                if self.max_in_flight == 0 {
                    return bad("max_in_flight must be at least 1");
                }
            }
        }
        Ok(())
    }

    /// Stable identity string recorded on every embedding.
    pub fn provider_id(&self) -> String {
        match self.kind {
            ProviderKind::Baseline => format!(
                "baseline-ngram-fnv1a:d{}:n{}-{}",
                self.dim, self.ngram_range.0, self.ngram_range.1
            ),
            ProviderKind::Remote => format!("remote:{}", self.endpoint_url),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Anything that turns a batch of names into embeddings, in input order.
pub trait Embedder: Sync {
    fn provider_id(&self) -> String;
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError>;
}

/// Embedder backed by a [`ProviderConfig`].
#[derive(Debug, Clone)]
pub struct Provider {
    config: ProviderConfig,
}

impl Provider {
    pub fn new(config: ProviderConfig) -> Result<Self, EmbeddingError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }
}

impl Embedder for Provider {
    fn provider_id(&self) -> String {
        self.config.provider_id()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EmbeddingError> {
        match self.config.kind {
            ProviderKind::Baseline => Ok(texts
                .par_iter()
                .map(|t| embed_baseline(t, &self.config))
                .collect()),
            ProviderKind::Remote => Ok(embed_remote(texts, &self.config)?),
        }
    }
}

/// Labelled embeddings with refcode lookup.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSet {
    pub labels: Vec<String>,
    pub embeddings: Vec<Embedding>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(records: Vec<(String, Embedding)>) -> Self {
        let mut set = Self::default();
        for (label, emb) in records {
            set.index.entry(label.clone()).or_insert(set.labels.len());
            set.labels.push(label);
            set.embeddings.push(emb);
        }
        set
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.embeddings.first().map(Embedding::dim)
    }

    pub fn position(&self, refcode: &str) -> Option<usize> {
        self.index.get(refcode).copied()
    }

    pub fn get(&self, refcode: &str) -> Option<&Embedding> {
        self.position(refcode).map(|i| &self.embeddings[i])
    }

    pub fn records(&self) -> Vec<(String, Embedding)> {
        self.labels.iter().cloned().zip(self.embeddings.iter().cloned()).collect()
    }
}
