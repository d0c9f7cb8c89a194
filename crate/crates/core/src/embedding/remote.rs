//! Client for an embedding service speaking
//! `POST {"texts": [...]}` -> `{"embeddings": [[...], ...]}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Embedding, ProviderConfig};
use crate::nomenclature::normalize;

#[derive(Debug, Error)]
pub enum RemoteError {
    /// Connection or timeout failure; worth retrying.
    #[error("transport failure talking to {url}: {message}")]
    Transport { url: String, message: String },
    /// Non-2xx answer. 5xx is retryable, 4xx is a request or configuration fault.
    #[error("embedding service returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response body: {0}")]
    Decode(String),
    #[error("sent {sent} texts but received {received} embeddings")]
    CountMismatch { sent: usize, received: usize },
    #[error("embedding dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl RemoteError {
    pub fn is_retryable(&self) -> bool {
        match self {
            RemoteError::Transport { .. } => true,
            RemoteError::Status { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f32>>,
}

fn post_batch(agent: &ureq::Agent, url: &str, texts: &[String]) -> Result<Vec<Vec<f32>>, RemoteError> {
    let response = agent
        .post(url)
        .send_json(EmbedRequest { texts })
        .map_err(|e| match e {
            ureq::Error::Status(status, resp) => RemoteError::Status {
                status,
                body: resp.into_string().unwrap_or_default(),
            },
            ureq::Error::Transport(t) => RemoteError::Transport {
                url: url.to_string(),
                message: t.to_string(),
            },
        })?;
    let body: EmbedResponse = response
        .into_json()
        .map_err(|e| RemoteError::Decode(e.to_string()))?;
    if body.embeddings.len() != texts.len() {
        return Err(RemoteError::CountMismatch {
            sent: texts.len(),
            received: body.embeddings.len(),
        });
    }
    Ok(body.embeddings)
}

/// Embeds `texts` through the remote service in batches of `config.batch_size`,
/// with up to `config.max_in_flight` batches outstanding. Output order matches
/// input order and every vector is re-normalized to unit length.
pub fn embed_remote(texts: &[String], config: &ProviderConfig) -> Result<Vec<Embedding>, RemoteError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_millis(config.timeout_ms))
        .build();
    let payload: Vec<String> = if config.send_normalized {
        texts.iter().map(|t| normalize(t)).collect()
    } else {
        texts.to_vec()
    };
    let batches: Vec<&[String]> = payload.chunks(config.batch_size.max(1)).collect();
    let url = config.endpoint_url.as_str();

    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(texts.len());
    for wave in batches.chunks(config.max_in_flight.max(1)) {
        let results: Vec<Result<Vec<Vec<f32>>, RemoteError>> = std::thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .map(|batch| s.spawn(|| post_batch(&agent, url, batch)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("embedding request thread panicked"))
                .collect()
        });
        for r in results {
            rows.extend(r?);
        }
    }

    let expected = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != expected) {
        return Err(RemoteError::DimensionMismatch {
            expected,
            found: bad.len(),
        });
    }
    if expected == 0 {
        return Err(RemoteError::DimensionMismatch { expected: 1, found: 0 });
    }
    let provider = config.provider_id();
    Ok(rows
        .into_iter()
        .map(|values| Embedding::new(values, provider.clone()).normalized())
        .collect())
}
