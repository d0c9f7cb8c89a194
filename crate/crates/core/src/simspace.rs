//! Similarity space over embeddings: cosine matrices, second-order alignment
//! against an external descriptor space, thresholded retrieval, metal
//! neighbourhood purity and a deterministic 2-D projection.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSet;
use crate::rng::SplitMix64;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("cosine similarity is undefined for a zero vector{}", .label.as_ref().map(|l| format!(" ('{l}')")).unwrap_or_default())]
    UndefinedSimilarity { label: Option<String> },
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("matrix labels differ at position {0}")]
    LabelMismatch(usize),
    #[error("unknown query refcode '{0}'")]
    UnknownQuery(String),
    #[error("k = {k} is invalid for a corpus of {n} items")]
    InvalidK { k: usize, n: usize },
    #[error("no metal label for '{0}'")]
    MissingLabel(String),
    #[error("at least {needed} points are required, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("centered data has rank below 2")]
    DegenerateRank,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    if u.len() != v.len() {
        return Err(SimError::DimensionMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(SimError::UndefinedSimilarity { label: None });
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Dense symmetric n×n matrix of pairwise cosines, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    /// CSV with a header of labels; each row starts with its label.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "refcode")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for (i, l) in self.labels.iter().enumerate() {
            write!(w, "{l}")?;
            for v in self.row(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub const DEFAULT_BLOCK_ROWS: usize = 1024;

/// Cosine matrix of labelled vectors, computed in row blocks of `block_rows`.
pub fn similarity_matrix_blocked(
    labels: &[String],
    vectors: &[Vec<f64>],
    block_rows: usize,
) -> Result<SimilarityMatrix, SimError> {
    let n = vectors.len();
    if let Some(d) = vectors.first().map(Vec::len) {
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(SimError::DimensionMismatch(d, v.len()));
        }
    }
    let norms: Vec<f64> = vectors.iter().map(|v| norm(v)).collect();
    if let Some(i) = norms.iter().position(|x| *x == 0.0) {
        return Err(SimError::UndefinedSimilarity {
            label: labels.get(i).cloned(),
        });
    }
    let mut values = vec![0.0; n * n];
    let block = block_rows.max(1) * n.max(1);
    values
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(b, chunk)| {
            for (r, row) in chunk.chunks_mut(n).enumerate() {
                let i = b * block_rows.max(1) + r;
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = (dot(&vectors[i], &vectors[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
                }
            }
        });
    Ok(SimilarityMatrix {
        labels: labels.to_vec(),
        values,
    })
}

pub fn similarity_matrix_of(labels: &[String], vectors: &[Vec<f64>]) -> Result<SimilarityMatrix, SimError> {
    similarity_matrix_blocked(labels, vectors, DEFAULT_BLOCK_ROWS)
}

pub fn similarity_matrix(set: &EmbeddingSet) -> Result<SimilarityMatrix, SimError> {
    let vectors: Vec<Vec<f64>> = set.embeddings.iter().map(|e| e.to_f64()).collect();
    similarity_matrix_of(&set.labels, &vectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentMode {
    /// Strict upper triangle only.
    #[default]
    #[serde(rename = "offdiag")]
    OffDiagonal,
    Full,
}

impl AlignmentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentMode::OffDiagonal => "offdiag",
            AlignmentMode::Full => "full",
        }
    }
}

fn flatten(m: &SimilarityMatrix, mode: AlignmentMode) -> Vec<f64> {
    let n = m.n();
    match mode {
        AlignmentMode::Full => m.values.clone(),
        AlignmentMode::OffDiagonal => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j))
            .collect(),
    }
}

/// Cosine between the flattened entries of two similarity matrices over the
/// same items in the same order.
pub fn second_order_alignment(
    a: &SimilarityMatrix,
    b: &SimilarityMatrix,
    mode: AlignmentMode,
) -> Result<f64, SimError> {
    if a.n() != b.n() {
        return Err(SimError::SizeMismatch(a.n(), b.n()));
    }
    if let Some(i) = a.labels.iter().zip(&b.labels).position(|(x, y)| x != y) {
        return Err(SimError::LabelMismatch(i));
    }
    cosine(&flatten(a, mode), &flatten(b, mode))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalHit {
    pub refcode: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalResult {
    pub query: String,
    pub threshold: f64,
    pub hits: Vec<RetrievalHit>,
}

pub const DEFAULT_RETRIEVAL_THRESHOLD: f64 = 0.85;

/// Items of `set` whose cosine to `query` is at least `threshold`, best first,
/// ties by refcode. Zero-vector items never match.
pub fn retrieve(
    query: &str,
    set: &EmbeddingSet,
    threshold: f64,
    k: Option<usize>,
) -> Result<RetrievalResult, SimError> {
    let qi = set
        .position(query)
        .ok_or_else(|| SimError::UnknownQuery(query.to_string()))?;
    let q = set.embeddings[qi].to_f64();
    if norm(&q) == 0.0 {
        return Err(SimError::UndefinedSimilarity {
            label: Some(query.to_string()),
        });
    }
    let mut hits: Vec<RetrievalHit> = set
        .embeddings
        .par_iter()
        .enumerate()
        .filter(|(i, _)| *i != qi)
        .filter_map(|(i, e)| {
            let score = cosine(&q, &e.to_f64()).ok()?;
            (score >= threshold).then(|| RetrievalHit {
                refcode: set.labels[i].clone(),
                score,
            })
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.refcode.cmp(&b.refcode))
    });
    if let Some(k) = k {
        hits.truncate(k);
    }
    Ok(RetrievalResult {
        query: query.to_string(),
        threshold,
        hits,
    })
}

/// Indices of the `k` most similar other items to `i`, ties by index.
fn top_k_neighbours(vectors: &[Vec<f64>], norms: &[f64], i: usize, k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = (0..vectors.len())
        .filter(|j| *j != i)
        .map(|j| (dot(&vectors[i], &vectors[j]) / (norms[i] * norms[j]), j))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.into_iter().map(|(_, j)| j).collect()
}

/// Mean fraction of each item's `k` nearest cosine neighbours that share its label.
pub fn neighbor_purity(
    set: &EmbeddingSet,
    labels: &HashMap<String, String>,
    k: usize,
) -> Result<f64, SimError> {
    let n = set.len();
    if k == 0 || k >= n {
        return Err(SimError::InvalidK { k, n });
    }
    let item_labels: Vec<&String> = set
        .labels
        .iter()
        .map(|r| labels.get(r).ok_or_else(|| SimError::MissingLabel(r.clone())))
        .collect::<Result<_, _>>()?;
    let vectors: Vec<Vec<f64>> = set.embeddings.iter().map(|e| e.to_f64()).collect();
    let norms: Vec<f64> = vectors.iter().map(|v| norm(v)).collect();
    if let Some(i) = norms.iter().position(|x| *x == 0.0) {
        return Err(SimError::UndefinedSimilarity {
            label: Some(set.labels[i].clone()),
        });
    }
    let fractions: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let same = top_k_neighbours(&vectors, &norms, i, k)
                .into_iter()
                .filter(|j| item_labels[*j] == item_labels[i])
                .count();
            same as f64 / k as f64
        })
        .collect();
    Ok(fractions.iter().sum::<f64>() / n as f64)
}

const POWER_MAX_ITERS: usize = 1000;
const POWER_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;

fn mat_vec(c: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    c.chunks(d).map(|row| dot(row, v)).collect()
}

/// Leading eigenpair of the symmetric matrix `c` by power iteration.
fn power_iteration(c: &[f64], d: usize) -> (f64, Vec<f64>) {
    // e1 plus a small fixed perturbation, so the start is never exactly
    // orthogonal to the leading eigenvector of axis-aligned data.
    let mut rng = SplitMix64::new(0x5eed_0001);
    let mut v: Vec<f64> = (0..d)
        .map(|j| {
            let jitter = 1e-3 * (rng.next_f64() * 2.0 - 1.0);
            if j == 0 { 1.0 + jitter } else { jitter }
        })
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    for _ in 0..POWER_MAX_ITERS {
        let w = mat_vec(c, d, &v);
        let lambda = dot(&v, &w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        let nw = norm(&w);
        if nw == 0.0 {
            return (0.0, v);
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if residual <= POWER_TOL * lambda.abs().max(1.0) {
            break;
        }
    }
    (dot(&v, &mat_vec(c, d, &v)), v)
}

fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Projects points onto the top two principal components (covariance power
/// iteration with deflation). Each component is oriented so its
/// largest-magnitude coordinate is positive.
pub fn pca_project(points: &[Vec<f64>]) -> Result<Vec<(f64, f64)>, SimError> {
    let n = points.len();
    if n < 3 {
        return Err(SimError::TooFewPoints { needed: 3, got: n });
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(SimError::DimensionMismatch(d, p.len()));
    }
    if d < 2 {
        return Err(SimError::DegenerateRank);
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![0.0; d * d];
    for a in 0..d {
        for b in a..d {
            let s = centered.iter().map(|p| p[a] * p[b]).sum::<f64>() / (n - 1) as f64;
            cov[a * d + b] = s;
            cov[b * d + a] = s;
        }
    }

    let (l1, mut v1) = power_iteration(&cov, d);
    for a in 0..d {
        for b in 0..d {
            cov[a * d + b] -= l1 * v1[a] * v1[b];
        }
    }
    let (l2, mut v2) = power_iteration(&cov, d);
    if l1 <= f64::MIN_POSITIVE || l2 <= RANK_TOL * l1 {
        return Err(SimError::DegenerateRank);
    }
    orient(&mut v1);
    orient(&mut v2);
    Ok(centered.iter().map(|p| (dot(p, &v1), dot(p, &v2))).collect())
}

/// Single-line JSON record for alignment and purity results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub value: f64,
    pub n: usize,
    pub mode: String,
}
