//! Ridge and k-nearest-neighbour regression on embeddings, k-fold
//! cross-validation and mask ablations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusRecord;
use crate::embedding::{load_embeddings, EmbeddingError, Embedder, EmbeddingSet, StoreError};
use crate::nomenclature::{mask, MaskClass};
use crate::rng::{shuffle, SplitMix64};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("invalid regression config: {0}")]
    Config(String),
    #[error("cannot split {n} samples into {folds} folds")]
    TooFewSamples { n: usize, folds: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("X has {rows} rows but y has {targets} values")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("k = {k} exceeds the {n} training points")]
    KTooLarge { k: usize, n: usize },
    #[error("only {labeled} records carry target '{target}', {needed} needed")]
    MissingLabels { target: String, labeled: usize, needed: usize },
    #[error("normal equations are not positive definite")]
    Singular,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {message}")]
    ModelFile { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Ridge { lambda: f64 },
    Knn { k: usize, weighting: Weighting },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub model: ModelSpec,
    pub folds: usize,
    pub seed: u64,
    pub clamp_nonnegative: bool,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Ridge { lambda: 1.0 },
            folds: 10,
            seed: 0,
            clamp_nonnegative: false,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<(), PredictError> {
        if self.folds < 2 {
            return Err(PredictError::Config("folds must be at least 2".into()));
        }
        match self.model {
            ModelSpec::Ridge { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(PredictError::Config("ridge lambda must be positive".into()))
            }
            ModelSpec::Knn { k: 0, .. } => Err(PredictError::Config("knn k must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Train indices and test indices of one fold.
pub type FoldSplit = (Vec<usize>, Vec<usize>);

/// Test indices of one fold and the predictions made for them.
pub type FoldPredictions = (Vec<usize>, Vec<f64>);

/// Train/test index pairs. Indices are shuffled with SplitMix64 Fisher–Yates;
/// the first `n % folds` test sets hold one extra item. Both halves of each
/// pair are sorted.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<FoldSplit>, PredictError> {
    if folds == 0 || folds > n {
        return Err(PredictError::TooFewSamples { n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut SplitMix64::new(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut splits = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train.sort_unstable();
        splits.push((train, test));
        start += size;
    }
    Ok(splits)
}

pub trait Regressor: Sync {
    fn dim(&self) -> usize;
    fn predict(&self, x: &[f64]) -> f64;

    fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
}

impl Regressor for RidgeModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> f64 {
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }
}

fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize, PredictError> {
    if x.len() != y.len() {
        return Err(PredictError::LengthMismatch { rows: x.len(), targets: y.len() });
    }
    let d = x.first().map_or(0, Vec::len);
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(PredictError::DimensionMismatch { expected: d, found: row.len() });
    }
    if y.iter().chain(x.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(PredictError::NonFinite);
    }
    Ok(d)
}

/// Minimizes ‖Xw + b − y‖² + λ‖w‖² with an unpenalized bias, via a Cholesky
/// solve of the centered normal equations.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RidgeModel, PredictError> {
    let d = check_xy(x, y)?;
    let n = x.len();
    if n == 0 {
        return Err(PredictError::TooFewSamples { n, folds: 1 });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(PredictError::Config("ridge lambda must be positive".into()));
    }
    let x_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, d, |i, j| x[i][j] - x_mean[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let mut gram = xc.tr_mul(&xc);
    for j in 0..d {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.tr_mul(&yc);
    let w = gram.cholesky().ok_or(PredictError::Singular)?.solve(&rhs);
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = y_mean - x_mean.iter().zip(&weights).map(|(m, w)| m * w).sum::<f64>();
    Ok(RidgeModel { weights, bias, lambda })
}

pub const KNN_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    /// Training rows scaled to unit length; zero rows stay zero.
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub k: usize,
    pub weighting: Weighting,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter().map(|a| a / n).collect()
    } else {
        v.to_vec()
    }
}

pub fn fit_knn(x: &[Vec<f64>], y: &[f64], k: usize, weighting: Weighting) -> Result<KnnModel, PredictError> {
    check_xy(x, y)?;
    if k == 0 {
        return Err(PredictError::Config("knn k must be at least 1".into()));
    }
    if k > x.len() {
        return Err(PredictError::KTooLarge { k, n: x.len() });
    }
    Ok(KnnModel {
        points: x.iter().map(|r| unit(r)).collect(),
        targets: y.to_vec(),
        k,
        weighting,
    })
}

impl KnnModel {
    /// Cosine distance to every training point; a zero vector is at distance 1.
    pub fn distances(&self, x: &[f64]) -> Vec<f64> {
        let q = unit(x);
        self.points
            .iter()
            .map(|p| 1.0 - p.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0))
            .collect()
    }
}

impl Regressor for KnnModel {
    fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let dist = self.distances(x);
        let mut order: Vec<usize> = (0..dist.len()).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let nearest = &order[..self.k];
        match self.weighting {
            Weighting::Uniform => nearest.iter().map(|&i| self.targets[i]).sum::<f64>() / self.k as f64,
            Weighting::InverseDistance => {
                let (num, den) = nearest.iter().fold((0.0, 0.0), |(num, den), &i| {
                    let w = 1.0 / (KNN_EPSILON + dist[i]);
                    (num + w * self.targets[i], den + w)
                });
                num / den
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ridge(RidgeModel),
    Knn(KnnModel),
}

impl Regressor for Model {
    fn dim(&self) -> usize {
        match self {
            Model::Ridge(m) => m.dim(),
            Model::Knn(m) => m.dim(),
        }
    }

    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Ridge(m) => m.predict(x),
            Model::Knn(m) => m.predict(x),
        }
    }
}

pub fn fit(spec: &ModelSpec, x: &[Vec<f64>], y: &[f64]) -> Result<Model, PredictError> {
    match *spec {
        ModelSpec::Ridge { lambda } => fit_ridge(x, y, lambda).map(Model::Ridge),
        ModelSpec::Knn { k, weighting } => fit_knn(x, y, k, weighting).map(Model::Knn),
    }
}

/// Regression scores. `r2` is `None` when the targets have zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub r2: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
}

/// R² about the mean of `truth`, MAE and RMSE.
pub fn score(truth: &[f64], pred: &[f64]) -> Metrics {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum();
    let mae = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / n;
    Metrics {
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        mae,
        rmse: (ss_res / n).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target_name: String,
    pub provider_id: String,
    pub model: ModelSpec,
    pub folds: usize,
    pub seed: u64,
    pub clamp_nonnegative: bool,
    pub n_samples: usize,
    pub per_fold: Vec<Metrics>,
    /// Unweighted mean over folds; undefined fold R² values are left out.
    pub aggregate: Metrics,
    pub diagnostics: Vec<String>,
}

/// Out-of-fold predictions: for each fold, its test indices and the
/// predictions of a model fitted on the remaining rows.
pub fn fold_predictions(
    x: &[Vec<f64>],
    y: &[f64],
    config: &RegressionConfig,
) -> Result<Vec<FoldPredictions>, PredictError> {
    config.validate()?;
    check_xy(x, y)?;
    let splits = kfold_split(x.len(), config.folds, config.seed)?;
    splits
        .into_par_iter()
        .map(|(train, test)| {
            let xt: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = fit(&config.model, &xt, &yt)?;
            let pred = test
                .iter()
                .map(|&i| {
                    let p = model.predict(&x[i]);
                    if config.clamp_nonnegative { p.max(0.0) } else { p }
                })
                .collect();
            Ok((test, pred))
        })
        .collect()
}

/// k-fold cross-validation on precomputed vectors.
pub fn cross_validate_vectors(
    x: &[Vec<f64>],
    y: &[f64],
    config: &RegressionConfig,
    target_name: &str,
    provider_id: &str,
) -> Result<FitReport, PredictError> {
    let per_fold: Vec<Metrics> = fold_predictions(x, y, config)?
        .iter()
        .map(|(test, pred)| {
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            score(&truth, pred)
        })
        .collect();

    let mut diagnostics = Vec::new();
    for (f, m) in per_fold.iter().enumerate() {
        if m.r2.is_none() {
            diagnostics.push(format!("fold {f}: zero target variance, R² undefined and excluded from the mean"));
        }
    }
    let defined: Vec<f64> = per_fold.iter().filter_map(|m| m.r2).collect();
    let folds = per_fold.len() as f64;
    let aggregate = Metrics {
        r2: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        mae: per_fold.iter().map(|m| m.mae).sum::<f64>() / folds,
        rmse: per_fold.iter().map(|m| m.rmse).sum::<f64>() / folds,
    };
    Ok(FitReport {
        target_name: target_name.to_string(),
        provider_id: provider_id.to_string(),
        model: config.model,
        folds: config.folds,
        seed: config.seed,
        clamp_nonnegative: config.clamp_nonnegative,
        n_samples: x.len(),
        per_fold,
        aggregate,
        diagnostics,
    })
}

/// Records carrying `target`, in input order, with their target values.
pub fn labeled<'a>(records: &'a [CorpusRecord], target: &str) -> (Vec<&'a CorpusRecord>, Vec<f64>) {
    records
        .iter()
        .filter_map(|r| r.properties.get(target).map(|v| (r, *v)))
        .unzip()
}

fn labeled_checked<'a>(
    records: &'a [CorpusRecord],
    target: &str,
    config: &RegressionConfig,
) -> Result<(Vec<&'a CorpusRecord>, Vec<f64>), PredictError> {
    config.validate()?;
    let (recs, y) = labeled(records, target);
    if recs.len() < config.folds {
        return Err(PredictError::MissingLabels {
            target: target.to_string(),
            labeled: recs.len(),
            needed: config.folds,
        });
    }
    Ok((recs, y))
}

fn embed_names(provider: &dyn Embedder, names: Vec<String>) -> Result<Vec<Vec<f64>>, PredictError> {
    Ok(provider.embed(&names)?.iter().map(|e| e.to_f64()).collect())
}

/// Embeds the records labeled with `target` and cross-validates on them.
/// Unlabeled records are skipped.
pub fn cross_validate(
    records: &[CorpusRecord],
    target: &str,
    provider: &dyn Embedder,
    config: &RegressionConfig,
) -> Result<FitReport, PredictError> {
    let (recs, y) = labeled_checked(records, target, config)?;
    let x = embed_names(provider, recs.iter().map(|r| r.name.clone()).collect())?;
    cross_validate_vectors(&x, &y, config, target, &provider.provider_id())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub baseline: FitReport,
    pub per_class: BTreeMap<MaskClass, FitReport>,
    /// Baseline aggregate R² minus masked aggregate R²; `None` if either is undefined.
    pub deltas: BTreeMap<MaskClass, Option<f64>>,
}

/// Re-runs cross-validation with each mask class applied to the names, on the
/// same folds as the unmasked baseline.
pub fn ablate(
    records: &[CorpusRecord],
    target: &str,
    provider: &dyn Embedder,
    config: &RegressionConfig,
    classes: &[MaskClass],
) -> Result<AblationReport, PredictError> {
    let baseline = cross_validate(records, target, provider, config)?;
    let (recs, y) = labeled_checked(records, target, config)?;
    let mut per_class = BTreeMap::new();
    let mut deltas = BTreeMap::new();
    for &class in classes.iter().collect::<BTreeSet<_>>() {
        let only = BTreeSet::from([class]);
        let masked: Vec<String> = recs.par_iter().map(|r| mask(&r.name, &only)).collect();
        let x = embed_names(provider, masked)?;
        let report = cross_validate_vectors(&x, &y, config, target, &provider.provider_id())?;
        let delta = baseline.aggregate.r2.zip(report.aggregate.r2).map(|(b, m)| b - m);
        deltas.insert(class, delta);
        per_class.insert(class, report);
    }
    Ok(AblationReport { baseline, per_class, deltas })
}

const MODEL_FORMAT: &str = "mofname-model";

/// First line of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format: String,
    pub version: u32,
    pub model: ModelSpec,
    pub dim: usize,
    pub target: String,
    pub provider_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bias: Option<f64>,
    /// Embedding store holding the KNN training points.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub store: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refcodes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub targets: Option<Vec<f64>>,
}

fn model_err(path: &Path, message: impl Into<String>) -> PredictError {
    PredictError::ModelFile {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Writes a JSON header line followed by the weights as f32 little-endian.
pub fn save_ridge(model: &RidgeModel, target: &str, provider_id: &str, path: impl AsRef<Path>) -> Result<(), PredictError> {
    let path = path.as_ref();
    let header = ModelHeader {
        format: MODEL_FORMAT.into(),
        version: 1,
        model: ModelSpec::Ridge { lambda: model.lambda },
        dim: model.weights.len(),
        target: target.into(),
        provider_id: provider_id.into(),
        bias: Some(model.bias),
        store: None,
        refcodes: None,
        targets: None,
    };
    let mut bytes = serde_json::to_vec(&header).map_err(|e| model_err(path, e.to_string()))?;
    bytes.push(b'\n');
    for w in &model.weights {
        bytes.extend_from_slice(&(*w as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| model_err(path, e.to_string()))
}

/// Writes a KNN model that refers to `store` for its training points.
#[allow(clippy::too_many_arguments)]
pub fn save_knn(
    k: usize,
    weighting: Weighting,
    dim: usize,
    refcodes: &[String],
    targets: &[f64],
    store: &str,
    target: &str,
    provider_id: &str,
    path: impl AsRef<Path>,
) -> Result<(), PredictError> {
    let path = path.as_ref();
    let header = ModelHeader {
        format: MODEL_FORMAT.into(),
        version: 1,
        model: ModelSpec::Knn { k, weighting },
        dim,
        target: target.into(),
        provider_id: provider_id.into(),
        bias: None,
        store: Some(store.into()),
        refcodes: Some(refcodes.to_vec()),
        targets: Some(targets.to_vec()),
    };
    let mut f = fs::File::create(path).map_err(|e| model_err(path, e.to_string()))?;
    serde_json::to_writer(&mut f, &header).map_err(|e| model_err(path, e.to_string()))?;
    f.write_all(b"\n").map_err(|e| model_err(path, e.to_string()))
}

/// Reads a model file. A relative KNN store path is resolved against the
/// model file's directory.
pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelHeader, Model), PredictError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| model_err(path, e.to_string()))?;
    let split = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| model_err(path, "missing header line"))?;
    let header: ModelHeader =
        serde_json::from_slice(&bytes[..split]).map_err(|e| model_err(path, format!("bad header: {e}")))?;
    if header.format != MODEL_FORMAT || header.version != 1 {
        return Err(model_err(path, "not a version 1 model file"));
    }
    let payload = &bytes[split + 1..];
    match header.model {
        ModelSpec::Ridge { lambda } => {
            if payload.len() != header.dim * 4 {
                return Err(model_err(path, format!("expected {} weight bytes, found {}", header.dim * 4, payload.len())));
            }
            let weights = payload
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect();
            let bias = header.bias.ok_or_else(|| model_err(path, "ridge header lacks bias"))?;
            Ok((header, Model::Ridge(RidgeModel { weights, bias, lambda })))
        }
        ModelSpec::Knn { k, weighting } => {
            let (store, refcodes, targets) = match (&header.store, &header.refcodes, &header.targets) {
                (Some(s), Some(r), Some(t)) if r.len() == t.len() => (s, r, t),
                _ => return Err(model_err(path, "knn header needs store, refcodes and targets of equal length")),
            };
            let mut store_path = PathBuf::from(store);
            if store_path.is_relative() {
                if let Some(dir) = path.parent() {
                    store_path = dir.join(store_path);
                }
            }
            let set = EmbeddingSet::new(load_embeddings(&store_path)?);
            let x: Vec<Vec<f64>> = refcodes
                .iter()
                .map(|r| {
                    set.get(r)
                        .map(|e| e.to_f64())
                        .ok_or_else(|| model_err(path, format!("refcode '{r}' missing from {}", store_path.display())))
                })
                .collect::<Result<_, _>>()?;
            if let Some(row) = x.iter().find(|r| r.len() != header.dim) {
                return Err(PredictError::DimensionMismatch { expected: header.dim, found: row.len() });
            }
            let model = fit_knn(&x, targets, k, weighting)?;
            Ok((header, Model::Knn(model)))
        }
    }
}
