//! Resolution of [`GlobalConfig`]: flags and `MOFNAME_*` variables first,
//! then the config file, then defaults.
//!
//! The config file is TOML:
//!
//! ```toml
//! seed = 7
//! threads = 4
//! provider = "remote"
//! endpoint = "http://127.0.0.1:8000/embed"
//!
//! [paths]
//! corpus = "data/corpus.jsonl"
//! embeddings = "data/names.mofe"
//! models = "models"
//! reports = "reports"
//! ```

use std::path::{Path, PathBuf};

use mofname::embedding::{ProviderConfig, ProviderKind};
use serde::Deserialize;

use crate::args::{GlobalArgs, ProviderArg};
use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    provider: Option<ProviderArg>,
    endpoint: Option<String>,
    dim: Option<usize>,
    batch_size: Option<usize>,
    timeout_ms: Option<u64>,
    send_normalized: Option<bool>,
    max_in_flight: Option<usize>,
    #[serde(default)]
    paths: FilePaths,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePaths {
    corpus: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    models: Option<PathBuf>,
    reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    /// Default corpus file.
    pub corpus: Option<PathBuf>,
    /// Default embedding store.
    pub embeddings: Option<PathBuf>,
    /// Directory for relative model paths.
    pub models: Option<PathBuf>,
    /// Directory for relative report paths.
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalConfig {
    pub provider: ProviderConfig,
    pub seed: u64,
    /// `None` uses every available core.
    pub threads: Option<usize>,
    pub paths: Paths,
}

impl GlobalConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let defaults = ProviderConfig::default();
        let kind = match args.provider.or(file.provider) {
            Some(ProviderArg::Remote) => ProviderKind::Remote,
            _ => ProviderKind::Baseline,
        };
        let provider = ProviderConfig {
            kind,
            dim: args.dim.or(file.dim).unwrap_or(defaults.dim),
            ngram_range: defaults.ngram_range,
            endpoint_url: args.endpoint.clone().or(file.endpoint).unwrap_or_default(),
            batch_size: args.batch_size.or(file.batch_size).unwrap_or(defaults.batch_size),
            timeout_ms: args.timeout_ms.or(file.timeout_ms).unwrap_or(defaults.timeout_ms),
            send_normalized: args.send_normalized.or(file.send_normalized).unwrap_or(defaults.send_normalized),
            max_in_flight: args.max_in_flight.or(file.max_in_flight).unwrap_or(defaults.max_in_flight),
        };
        provider.validate()?;
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::usage("threads must be at least 1"));
        }
        Ok(Self {
            provider,
            seed: args.seed.or(file.seed).unwrap_or(0),
            threads,
            paths: Paths {
                corpus: args.corpus_path.clone().or(file.paths.corpus),
                embeddings: args.embeddings_path.clone().or(file.paths.embeddings),
                models: args.models_dir.clone().or(file.paths.models),
                reports: args.reports_dir.clone().or(file.paths.reports),
            },
        })
    }

    pub fn corpus(&self, flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.paths.corpus.clone())
            .ok_or_else(|| CliError::usage("no corpus given: pass --corpus or set paths.corpus"))
    }

    pub fn store(&self, flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.paths.embeddings.clone())
            .ok_or_else(|| CliError::usage("no embedding store given: pass --store or set paths.embeddings"))
    }

    pub fn model_path(&self, path: &Path) -> PathBuf {
        under(self.paths.models.as_deref(), path)
    }

    pub fn report_path(&self, path: &Path) -> PathBuf {
        under(self.paths.reports.as_deref(), path)
    }
}

fn under(dir: Option<&Path>, path: &Path) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}
