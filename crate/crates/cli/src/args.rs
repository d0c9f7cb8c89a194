use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mofname", version, about = "Parse, embed, compare and screen systematic MOF names")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand. Unset values fall back to the
/// config file and then to built-in defaults.
#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true, env = "MOFNAME_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "MOFNAME_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "MOFNAME_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "MOFNAME_PROVIDER")]
    pub provider: Option<ProviderArg>,
    /// Remote embedding service URL.
    #[arg(long, global = true, env = "MOFNAME_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Baseline embedding dimension.
    #[arg(long, global = true, env = "MOFNAME_DIM")]
    pub dim: Option<usize>,
    #[arg(long, global = true, env = "MOFNAME_BATCH_SIZE")]
    pub batch_size: Option<usize>,
    #[arg(long, global = true, env = "MOFNAME_TIMEOUT_MS")]
    pub timeout_ms: Option<u64>,
    /// Send normalized names to the remote provider.
    #[arg(long, global = true, env = "MOFNAME_SEND_NORMALIZED")]
    pub send_normalized: Option<bool>,
    #[arg(long, global = true, env = "MOFNAME_MAX_IN_FLIGHT")]
    pub max_in_flight: Option<usize>,
    #[arg(long, global = true, env = "MOFNAME_CORPUS_PATH", hide = true)]
    pub corpus_path: Option<PathBuf>,
    #[arg(long, global = true, env = "MOFNAME_EMBEDDINGS_PATH", hide = true)]
    pub embeddings_path: Option<PathBuf>,
    #[arg(long, global = true, env = "MOFNAME_MODELS_DIR", hide = true)]
    pub models_dir: Option<PathBuf>,
    #[arg(long, global = true, env = "MOFNAME_REPORTS_DIR", hide = true)]
    pub reports_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderArg {
    Baseline,
    Remote,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse names into structured descriptors.
    Parse(ParseArgs),
    /// Embed a corpus and write an embedding store.
    Embed(EmbedArgs),
    /// Similarity matrix, or its alignment with a descriptor matrix.
    Similarity(SimilarityArgs),
    /// Nearest names to a stored refcode.
    Retrieve(RetrieveArgs),
    /// Cross-validate a regressor and save a model fitted on all labels.
    Train(TrainArgs),
    /// Cross-validate with each token class masked.
    Ablate(AblateArgs),
    /// Rank stored structures by predicted bandgap.
    Screen(ScreenArgs),
    /// Two-dimensional PCA coordinates.
    Project(ProjectArgs),
    /// Fraction of nearest neighbours sharing a metal.
    Purity(PurityArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct NameSource {
    #[arg(long)]
    pub name: Option<String>,
    /// One name per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub source: NameSource,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Defaults to the file extension.
    #[arg(long)]
    pub format: Option<FormatArg>,
    /// Output store.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep only names carrying the catena marker.
    #[arg(long)]
    pub catena_only: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Offdiag,
    Full,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Descriptor CSV to align against.
    #[arg(long)]
    pub against: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "offdiag")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Refcode of the query.
    #[arg(long)]
    pub query: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = mofname::simspace::DEFAULT_RETRIEVAL_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Ridge,
    Knn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Uniform,
    InverseDistance,
}

#[derive(Debug, Args)]
pub struct RegressionArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
    /// Property to predict.
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value = "ridge")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub weighting: WeightingArg,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Floor predictions at zero.
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub regression: RegressionArgs,
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the fit report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub regression: RegressionArgs,
    /// Comma-separated classes: metal, ligand, mu, structural.
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// HSE06 model file.
    #[arg(long)]
    pub hse06: PathBuf,
    /// PBE model file.
    #[arg(long)]
    pub pbe: PathBuf,
    /// Refcodes to skip, one per line.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// CSV with columns refcode,conductivity.
    #[arg(long)]
    pub known: Option<PathBuf>,
    /// Corpus supplying names for the report.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 1.5)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 50)]
    pub top: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PurityArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Corpus whose names give each refcode's metals.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
}
