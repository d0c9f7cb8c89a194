use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mofname::corpus::{self, CorpusFormat, CorpusRecord};
use mofname::embedding::{load_embeddings_with_provider, store_embeddings, Embedder, EmbeddingSet, Provider};
use mofname::nomenclature::{parse, MaskClass};
use mofname::predict::{
    ablate, cross_validate_vectors, fit, labeled, load_model, save_knn, save_ridge, Model, ModelSpec,
    PredictError, RegressionConfig, Weighting,
};
use mofname::screen::{self, ScreenConfig, ScreenInput};
use mofname::simspace::{self, AlignmentMode, MetricReport};
use serde::Serialize;

use crate::args::*;
use crate::config::GlobalConfig;
use crate::error::CliError;

pub fn run(command: &Command, config: &GlobalConfig) -> Result<(), CliError> {
    match command {
        Command::Parse(a) => parse_cmd(a),
        Command::Embed(a) => embed_cmd(a, config),
        Command::Similarity(a) => similarity_cmd(a, config),
        Command::Retrieve(a) => retrieve_cmd(a, config),
        Command::Train(a) => train_cmd(a, config),
        Command::Ablate(a) => ablate_cmd(a, config),
        Command::Screen(a) => screen_cmd(a, config),
        Command::Project(a) => project_cmd(a, config),
        Command::Purity(a) => purity_cmd(a, config),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

fn print(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::data(format!("stdout: {e}")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes to `path` when given, otherwise to stdout.
fn emit(path: Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(&p, bytes),
        None => print(bytes),
    }
}

fn format_of(path: &Path, format: Option<FormatArg>) -> CorpusFormat {
    match format {
        Some(FormatArg::Jsonl) => CorpusFormat::Jsonl,
        Some(FormatArg::Csv) => CorpusFormat::Csv,
        None => CorpusFormat::from_path(path),
    }
}

fn load_records(path: &Path, format: Option<FormatArg>) -> Result<Vec<CorpusRecord>, CliError> {
    Ok(corpus::load_corpus(path, format_of(path, format))?)
}

fn load_set(path: &Path, config: &GlobalConfig) -> Result<EmbeddingSet, CliError> {
    let records = load_embeddings_with_provider(path, &config.provider.provider_id())?;
    Ok(EmbeddingSet::new(records))
}

fn vectors(set: &EmbeddingSet) -> Vec<Vec<f64>> {
    set.embeddings.iter().map(|e| e.to_f64()).collect()
}

fn parse_cmd(a: &ParseArgs) -> Result<(), CliError> {
    if let Some(name) = &a.source.name {
        return print(&to_json(&parse(name)));
    }
    let path = a.source.file.as_ref().expect("clap enforces one source");
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: Vec<_> = text.lines().filter(|l| !l.trim().is_empty()).map(parse).collect();
    print(&to_json(&parsed))
}

#[derive(Serialize)]
struct EmbedSummary {
    store: String,
    provider_id: String,
    dim: usize,
    records: usize,
    dropped: usize,
}

fn embed_cmd(a: &EmbedArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let corpus_path = config.corpus(&a.corpus)?;
    let out = config.store(&a.out)?;
    let mut records = load_records(&corpus_path, a.format)?;
    let mut dropped = 0;
    if a.catena_only {
        let (kept, rest) = corpus::filter_catena(records);
        records = kept;
        dropped = rest.len();
    }
    let provider = Provider::new(config.provider.clone())?;
    let names: Vec<String> = records.iter().map(|r| r.name.clone()).collect();
    let embeddings = provider.embed(&names)?;
    let dim = embeddings.first().map_or(0, |e| e.dim());
    let pairs: Vec<_> = records.into_iter().map(|r| r.refcode).zip(embeddings).collect();
    store_embeddings(&pairs, &out)?;
    print(&to_json(&EmbedSummary {
        store: out.display().to_string(),
        provider_id: provider.provider_id(),
        dim,
        records: pairs.len(),
        dropped,
    }))
}

fn similarity_cmd(a: &SimilarityArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let set = load_set(&config.store(&a.store)?, config)?;
    let out = a.out.as_deref().map(|p| config.report_path(p));
    let Some(against) = &a.against else {
        let matrix = simspace::similarity_matrix(&set)?;
        let mut buf = Vec::new();
        matrix.write_csv(&mut buf).map_err(|e| CliError::data(e.to_string()))?;
        return emit(out, &buf);
    };
    let descriptors = corpus::load_descriptors(against)?;
    let pseudo: Vec<CorpusRecord> = set.labels.iter().map(|l| CorpusRecord::new(l.clone(), "")).collect();
    let (joined, descriptors) = corpus::join_descriptors(&pseudo, &descriptors)?;
    let embedded: Vec<Vec<f64>> = joined
        .iter()
        .map(|r| set.get(&r.refcode).expect("joined from store labels").to_f64())
        .collect();
    let a_matrix = simspace::similarity_matrix_of(&descriptors.labels, &embedded)?;
    let b_matrix = simspace::similarity_matrix_of(&descriptors.labels, &descriptors.vectors)?;
    let mode = match a.mode {
        ModeArg::Offdiag => AlignmentMode::OffDiagonal,
        ModeArg::Full => AlignmentMode::Full,
    };
    let report = MetricReport {
        metric: "second_order_alignment".into(),
        value: simspace::second_order_alignment(&a_matrix, &b_matrix, mode)?,
        n: joined.len(),
        mode: mode.as_str().into(),
    };
    emit(out, &to_json(&report))
}

fn retrieve_cmd(a: &RetrieveArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let set = load_set(&config.store(&a.store)?, config)?;
    let result = simspace::retrieve(&a.query, &set, a.threshold, a.k)?;
    print(&to_json(&result))
}

fn regression_config(a: &RegressionArgs, config: &GlobalConfig) -> Result<RegressionConfig, CliError> {
    let model = match a.model {
        ModelArg::Ridge => ModelSpec::Ridge { lambda: a.lambda },
        ModelArg::Knn => ModelSpec::Knn {
            k: a.k,
            weighting: match a.weighting {
                WeightingArg::Uniform => Weighting::Uniform,
                WeightingArg::InverseDistance => Weighting::InverseDistance,
            },
        },
    };
    let rc = RegressionConfig { model, folds: a.folds, seed: config.seed, clamp_nonnegative: a.clamp };
    rc.validate()?;
    Ok(rc)
}

fn train_cmd(a: &TrainArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let r = &a.regression;
    let rc = regression_config(r, config)?;
    let store_path = config.store(&a.store)?;
    let set = load_set(&store_path, config)?;
    let records = load_records(&config.corpus(&r.corpus)?, r.format)?;
    let (recs, y) = labeled(&records, &r.target);
    if recs.len() < rc.folds {
        return Err(PredictError::MissingLabels { target: r.target.clone(), labeled: recs.len(), needed: rc.folds }.into());
    }
    let x: Vec<Vec<f64>> = recs
        .iter()
        .map(|rec| {
            set.get(&rec.refcode)
                .map(|e| e.to_f64())
                .ok_or_else(|| CliError::data(format!("refcode '{}' missing from {}", rec.refcode, store_path.display())))
        })
        .collect::<Result<_, _>>()?;
    let provider_id = config.provider.provider_id();
    let report = cross_validate_vectors(&x, &y, &rc, &r.target, &provider_id)?;

    let out = config.model_path(a.out.as_deref().unwrap_or(Path::new(&format!("{}.model", r.target))));
    match fit(&rc.model, &x, &y)? {
        Model::Ridge(m) => save_ridge(&m, &r.target, &provider_id, &out)?,
        Model::Knn(m) => {
            let refcodes: Vec<String> = recs.iter().map(|rec| rec.refcode.clone()).collect();
            let store_ref = relative_store(&store_path, &out)?;
            save_knn(m.k, m.weighting, x[0].len(), &refcodes, &y, &store_ref, &r.target, &provider_id, &out)?;
        }
    }
    let json = to_json(&report);
    if let Some(p) = &a.report {
        write_file(&config.report_path(p), &json)?;
    }
    print(&json)
}

/// Store path as seen from the model file's directory.
fn relative_store(store: &Path, model: &Path) -> Result<String, CliError> {
    let abs = |p: &Path| std::path::absolute(p).map_err(|e| CliError::io(p, e));
    let store = abs(store)?;
    let model = abs(model)?;
    let dir = model.parent().unwrap_or(Path::new("/"));
    let rel = pathdiff::diff_paths(&store, dir).unwrap_or(store);
    Ok(rel.to_string_lossy().into_owned())
}

fn ablate_cmd(a: &AblateArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let r = &a.regression;
    let rc = regression_config(r, config)?;
    let classes: Vec<MaskClass> = if a.classes.is_empty() {
        MaskClass::ALL.to_vec()
    } else {
        a.classes.iter().map(|c| c.parse().map_err(CliError::usage)).collect::<Result<_, _>>()?
    };
    let records = load_records(&config.corpus(&r.corpus)?, r.format)?;
    let provider = Provider::new(config.provider.clone())?;
    let report = ablate(&records, &r.target, &provider, &rc, &classes)?;
    emit(a.out.as_deref().map(|p| config.report_path(p)), &to_json(&report))
}

fn read_refcode_list(path: &Path) -> Result<BTreeSet<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn screen_cmd(a: &ScreenArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let set = load_set(&config.store(&a.store)?, config)?;
    let (_, hse06) = load_model(config.model_path(&a.hse06))?;
    let (_, pbe) = load_model(config.model_path(&a.pbe))?;
    let names: HashMap<String, String> = match &a.corpus {
        Some(p) => load_records(p, a.format)?.into_iter().map(|r| (r.refcode, r.name)).collect(),
        None => HashMap::new(),
    };
    let known = match &a.known {
        Some(p) => screen::read_known_conductors(fs::File::open(p).map_err(|e| CliError::io(p, e))?)?,
        None => BTreeMap::new(),
    };
    let screen_config = ScreenConfig {
        hse06_cutoff_ev: a.cutoff,
        top_k: a.top,
        exclude_refcodes: match &a.exclude {
            Some(p) => read_refcode_list(p)?,
            None => BTreeSet::new(),
        },
        known_conductors: known,
    };
    let inputs: Vec<ScreenInput> = set
        .labels
        .iter()
        .zip(&set.embeddings)
        .map(|(l, e)| ScreenInput {
            refcode: l.clone(),
            name: names.get(l).cloned().unwrap_or_default(),
            vector: e.to_f64(),
        })
        .collect();
    let rows = screen::screen(&inputs, &hse06, &pbe, &screen_config)?;
    let mut csv = Vec::new();
    screen::write_report(&rows, &mut csv)?;
    match &a.out {
        None => print(&csv),
        Some(p) => {
            write_file(&config.report_path(p), &csv)?;
            let rediscovery = a.known.is_some().then(|| screen::rediscovery_rate(&rows, &screen_config.known_conductors));
            print(&to_json(&serde_json::json!({ "rows": rows.len(), "rediscovery": rediscovery })))
        }
    }
}

fn project_cmd(a: &ProjectArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let set = load_set(&config.store(&a.store)?, config)?;
    let coords = simspace::pca_project(&vectors(&set))?;
    let mut out = String::from("refcode,x,y\n");
    for (label, (x, y)) in set.labels.iter().zip(coords) {
        out.push_str(&format!("{label},{x},{y}\n"));
    }
    emit(a.out.as_deref().map(|p| config.report_path(p)), out.as_bytes())
}

fn purity_cmd(a: &PurityArgs, config: &GlobalConfig) -> Result<(), CliError> {
    let set = load_set(&config.store(&a.store)?, config)?;
    let records = load_records(&config.corpus(&a.corpus)?, a.format)?;
    let mut labels = HashMap::new();
    for r in &records {
        let mut metals = parse(&r.name).metal_elements().into_iter().map(String::from).collect::<Vec<_>>();
        if metals.is_empty() {
            continue;
        }
        metals.sort();
        labels.insert(r.refcode.clone(), metals.join("+"));
    }
    let kept: Vec<_> = set
        .records()
        .into_iter()
        .filter(|(l, _)| labels.contains_key(l))
        .collect();
    let kept = EmbeddingSet::new(kept);
    let value = simspace::neighbor_purity(&kept, &labels, a.k)?;
    print(&to_json(&MetricReport {
        metric: "metal_neighbor_purity".into(),
        value,
        n: kept.len(),
        mode: format!("k={}", a.k),
    }))
}
