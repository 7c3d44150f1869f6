//! `whlab`: corpus generation, model training, reduction and strategy benchmarks.

mod manifest;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use whlab_core::cluster::{self, CentroidModel, KMeansConfig};
use whlab_core::datagen::{self, Corpus, CorpusKind, GenConfig};
use whlab_core::stats::{self, CiMethod};
use whlab_core::{Engine, Exec, Strategy, Word};

use crate::manifest::{InputFile, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "whlab", version, about = "Whitehead minimization and search-strategy benchmarks")]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, env = "WHLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Generate a seeded corpus as JSON Lines
    Generate(GenerateArgs),
    /// Train a centroid model (λ_t means or K-means) from a corpus
    Train(TrainArgs),
    /// Reduce a word or every word of a corpus to minimal length
    Reduce(ReduceArgs),
    /// Report whether a word is minimal, with a reducing witness if not
    CheckMinimal(CheckArgs),
    /// Score a model's clusters on a corpus: R_max, avg(R_max), G_MAX
    EvalClusters(EvalArgs),
    /// Compare search strategies on a corpus
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum KindArg {
    Random,
    Primitive,
    C1,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelArg {
    Lambda,
    Kmeans,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[arg(long, env = "WHLAB_RANK")]
    rank: u32,
    #[arg(long, value_enum, default_value = "random", env = "WHLAB_KIND")]
    kind: KindArg,
    #[arg(long, default_value_t = 1000, env = "WHLAB_COUNT")]
    count: usize,
    #[arg(long, default_value_t = 0, env = "WHLAB_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 1, env = "WHLAB_LENGTH_MIN")]
    length_min: usize,
    #[arg(long, default_value_t = 100, env = "WHLAB_LENGTH_MAX")]
    length_max: usize,
    #[arg(long, default_value_t = 0, env = "WHLAB_CHAIN_MIN")]
    chain_min: usize,
    #[arg(long, default_value_t = 0, env = "WHLAB_CHAIN_MAX")]
    chain_max: usize,
    #[arg(long, default_value_t = 10_000, env = "WHLAB_ATTEMPTS")]
    attempts: usize,
    #[arg(long, env = "WHLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long, env = "WHLAB_CORPUS")]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "lambda", env = "WHLAB_MODEL_KIND")]
    kind: ModelArg,
    /// Number of K-means clusters (default |N(X)|)
    #[arg(long, env = "WHLAB_K")]
    k: Option<usize>,
    #[arg(long, default_value_t = 0, env = "WHLAB_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 300, env = "WHLAB_MAX_ITER")]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9, env = "WHLAB_TOL")]
    tol: f64,
    #[arg(long, env = "WHLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ReduceArgs {
    /// Word in compact (`abA`) or integer (`1 2 -1`) form
    #[arg(long, conflicts_with = "corpus")]
    word: Option<String>,
    #[arg(long, env = "WHLAB_RANK")]
    rank: Option<u32>,
    #[arg(long, env = "WHLAB_CORPUS", required_unless_present = "word")]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "nf", env = "WHLAB_STRATEGY")]
    strategy: String,
    #[arg(long, env = "WHLAB_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0, env = "WHLAB_SEED")]
    seed: u64,
    #[arg(long, env = "WHLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    #[arg(long)]
    word: String,
    #[arg(long, env = "WHLAB_RANK")]
    rank: u32,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[arg(long, env = "WHLAB_MODEL")]
    model: PathBuf,
    #[arg(long, env = "WHLAB_CORPUS")]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "md", env = "WHLAB_FORMAT")]
    format: Format,
    #[arg(long, env = "WHLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    #[arg(long, env = "WHLAB_CORPUS")]
    corpus: PathBuf,
    /// Comma-separated list of r, nf, c, max
    #[arg(long, default_value = "r,nf,c,max", env = "WHLAB_STRATEGIES")]
    strategies: String,
    #[arg(long, env = "WHLAB_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0, env = "WHLAB_SEED")]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv", env = "WHLAB_FORMAT")]
    format: Format,
    /// Wilson instead of normal-approximation intervals
    #[arg(long)]
    wilson: bool,
    #[arg(long, env = "WHLAB_EMIT_RECORDS")]
    emit_records: bool,
    #[arg(long, env = "WHLAB_OUT")]
    out: Option<PathBuf>,
}

/// Failure classes, mapped onto exit codes 1, 2 and 3.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<whlab_core::Error> for Failure {
    fn from(e: whlab_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let e = match &f {
                Failure::Usage(e) | Failure::Data(e) | Failure::Internal(e) => e,
            };
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.into()))?;
    }
    let mut manifest = RunManifest::new(&cli.command).map_err(|e| Failure::Internal(e.into()))?;
    match &cli.command {
        Command::Generate(a) => generate(a, &mut manifest),
        Command::Train(a) => train(a, &mut manifest),
        Command::Reduce(a) => reduce(a, &mut manifest),
        Command::CheckMinimal(a) => check_minimal(a),
        Command::EvalClusters(a) => eval_clusters(a, &mut manifest),
        Command::Bench(a) => bench(a, &mut manifest),
    }
}

fn read_corpus(path: &Path, manifest: &mut RunManifest) -> CliResult<Corpus> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let corpus = Corpus::read_jsonl(&bytes[..]).with_context(|| format!("parsing {}", path.display()))?;
    manifest.inputs.push(InputFile::new(path, &bytes, corpus.header.as_ref().map(|h| h.config.seed)));
    Ok(corpus)
}

fn read_model(path: &Path, manifest: &mut RunManifest) -> CliResult<CentroidModel> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let model: CentroidModel =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing model {}", path.display()))?;
    model.validate()?;
    manifest.inputs.push(InputFile::new(path, &bytes, model.seed));
    Ok(model)
}

/// Writes `data` to `out` or standard output.
fn emit(out: Option<&Path>, data: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            f.write_all(data).context("writing output")?;
            log::info!("wrote {}", p.display());
        }
        None => std::io::stdout().write_all(data).context("writing output")?,
    }
    Ok(())
}

/// Emits a text table with a sidecar manifest when written to a file.
fn emit_text(out: Option<&Path>, text: &str, manifest: &RunManifest) -> CliResult<()> {
    emit(out, text.as_bytes())?;
    if let Some(p) = out {
        let mut side = p.as_os_str().to_owned();
        side.push(".manifest.json");
        let json = serde_json::to_vec_pretty(manifest).map_err(|e| Failure::Internal(e.into()))?;
        emit(Some(Path::new(&side)), &json)?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| Failure::Internal(e.into()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn generate(a: &GenerateArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = GenConfig {
        rank: a.rank,
        length_min: a.length_min,
        length_max: a.length_max,
        seed: a.seed,
        chain_min: a.chain_min,
        chain_max: a.chain_max,
        attempts: a.attempts,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.into()))?;
    let kind = match a.kind {
        KindArg::Random => CorpusKind::Random,
        KindArg::Primitive => CorpusKind::Primitive,
        KindArg::C1 => CorpusKind::C1,
    };
    log::info!("generating {} {:?} words of rank {}", a.count, kind, a.rank);
    let mut corpus = datagen::generate_corpus(&cfg, kind, a.count, Exec::default())?;
    if let Some(s) = datagen::length_stats(&corpus.words()?) {
        log::info!("lengths: min {} avg {:.1} max {}", s.min, s.avg, s.max);
    }
    if let Some(h) = corpus.header.as_mut() {
        h.manifest = Some(manifest.to_value());
    }
    let mut bytes = Vec::new();
    corpus.write_jsonl(&mut bytes).context("serializing corpus")?;
    emit(a.out.as_deref(), &bytes)
}

fn train(a: &TrainArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let corpus = read_corpus(&a.corpus, manifest)?;
    let rank = corpus.rank()?;
    if rank < 2 {
        return Err(usage("models need rank ≥ 2"));
    }
    let words = corpus.words()?;
    let engine = Engine::new(rank);
    let mut model = match a.kind {
        ModelArg::Lambda => {
            let mut m = cluster::estimate_lambda_centers(&engine, &words, Exec::default())?;
            m.seed = corpus.header.as_ref().map(|h| h.config.seed);
            let empty = m.centers.iter().filter(|c| c.is_empty()).count();
            if empty > 0 {
                log::warn!("{empty} Nielsen automorphisms have no uniquely reducible training word");
            }
            m
        }
        ModelArg::Kmeans => {
            let features = words
                .iter()
                .map(|w| whlab_core::graph::feature_vector(w).map(|f| f.0))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = KMeansConfig {
                k: a.k.unwrap_or(engine.catalog().nielsen_count()),
                seed: a.seed,
                max_iter: a.max_iter,
                tol: a.tol,
            };
            let km = cluster::kmeans(&features, &cfg, Exec::default())?;
            for (i, c) in km.history.iter().enumerate() {
                log::debug!("iteration {}: J = {:.6}, J² = {:.6}", i + 1, c.j, c.j_squared);
            }
            log::info!(
                "k-means: {} iterations, J = {:.6}, J² = {:.6}",
                km.iterations,
                km.criterion.j,
                km.criterion.j_squared
            );
            CentroidModel::from_kmeans(&engine, &words, &km, a.seed, Exec::default())?
        }
    };
    model.manifest = Some(manifest.to_value());
    emit(a.out.as_deref(), &to_json(&model)?)
}

fn load_strategy(name: &str, seed: u64, model: Option<&Path>, manifest: &mut RunManifest) -> CliResult<Strategy> {
    let model = match (name.trim(), model) {
        ("c" | "centroid", Some(p)) => Some(Arc::new(read_model(p, manifest)?)),
        _ => None,
    };
    Strategy::parse(name, seed, model).map_err(|e| Failure::Usage(e.into()))
}

#[derive(Serialize)]
struct ReduceOutput {
    manifest: serde_json::Value,
    results: Vec<ReduceResult>,
}

#[derive(Serialize)]
struct ReduceResult {
    id: usize,
    minimal: String,
    length: usize,
    trace: whlab_core::engine::Trace,
}

fn reduce(a: &ReduceArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let words = match (&a.word, &a.corpus) {
        (Some(w), _) => {
            let rank = a.rank.ok_or_else(|| usage("--word needs --rank"))?;
            vec![Word::parse(w, rank).map_err(|e| Failure::Usage(e.into()))?]
        }
        (None, Some(p)) => read_corpus(p, manifest)?.words()?,
        (None, None) => return Err(usage("pass --word or --corpus")),
    };
    let Some(rank) = words.first().map(Word::rank) else {
        return Err(Failure::Data(anyhow!("corpus is empty")));
    };
    let strategy = load_strategy(&a.strategy, a.seed, a.model.as_deref(), manifest)?;
    let engine = Engine::new(rank);
    let results = whlab_core::par::map(Exec::default(), &words, |i, w| -> CliResult<ReduceResult> {
        let mut search = whlab_core::Search::new(&strategy, i as u64);
        let red = engine.whitehead_reduce_with(w, &mut search)?;
        let trace = engine.trace(w, &strategy, &red);
        // the recorded trace must reproduce the reported word
        let replayed = trace.replay()?;
        if replayed != red.word {
            return Err(Failure::Internal(anyhow!("trace replay of word {i} gave {replayed}, expected {}", red.word)));
        }
        Ok(ReduceResult { id: i, minimal: red.word.format(), length: red.word.len(), trace })
    });
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let out = ReduceOutput { manifest: manifest.to_value(), results };
    emit(a.out.as_deref(), &to_json(&out)?)
}

fn check_minimal(a: &CheckArgs) -> CliResult<()> {
    let w = Word::parse(&a.word, a.rank).map_err(|e| Failure::Usage(e.into()))?;
    let engine = Engine::new(a.rank);
    let witness = engine.reducing_witness(&w)?;
    let out = serde_json::json!({
        "word": w.format(),
        "length": w.cyclic_reduce().len(),
        "minimal": witness.is_none(),
        "witness": witness.as_ref().map(|(id, _)| engine.catalog().get(*id)),
        "image": witness.as_ref().map(|(_, img)| img.format()),
    });
    emit(None, &to_json(&out)?)
}

fn eval_clusters(a: &EvalArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let model = read_model(&a.model, manifest)?;
    let corpus = read_corpus(&a.corpus, manifest)?;
    check_separation(manifest)?;
    let words = corpus.words()?;
    let engine = Engine::new(corpus.rank()?);
    let ev = cluster::evaluate_model(&engine, &model, &words, Exec::default())?;
    let g_max = cluster::goodness_g_max(&engine, &words, Exec::default())?;
    let nf = stats::nielsen_reducible_fraction(&engine, &words, CiMethod::Normal, Exec::default())?;
    match a.format {
        Format::Json => {
            let out = serde_json::json!({
                "manifest": manifest.to_value(),
                "rank": engine.rank(),
                "model_kind": model.kind,
                "evaluation": ev,
                "g_max": g_max,
                "nielsen_fraction": nf,
            });
            emit(a.out.as_deref(), &to_json(&out)?)
        }
        Format::Csv => {
            let mut s = String::from("center,label,size,r_max,argmax\n");
            for c in &ev.clusters {
                let label = c.label.map(|t| t.to_string()).unwrap_or_default();
                s.push_str(&format!("{},{},{},{:.4},{}\n", c.center, label, c.size, c.r_max, c.argmax));
            }
            s.push_str(&format!("avg_r_max,,{},{:.4},\n", ev.clusters.len(), ev.avg_r_max));
            s.push_str(&format!("g_max,,{},{:.4},\n", words.len(), g_max));
            emit_text(a.out.as_deref(), &s, manifest)
        }
        Format::Md => {
            let r = engine.rank();
            let mut s = format!("| Free group | F{r} |\n|:---|---:|\n");
            s.push_str(&format!("| number of clusters, K | {} |\n", ev.k));
            s.push_str(&format!("| avg(R_max), {:?} centers | {:.3} |\n", model.kind, ev.avg_r_max));
            s.push_str(&format!("| empty clusters | {} |\n", ev.empty_clusters));
            s.push_str(&format!("| G_MAX | {:.3} |\n", g_max));
            s.push_str(&format!(
                "| Nielsen-reducible fraction | {:.4} [{:.4}, {:.4}] |\n",
                nf.fraction, nf.ci_low, nf.ci_high
            ));
            s.push_str(&format!("| argmax injective | {} |\n", ev.argmax_is_injective()));
            emit_text(a.out.as_deref(), &s, manifest)
        }
    }
}

/// A model must not be evaluated on its training corpus or one sharing its seed.
fn check_separation(manifest: &RunManifest) -> CliResult<()> {
    let model_inputs = manifest.model_training_inputs();
    let corpora = manifest.inputs.iter().filter(|i| !i.is_model());
    for input in corpora {
        for (hash, seed) in &model_inputs {
            if input.sha256 == *hash {
                return Err(Failure::Data(anyhow!("{} was used to train the model", input.path)));
            }
            // same seed means the same per-word streams, so the corpora overlap
            if input.seed.is_some() && input.seed == *seed {
                return Err(Failure::Data(anyhow!(
                    "{} was generated with the seed of the model's training corpus",
                    input.path
                )));
            }
        }
    }
    Ok(())
}

fn bench(a: &BenchArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let corpus = read_corpus(&a.corpus, manifest)?;
    let words = corpus.words()?;
    let rank = corpus.rank()?;
    let mut strategies = Vec::new();
    for name in a.strategies.split(',').filter(|s| !s.trim().is_empty()) {
        strategies.push(load_strategy(name, a.seed, a.model.as_deref(), manifest)?);
    }
    if strategies.is_empty() {
        return Err(usage("no strategies given"));
    }
    check_separation(manifest)?;
    let engine = Engine::new(rank);
    log::info!("benchmarking {} strategies on {} words of rank {rank}", strategies.len(), words.len());
    let mut report = stats::run_strategy_benchmark(&engine, &words, &strategies, Exec::default(), a.emit_records)?;
    let nf = stats::nielsen_reducible_fraction(
        &engine,
        &words,
        if a.wilson { CiMethod::Wilson } else { CiMethod::Normal },
        Exec::default(),
    )?;
    report.notes.push(format!(
        "Nielsen-reducible fraction {:.4}, 95% CI [{:.4}, {:.4}]",
        nf.fraction, nf.ci_low, nf.ci_high
    ));
    for r in &report.rows {
        if r.n_red > r.n_total {
            return Err(Failure::Internal(anyhow!("{}: N_red exceeds N_total", r.strategy)));
        }
    }
    match a.format {
        Format::Json => {
            report.manifest = Some(manifest.to_value());
            emit(a.out.as_deref(), &to_json(&report)?)
        }
        Format::Csv => emit_text(a.out.as_deref(), &report.to_csv(), manifest),
        Format::Md => emit_text(a.out.as_deref(), &report.to_markdown(), manifest),
    }
}

