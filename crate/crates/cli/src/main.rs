use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apikg::eval::{parse_benchmark, resolve_method, run_scenario, Engine, EvalContext, Scenario};
use apikg::ingest::parse_corpus;
use apikg::recommend::{write_recommendations, Query, DEFAULT_K_RETRIEVE, DEFAULT_K_RETURN};
use apikg::{
    build_graph, train, EntityKind, Index, KnowledgeGraph, Lexicons, Model, ModelKind, Recommender, Scope,
    TrainConfig, Weights,
};
use clap::{Args, Parser, Subcommand};

/// API knowledge graph construction, embedding and analogical API
/// recommendation.
#[derive(Parser)]
#[command(name = "apikg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the knowledge graph from a documentation corpus.
    Build(BuildArgs),
    /// Train entity and relation embeddings.
    Train(TrainArgs),
    /// Write the vector index sidecar for a trained model.
    Index(IndexArgs),
    /// Recommend analogical methods for one source method.
    Query(QueryArgs),
    /// Score an engine against a benchmark.
    Eval(EvalArgs),
    /// Print entity and triple counts of a graph.
    Stats(StatsArgs),
    /// Write the triples of a graph as TSV.
    Export(ExportArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Directory with verbs.tsv, patterns.txt, stopwords.txt and pos.tsv.
    /// The bundled lexicons are used when omitted.
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Graph file to write.
    #[arg(long)]
    kg: PathBuf,
    /// Optional triple-only TSV.
    #[arg(long)]
    triples: Option<PathBuf>,
    /// Optional stats file; stats always go to stdout too.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    kg: PathBuf,
    /// Model file to write.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "complex")]
    model_kind: ModelKind,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV of mean loss per epoch.
    #[arg(long)]
    loss_trace: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    kg: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Sidecar file to write.
    #[arg(long)]
    index: PathBuf,
}

#[derive(Args)]
struct ModelInputs {
    #[arg(long)]
    kg: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Sidecar from `index`; the index is rebuilt from the graph when omitted.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K_RETRIEVE)]
    k_retrieve: usize,
    /// Seven comma-separated weights: m,func,obj,it,iv,ot,neig.
    #[arg(long)]
    weights: Option<Weights>,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    inputs: ModelInputs,
    /// Qualified name of the source method.
    #[arg(long)]
    source: String,
    /// Restrict results to this library.
    #[arg(long)]
    target_lib: Option<String>,
    #[arg(long, default_value_t = DEFAULT_K_RETURN)]
    k_return: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    inputs: ModelInputs,
    #[arg(long)]
    benchmark: PathBuf,
    #[arg(long, default_value = "with-target")]
    scenario: Scenario,
    #[arg(long, default_value = "kge4ar")]
    engine: Engine,
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Also write the report as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    kg: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    kg: PathBuf,
    /// Triple TSV to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with a machine-readable category.
#[derive(Debug)]
struct CliError {
    category: &'static str,
    message: String,
}

impl CliError {
    fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    fn at(path: &Path, err: apikg::Error) -> Self {
        CliError::new(err.category(), format!("{}: {err}", path.display()))
    }
}

impl From<apikg::Error> for CliError {
    fn from(err: apikg::Error) -> Self {
        CliError::new(err.category(), err.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::new("io", err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // One line, whatever the message holds.
        let msg = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {msg}", self.category)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> CliResult<KnowledgeGraph> {
    KnowledgeGraph::import(open(path)?).map_err(|e| CliError::at(path, e))
}

fn load_model(kg: &KnowledgeGraph, path: &Path) -> CliResult<Model> {
    Model::read(kg, open(path)?).map_err(|e| CliError::at(path, e))
}

fn load_lexicons(dir: Option<&Path>) -> CliResult<Lexicons> {
    match dir {
        Some(d) => Ok(Lexicons::load_dir(d)?),
        None => Ok(Lexicons::bundled()),
    }
}

fn load_index(kg: &KnowledgeGraph, model: &Model, sidecar: Option<&Path>) -> CliResult<Index> {
    match sidecar {
        Some(p) => Index::load(model, open(p)?).map_err(|e| CliError::at(p, e)),
        None => Ok(Index::build(kg, model)?),
    }
}

/// Up to three names closest to `wanted`, best first.
fn nearest<'a>(wanted: &str, names: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut scored: Vec<(f64, &str)> = names.map(|n| (strsim::jaro_winkler(wanted, n), n)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(3).map(|(_, n)| n).collect()
}

fn unresolved(what: &str, name: &str, why: &str, candidates: Vec<&str>) -> CliError {
    let mut msg = format!("{what} {name:?}: {why}");
    if !candidates.is_empty() {
        msg.push_str("; did you mean ");
        msg.push_str(&candidates.join(" | "));
    }
    CliError::new("lookup", msg)
}

fn write_stats<W: Write>(kg: &KnowledgeGraph, mut out: W) -> io::Result<()> {
    for (kind, n) in kg.stats() {
        writeln!(out, "entity\t{kind}\t{n}")?;
    }
    for (rel, n) in kg.relation_stats() {
        writeln!(out, "triple\t{rel}\t{n}")?;
    }
    writeln!(out, "total\tentities\t{}", kg.entity_count())?;
    writeln!(out, "total\ttriples\t{}", kg.triple_count())
}

fn cmd_build(a: &BuildArgs) -> CliResult {
    let bytes = fs::read(&a.corpus).map_err(|e| CliError::new("io", format!("{}: {e}", a.corpus.display())))?;
    let corpus = parse_corpus(&bytes).map_err(|e| CliError::at(&a.corpus, e))?;
    let lex = load_lexicons(a.lexicons.as_deref())?;
    let (kg, _) = build_graph(&corpus, &lex)?;
    let mut out = create(&a.kg)?;
    kg.export(&mut out)?;
    out.flush()?;
    if let Some(p) = &a.triples {
        let mut out = create(p)?;
        kg.write_triples(&mut out)?;
        out.flush()?;
    }
    if let Some(p) = &a.stats {
        let mut out = create(p)?;
        write_stats(&kg, &mut out)?;
        out.flush()?;
    }
    write_stats(&kg, io::stdout().lock())?;
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> CliResult {
    let kg = load_graph(&a.kg)?;
    let d = TrainConfig::default();
    let config = TrainConfig {
        model_kind: a.model_kind,
        dim: a.dim.unwrap_or(d.dim),
        epochs: a.epochs.unwrap_or(d.epochs),
        learning_rate: a.lr.unwrap_or(d.learning_rate),
        negatives_per_positive: a.negatives.unwrap_or(d.negatives_per_positive),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        seed: a.seed.unwrap_or(d.seed),
        l2: a.l2.unwrap_or(d.l2),
    };
    let outcome = train::<f64>(&kg, &config)?;
    let mut out = create(&a.model)?;
    outcome.model.write(&kg, &mut out)?;
    out.flush()?;
    if let Some(p) = &a.loss_trace {
        fs::write(p, outcome.loss_csv()).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))?;
    }
    if let Some(last) = outcome.loss_trace.last() {
        eprintln!("trained {} epochs, final mean loss {last:.6}", outcome.loss_trace.len());
    }
    Ok(())
}

fn cmd_index(a: &IndexArgs) -> CliResult {
    let kg = load_graph(&a.kg)?;
    let model = load_model(&kg, &a.model)?;
    let index = Index::build(&kg, &model)?;
    let mut out = create(&a.index)?;
    index.write_sidecar(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_query(a: &QueryArgs) -> CliResult {
    let kg = load_graph(&a.inputs.kg)?;
    let model = load_model(&kg, &a.inputs.model)?;
    let index = load_index(&kg, &model, a.inputs.index.as_deref())?;
    let methods = || kg.entities_of(EntityKind::Method).iter().map(|&m| kg.name(m));
    let source = resolve_method(&kg, &a.source)
        .map_err(|why| unresolved("source method", &a.source, &why, nearest(&a.source, methods())))?;
    let scope = match &a.target_lib {
        None => Scope::All,
        Some(name) => Scope::TargetLibrary(kg.library_named(name).ok_or_else(|| {
            let libs = kg.entities_of(EntityKind::Library).iter().map(|&l| kg.name(l));
            unresolved("target library", name, "no such library", nearest(name, libs))
        })?),
    };
    let mut query = Query::new(source, scope);
    query.k_retrieve = a.inputs.k_retrieve;
    query.k_return = a.k_return;
    if let Some(w) = &a.inputs.weights {
        query.weights = *w;
    }
    let recs = Recommender::new(&kg, &model, &index).recommend(&query)?;
    match &a.out {
        Some(p) => {
            let mut out = create(p)?;
            write_recommendations(&kg, &recs, &mut out)?;
            out.flush()?;
        }
        None => write_recommendations(&kg, &recs, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult {
    let kg = load_graph(&a.inputs.kg)?;
    let model = load_model(&kg, &a.inputs.model)?;
    let index = load_index(&kg, &model, a.inputs.index.as_deref())?;
    let lex = load_lexicons(a.lexicons.as_deref())?;
    let pairs = parse_benchmark(open(&a.benchmark)?).map_err(|e| CliError::at(&a.benchmark, e))?;
    let mut ctx = EvalContext::new(&kg, &model, &index, &lex);
    ctx.k_retrieve = a.inputs.k_retrieve;
    if let Some(w) = &a.inputs.weights {
        ctx.weights = *w;
    }
    let outcome = run_scenario(&ctx, &pairs, a.scenario, a.engine)?;
    for (source, why) in &outcome.skipped {
        eprintln!("skipped {source}: {why}");
    }
    println!("{}", outcome.report);
    if let Some(p) = &a.out {
        let mut out = create(p)?;
        outcome.report.write_csv(&mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs) -> CliResult {
    let kg = load_graph(&a.kg)?;
    write_stats(&kg, io::stdout().lock())?;
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> CliResult {
    let kg = load_graph(&a.kg)?;
    match &a.out {
        Some(p) => {
            let mut out = create(p)?;
            kg.write_triples(&mut out)?;
            out.flush()?;
        }
        None => kg.write_triples(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Train(a) => cmd_train(a),
        Command::Index(a) => cmd_index(a),
        Command::Query(a) => cmd_query(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
