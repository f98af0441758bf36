//! `kwbench`: generate corpora, preprocess tweets, compile queries, run the
//! timing harness and summarize reports.
//!
//! Exit status is 0 on success, 1 on usage or validation errors and 2 on
//! I/O errors.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kwbench::bench::{self, BenchPlan, BenchReport, CorpusFiles, CorpusSource, GeneratedCorpus, ReportFormat};
use kwbench::corpus::{self, Corpus, Gender, ScaleFactor};
use kwbench::engine::{DateRange, GeoBox, LayoutKind, QueryId, QuerySpec, Strategy, DEFAULT_K};
use kwbench::preprocess::{self, DEFAULT_TF_K};
use kwbench::qcompile::{self, Dialect};
use kwbench::scoring::{LogBase, Scheme, SchemeParams, StatsScope};
use kwbench::Error;

use config::ConfigFile;

#[derive(Parser)]
#[command(name = "kwbench", version, about = "Top-k keyword query benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic tweet corpus as JSON Lines.
    Generate {
        #[arg(long)]
        sf: ScaleFactor,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run text preprocessing over every record of a corpus file.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Augmented term-frequency offset.
        #[arg(long = "tf-k", default_value_t = DEFAULT_TF_K)]
        tf_k: f64,
    },
    /// Run the timing harness.
    Bench(BenchArgs),
    /// Print a query as parameterized SQL or as a map-reduce plan.
    Compile(CompileArgs),
    /// Recompute aggregates from a saved report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        /// Directory to write report files into instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct BenchArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sf: Option<Vec<ScaleFactor>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    queries: Option<Vec<QueryId>>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long, value_delimiter = ',')]
    layouts: Option<Vec<LayoutKind>>,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    /// Parameter sampler seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Seed for generated corpora.
    #[arg(long)]
    corpus_seed: Option<u64>,
    /// Corpus files as `SF=PATH`, or a bare `PATH` with a single scale factor.
    #[arg(long, value_delimiter = ',')]
    corpus: Option<Vec<String>>,
    /// Reuse one parameter binding for all runs of a query.
    #[arg(long)]
    fixed_binding: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "tf-k")]
    tf_k: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    log_base: Option<LogBase>,
    #[arg(long)]
    scope: Option<StatsScope>,
    /// Output directory; raw rows go to stdout as CSV when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    query: QueryId,
    #[arg(long, default_value = "tfidf")]
    scheme: Scheme,
    #[arg(long, default_value = "sql")]
    dialect: Dialect,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value = "filtered")]
    scope: StatsScope,
    #[arg(long, default_value_t = SchemeParams::default().k1)]
    k1: f64,
    #[arg(long, default_value_t = SchemeParams::default().b)]
    b: f64,
    #[arg(long, default_value = "natural")]
    log_base: LogBase,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kwbench: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Setup(_) => 2,
        _ => 1,
    }
}

fn run(command: Command) -> kwbench::Result<()> {
    match command {
        Command::Generate { sf, seed, out } => {
            let records = corpus::generate(sf, seed)?;
            corpus::save(records, &out)
        }
        Command::Preprocess { input, out, tf_k } => {
            let mut records = corpus::load_with(&input, tf_k)?.into_records();
            for r in &mut records {
                let p = preprocess::preprocess(&r.raw_text, tf_k)?;
                r.clean_text = p.clean_text;
                r.lemma_text = p.lemma_text;
                r.lemma_text_length = p.lemma_text_length;
                r.words = p.vocabulary;
            }
            let corpus = Corpus::new(records)?;
            corpus::save(corpus.records(), &out)
        }
        Command::Bench(args) => run_bench(args),
        Command::Compile(args) => run_compile(args),
        Command::Report { input, format, out } => {
            let report = BenchReport::load(&input)?;
            match out {
                Some(dir) => report.save(&dir, format).map(|_| ()),
                None => emit_report(&report, format),
            }
        }
    }
}

fn stdout_error(e: io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn emit_report(report: &BenchReport, format: ReportFormat) -> kwbench::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        ReportFormat::Csv => report.write_aggregates_csv(&mut out),
        ReportFormat::Json => out.write_all(report.to_json().as_bytes()).map_err(stdout_error),
    }
}

fn run_compile(a: CompileArgs) -> kwbench::Result<()> {
    // Constraint values stay out of the text; any valid ones will do.
    let dates = DateRange { start: corpus::date_min(), end: corpus::date_max() };
    let (x, y) = (corpus::GEO_X_RANGE, corpus::GEO_Y_RANGE);
    let geo = GeoBox { start_x: x.0, end_x: x.1, start_y: y.0, end_y: y.1 };
    let spec = match a.query {
        QueryId::Q1 => QuerySpec::q1(Gender::Male),
        QueryId::Q2 => QuerySpec::q2(Gender::Male, dates),
        QueryId::Q3 => QuerySpec::q3(Gender::Male, geo),
        QueryId::Q4 => QuerySpec::q4(Gender::Male, dates, geo),
    }
    .with_k(a.k)
    .with_scheme(a.scheme)
    .with_scope(a.scope)
    .with_params(SchemeParams { k1: a.k1, b: a.b, log_base: a.log_base, ..Default::default() });
    let compiled = qcompile::compile(&spec, a.dialect)?;
    match a.out {
        Some(path) => write_file(&path, compiled.text.as_bytes()),
        None => io::stdout().lock().write_all(compiled.text.as_bytes()).map_err(stdout_error),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> kwbench::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    fs::write(path, bytes).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn run_bench(args: BenchArgs) -> kwbench::Result<()> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let defaults = BenchPlan::default();
    let params = SchemeParams {
        k: file.pick(args.tf_k, "tf-k")?.unwrap_or(DEFAULT_TF_K),
        k1: file.pick(args.k1, "k1")?.unwrap_or(defaults.params.k1),
        b: file.pick(args.b, "b")?.unwrap_or(defaults.params.b),
        log_base: file.pick(args.log_base, "log-base")?.unwrap_or_default(),
    };
    let plan = BenchPlan {
        scale_factors: file.pick_list(args.sf, "sf")?.unwrap_or(defaults.scale_factors),
        queries: file.pick_list(args.queries, "queries")?.unwrap_or(defaults.queries),
        schemes: file.pick_list(args.schemes, "schemes")?.unwrap_or(defaults.schemes),
        layouts: file.pick_list(args.layouts, "layouts")?.unwrap_or(defaults.layouts),
        strategies: file.pick_list(args.strategies, "strategies")?.unwrap_or(defaults.strategies),
        runs_per_query: file.pick(args.runs, "runs")?.unwrap_or(defaults.runs_per_query),
        seed: file.pick(args.seed, "seed")?.unwrap_or(defaults.seed),
        fixed_binding: args.fixed_binding || file.pick(None, "fixed-binding")?.unwrap_or(false),
        k: file.pick(args.k, "k")?.unwrap_or(defaults.k),
        params,
        scope: file.pick(args.scope, "scope")?.unwrap_or_default(),
    };
    plan.validate()?;
    let format = file.pick(args.format, "format")?.unwrap_or(ReportFormat::Csv);
    let out: Option<PathBuf> = file.pick(args.out, "out")?;
    let corpus_seed = file.pick(args.corpus_seed, "corpus-seed")?.unwrap_or(42);
    let corpus_files: Option<Vec<String>> = file.pick_list(args.corpus, "corpus")?;

    let mut source: Box<dyn CorpusSource> = match corpus_files {
        None => Box::new(GeneratedCorpus { seed: corpus_seed }),
        Some(specs) => Box::new(corpus_files_for(&plan.scale_factors, &specs, params.k)?),
    };
    let report = bench::run(&plan, source.as_mut())?;
    match out {
        Some(dir) => {
            for path in report.save(&dir, format)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match format {
                ReportFormat::Csv => report.write_raw_csv(&mut lock),
                ReportFormat::Json => lock.write_all(report.to_json().as_bytes()).map_err(stdout_error),
            }
        }
    }
}

fn corpus_files_for(sfs: &[ScaleFactor], specs: &[String], tf_k: f64) -> kwbench::Result<CorpusFiles> {
    let mut files = Vec::new();
    for spec in specs {
        match spec.split_once('=') {
            Some((sf, path)) => files.push((sf.parse::<ScaleFactor>()?, PathBuf::from(path.trim()))),
            None if sfs.len() == 1 && specs.len() == 1 => files.push((sfs[0], PathBuf::from(spec.trim()))),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "corpus `{spec}` needs an `SF=PATH` form when several scale factors are benchmarked"
                )))
            }
        }
    }
    Ok(CorpusFiles::new(files).with_tf_k(tf_k))
}
