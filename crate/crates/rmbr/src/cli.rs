//! The `rmbr` command line.
//!
//! Exit status: 0 on success, 1 for invalid flags or inputs, 2 for runtime
//! failures (I/O, scorer transport). Errors go to stderr prefixed `error:`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rmbr_core::{
    corpus_bleu, grid_search_lambdas, oracle_histogram, regularizer_values, rerank, sentence_chrf,
    token_prob_by_length, tune_l, CoarseToFine, EvalMetric, MetricConfig, NBestList, Regularizer,
    RerankConfig, RerankResult, TokenProbSource, Truncation, UtilitySource, UtilitySpec,
    DEFAULT_LAMBDA_GRID,
};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::nbest::load_nbest;
use crate::provider::UtilityProvider;
use crate::results::{write_results, OutputMode};
use crate::service::ScorerAddress;

#[derive(Debug, Parser)]
#[command(name = "rmbr", version, about = "Regularized MBR reranking of n-best lists")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Validate flags and inputs, then stop without scoring.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rerank every n-best list by (regularized) MBR.
    Rerank(RerankArgs),
    /// Coarse-to-fine reranking: shortlist with a proxy utility, rerank with the target.
    C2f(C2fArgs),
    /// Grid-search the regularizer weights on a dev set.
    TuneLambda(TuneLambdaArgs),
    /// Sweep the number of pseudo-references on a dev set.
    TuneL(TuneLArgs),
    /// Oracle selections and where they sit in the lists.
    Oracle(OracleArgs),
    /// Average token probability by sentence length.
    Tokenprob(TokenProbArgs),
    /// Corpus score of a hypothesis file against a reference file.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct ScoringArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    output: PathBuf,

    /// bleu, chrf, matrix:PATH or service:ADDR
    #[arg(long, default_value = "bleu")]
    utility: UtilitySpec,

    /// Pseudo-references per candidate: `full` or a count.
    #[arg(long, default_value = "full")]
    l: Truncation,

    /// Activates a regularizer with the given weight; repeatable.
    #[arg(long = "lambda", value_name = "NAME=VALUE", value_parser = parse_lambda)]
    lambdas: Vec<(Regularizer, f64)>,

    /// Run report path; defaults to `<output>.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Do not send source sentences to scorer services.
    #[arg(long)]
    no_source: bool,
}

#[derive(Debug, Args)]
struct RerankArgs {
    #[command(flatten)]
    scoring: ScoringArgs,

    /// `text` (one selection per line) or `full` (score breakdown records).
    #[arg(long, default_value = "text")]
    mode: OutputMode,
}

#[derive(Debug, Args)]
struct C2fArgs {
    #[command(flatten)]
    rerank: RerankArgs,

    /// Stage-one utility.
    #[arg(long, default_value = "bleu")]
    proxy: UtilitySpec,

    /// Candidates kept after stage one.
    #[arg(long, default_value_t = 15)]
    keep: usize,
}

#[derive(Debug, Args)]
struct TuneLambdaArgs {
    #[command(flatten)]
    scoring: ScoringArgs,

    /// Regularizer to tune; repeatable.
    #[arg(long = "regularizer", value_name = "NAME", required = true)]
    regularizers: Vec<Regularizer>,

    /// Comma-separated weights to try [default: 0.001,0.01,0.1,1,10]
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value_t = MetricArg::Bleu)]
    metric: MetricArg,

    /// Tune on coarse-to-fine reranking with this stage-one utility.
    #[arg(long)]
    proxy: Option<UtilitySpec>,

    #[arg(long, default_value_t = 15, requires = "proxy")]
    keep: usize,
}

#[derive(Debug, Args)]
struct TuneLArgs {
    #[command(flatten)]
    scoring: ScoringArgs,

    #[arg(long, value_enum, default_value_t = MetricArg::Bleu)]
    metric: MetricArg,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    output: PathBuf,

    /// Width of the rank intervals.
    #[arg(long, default_value_t = 5)]
    bins: usize,

    #[arg(long, value_enum, default_value_t = MetricArg::Bleu)]
    metric: MetricArg,

    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TokenProbArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    output: PathBuf,

    /// Width of the length intervals, in tokens.
    #[arg(long, default_value_t = 10)]
    bins: usize,

    #[arg(long, value_enum, default_value_t = WhichArg::Top1)]
    which: WhichArg,

    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Hypotheses, one per line.
    #[arg(long)]
    hyp: PathBuf,

    /// References, one per line.
    #[arg(long = "ref")]
    reference: PathBuf,

    #[arg(long, value_enum, default_value_t = MetricArg::Bleu)]
    metric: MetricArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Bleu,
    Chrf,
}

impl MetricArg {
    fn eval_metric(self) -> EvalMetric {
        match self {
            MetricArg::Bleu => EvalMetric::Bleu(MetricConfig::default()),
            MetricArg::Chrf => EvalMetric::Chrf(MetricConfig::default()),
        }
    }

    fn name(self) -> &'static str {
        match self {
            MetricArg::Bleu => "bleu",
            MetricArg::Chrf => "chrf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Top1,
    Reference,
}

fn parse_lambda(s: &str) -> std::result::Result<(Regularizer, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let reg: Regularizer = name.trim().parse().map_err(|e: rmbr_core::Error| e.to_string())?;
    let lambda: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if !lambda.is_finite() {
        return Err(format!("lambda for `{reg}` must be finite"));
    }
    Ok((reg, lambda))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| rmbr_core::Error::Config(format!("cannot start thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let ctx = Context { dry_run: cli.dry_run, threads };
    pool.install(|| match cli.command {
        Command::Rerank(a) => cmd_rerank(&ctx, a, None),
        Command::C2f(a) => {
            let c2f = CoarseToFine { proxy: a.proxy, keep: a.keep };
            cmd_rerank(&ctx, a.rerank, Some(c2f))
        }
        Command::TuneLambda(a) => cmd_tune_lambda(&ctx, a),
        Command::TuneL(a) => cmd_tune_l(&ctx, a),
        Command::Oracle(a) => cmd_oracle(&ctx, a),
        Command::Tokenprob(a) => cmd_tokenprob(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
    })
}

struct Context {
    dry_run: bool,
    threads: usize,
}

/// Wall-clock phases of a run, in milliseconds.
#[derive(Default)]
struct Timings(BTreeMap<&'static str, f64>);

impl Timings {
    fn time<T>(&mut self, phase: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(phase, start.elapsed().as_secs_f64() * 1000.0);
        out
    }
}

fn build_config(args: &ScoringArgs, c2f: Option<CoarseToFine>) -> Result<RerankConfig> {
    let mut cfg = RerankConfig {
        utility: args.utility.clone(),
        truncation: args.l,
        coarse_to_fine: c2f,
        ..RerankConfig::default()
    };
    for &(reg, lambda) in &args.lambdas {
        // pushed unconditionally so that validation reports duplicates
        cfg.regularizers.push(reg);
        cfg.lambdas.insert(reg, lambda);
    }
    cfg.validate()?;
    check_spec(&cfg.utility)?;
    if let Some(c2f) = &cfg.coarse_to_fine {
        check_spec(&c2f.proxy)?;
    }
    Ok(cfg)
}

fn check_spec(spec: &UtilitySpec) -> Result<()> {
    if let UtilitySpec::Service(addr) = spec {
        addr.parse::<ScorerAddress>()?;
        crate::service::timeout_from_env().map_err(rmbr_core::Error::Config)?;
    }
    Ok(())
}

/// Input checks shared by every scoring command: regularizer inputs are
/// present and precomputed matrices cover the pairs that will be asked for.
fn check_inputs(lists: &[NBestList], cfg: &RerankConfig, target: &UtilitySpec, proxy: Option<&UtilitySpec>) -> Result<()> {
    for list in lists {
        for &reg in &cfg.regularizers {
            regularizer_values(list, reg)?;
        }
    }
    let full_square = cfg.coarse_to_fine.is_some();
    check_matrix_coverage(lists, target, |n| if full_square { n } else { cfg.truncation.resolve(n) })?;
    if let Some(proxy) = proxy {
        check_matrix_coverage(lists, proxy, |n| n)?;
    }
    Ok(())
}

fn check_matrix_coverage(lists: &[NBestList], spec: &UtilitySpec, cols: impl Fn(usize) -> usize) -> Result<()> {
    if let UtilitySpec::Matrix(_) = spec {
        let provider = UtilityProvider::resolve(spec, lists.len(), false)?;
        for (i, list) in lists.iter().enumerate() {
            provider.utility_for(i)?.check_coverage(list.len(), cols(list.len()))?;
        }
    }
    Ok(())
}

fn report_path(explicit: Option<&Path>, output: &Path) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut name = output.as_os_str().to_owned();
        name.push(".report.json");
        PathBuf::from(name)
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn config_echo(cfg: &RerankConfig) -> Value {
    let lambdas: BTreeMap<&str, f64> = cfg.lambdas.iter().map(|(r, l)| (r.name(), *l)).collect();
    json!({
        "utility": cfg.utility.to_string(),
        "l": cfg.truncation.to_string(),
        "regularizers": cfg.regularizers.iter().map(|r| r.name()).collect::<Vec<_>>(),
        "lambdas": lambdas,
        "coarse_to_fine": cfg.coarse_to_fine.as_ref().map(|c| json!({"proxy": c.proxy.to_string(), "keep": c.keep})),
    })
}

fn dry_run_done(lists: &[NBestList]) -> Result<()> {
    println!("dry run: {} n-best lists validated", lists.len());
    Ok(())
}

fn rerank_all(
    lists: &[NBestList],
    cfg: &RerankConfig,
    target: &UtilityProvider,
    proxy: Option<&UtilityProvider>,
) -> Result<Vec<RerankResult>> {
    let outcomes: Vec<rmbr_core::Result<RerankResult>> = lists
        .par_iter()
        .enumerate()
        .map(|(i, list)| {
            let t = target.utility_for(i)?;
            let p = proxy.map(|p| p.utility_for(i)).transpose()?;
            rerank(list, cfg, t, p)
        })
        .collect();
    // report the first failing list, whatever order the workers hit them in
    outcomes
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| (i, e)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|(i, e)| {
            log::debug!("list {i} failed");
            e.into()
        })
}

fn cmd_rerank(ctx: &Context, args: RerankArgs, c2f: Option<CoarseToFine>) -> Result<()> {
    let started = Instant::now();
    let s = &args.scoring;
    let cfg = build_config(s, c2f)?;
    let proxy_spec = cfg.coarse_to_fine.as_ref().map(|c| c.proxy.clone());
    let mut timings = Timings::default();

    let lists = timings.time("load", || load_nbest(&s.input))?;
    check_inputs(&lists, &cfg, &cfg.utility, proxy_spec.as_ref())?;
    if ctx.dry_run {
        return dry_run_done(&lists);
    }

    let (target, proxy) = timings.time("connect", || -> Result<_> {
        let target = UtilityProvider::resolve(&cfg.utility, lists.len(), !s.no_source)?;
        let proxy = proxy_spec
            .as_ref()
            .map(|p| UtilityProvider::resolve(p, lists.len(), !s.no_source))
            .transpose()?;
        Ok((target, proxy))
    })?;
    let results = timings.time("score", || rerank_all(&lists, &cfg, &target, proxy.as_ref()))?;
    timings.time("write", || write_results(&s.output, &results, &lists, args.mode))?;

    let calls: Vec<usize> = results.iter().map(|r| r.utility_calls).collect();
    timings.0.insert("total", started.elapsed().as_secs_f64() * 1000.0);
    let report = json!({
        "command": if cfg.coarse_to_fine.is_some() { "c2f" } else { "rerank" },
        "input": s.input.display().to_string(),
        "output": s.output.display().to_string(),
        "mode": if args.mode == OutputMode::Full { "full" } else { "text" },
        "threads": ctx.threads,
        "config": config_echo(&cfg),
        "lists": lists.len(),
        "utility_calls": calls,
        "total_utility_calls": calls.iter().sum::<usize>(),
        "l": results.iter().map(|r| r.l).collect::<Vec<_>>(),
        "timings_ms": timings.0,
    });
    write_json(&report_path(s.report.as_deref(), &s.output), &report)
}

fn cmd_tune_lambda(ctx: &Context, args: TuneLambdaArgs) -> Result<()> {
    let started = Instant::now();
    let s = &args.scoring;
    if !s.lambdas.is_empty() {
        return Err(rmbr_core::Error::Config("tune-lambda takes --regularizer, not --lambda".into()).into());
    }
    let c2f = args.proxy.clone().map(|proxy| CoarseToFine { proxy, keep: args.keep });
    let mut cfg = build_config(s, c2f)?;
    for &reg in &args.regularizers {
        cfg.regularizers.push(reg);
        // placeholder; every grid point overrides it
        cfg.lambdas.insert(reg, 0.0);
    }
    cfg.validate()?;
    let grid = args.grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
        return Err(rmbr_core::Error::Config("--grid needs finite values".into()).into());
    }
    let metric = args.metric.eval_metric();
    let mut timings = Timings::default();

    let lists = timings.time("load", || load_nbest(&s.input))?;
    check_references(&lists)?;
    check_inputs(&lists, &cfg, &cfg.utility, args.proxy.as_ref())?;
    if ctx.dry_run {
        return dry_run_done(&lists);
    }

    let target = UtilityProvider::resolve(&cfg.utility, lists.len(), !s.no_source)?;
    let proxy = args
        .proxy
        .as_ref()
        .map(|p| UtilityProvider::resolve(p, lists.len(), !s.no_source))
        .transpose()?;
    let outcome = timings.time("search", || {
        grid_search_lambdas(&lists, &cfg, &grid, &metric, &target, proxy.as_ref().map(|p| p as &dyn UtilitySource))
    })?;

    let names: Vec<&str> = cfg.regularizers.iter().map(|r| r.name()).collect();
    let named = |values: &[f64]| -> BTreeMap<&str, f64> { names.iter().copied().zip(values.iter().copied()).collect() };
    let best: Vec<f64> = cfg.regularizers.iter().map(|r| outcome.lambdas[r]).collect();
    let out = json!({
        "metric": args.metric.name(),
        "lambdas": named(&best),
        "objective": outcome.objective,
        "evaluations": outcome.evaluations,
        "table": outcome.table.iter().map(|(l, o)| json!({"lambdas": named(l), "objective": o})).collect::<Vec<_>>(),
    });
    write_json(&s.output, &out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}\t{}", names.join("\t"), args.metric.name());
    for (l, o) in &outcome.table {
        let cells: Vec<String> = l.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(stdout, "{}\t{o:.6}", cells.join("\t"));
    }
    let _ = writeln!(stdout, "best: {} -> {:.6}", format_lambdas(&names, &best), outcome.objective);

    timings.0.insert("total", started.elapsed().as_secs_f64() * 1000.0);
    let report = json!({
        "command": "tune-lambda",
        "input": s.input.display().to_string(),
        "output": s.output.display().to_string(),
        "threads": ctx.threads,
        "config": config_echo(&cfg),
        "grid": grid,
        "lists": lists.len(),
        "timings_ms": timings.0,
    });
    write_json(&report_path(s.report.as_deref(), &s.output), &report)
}

fn format_lambdas(names: &[&str], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_references(lists: &[NBestList]) -> Result<()> {
    if let Some(i) = lists.iter().position(|l| l.reference().is_none()) {
        return Err(rmbr_core::Error::InvalidInput(format!("n-best list {i} has no reference")).into());
    }
    Ok(())
}

fn cmd_tune_l(ctx: &Context, args: TuneLArgs) -> Result<()> {
    let started = Instant::now();
    let s = &args.scoring;
    if s.l != Truncation::Full {
        return Err(rmbr_core::Error::Config("tune-l sweeps every l; drop --l".into()).into());
    }
    let cfg = build_config(s, None)?;
    let metric = args.metric.eval_metric();
    let mut timings = Timings::default();

    let lists = timings.time("load", || load_nbest(&s.input))?;
    check_references(&lists)?;
    check_inputs(&lists, &cfg, &cfg.utility, None)?;
    if ctx.dry_run {
        return dry_run_done(&lists);
    }

    let target = UtilityProvider::resolve(&cfg.utility, lists.len(), !s.no_source)?;
    let outcome = timings.time("sweep", || tune_l(&lists, &cfg, &metric, &target))?;
    let out = json!({
        "metric": args.metric.name(),
        "l": outcome.l,
        "objective": outcome.objective,
        "curve": outcome.curve.iter().map(|(l, o)| json!({"l": l, "objective": o})).collect::<Vec<_>>(),
    });
    write_json(&s.output, &out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "l\t{}", args.metric.name());
    for (l, o) in &outcome.curve {
        let _ = writeln!(stdout, "{l}\t{o:.6}");
    }
    let _ = writeln!(stdout, "best: l={} -> {:.6}", outcome.l, outcome.objective);

    timings.0.insert("total", started.elapsed().as_secs_f64() * 1000.0);
    let report = json!({
        "command": "tune-l",
        "input": s.input.display().to_string(),
        "output": s.output.display().to_string(),
        "threads": ctx.threads,
        "config": config_echo(&cfg),
        "lists": lists.len(),
        "timings_ms": timings.0,
    });
    write_json(&report_path(s.report.as_deref(), &s.output), &report)
}

fn cmd_oracle(ctx: &Context, args: OracleArgs) -> Result<()> {
    let started = Instant::now();
    if args.bins == 0 {
        return Err(rmbr_core::Error::Config("--bins must be >= 1".into()).into());
    }
    let mut timings = Timings::default();
    let lists = timings.time("load", || load_nbest(&args.input))?;
    check_references(&lists)?;
    if ctx.dry_run {
        return dry_run_done(&lists);
    }

    let metric = args.metric.eval_metric();
    let report = timings.time("oracle", || oracle_histogram(&lists, &metric, args.bins))?;
    let out = json!({
        "metric": args.metric.name(),
        "bin_width": args.bins,
        "corpus_score": report.corpus_score,
        "oracles": report.oracles.iter().map(|(i, s)| json!({"index": i, "score": s})).collect::<Vec<_>>(),
        "bins": report.bins.iter().map(|b| json!({
            "first": b.first, "last": b.last, "count": b.count, "proportion": b.proportion,
        })).collect::<Vec<_>>(),
    });
    write_json(&args.output, &out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "ranks\tcount\tproportion");
    for b in &report.bins {
        let _ = writeln!(stdout, "{}-{}\t{}\t{:.4}", b.first, b.last, b.count, b.proportion);
    }
    let _ = writeln!(stdout, "oracle corpus {}: {:.6}", args.metric.name(), report.corpus_score);

    timings.0.insert("total", started.elapsed().as_secs_f64() * 1000.0);
    write_json(
        &report_path(args.report.as_deref(), &args.output),
        &json!({
            "command": "oracle",
            "input": args.input.display().to_string(),
            "output": args.output.display().to_string(),
            "threads": ctx.threads,
            "lists": lists.len(),
            "timings_ms": timings.0,
        }),
    )
}

fn cmd_tokenprob(ctx: &Context, args: TokenProbArgs) -> Result<()> {
    let started = Instant::now();
    if args.bins == 0 {
        return Err(rmbr_core::Error::Config("--bins must be >= 1".into()).into());
    }
    let which = match args.which {
        WhichArg::Top1 => TokenProbSource::Top1,
        WhichArg::Reference => TokenProbSource::Reference,
    };
    let which_name = match args.which {
        WhichArg::Top1 => "top1",
        WhichArg::Reference => "reference",
    };
    let mut timings = Timings::default();
    let lists = timings.time("load", || load_nbest(&args.input))?;
    // the table itself is cheap; computing it is the validation
    let table = timings.time("table", || token_prob_by_length(&lists, args.bins, which))?;
    if ctx.dry_run {
        return dry_run_done(&lists);
    }

    let out = json!({
        "which": which_name,
        "interval_width": table.interval_width,
        "rows": table.rows.iter().map(|r| json!({
            "first": r.first, "last": r.last, "sentences": r.sentences, "mean": r.mean,
        })).collect::<Vec<_>>(),
    });
    write_json(&args.output, &out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "length\tsentences\tmean_token_prob");
    for r in &table.rows {
        let _ = writeln!(stdout, "{}-{}\t{}\t{:.4}", r.first, r.last, r.sentences, r.mean);
    }

    timings.0.insert("total", started.elapsed().as_secs_f64() * 1000.0);
    write_json(
        &report_path(args.report.as_deref(), &args.output),
        &json!({
            "command": "tokenprob",
            "input": args.input.display().to_string(),
            "output": args.output.display().to_string(),
            "threads": ctx.threads,
            "lists": lists.len(),
            "timings_ms": timings.0,
        }),
    )
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn cmd_eval(ctx: &Context, args: EvalArgs) -> Result<()> {
    let hyps = read_lines(&args.hyp)?;
    let refs = read_lines(&args.reference)?;
    if hyps.is_empty() {
        return Err(Error::EmptyInput { path: args.hyp });
    }
    if hyps.len() != refs.len() {
        return Err(rmbr_core::Error::InvalidInput(format!(
            "{} hypotheses but {} references",
            hyps.len(),
            refs.len()
        ))
        .into());
    }
    if ctx.dry_run {
        println!("dry run: {} sentence pairs validated", hyps.len());
        return Ok(());
    }
    let cfg = MetricConfig::default();
    let score = match args.metric {
        MetricArg::Bleu => {
            let h: Vec<Vec<&str>> = hyps.iter().map(|s| s.split_whitespace().collect()).collect();
            let r: Vec<Vec<&str>> = refs.iter().map(|s| s.split_whitespace().collect()).collect();
            corpus_bleu(&h, &r, &cfg)?
        }
        MetricArg::Chrf => {
            let scores = hyps
                .par_iter()
                .zip(&refs)
                .map(|(h, r)| sentence_chrf(h, r, &cfg))
                .collect::<rmbr_core::Result<Vec<f64>>>()?;
            scores.iter().sum::<f64>() / scores.len() as f64
        }
    };
    println!("{}\t{score}", args.metric.name());
    Ok(())
}
