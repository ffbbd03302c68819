//! Command-line front end for expected-exposure evaluation.
//!
//! Subcommands:
//!
//! * `evaluate` — score run files against a query set and group definition,
//!   producing a leaderboard and per-query detail files.
//! * `simulate` — drive a baseline policy over a query set and emit a run
//!   file, so the simulate -> evaluate pipeline exercises the whole toolkit.
//! * `target` — print the per-author target exposure table for a query set.
//! * `decompose` — emit disparity/relevance plot data for one or more runs.
//! * `leaderboard` — merge previously written machine-readable metrics into
//!   a single ordered table.
//! * `estimate-relevance` — derive binary relevance from a click log by
//!   inverse-propensity-weighted click rates.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or validation
//! errors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use fair_exposure::config::EvalConfig;
use fair_exposure::error::Warning;
use fair_exposure::exposure::target_exposure;
use fair_exposure::ingest::{
    estimate_relevance, load_run_file, parse_clicks_file, parse_group_file, parse_metadata,
    parse_queries_file, read_leaderboard_records, run_file::run_data_from_sequences,
    write_leaderboard_records, write_leaderboard_table, write_plot_data, write_query_details,
    write_run_file, Catalog,
};
use fair_exposure::metrics::{
    evaluate_query, leaderboard, match_run, sort_leaderboard, LeaderboardRow, RunMetrics,
};
use fair_exposure::policies::{run_protocol, PolicyKind, PolicySpec};
use fair_exposure::types::{GroupAssignment, Request};

#[derive(Parser)]
#[command(
    name = "fair-exposure",
    version,
    about = "Expected-exposure evaluation for stochastic ranking systems",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score run files against a query set and group definition.
    Evaluate(EvaluateArgs),
    /// Generate a run file by driving a baseline policy over a query set.
    Simulate(SimulateArgs),
    /// Print the per-author target exposure table for a query set.
    Target(TargetArgs),
    /// Emit disparity/relevance plot data for one or more runs.
    Decompose(DecomposeArgs),
    /// Merge machine-readable metrics files into one ordered table.
    Leaderboard(LeaderboardArgs),
    /// Estimate binary relevance from a click log.
    EstimateRelevance(EstimateRelevanceArgs),
}

/// Browsing-model flags shared by every evaluating subcommand.
#[derive(Args)]
struct ConfigArgs {
    /// Continuation probability of the browsing model, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Stop probability after examining a relevant document. Toolkit
    /// default; set explicitly to match an external evaluation setup.
    #[arg(long = "stop-rel", default_value_t = 0.7)]
    stop_rel: f64,
    /// Stop probability after examining a non-relevant document. Toolkit
    /// default; set explicitly to match an external evaluation setup.
    #[arg(long = "stop-nonrel", default_value_t = 0.0)]
    stop_nonrel: f64,
}

impl ConfigArgs {
    fn build(&self, strict: bool) -> Result<EvalConfig> {
        EvalConfig::new(self.gamma, self.stop_rel, self.stop_nonrel, strict)
            .context("invalid browsing-model configuration")
    }
}

#[derive(Args)]
struct QueryInputArgs {
    /// Queries file: one JSON object per line (qid, query, documents).
    #[arg(long)]
    queries: PathBuf,
    /// Directory holding paper_metadata.csv, author_metadata.csv and
    /// authors_for_papers.csv; used to fill in author lists for documents
    /// without inline authors.
    #[arg(long)]
    metadata_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run files to score (one leaderboard row each).
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    #[command(flatten)]
    queries: QueryInputArgs,
    /// Group definition CSV with author,gid columns.
    #[arg(long)]
    groups: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Abort on validation problems instead of skipping with warnings.
    #[arg(long)]
    strict: bool,
    /// Number of queries to evaluate concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for leaderboard.tsv, leaderboard.jsonl, plot_data.tsv and
    /// per-run <run_id>.queries.jsonl detail files. The leaderboard table is
    /// always printed to stdout as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    queries: QueryInputArgs,
    /// Baseline policy: deterministic-relevance, uniform-random,
    /// ideal-sampler, or greedy-balancer.
    #[arg(long, value_parser = parse_policy)]
    policy: PolicyKind,
    /// Impressions per query sequence.
    #[arg(long, default_value_t = 100)]
    impressions: usize,
    /// Seed determining all policy randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    config: ConfigArgs,
    /// Run file to write (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TargetArgs {
    #[command(flatten)]
    queries: QueryInputArgs,
    /// Impressions each query's target is scaled by.
    #[arg(long, default_value_t = 1)]
    impressions: usize,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output TSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Run files to decompose.
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    #[command(flatten)]
    queries: QueryInputArgs,
    /// Group definition CSV with author,gid columns.
    #[arg(long)]
    groups: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Abort on validation problems instead of skipping with warnings.
    #[arg(long)]
    strict: bool,
    /// Number of queries to evaluate concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output TSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LeaderboardArgs {
    /// Machine-readable metrics files (leaderboard.jsonl) to merge.
    #[arg(long, num_args = 1.., required = true)]
    metrics: Vec<PathBuf>,
    /// Output TSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateRelevanceArgs {
    /// Click log CSV with qid,doc_id,position,clicked,propensity columns.
    #[arg(long)]
    clicks: PathBuf,
    /// Relevance threshold on the propensity-weighted click rate. Required:
    /// there is no sensible universal default.
    #[arg(long)]
    threshold: f64,
    /// Output TSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Target(args) => cmd_target(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Leaderboard(args) => cmd_leaderboard(args),
        Command::EstimateRelevance(args) => cmd_estimate_relevance(args),
    }
}

fn print_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("{w}");
    }
}

fn load_catalog(dir: &Path) -> Result<Catalog> {
    let open = |name: &str| {
        File::open(dir.join(name)).with_context(|| format!("opening {}", dir.join(name).display()))
    };
    let (catalog, warnings) = parse_metadata(
        open("paper_metadata.csv")?,
        open("author_metadata.csv")?,
        open("authors_for_papers.csv")?,
    )
    .context("parsing metadata")?;
    print_warnings(&warnings);
    Ok(catalog)
}

fn load_queries(args: &QueryInputArgs) -> Result<Vec<Request>> {
    let catalog = args
        .metadata_dir
        .as_deref()
        .map(load_catalog)
        .transpose()?;
    let file = File::open(&args.queries)
        .with_context(|| format!("opening {}", args.queries.display()))?;
    let (requests, warnings) = parse_queries_file(BufReader::new(file), catalog.as_ref())
        .with_context(|| format!("parsing {}", args.queries.display()))?;
    print_warnings(&warnings);
    Ok(requests)
}

fn load_groups(path: &Path) -> Result<GroupAssignment> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_group_file(file).with_context(|| format!("parsing {}", path.display()))
}

/// Writer on the given path, or stdout when absent.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Scores each run file against the query set, evaluating queries in
/// parallel on `jobs` threads. Query metrics are reassembled in qid order, so
/// the output is identical for any job count.
fn evaluate_all_runs(
    run_paths: &[PathBuf],
    requests: &[Request],
    groups: &GroupAssignment,
    config: &EvalConfig,
    jobs: usize,
) -> Result<Vec<RunMetrics>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building evaluation thread pool")?;

    let mut all = Vec::with_capacity(run_paths.len());
    for path in run_paths {
        let (run_data, warnings) =
            load_run_file(path).with_context(|| format!("parsing {}", path.display()))?;
        print_warnings(&warnings);
        let sequences = run_data.sequences();
        let run_id = run_data.run_id.clone();
        let (pairs, warnings) = match_run(&run_id, requests, &sequences, config)
            .with_context(|| format!("run {run_id}"))?;
        print_warnings(&warnings);
        let per_query = pool.install(|| {
            pairs
                .par_iter()
                .map(|(request, seq)| evaluate_query(request, seq, groups, config))
                .collect::<Result<Vec<_>, _>>()
        })
        .with_context(|| format!("run {run_id}"))?;
        all.push(RunMetrics::from_query_metrics(run_id, per_query));
    }
    Ok(all)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let config = args.config.build(args.strict)?;
    let requests = load_queries(&args.queries)?;
    let groups = load_groups(&args.groups)?;
    let all = evaluate_all_runs(&args.runs, &requests, &groups, &config, args.jobs)?;
    let rows = leaderboard(&all);

    if let Some(out_dir) = &args.out {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating {}", out_dir.display()))?;
        for rm in &all {
            let path = out_dir.join(format!("{}.queries.jsonl", rm.run_id));
            write_query_details(rm, BufWriter::new(File::create(&path)?))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        write_leaderboard_table(
            &rows,
            BufWriter::new(File::create(out_dir.join("leaderboard.tsv"))?),
        )?;
        write_leaderboard_records(
            &rows,
            BufWriter::new(File::create(out_dir.join("leaderboard.jsonl"))?),
        )?;
        write_plot_data(
            &rows,
            BufWriter::new(File::create(out_dir.join("plot_data.tsv"))?),
        )?;
    }

    write_leaderboard_table(&rows, std::io::stdout().lock())?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = args.config.build(false)?;
    let requests = load_queries(&args.queries)?;
    let spec = PolicySpec::new(args.policy, args.seed);
    let sequences = run_protocol(&requests, args.impressions, &spec, &config);
    let run_data = run_data_from_sequences(args.policy.name(), &sequences);
    write_run_file(&run_data, output(args.out.as_deref())?)?;
    Ok(())
}

fn cmd_target(args: TargetArgs) -> Result<()> {
    let config = args.config.build(false)?;
    let requests = load_queries(&args.queries)?;

    // Aggregate per author: each query contributes its target exposure over
    // the requested impression count.
    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    for request in &requests {
        let target = target_exposure(request, args.impressions, &config)
            .with_context(|| format!("query {}", request.qid()))?;
        for (author, amount) in target.iter() {
            *totals.entry(author.clone()).or_insert(0.0) += amount;
        }
    }

    let mut writer = output(args.out.as_deref())?;
    writeln!(writer, "author_id\ttarget")?;
    for (author, amount) in &totals {
        writeln!(writer, "{author}\t{amount}")?;
    }
    Ok(())
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let config = args.config.build(args.strict)?;
    let requests = load_queries(&args.queries)?;
    let groups = load_groups(&args.groups)?;
    let all = evaluate_all_runs(&args.runs, &requests, &groups, &config, args.jobs)?;
    let rows = leaderboard(&all);
    write_plot_data(&rows, output(args.out.as_deref())?)?;
    Ok(())
}

fn cmd_leaderboard(args: LeaderboardArgs) -> Result<()> {
    let mut rows: Vec<LeaderboardRow> = Vec::new();
    for path in &args.metrics {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        rows.extend(
            read_leaderboard_records(BufReader::new(file))
                .with_context(|| format!("parsing {}", path.display()))?,
        );
    }
    sort_leaderboard(&mut rows);
    write_leaderboard_table(&rows, output(args.out.as_deref())?)?;
    Ok(())
}

fn cmd_estimate_relevance(args: EstimateRelevanceArgs) -> Result<()> {
    let file =
        File::open(&args.clicks).with_context(|| format!("opening {}", args.clicks.display()))?;
    let clicks =
        parse_clicks_file(file).with_context(|| format!("parsing {}", args.clicks.display()))?;
    let relevance = estimate_relevance(&clicks, args.threshold);

    let mut writer = output(args.out.as_deref())?;
    writeln!(writer, "qid\tdoc_id\trelevance")?;
    for ((qid, doc_id), relevant) in &relevance {
        writeln!(writer, "{qid}\t{doc_id}\t{}", u8::from(*relevant))?;
    }
    Ok(())
}
