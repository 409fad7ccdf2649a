//! Command-line driver for the graphlet-distribution engine.
//!
//! Subcommands follow the pipeline: `ingest`/`gen` produce cleaned graph
//! files, `ddorder` computes and scores a vertex order, `estimate` runs the
//! sampling phase, and `oracle` produces exact ground truth for small graphs.
//! Every command prints a single JSON summary line on stdout and is
//! deterministic given its seed.

use std::collections::hash_map::RandomState;
use std::fs::File;
use std::hash::{BuildHasher, Hasher};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use glstrm::ddorder::{
    approx_dd_es, approx_dd_es_resume, approx_dd_warmup, baseline_dd, evaluate_order,
    prefix_heuristic, DDConfig, OrderResult, PeelState, VertexOrder,
};
use glstrm::edgestream::{self, GraphSource, InputFormat};
use glstrm::estimator::{
    required_samples, write_estimate_csv, ClassRegistry, DistributionEstimate, RejectionEstimator,
};
use glstrm::initdist::{init_distribution, InitialDistribution};
use glstrm::oracle::{self, MemGraph};
use glstrm::sampler::{grow_batch, write_sample_log, BatchConfig};
use glstrm::{Error, MemoryMeter};

#[derive(Parser)]
#[command(
    name = "glstrm",
    version,
    about = "Streaming k-graphlet distribution estimation"
)]
struct Cli {
    /// Cap on worker threads for batched sampling.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a raw edge list into the replayable binary format.
    Ingest(IngestArgs),
    /// Generate a synthetic graph in cleaned binary format.
    Gen(GenArgs),
    /// Compute a degree-dominating vertex order and score it.
    Ddorder(DdorderArgs),
    /// Estimate the k-graphlet distribution by streaming sampling.
    Estimate(EstimateArgs),
    /// Exact distribution (and optional order/positivity dumps) for small graphs.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Raw edge list to clean.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Output directory for graph.glstrm and graph.glstrm.map.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    model: GenModel,
}

#[derive(Subcommand)]
enum GenModel {
    /// Erdős–Rényi: each pair drawn independently with probability m/(n(n-1)/2).
    Er {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DdorderArgs {
    /// Cleaned binary graph file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = OrdererArg::Es)]
    orderer: OrdererArg,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Spend one pass measuring the exact initial max degree.
    #[arg(long)]
    exact_delta_init: bool,
    /// Enable the in-memory prefix head start (needs --budget-words).
    #[arg(long)]
    heuristic: bool,
    /// Memory budget in 8-byte words for sampled arcs / the prefix subgraph.
    #[arg(long)]
    budget_words: Option<u64>,
    /// Skip the quality evaluation passes.
    #[arg(long)]
    no_eval: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: u32,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// Target L-infinity error; sets the sample count with --bound-samples.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Total samples to draw (default 100000).
    #[arg(long)]
    samples: Option<u64>,
    /// Number of batches (alternative to --samples).
    #[arg(long)]
    batches: Option<u64>,
    /// Derive the sample count from the concentration bound for --alpha.
    #[arg(long)]
    bound_samples: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OrdererArg::Es)]
    orderer: OrdererArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Counter)]
    estimator: EstimatorArg,
    /// Memory budget in words; bounds the per-batch instance count.
    #[arg(long)]
    budget_words: Option<u64>,
    /// Write an estimate CSV after every batch.
    #[arg(long)]
    emit_intermediate: bool,
    /// Write a binary sample log per batch.
    #[arg(long)]
    log_samples: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: u32,
    /// Also write the exact order to exact-order.txt.
    #[arg(long)]
    dump_order: bool,
    /// Also write per-vertex positivity and rooted counts (needs n <= 200).
    #[arg(long)]
    dump_positivity: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum OrdererArg {
    Es,
    Warmup,
    Baseline,
    Exact,
}

impl OrdererArg {
    fn name(self) -> &'static str {
        match self {
            OrdererArg::Es => "es",
            OrdererArg::Warmup => "warmup",
            OrdererArg::Baseline => "baseline",
            OrdererArg::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum EstimatorArg {
    Counter,
    Rejection,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global();
    }
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Ddorder(args) => cmd_ddorder(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Capacity(_) | Error::Validation(_) | Error::NoGraphlets => 2,
        Error::Budget { .. } => 3,
        Error::Inconsistency(_) => 4,
        Error::Guard(_) => 5,
        Error::Io(_) | Error::PartialPass { .. } => 1,
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let mut hasher = RandomState::new().build_hasher();
        hasher.write_u64(std::process::id() as u64);
        hasher.finish()
    })
}

fn scratch_dir() -> PathBuf {
    std::env::var_os("GLSTRM_SCRATCH")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
}

fn ensure_out_dir(path: &Path) -> glstrm::Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn graph_path(out: &Path) -> PathBuf {
    out.join("graph.glstrm")
}

fn cmd_ingest(args: IngestArgs) -> glstrm::Result<()> {
    ensure_out_dir(&args.out)?;
    let file = BufReader::new(File::open(&args.input)?);
    let format = match args.format {
        FormatArg::Text => InputFormat::Text,
        FormatArg::Binary => InputFormat::Binary,
    };
    let target = graph_path(&args.out);
    let ingested = edgestream::ingest(file, format, Some(&target))?;
    println!(
        "{}",
        serde_json::json!({
            "command": "ingest",
            "n": ingested.source.n(),
            "m": ingested.source.m(),
            "graph": target,
            "map": edgestream::map_path(&target),
        })
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> glstrm::Result<()> {
    match args.model {
        GenModel::Er { n, m, seed, out } => {
            ensure_out_dir(&out)?;
            let seed = resolve_seed(seed);
            let target = graph_path(&out);
            let source = edgestream::generate_er(n, m, seed, Some(&target))?;
            println!(
                "{}",
                serde_json::json!({
                    "command": "gen",
                    "model": "er",
                    "n": source.n(),
                    "m": source.m(),
                    "seed": seed,
                    "graph": target,
                })
            );
            Ok(())
        }
    }
}

fn run_orderer(
    source: &GraphSource,
    orderer: OrdererArg,
    cfg: &DDConfig,
    heuristic: bool,
    budget_words: Option<u64>,
    meter: &MemoryMeter,
) -> glstrm::Result<OrderResult> {
    match orderer {
        OrdererArg::Es => {
            if heuristic {
                let mut state = PeelState::from_source(source)?;
                let budget = budget_words
                    .ok_or_else(|| Error::Validation("--heuristic needs --budget-words".into()))?;
                prefix_heuristic(source, cfg, &mut state, budget, meter)?;
                approx_dd_es_resume(source, cfg, meter, state)
            } else {
                approx_dd_es(source, cfg, meter)
            }
        }
        OrdererArg::Warmup => approx_dd_warmup(source, cfg, meter),
        OrdererArg::Baseline => baseline_dd(source, cfg.epsilon, meter),
        OrdererArg::Exact => {
            let graph = MemGraph::from_source(source, oracle::MAX_DISTRIBUTION_N)?;
            let order = oracle::exact_dd_order(&graph);
            Ok(OrderResult {
                order,
                passes: 1,
                iterations: 0,
                pass_stats: Vec::new(),
            })
        }
    }
}

fn cmd_ddorder(args: DdorderArgs) -> glstrm::Result<()> {
    ensure_out_dir(&args.out)?;
    let seed = resolve_seed(args.seed);
    let mut cfg = DDConfig::new(args.epsilon, args.delta, args.c, seed);
    cfg.exact_delta_init = args.exact_delta_init;
    cfg.arc_budget = args.budget_words;
    cfg.validate()?;
    let source = GraphSource::open(&args.input)?;
    let meter = MemoryMeter::new();
    let result = run_orderer(
        &source,
        args.orderer,
        &cfg,
        args.heuristic,
        args.budget_words,
        &meter,
    )?;
    let order_file = args.out.join("order.txt");
    result.order.write_text(&order_file)?;

    let passes_preprocess = source.passes();
    let mut summary = serde_json::json!({
        "command": "ddorder",
        "orderer": args.orderer.name(),
        "n": source.n(),
        "m": source.m(),
        "epsilon": args.epsilon,
        "delta": args.delta,
        "c": args.c,
        "seed": seed,
        "passes_preprocess": passes_preprocess,
        "passes_sampling": 0,
        "iterations": result.iterations,
        "peak_words": meter.peak_words(),
        "order_file": order_file,
    });
    if !args.no_eval {
        let report = evaluate_order(&source, &result.order, &scratch_dir(), &meter)?;
        let csv = args.out.join("quality.csv");
        report.write_csv(&csv)?;
        let json_path = args.out.join("quality.json");
        std::fs::write(json_path.clone(), report.summary_json().to_string())?;
        summary["max_eps"] = serde_json::json!(report.max_eps);
        summary["passes_evaluate"] = serde_json::json!(source.passes() - passes_preprocess);
        summary["quality_csv"] = serde_json::json!(csv);
        summary["quality_json"] = serde_json::json!(json_path);
        summary["peak_words"] = serde_json::json!(meter.peak_words());
    }
    println!("{summary}");
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> glstrm::Result<()> {
    ensure_out_dir(&args.out)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Validation("alpha must be in (0,1)".into()));
    }
    let seed = resolve_seed(args.seed);
    let mut cfg = DDConfig::new(args.epsilon, args.delta, args.c, seed);
    cfg.arc_budget = args.budget_words;
    cfg.validate()?;
    let source = GraphSource::open(&args.input)?;
    let meter = MemoryMeter::new();
    let registry = ClassRegistry::shared(args.k)?;
    let scratch = scratch_dir();

    // Preprocessing: reuse sidecars when present, otherwise build them.
    let order_file = args.out.join("order.txt");
    let init_file = args.out.join("init.bin");
    let order = if order_file.is_file() {
        let order = VertexOrder::read_text(&order_file)?;
        if order.len() as u64 != source.n() {
            return Err(Error::Validation(format!(
                "{} does not match the graph (n={})",
                order_file.display(),
                source.n()
            )));
        }
        order
    } else {
        let result = run_orderer(
            &source,
            args.orderer,
            &cfg,
            false,
            args.budget_words,
            &meter,
        )?;
        result.order.write_text(&order_file)?;
        result.order
    };
    let init = if init_file.is_file() {
        let init = InitialDistribution::read(&init_file)?;
        if init.k != args.k || init.n() as u64 != source.n() {
            return Err(Error::Validation(format!(
                "{} does not match k={} / n={}",
                init_file.display(),
                args.k,
                source.n()
            )));
        }
        init
    } else {
        let init = init_distribution(&source, &order, args.k, &scratch, &meter)?;
        init.write(&init_file)?;
        init
    };
    if init.is_empty() {
        return Err(Error::NoGraphlets);
    }
    let passes_preprocess = source.passes();

    // Sampling phase.
    let default_budget = 1u64 << 22;
    let budget = args.budget_words.unwrap_or(default_budget);
    let max_batch = BatchConfig::max_batch_for_budget(args.k, budget).max(1);
    let total_samples = if let Some(t) = args.samples {
        t
    } else if let Some(b) = args.batches {
        b * max_batch
    } else if args.bound_samples {
        required_samples(
            args.k,
            args.epsilon,
            args.alpha,
            args.delta,
            registry.class_count(),
        )
    } else {
        100_000
    };
    if total_samples == 0 {
        return Err(Error::Validation("sample count must be positive".into()));
    }

    let gamma = RejectionEstimator::gamma(args.k, args.epsilon, init.z_f64());
    let mut counter = DistributionEstimate::new(registry.class_count());
    let mut rejection = RejectionEstimator::new(registry.class_count(), gamma, seed ^ 0x0E7E);
    let mut drawn = 0u64;
    let mut batch_index = 0u64;
    while drawn < total_samples {
        let batch_size = max_batch.min(total_samples - drawn);
        let bcfg = BatchConfig {
            batch_size,
            k: args.k,
            memory_budget_words: Some(budget),
            seed,
            epsilon: args.epsilon,
            batch_index,
        };
        let samples = grow_batch(&source, &order, &init, &registry, &bcfg, &meter)?;
        for s in &samples {
            match args.estimator {
                EstimatorArg::Counter => counter.add_weighted(s.class_index, 1.0 / s.p_sample),
                EstimatorArg::Rejection => {
                    rejection.offer(s.class_index, s.p_sample)?;
                }
            }
        }
        if args.log_samples {
            write_sample_log(
                &args.out.join(format!("samples-{batch_index}.bin")),
                args.k,
                &samples,
            )?;
        }
        drawn += batch_size;
        batch_index += 1;
        if args.emit_intermediate {
            let est = match args.estimator {
                EstimatorArg::Counter => counter.clone(),
                EstimatorArg::Rejection => rejection.estimate().clone(),
            };
            write_estimate_csv(
                &args
                    .out
                    .join(format!("estimate-after-batch-{batch_index}.csv")),
                &registry,
                &est,
            )?;
        }
    }
    let passes_sampling = source.passes() - passes_preprocess;

    let estimate = match args.estimator {
        EstimatorArg::Counter => counter,
        EstimatorArg::Rejection => rejection.estimate().clone(),
    };
    let csv = args.out.join("estimate.csv");
    write_estimate_csv(&csv, &registry, &estimate)?;
    let summary = serde_json::json!({
        "command": "estimate",
        "k": args.k,
        "m_k": registry.class_count(),
        "estimator": match args.estimator {
            EstimatorArg::Counter => "counter",
            EstimatorArg::Rejection => "rejection",
        },
        "orderer": args.orderer.name(),
        "T": estimate.samples_used,
        "C_hat": estimate.c_hat(),
        "passes_preprocess": passes_preprocess,
        "passes_sampling": passes_sampling,
        "peak_words": meter.peak_words(),
        "seed": seed,
        "batches": batch_index,
        "estimate_csv": csv,
    });
    std::fs::write(args.out.join("summary.json"), summary.to_string())?;
    println!("{summary}");
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> glstrm::Result<()> {
    ensure_out_dir(&args.out)?;
    let source = GraphSource::open(&args.input)?;
    let registry = ClassRegistry::shared(args.k)?;
    let graph = MemGraph::from_source(&source, oracle::MAX_DISTRIBUTION_N)?;
    let dist = oracle::exact_distribution(&graph, args.k, &registry)?;
    let csv = args.out.join("exact.csv");
    let mut estimate = DistributionEstimate::new(registry.class_count());
    for (class, &count) in dist.counts.iter().enumerate() {
        if count > 0 {
            estimate.counters[class] = count as f64;
            estimate.samples_used += count;
        }
    }
    write_estimate_csv(&csv, &registry, &estimate)?;
    let mut summary = serde_json::json!({
        "command": "oracle",
        "exact": true,
        "k": args.k,
        "m_k": registry.class_count(),
        "n": source.n(),
        "m": source.m(),
        "L": dist.total,
        "estimate_csv": csv,
    });
    if args.dump_order || args.dump_positivity {
        let order = oracle::exact_dd_order(&graph);
        if args.dump_order {
            let path = args.out.join("exact-order.txt");
            order.write_text(&path)?;
            summary["order_file"] = serde_json::json!(path);
        }
        if args.dump_positivity {
            let rows = oracle::exact_positivity_and_nv(&graph, &order, args.k)?;
            let path = args.out.join("exact-positivity.csv");
            let mut body = String::from("vertex,positive,n_v\n");
            for (v, (positive, nv)) in rows.iter().enumerate() {
                body.push_str(&format!("{v},{},{nv}\n", *positive as u8));
            }
            std::fs::write(&path, body)?;
            summary["positivity_file"] = serde_json::json!(path);
        }
    }
    std::fs::write(args.out.join("summary.json"), summary.to_string())?;
    println!("{summary}");
    Ok(())
}
