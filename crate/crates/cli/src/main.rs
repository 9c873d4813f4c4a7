//! `elli` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use elli::elli::{elli_cluster_with_embedding, ElliOptions};
use elli::experiment::{run_sweep, write_sweep_csv, Record, SweepConfig};
use elli::ingest::{cosine_knn_graph, read_vectors_file};
use elli::io::{read_labels_file, read_matrix_market_file, write_embedding, write_labels_file, write_matrix_market_file};
use elli::ksc::{best_run, ksc_cluster_with_embedding, KscOptions};
use elli::metrics::timed;
use elli::synth::{delta_grid, parse_sizes, suite, SynthBase};
use elli::{ErrorClass, Graph, Partition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "elli", version, about = "Spectral clustering by ellipsoidal rounding")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "ELLISPEC_THREADS")]
    threads: Option<usize>,

    /// Leave `elapsed_s` out of JSON records so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a block-structured synthetic graph.
    Synth(SynthArgs),
    /// Build a cosine k-nearest-neighbor graph from vectors.
    KnnGraph(KnnArgs),
    /// Cluster a graph.
    Cluster(ClusterArgs),
    /// Score a labeling of a graph.
    Eval(EvalArgs),
    /// Run ELLI and KSC over a grid of delta values on one synthetic base.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
struct SizeArgs {
    /// Cluster sizes, e.g. `100x10` or `200x2,25x8`.
    #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
    sizes: Option<String>,
    /// Named size list: balanced, unbalanced, balanced-desk, unbalanced-desk.
    #[arg(long)]
    suite: Option<String>,
}

impl SizeArgs {
    fn resolve(&self) -> anyhow::Result<Vec<usize>> {
        match (&self.sizes, &self.suite) {
            (Some(s), _) => Ok(parse_sizes(s)?),
            (None, Some(name)) => {
                suite(name).map(|s| s.sizes).ok_or_else(|| usage(format!("unknown suite {name:?}")))
            }
            (None, None) => Err(usage("either --sizes or --suite is required")),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[command(flatten)]
    sizes: SizeArgs,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle node ids so clusters are not contiguous.
    #[arg(long)]
    permute: bool,
    /// Matrix Market output.
    #[arg(long, default_value = "graph.mtx")]
    out: PathBuf,
    /// Ground-truth label output.
    #[arg(long, default_value = "truth.txt")]
    truth: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct KnnArgs {
    /// Vectors as `.csv` or VDS1 binary.
    #[arg(long)]
    input: PathBuf,
    /// Neighbors per node.
    #[arg(long)]
    p: usize,
    #[arg(long, default_value = "graph.mtx")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Elli,
    Ksc,
}

#[derive(Args, Debug, Serialize)]
struct ClusterArgs {
    #[arg(long, default_value = "graph.mtx")]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Algo::Elli)]
    algo: Algo,
    /// k-means trials (ksc only).
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative optimality of the ellipsoid.
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
    /// Boundary tolerance for active points.
    #[arg(long, default_value_t = 1e-5)]
    tau_active: f64,
    /// Label output; for ksc, the lowest-cost trial.
    #[arg(long, default_value = "labels.txt")]
    out: PathBuf,
    /// Ground truth; adds ac and nmi to the records.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Eigenvalues and embedding, as text.
    #[arg(long)]
    dump_embedding: Option<PathBuf>,
    /// JSON lines output instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long, default_value = "graph.mtx")]
    graph: PathBuf,
    #[arg(long, default_value = "labels.txt")]
    labels: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    sizes: SizeArgs,
    #[arg(long, default_value_t = 0.0)]
    delta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    delta_max: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_step: f64,
    /// k-means trials per delta.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    permute: bool,
    #[arg(long)]
    no_elli: bool,
    #[arg(long)]
    no_ksc: bool,
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    tau_active: f64,
    /// Per-delta summary table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<elli::Error>() {
            return match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Io => 3,
                ErrorClass::Numerical => 4,
                ErrorClass::InvalidGraph => 5,
            };
        }
        if cause.is::<io::Error>() || cause.is::<serde_json::Error>() {
            return 3;
        }
    }
    1
}

fn check_input(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("{} is not a readable file", path.display())).into());
    }
    Ok(())
}

fn check_output(path: &Path) -> anyhow::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("directory {} does not exist", parent.display())).into());
    }
    Ok(())
}

/// Writes JSON lines to a file or stdout.
struct Sink {
    out: Box<dyn Write>,
    no_timings: bool,
}

impl Sink {
    fn open(path: Option<&Path>, no_timings: bool) -> anyhow::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { out, no_timings })
    }

    fn emit(&mut self, command: &str, params: &impl Serialize, body: Value) -> anyhow::Result<()> {
        let mut line = json!({ "version": VERSION, "command": command, "params": params });
        let map = line.as_object_mut().unwrap();
        if let Value::Object(fields) = body {
            map.extend(fields);
        }
        if self.no_timings {
            map.remove("elapsed_s");
        }
        serde_json::to_writer(&mut self.out, &line)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn synth(args: &SynthArgs, cli: &Cli) -> anyhow::Result<()> {
    check_output(&args.out)?;
    check_output(&args.truth)?;
    let sizes = args.sizes.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let base = SynthBase::<f64>::sample(&sizes, args.permute, &mut rng)?;
    let inst = base.instance(args.delta)?;
    write_matrix_market_file(&inst.graph, &args.out)?;
    write_labels_file(&inst.truth, &args.truth)?;
    let mut sink = Sink::open(None, cli.no_timings)?;
    sink.emit(
        "synth",
        args,
        json!({
            "n": inst.graph.n(),
            "k": inst.truth.k(),
            "edges": inst.graph.edge_count(),
            "delta": args.delta,
            "seed": args.seed,
            "c_min": inst.c_min,
            "bound": elli::conductance_bound(inst.c_min, inst.delta),
        }),
    )?;
    sink.finish()
}

fn knn_graph(args: &KnnArgs, cli: &Cli) -> anyhow::Result<()> {
    check_input(&args.input)?;
    check_output(&args.out)?;
    let data = read_vectors_file::<f64>(&args.input)?;
    let (g, elapsed) = timed(|| cosine_knn_graph(&data, args.p));
    let g = g?;
    write_matrix_market_file(&g, &args.out)?;
    let mut sink = Sink::open(None, cli.no_timings)?;
    sink.emit(
        "knn-graph",
        args,
        json!({ "n": g.n(), "d": data.d(), "edges": g.edge_count(), "elapsed_s": elapsed }),
    )?;
    sink.finish()
}

fn read_truth(path: Option<&Path>, n: usize) -> anyhow::Result<Option<Partition>> {
    let Some(path) = path else { return Ok(None) };
    let t = read_labels_file(path)?;
    if t.n() != n {
        bail!(elli::Error::SizeMismatch(format!("{} truth labels for {n} nodes", t.n())));
    }
    Ok(Some(t))
}

fn cluster(args: &ClusterArgs, cli: &Cli) -> anyhow::Result<()> {
    check_input(&args.graph)?;
    if let Some(t) = &args.truth {
        check_input(t)?;
    }
    check_output(&args.out)?;
    for p in [&args.dump_embedding, &args.json].into_iter().flatten() {
        check_output(p)?;
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let g: Graph = read_matrix_market_file(&args.graph)?;
    let truth = read_truth(args.truth.as_deref(), g.n())?;
    let mut sink = Sink::open(args.json.as_deref(), cli.no_timings)?;

    match args.algo {
        Algo::Elli => {
            let mut opts = ElliOptions::<f64>::default();
            opts.mvee.epsilon = args.epsilon;
            opts.mvee.tau_active = args.tau_active;
            opts.tau_active = args.tau_active;
            let ((res, emb), elapsed) = {
                let (r, s) = timed(|| elli_cluster_with_embedding(&g, args.k, &opts));
                (r?, s)
            };
            if let Some(p) = &args.dump_embedding {
                write_embedding(&emb, File::create(p)?)?;
            }
            write_labels_file(&res.partition, &args.out)?;
            let mut rec = Record::evaluate("elli", &g, &res.partition, truth.as_ref(), emb.lambda_next, elapsed)?;
            rec.seed = Some(args.seed);
            let mut body = serde_json::to_value(&rec)?;
            let extra = json!({
                "representatives": res.representatives.iter().map(|r| r + 1).collect::<Vec<_>>(),
                "active_count": res.active_count,
                "selection": format!("{:?}", res.selection),
                "mvee_iterations": res.mvee_iterations,
                "mvee_epsilon": res.mvee_epsilon,
            });
            body.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
            sink.emit("cluster", args, body)?;
        }
        Algo::Ksc => {
            let opts = KscOptions::<f64> { trials: args.trials, seed: args.seed, ..KscOptions::default() };
            let ((runs, emb), elapsed) = {
                let (r, s) = timed(|| ksc_cluster_with_embedding(&g, args.k, &opts));
                (r?, s)
            };
            if let Some(p) = &args.dump_embedding {
                write_embedding(&emb, File::create(p)?)?;
            }
            let best = best_run(&runs).ok_or_else(|| anyhow!("no k-means trials ran"))?;
            write_labels_file(&best.partition, &args.out)?;
            let per_trial = elapsed / runs.len() as f64;
            for run in &runs {
                let mut rec = Record::evaluate("ksc", &g, &run.partition, truth.as_ref(), emb.lambda_next, per_trial)?;
                rec.seed = Some(run.seed);
                rec.trial = Some(run.trial);
                let mut body = serde_json::to_value(&rec)?;
                let extra = json!({ "cost": run.cost, "iterations": run.iterations, "best": run.trial == best.trial });
                body.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
                sink.emit("cluster", args, body)?;
            }
        }
    }
    sink.finish()
}

fn eval(args: &EvalArgs, cli: &Cli) -> anyhow::Result<()> {
    check_input(&args.graph)?;
    check_input(&args.labels)?;
    if let Some(t) = &args.truth {
        check_input(t)?;
    }
    if let Some(p) = &args.json {
        check_output(p)?;
    }
    let g: Graph = read_matrix_market_file(&args.graph)?;
    let labels = read_labels_file(&args.labels)?;
    if labels.n() != g.n() {
        bail!(elli::Error::SizeMismatch(format!("{} labels for {} nodes", labels.n(), g.n())));
    }
    let truth = read_truth(args.truth.as_deref(), g.n())?;
    let lap = elli::normalized_laplacian(&g)?;
    let emb = elli::bottom_k_eigs(&lap, labels.k())?;
    let rec = Record::evaluate("eval", &g, &labels, truth.as_ref(), emb.lambda_next, 0.0)?;
    let mut body = serde_json::to_value(&rec)?;
    body.as_object_mut().unwrap().remove("elapsed_s");
    let mut sink = Sink::open(args.json.as_deref(), cli.no_timings)?;
    sink.emit("eval", args, body)?;
    sink.finish()
}

fn sweep(args: &SweepArgs, cli: &Cli) -> anyhow::Result<()> {
    for p in [&args.csv, &args.json].into_iter().flatten() {
        check_output(p)?;
    }
    if args.no_elli && args.no_ksc {
        return Err(usage("--no-elli and --no-ksc leave nothing to run"));
    }
    let sizes = args.sizes.resolve()?;
    let deltas = delta_grid(args.delta_min, args.delta_max, args.delta_step)?;
    let mut cfg = SweepConfig::<f64>::new(sizes, deltas, args.seed, args.trials);
    cfg.permute = args.permute;
    cfg.run_elli = !args.no_elli;
    cfg.run_ksc = !args.no_ksc;
    cfg.elli.mvee.epsilon = args.epsilon;
    cfg.elli.mvee.tau_active = args.tau_active;
    cfg.elli.tau_active = args.tau_active;
    let points = run_sweep(&cfg)?;
    let mut sink = Sink::open(args.json.as_deref(), cli.no_timings)?;
    for point in &points {
        for rec in point.records() {
            let mut body = serde_json::to_value(rec)?;
            let obj = body.as_object_mut().unwrap();
            obj.insert("seed".into(), json!(args.seed));
            obj.insert("bound".into(), json!(point.bound));
            obj.insert("truth_mcc".into(), json!(point.truth_mcc));
            sink.emit("sweep", args, body)?;
        }
    }
    sink.finish()?;
    if let Some(p) = &args.csv {
        write_sweep_csv(&points, File::create(p)?)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match &cli.command {
        Command::Synth(a) => synth(a, cli),
        Command::KnnGraph(a) => knn_graph(a, cli),
        Command::Cluster(a) => cluster(a, cli),
        Command::Eval(a) => eval(a, cli),
        Command::Sweep(a) => sweep(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("elli: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
