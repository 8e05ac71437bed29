//! `fastshift` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 algorithmic failure (no seeds converged, no modes survived pruning).

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fastshift::controller::SeedController;
use fastshift::datagen::generate;
use fastshift::eval::{bench_run, BandwidthSource, Method};
use fastshift::{
    rand_index, run_baseline, run_faster, DatasetKind, GenSpec, ShiftConfig, ShiftError,
    DEFAULT_QUANTILE, DEFAULT_SAMPLE_CAP,
};
use serde::Serialize;

use crate::io::{ConfigEcho, ResultFile};

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Usage(String),
    Algorithm(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Algorithm(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Algorithm(m) => m,
        }
    }
}

impl From<ShiftError> for Failure {
    fn from(e: ShiftError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Algorithm(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fastshift", version, about = "Mean-shift clustering: classical and seeded/batched engines")]
struct Cli {
    /// Worker threads; results are identical for any count.
    #[arg(long, global = true, env = "FASTSHIFT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset CSV plus a `<out>.truth.json` sidecar.
    Generate(GenerateArgs),
    /// Cluster a dataset CSV and write a result JSON.
    Cluster(ClusterArgs),
    /// Benchmark methods over a series of synthetic dataset sizes.
    Bench(BenchArgs),
    /// Rand index between the labels of two result JSON files.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Blobs,
    LargeVarBlobs,
    VariedVarBlobs,
    UniformSquare,
    NoisyCircles,
    Anisotropic,
}

impl From<KindArg> for DatasetKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Blobs => DatasetKind::Blobs,
            KindArg::LargeVarBlobs => DatasetKind::LargeVarBlobs,
            KindArg::VariedVarBlobs => DatasetKind::VariedVarBlobs,
            KindArg::UniformSquare => DatasetKind::UniformSquare,
            KindArg::NoisyCircles => DatasetKind::NoisyCircles,
            KindArg::Anisotropic => DatasetKind::Anisotropic,
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long, value_enum, default_value = "blobs")]
    kind: KindArg,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long = "box-extent", default_value_t = 10.0)]
    box_extent: f64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ShiftArgs {
    /// Window radius; estimated from the data when absent.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_QUANTILE)]
    quantile: f64,
    #[arg(long = "sample-cap", default_value_t = DEFAULT_SAMPLE_CAP)]
    sample_cap: usize,
    #[arg(long = "conv-tol", default_value_t = 1e-3)]
    conv_tol: f64,
    #[arg(long = "max-iter", default_value_t = 300)]
    max_iter: usize,
    /// Converged fraction of seeds at which iteration stops.
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long = "n-initial", default_value_t = 128)]
    n_initial: usize,
    #[arg(long = "seed-low", default_value_t = 8)]
    seed_low: usize,
    #[arg(long = "seed-high", default_value_t = 32)]
    seed_high: usize,
    #[arg(long = "min-support", default_value_t = 1)]
    min_support: usize,
    #[arg(long = "chunk-size", default_value_t = 4096)]
    chunk_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ShiftArgs {
    fn config(&self, h: f64) -> ShiftConfig {
        ShiftConfig {
            bandwidth_h: h,
            conv_tol: self.conv_tol,
            max_iter: self.max_iter,
            early_stop_gamma: self.gamma,
            n_initial: self.n_initial,
            seed_low_l: self.seed_low,
            seed_high_h: self.seed_high,
            rng_seed: self.seed,
            min_mode_support: self.min_support,
            chunk_size: self.chunk_size,
        }
    }

    fn bandwidth_source(&self) -> BandwidthSource {
        match self.bandwidth {
            Some(h) => BandwidthSource::Fixed(h),
            None => BandwidthSource::Estimated { quantile: self.quantile, sample_cap: self.sample_cap },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Baseline,
    Faster,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SeedCount {
    All,
    Count(usize),
}

fn parse_seed_count(s: &str) -> Result<SeedCount, String> {
    if s == "all" {
        return Ok(SeedCount::All);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or 'all', got '{s}'")),
        Ok(n) => Ok(SeedCount::Count(n)),
    }
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "adaptive")]
    method: MethodArg,
    /// Seed count for `--method faster`: a number or `all`. Defaults to `--n-initial`.
    #[arg(long, value_parser = parse_seed_count)]
    seeds: Option<SeedCount>,
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `wall_time_s` as 0 so repeated runs are byte-identical.
    #[arg(long = "no-timing")]
    no_timing: bool,
    #[command(flatten)]
    shift: ShiftArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Dataset sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Methods among baseline, faster, faster_adaptive (alias adaptive).
    #[arg(long, value_delimiter = ',', default_value = "baseline,faster")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    shift: ShiftArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("cannot start {t} threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fastshift: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn gen_spec(data: &DataArgs, n: usize, seed: u64) -> GenSpec {
    GenSpec {
        kind: data.kind.into(),
        n_points: n,
        n_clusters: data.clusters,
        noise_sigma: data.sigma,
        rng_seed: seed,
        box_extent: data.box_extent,
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let spec = gen_spec(&a.data, a.n, a.seed);
    let ds = generate(&spec)?;
    io::write_generated(&a.out, &spec, &ds)
}

fn cmd_cluster(a: ClusterArgs) -> Result<(), Failure> {
    let points = io::read_dataset(&a.input)?;
    let source = a.shift.bandwidth_source();
    let h = match source {
        BandwidthSource::Estimated { .. } if points.len() < 2 => {
            return Err(Failure::Usage("bandwidth estimation needs at least two points; pass --bandwidth".into()))
        }
        _ => source.resolve(&points, a.shift.seed)?,
    };
    let cfg = a.shift.config(h);
    cfg.validate()?;

    let mut requested_seeds = None;
    let mut exhausted = false;
    let (name, res) = match a.method {
        MethodArg::Baseline => ("baseline", run_baseline(&points, &cfg)?),
        MethodArg::Faster => {
            let n_seeds = match a.seeds.unwrap_or(SeedCount::Count(cfg.n_initial)) {
                SeedCount::All => points.len(),
                SeedCount::Count(n) => n,
            };
            requested_seeds = Some(n_seeds);
            ("faster", run_faster(&points, n_seeds, &cfg)?)
        }
        MethodArg::Adaptive => {
            let mut ctl = SeedController::new(cfg.clone());
            let res = ctl.cluster_frame(&points)?;
            exhausted = ctl.state().exhausted;
            if exhausted {
                eprintln!("fastshift: warning: seed count reached the dataset size below the L·M bound");
            }
            ("adaptive", res)
        }
    };

    let echo = ConfigEcho {
        shift: cfg,
        bandwidth_source: match source {
            BandwidthSource::Fixed(_) => "flag",
            BandwidthSource::Estimated { .. } => "estimated",
        }
        .to_string(),
        quantile: a.shift.quantile,
        sample_cap: a.shift.sample_cap,
        requested_seeds,
    };
    let file = ResultFile::new(name, &points, &res, exhausted, echo, !a.no_timing);
    io::emit(a.out.as_deref(), &io::to_json(&file)?)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    if a.sizes.is_empty() {
        return Err(Failure::Usage("--sizes must list at least one size".into()));
    }
    if a.repeats == 0 {
        return Err(Failure::Usage("--repeats must be at least 1".into()));
    }
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    let series: Vec<GenSpec> = a.sizes.iter().map(|&n| gen_spec(&a.data, n, a.shift.seed)).collect();
    for spec in &series {
        spec.validate()?;
    }
    let source = a.shift.bandwidth_source();
    if let BandwidthSource::Fixed(h) = source {
        a.shift.config(h).validate()?;
    }
    let records = bench_run(&series, &methods, &a.shift.config(1.0), source, a.repeats)?;
    if records.iter().all(|r| !r.is_ok()) {
        io::emit(a.out.as_deref(), &io::format_bench(&records)?)?;
        return Err(Failure::Algorithm("every benchmark row failed".into()));
    }
    io::emit(a.out.as_deref(), &io::format_bench(&records)?)
}

#[derive(Serialize)]
struct Comparison {
    rand_index: f64,
    n_points: usize,
    modes_a: usize,
    modes_b: usize,
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let left = io::read_result(&a.a)?;
    let right = io::read_result(&a.b)?;
    let ri = rand_index(&left.labels, &right.labels)?;
    let cmp = Comparison { rand_index: ri, n_points: left.labels.len(), modes_a: left.modes.len(), modes_b: right.modes.len() };
    io::emit(None, &io::to_json(&cmp)?)
}
