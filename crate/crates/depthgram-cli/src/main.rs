//! Command-line driver for the `depthgram` library.
//!
//! Six subcommands cover the full workflow: `simulate` labeled datasets,
//! `analyze` them into reports and coordinate tables, run replicated
//! `study` harnesses, `plot` the three-panel figure, `oracle-check` the
//! depth kernels against their brute-force twins, and `bench` streaming
//! throughput. Every command is deterministic given its arguments,
//! including seeds and `--threads`; timing lines go to stderr so stdout
//! stays parseable.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (unreadable or
//! malformed input), 4 internal invariant violation.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use depthgram::depth::{mbd, mbd_brute, mei, mei_brute, FunctionalSample};
use depthgram::engine::{analyze, AnalysisOutput, AnalyzeConfig};
use depthgram::hdfd::HdfdReader;
use depthgram::plot::{render_svg, PlotOptions, PlotPoint};
use depthgram::report::{
    read_depthgram_csv, report_json, write_depthgram_csv, write_points_csv, write_report,
    write_study_csv, write_study_json,
};
use depthgram::synth::{
    generate_to_file, read_labels, run_study, write_labels, Model, ModelConfig, Role, StudyConfig,
    SynthSource,
};
use depthgram::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "depthgram",
    version,
    about = "Depth-based outlier detection for high-dimensional functional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset and write it as an HDFD file.
    Simulate(SimulateArgs),
    /// Stream a dataset through the engine and write report/coordinates.
    Analyze(AnalyzeArgs),
    /// Run a replicated detection-rate study over a contamination grid.
    Study(StudyArgs),
    /// Render the three-panel DepthGram SVG from a coordinate CSV.
    Plot(PlotArgs),
    /// Compare the production depth kernels against brute-force oracles.
    OracleCheck(OracleArgs),
    /// Measure streaming analysis throughput on an in-memory workload.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation model, 1-4.
    #[arg(long)]
    model: u8,
    /// Observations.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Dimensions.
    #[arg(long)]
    p: usize,
    /// Grid points per curve.
    #[arg(long = "N", visible_alias = "n-points", default_value_t = 100)]
    n_points: usize,
    /// Contamination fraction in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path.
    #[arg(long)]
    out: PathBuf,
    /// Optional ground-truth labels JSON path.
    #[arg(long = "labels-out")]
    labels_out: Option<PathBuf>,
    /// Worker threads (default: HDFD_THREADS or one per core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input HDFD dataset.
    #[arg(long = "in", visible_alias = "data")]
    input: PathBuf,
    /// Fence factor F in Q3 + F * IQR.
    #[arg(long = "F", visible_alias = "fence", default_value_t = 1.5)]
    fence: f64,
    /// Also run the per-dimension magnitude/shape screens.
    #[arg(long)]
    marginal: bool,
    /// Write the JSON report here.
    #[arg(long = "out-report", visible_alias = "out")]
    out_report: Option<PathBuf>,
    /// Write the per-observation coordinate CSV here.
    #[arg(long = "out-csv", visible_alias = "csv-out")]
    out_csv: Option<PathBuf>,
    /// Worker threads (default: HDFD_THREADS or one per core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    /// Simulation model, 1-4.
    #[arg(long)]
    model: u8,
    /// Observations per replicate.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Dimensions.
    #[arg(long)]
    p: usize,
    /// Grid points per curve.
    #[arg(long = "N", visible_alias = "n-points", default_value_t = 100)]
    n_points: usize,
    /// Comma-separated contamination grid.
    #[arg(long = "c-grid", default_value = "0,0.25,0.5,0.75,1")]
    c_grid: String,
    /// Replicates per grid point.
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Study seed; replicate seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for summary.json, summary.csv, points.csv.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Skip the per-dimension screens (faster at large p).
    #[arg(long = "no-marginal")]
    no_marginal: bool,
    /// Worker threads (default: HDFD_THREADS or one per core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Coordinate CSV produced by `analyze --out-csv`.
    #[arg(long = "points-csv")]
    points_csv: PathBuf,
    /// Optional ground-truth labels JSON for role colors.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output SVG path.
    #[arg(long = "out-svg")]
    out_svg: PathBuf,
    /// Draw the non-crossing envelope g_n as a dashed guide.
    #[arg(long = "overlay-parabola")]
    overlay_parabola: bool,
    /// Figure title.
    #[arg(long, default_value = "DepthGram")]
    title: String,
}

#[derive(Args)]
struct OracleArgs {
    /// Curves per trial sample.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Grid points per trial sample.
    #[arg(long, default_value_t = 15)]
    m: usize,
    /// Number of random samples to compare.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// RNG seed for the trial samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Observations.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Dimensions.
    #[arg(long, default_value_t = 10000)]
    p: usize,
    /// Grid points per curve.
    #[arg(long = "N", visible_alias = "n-points", default_value_t = 100)]
    n_points: usize,
    /// Workload seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads (default: HDFD_THREADS or one per core).
    #[arg(long)]
    threads: Option<usize>,
}

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

/// Exit code plus a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure { code: 4, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match &err {
            // Out-of-range configuration is an argument problem.
            Error::Config(_) => 2,
            // The engine's own numerics failing is not the user's data.
            Error::Factorization(_) => 4,
            // Everything else describes unreadable or malformed input.
            _ => 3,
        };
        Failure { code, message: err.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version on stdout with code 0 and usage
            // errors on stderr with code 2.
            let _ = err.print();
            return ExitCode::from(err.exit_code().clamp(0, 255) as u8);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Study(args) => cmd_study(args),
        Command::Plot(args) => cmd_plot(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Applies `--threads` (or HDFD_THREADS) to the global rayon pool and
/// returns the effective worker count. A request of 0 means one per core.
fn init_threads(flag: Option<usize>) -> usize {
    let requested = flag.or_else(|| {
        let raw = std::env::var("HDFD_THREADS").ok()?;
        match raw.parse() {
            Ok(t) => Some(t),
            Err(_) => {
                eprintln!("warning: ignoring unparseable HDFD_THREADS={raw:?}");
                None
            }
        }
    });
    if let Some(threads) = requested {
        // Only the first global-pool build wins; that is fine for a
        // one-command process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    rayon::current_num_threads()
}

/// Writes through a sibling temp file and renames, so a failed run never
/// leaves a truncated file at the final path.
fn commit(path: &Path, write: impl FnOnce(&Path) -> Result<(), Error>) -> Result<(), Error> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    write(&tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// SHA-256 of a file's bytes, streamed in chunks.
fn file_sha256(path: &Path) -> Result<String, Error> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buffer = vec![0u8; 1 << 20];
    loop {
        let got = file.read(&mut buffer).map_err(|e| Error::io(path, e))?;
        if got == 0 {
            break;
        }
        hasher.update(&buffer[..got]);
    }
    Ok(hex(&hasher.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn parse_model(number: u8) -> Result<Model, Failure> {
    Model::from_number(number)
        .ok_or_else(|| Failure::usage(format!("--model must be 1..=4, got {number}")))
}

fn parse_c_grid(raw: &str) -> Result<Vec<f64>, Failure> {
    let mut grid = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let c: f64 = part
            .parse()
            .map_err(|_| Failure::usage(format!("--c-grid entry {part:?} is not a number")))?;
        if !(0.0..=1.0).contains(&c) {
            return Err(Failure::usage(format!("--c-grid entry {c} is outside [0, 1]")));
        }
        grid.push(c);
    }
    if grid.is_empty() {
        return Err(Failure::usage("--c-grid is empty"));
    }
    Ok(grid)
}

fn check_fence(fence: f64) -> Result<(), Failure> {
    if fence.is_finite() && fence >= 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--F must be finite and >= 0, got {fence}")))
    }
}

/// Peak resident set size of this process in mebibytes, if readable.
fn peak_rss_mib() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

fn print_analysis_summary(output: &AnalysisOutput) {
    let report = &output.report;
    println!(
        "shape: n={} p={} N={}",
        report.n, report.p, report.n_points
    );
    for variant in &report.variants {
        println!(
            "{}: {} flagged, threshold {:.6}",
            variant.variant.name(),
            variant.flagged.len(),
            variant.threshold
        );
    }
    println!(
        "flag union: {:?} ({} observation(s))",
        report.outlier_union,
        report.outlier_union.len()
    );
    println!(
        "sign chain: {} of {} dimensions flipped",
        report.sign_chain.flipped_dimensions, report.p
    );
    if let Some(marginal) = &report.marginal {
        let magnitude: usize = marginal.magnitude.iter().map(|o| o.dimensions.len()).sum();
        let shape: usize = marginal.shape.iter().map(|o| o.dimensions.len()).sum();
        println!("marginal screens: {magnitude} magnitude pair(s), {shape} shape pair(s)");
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let model = parse_model(args.model)?;
    let threads = init_threads(args.threads);
    let config = ModelConfig {
        model,
        n: args.n,
        p: args.p,
        n_points: args.n_points,
        c: args.c,
        seed: args.seed,
    };
    config.validate()?;
    let start = Instant::now();
    let truth = generate_to_file(config, &args.out)?;
    if let Some(labels_path) = &args.labels_out {
        commit(labels_path, |tmp| write_labels(&truth, tmp))?;
        println!("labels: {}", labels_path.display());
    }
    let checksum = file_sha256(&args.out)?;
    println!("dataset: {}", args.out.display());
    println!("shape: n={} p={} N={}", config.n, config.p, config.n_points);
    println!("sha256: {checksum}");
    println!(
        "outliers: {} magnitude, {} shape, {} joint ({} contaminated dimension(s) each)",
        truth.ids_with_role(Role::Magnitude).len(),
        truth.ids_with_role(Role::Shape).len(),
        truth.ids_with_role(Role::Joint).len(),
        truth.contaminated_per_outlier
    );
    eprintln!(
        "simulate: {:.2} s on {threads} thread(s)",
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    check_fence(args.fence)?;
    let threads = init_threads(args.threads);
    let reader = HdfdReader::open(&args.input)?;
    let config = AnalyzeConfig {
        fence_factor: args.fence,
        marginal_screen: args.marginal,
        ..AnalyzeConfig::default()
    };
    let start = Instant::now();
    let output = analyze(&reader, &config)?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(path) = &args.out_report {
        commit(path, |tmp| write_report(&output.report, tmp))?;
        println!("report: {}", path.display());
    }
    if let Some(path) = &args.out_csv {
        commit(path, |tmp| write_depthgram_csv(&output.depthgrams, tmp))?;
        println!("csv: {}", path.display());
    }
    print_analysis_summary(&output);
    eprintln!("analyze: {wall:.2} s on {threads} thread(s)");
    Ok(())
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

fn cmd_study(args: StudyArgs) -> Result<(), Failure> {
    let model = parse_model(args.model)?;
    let c_grid = parse_c_grid(&args.c_grid)?;
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let threads = init_threads(args.threads);
    let config = StudyConfig {
        model,
        n: args.n,
        p: args.p,
        n_points: args.n_points,
        c_grid,
        replicates: args.reps,
        seed: args.seed,
        fence_factor: 1.5,
        marginal_rule: !args.no_marginal,
        collect_points: true,
    };
    let start = Instant::now();
    let output = run_study(&config)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let summary_json = args.out_dir.join("summary.json");
    let summary_csv = args.out_dir.join("summary.csv");
    let points_csv = args.out_dir.join("points.csv");
    commit(&summary_json, |tmp| write_study_json(&output.summary, tmp))?;
    commit(&summary_csv, |tmp| write_study_csv(&output.summary, tmp))?;
    commit(&points_csv, |tmp| write_points_csv(&output.points, tmp))?;
    println!(
        "study: model {} n={} p={} N={} reps={} seed={}",
        config.model.number(),
        config.n,
        config.p,
        config.n_points,
        config.replicates,
        config.seed
    );
    for row in &output.summary.rows {
        let d = &row.depthgram;
        print!(
            "c={:.2}: magnitude {:.3} shape {:.3} joint {:.3} false {:.4}",
            row.c, d.magnitude.mean, d.shape.mean, d.joint.mean, d.false_rate.mean
        );
        if let Some(m) = &row.marginal {
            print!(
                " | marginal mag {:.3}/{:.4} shape {:.3}/{:.4}",
                m.magnitude_correct.mean,
                m.magnitude_false.mean,
                m.shape_correct.mean,
                m.shape_false.mean
            );
        }
        println!();
    }
    println!("wrote: {}", summary_json.display());
    println!("wrote: {}", summary_csv.display());
    println!("wrote: {}", points_csv.display());
    eprintln!(
        "study: {:.2} s on {threads} thread(s)",
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn cmd_plot(args: PlotArgs) -> Result<(), Failure> {
    let rows = read_depthgram_csv(&args.points_csv)?;
    if rows.is_empty() {
        return Err(Failure::data(format!(
            "{} holds no data rows; nothing to plot",
            args.points_csv.display()
        )));
    }
    let truth = match &args.labels {
        Some(path) => Some(read_labels(path)?),
        None => None,
    };
    let points = PlotPoint::from_rows(&rows, |observation| {
        let truth = truth.as_ref()?;
        if observation >= 1 && observation <= truth.observations.len() {
            Some(truth.role_of_id(observation))
        } else {
            None
        }
    });
    let n = rows.iter().map(|r| r.observation).max().unwrap_or(0);
    let options = PlotOptions {
        envelope_n: (args.overlay_parabola && n >= 2).then_some(n),
        title: args.title.clone(),
    };
    let svg = render_svg(&points, &options);
    commit(&args.out_svg, |tmp| {
        std::fs::write(tmp, &svg).map_err(|e| Error::io(tmp, e))
    })?;
    println!(
        "wrote: {} ({} point(s), {} observation(s))",
        args.out_svg.display(),
        points.len(),
        n
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

fn cmd_oracle_check(args: OracleArgs) -> Result<(), Failure> {
    if args.n < 2 {
        return Err(Failure::usage("--n must be at least 2"));
    }
    if args.m == 0 || args.trials == 0 {
        return Err(Failure::usage("--m and --trials must be at least 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for trial in 0..args.trials {
        // Half-integer values in [-5, 5] make cross-curve ties common, which
        // is exactly where the fast counting path earns its keep.
        let rows: Vec<Vec<f64>> = (0..args.n)
            .map(|_| {
                (0..args.m)
                    .map(|_| rng.gen_range(-10i32..=10) as f64 / 2.0)
                    .collect()
            })
            .collect();
        let sample = FunctionalSample::from_rows(rows)
            .map_err(|e| Failure::internal(format!("trial {trial}: {e}")))?;
        for (kind, fast, brute) in [
            ("band", mbd(&sample), mbd_brute(&sample)),
            ("epigraph", mei(&sample), mei_brute(&sample)),
        ] {
            for i in 0..args.n {
                if fast.numerators[i] != brute.numerators[i] {
                    return Err(Failure::internal(format!(
                        "trial {trial}, {kind} depth, curve {}: fast numerator {} != brute {} \
                         (n={}, m={}, seed={})",
                        i + 1,
                        fast.numerators[i],
                        brute.numerators[i],
                        args.n,
                        args.m,
                        args.seed
                    )));
                }
                let gap = (fast.value(i) - brute.value(i)).abs();
                worst = worst.max(gap);
                if gap > 1e-12 {
                    return Err(Failure::internal(format!(
                        "trial {trial}, {kind} depth, curve {}: |fast - brute| = {gap:e} \
                         (n={}, m={}, seed={})",
                        i + 1,
                        args.n,
                        args.m,
                        args.seed
                    )));
                }
            }
        }
    }
    println!(
        "oracle-check: {} trial(s) at n={} m={} seed={}: numerators exact, max float gap {worst:e}",
        args.trials, args.n, args.m, args.seed
    );
    eprintln!("oracle-check: {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let threads = init_threads(args.threads);
    let config = ModelConfig {
        model: Model::One,
        n: args.n,
        p: args.p,
        n_points: args.n_points,
        c: 1.0,
        seed: args.seed,
    };
    config.validate()?;
    let source = SynthSource::new(config)?;
    let start = Instant::now();
    let output = analyze(&source, &AnalyzeConfig::default())?;
    let wall = start.elapsed().as_secs_f64();
    let values = (args.n * args.p * args.n_points) as f64;
    let checksum = hex(&Sha256::digest(report_json(&output.report).as_bytes()));
    println!(
        "bench: n={} p={} N={} seed={} threads={threads}",
        args.n, args.p, args.n_points, args.seed
    );
    println!(
        "wall: {wall:.2} s ({:.3e} values/s, generation included)",
        values / wall.max(1e-9)
    );
    match peak_rss_mib() {
        Some(mib) => println!("peak rss: {mib:.1} MiB"),
        None => println!("peak rss: unavailable"),
    }
    println!("report sha256: {checksum}");
    println!("flag union: {:?}", output.report.outlier_union);
    Ok(())
}
