//! The `crowd-scaling` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 universe empty after filtering,
//! 3 fit failure, 4 too many simulated funds failed. Every successful run
//! ends by writing a `manifest.json` that lists the files it produced.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::estimators::{
    fit_power_law, fit_segmented_multistart, loess::loess_on_grid, loess_fit, LoessConfig, SegmentedFit,
};
use crate::ingest::{apply_filters, load_snapshot, load_snapshot_dir, save_snapshot_dir, write_rejects, FilterConfig};
use crate::metrics::{calibrate, entropy_table, fmax_table, CalibrationConfig, SelectionModel};
use crate::sim::{
    entropy_under_volatility, generate_synthetic_universe, simulate_universe, FundFailure, GeneratorParams, SimConfig,
    SimulationPlan, VolatilityConfig,
};
use crate::universe::UniverseSnapshot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EMPTY: i32 = 2;
pub const EXIT_FIT: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;

/// Largest tolerated share of simulated funds that could not be built.
pub const MAX_FAILURE_RATE: f64 = 0.01;

const SNAPSHOT_DIR: &str = "snapshot";
const SEGMENTED_FILE: &str = "segmented_fit.json";
const PLAN_FILE: &str = "sim_plan.json";
const MANIFEST_FILE: &str = "manifest.json";
const LOESS_POINTS: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "crowd-scaling",
    version,
    about = "Portfolio scaling analysis and asset-selection simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a snapshot and fit the scaling laws, entropies and f_max ratios.
    Analyze {
        #[arg(long)]
        securities: PathBuf,
        #[arg(long)]
        holdings: PathBuf,
        /// JSON filter thresholds; defaults apply to missing fields.
        #[arg(long)]
        filters: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Continue when some input rows were rejected.
        #[arg(long)]
        allow_rejects: bool,
        /// Smallest investor count used in the C vs m power-law fit.
        #[arg(long, default_value_t = 100.0)]
        min_investors_fit: f64,
        /// Number of starting break points for the segmented fit.
        #[arg(long, default_value_t = 5)]
        break_starts: usize,
        #[arg(long, default_value_t = 0.3)]
        loess_span: f64,
    },
    /// Build the selection model from an `analyze` output directory.
    Calibrate {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Segmented fit JSON; defaults to the one inside the snapshot directory.
        #[arg(long)]
        fit: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        min_edges: usize,
    },
    /// Simulate a universe from a selection model and a simulation plan.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Snapshot (or `analyze` output) to compare against.
        #[arg(long)]
        empirical: Option<PathBuf>,
        #[arg(long, default_value_t = 0.3)]
        loess_span: f64,
    },
    /// Mean scaled entropy of equal-weight portfolios after price noise.
    EntropyMc {
        /// Volatility config JSON; defaults apply when absent.
        #[arg(long)]
        vol: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100,200,500,1000,2000")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic universe with known ground truth.
    Generate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failed command: exit code plus the message printed on standard error.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn fit(name: &str, err: Error) -> Self {
        Self::new(EXIT_FIT, format!("{name}: {err}"))
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::EmptyAfterFiltering { .. } => EXIT_EMPTY,
            Error::TooFewPoints { .. }
            | Error::Singular(_)
            | Error::NoBreak(_)
            | Error::NotConverged
            | Error::DegenerateSample(_)
            | Error::SampleOutOfRange(_)
            | Error::EmptyBin { .. } => EXIT_FIT,
            _ => EXIT_INPUT,
        };
        Self::new(code, err.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command) -> CliResult {
    match command {
        Command::Analyze {
            securities,
            holdings,
            filters,
            out,
            allow_rejects,
            min_investors_fit,
            break_starts,
            loess_span,
        } => cmd_analyze(AnalyzeArgs {
            securities,
            holdings,
            filters,
            out,
            allow_rejects,
            min_investors_fit,
            break_starts,
            loess: LoessConfig {
                span: loess_span,
                ..LoessConfig::default()
            },
        }),
        Command::Calibrate {
            snapshot,
            out,
            fit,
            min_edges,
        } => cmd_calibrate(&snapshot, &out, fit.as_deref(), min_edges),
        Command::Simulate {
            model,
            config,
            seed,
            workers,
            out,
            empirical,
            loess_span,
        } => cmd_simulate(
            &model,
            &config,
            seed,
            workers,
            &out,
            empirical.as_deref(),
            &LoessConfig {
                span: loess_span,
                ..LoessConfig::default()
            },
        ),
        Command::EntropyMc {
            vol,
            n_grid,
            replicas,
            seed,
            out,
        } => cmd_entropy_mc(vol.as_deref(), &n_grid, replicas, seed, &out),
        Command::Generate {
            params,
            seed,
            workers,
            out,
        } => cmd_generate(&params, seed, workers, &out),
    }
}

/// Record of one run. Everything except the timing fields is a function of
/// the inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub configs: Vec<String>,
    pub output_dir: String,
    pub tool_version: String,
    /// SHA-256 of every input and config file, keyed by path.
    pub config_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

struct Run {
    manifest: RunManifest,
    dir: PathBuf,
    started: Instant,
}

impl Run {
    fn start(subcommand: &str, dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
        let started_unix_seconds = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        Ok(Self {
            manifest: RunManifest {
                subcommand: subcommand.into(),
                inputs: vec![],
                configs: vec![],
                output_dir: dir.display().to_string(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                config_hashes: BTreeMap::new(),
                outputs: vec![],
                seed: None,
                started_unix_seconds,
                wall_clock_seconds: 0.0,
            },
            dir: dir.to_path_buf(),
            started: Instant::now(),
        })
    }

    fn hash(&mut self, path: &Path) -> CliResult {
        let bytes = std::fs::read(path).map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
        self.manifest
            .config_hashes
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    fn input(&mut self, path: &Path) -> CliResult {
        self.manifest.inputs.push(path.display().to_string());
        self.hash(path)
    }

    fn config(&mut self, path: &Path) -> CliResult {
        self.manifest.configs.push(path.display().to_string());
        self.hash(path)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult {
        write_json(&self.path(name), value)
    }

    fn snapshot(&mut self, sub: &str, snapshot: &UniverseSnapshot) -> CliResult {
        let dir = if sub.is_empty() {
            self.dir.clone()
        } else {
            self.dir.join(sub)
        };
        save_snapshot_dir(snapshot, &dir)?;
        for file in [crate::ingest::SECURITIES_FILE, crate::ingest::HOLDINGS_FILE] {
            let name = if sub.is_empty() {
                file.to_string()
            } else {
                format!("{sub}/{file}")
            };
            self.manifest.outputs.push(name);
        }
        Ok(())
    }

    fn finish(mut self, manifest_name: &str) -> CliResult {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        write_json(&self.dir.join(manifest_name), &self.manifest)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut w = BufWriter::new(File::create(path).map_err(Error::from)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    writeln!(w).map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut wtr = csv::Writer::from_path(path).map_err(Error::from)?;
    wtr.write_record(header).map_err(Error::from)?;
    for row in rows {
        wtr.write_record(row).map_err(Error::from)?;
    }
    wtr.flush().map_err(Error::from)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `(log10 n_i, log10 W_i)` for every fund.
pub fn value_points(snapshot: &UniverseSnapshot) -> Vec<(f64, f64)> {
    snapshot
        .funds()
        .iter()
        .map(|f| ((f.n_positions() as f64).log10(), f.total_value().log10()))
        .collect()
}

/// `(log10 m_α, log10 C_α)` for every security with at least one investor.
pub fn capitalization_points(snapshot: &UniverseSnapshot) -> Vec<(f64, f64)> {
    snapshot
        .securities()
        .iter()
        .zip(snapshot.investor_counts())
        .filter(|(_, &m)| m > 0)
        .map(|(s, &m)| ((m as f64).log10(), s.capitalization.log10()))
        .collect()
}

struct AnalyzeArgs {
    securities: PathBuf,
    holdings: PathBuf,
    filters: Option<PathBuf>,
    out: PathBuf,
    allow_rejects: bool,
    min_investors_fit: f64,
    break_starts: usize,
    loess: LoessConfig,
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult {
    let mut run = Run::start("analyze", &args.out)?;
    run.input(&args.securities)?;
    run.input(&args.holdings)?;
    let filters = match &args.filters {
        Some(path) => {
            run.config(path)?;
            read_json(path)?
        }
        None => FilterConfig::default(),
    };

    let outcome = load_snapshot(&args.securities, &args.holdings)?;
    write_rejects(&outcome.rejects, &run.path("rejects.csv"))?;
    if !outcome.rejects.is_empty() {
        let message = format!("{} input rows rejected (see rejects.csv)", outcome.rejects.len());
        if !args.allow_rejects {
            return Err(CliError::new(EXIT_INPUT, message));
        }
        log::warn!("{message}");
    }

    let (snapshot, report) = match apply_filters(&outcome.snapshot, &filters) {
        Ok(done) => done,
        Err(Error::EmptyAfterFiltering { report }) => {
            run.json("filter_report.json", &report)?;
            return Err(CliError::new(
                EXIT_EMPTY,
                "universe is empty after filtering (see filter_report.json)",
            ));
        }
        Err(e) => return Err(e.into()),
    };
    run.json("filter_report.json", &report)?;
    run.snapshot(SNAPSHOT_DIR, &snapshot)?;

    let w_points = value_points(&snapshot);
    let segmented = fit_segmented_multistart(&w_points, args.break_starts)
        .map_err(|e| CliError::fit("segmented fit of W vs n", e))?;
    run.json(SEGMENTED_FILE, &segmented)?;

    let c_points = capitalization_points(&snapshot);
    let raw_c: Vec<(f64, f64)> = c_points.iter().map(|&(m, c)| (10f64.powf(m), 10f64.powf(c))).collect();
    let power_law =
        fit_power_law(&raw_c, args.min_investors_fit).map_err(|e| CliError::fit("power-law fit of C vs m", e))?;
    run.json("power_law_fit.json", &power_law)?;

    let entropy = entropy_table(&snapshot);
    let fmax = fmax_table(&snapshot);
    let entropy_points: Vec<(f64, f64)> = entropy
        .iter()
        .map(|r| ((r.n_i as f64).log10(), r.scaled_entropy))
        .collect();
    for (name, header, points, fit) in [
        (
            "loess_w_vs_n.csv",
            ["log10_n", "loess_log10_w"],
            &w_points,
            "LOESS of W vs n",
        ),
        (
            "loess_c_vs_m.csv",
            ["log10_m", "loess_log10_c"],
            &c_points,
            "LOESS of C vs m",
        ),
        (
            "loess_entropy.csv",
            ["log10_n", "loess_entropy"],
            &entropy_points,
            "LOESS of entropy vs n",
        ),
    ] {
        let curve = loess_on_grid(points, &args.loess, LOESS_POINTS).map_err(|e| CliError::fit(fit, e))?;
        let rows = curve
            .x
            .iter()
            .zip(&curve.y)
            .map(|(x, y)| [x.to_string(), y.to_string()]);
        write_csv(&run.path(name), &header, rows)?;
    }
    write_csv(
        &run.path("entropy.csv"),
        &["fund_id", "n_i", "value"],
        entropy
            .iter()
            .map(|r| [r.fund_id.clone(), r.n_i.to_string(), r.scaled_entropy.to_string()]),
    )?;
    write_csv(
        &run.path("fmax.csv"),
        &["fund_id", "n_i", "value"],
        fmax.iter()
            .map(|r| [r.fund_id.clone(), r.n_i.to_string(), r.f_max.to_string()]),
    )?;
    run.json(PLAN_FILE, &SimulationPlan::from_snapshot(&snapshot))?;

    println!(
        "mu_below = {:.4}, mu_above = {:.4}, n_star = {:.2}, gamma = {:.4} ({} funds, {} securities)",
        segmented.mu_below,
        segmented.mu_above,
        segmented.n_star,
        power_law.exponent,
        snapshot.n_funds(),
        snapshot.n_securities()
    );
    run.finish(MANIFEST_FILE)
}

/// Resolves a snapshot argument: an `analyze` output directory (with a
/// `snapshot/` subdirectory) or a plain snapshot directory.
fn snapshot_dir(dir: &Path) -> PathBuf {
    let nested = dir.join(SNAPSHOT_DIR);
    if nested.is_dir() {
        nested
    } else {
        dir.to_path_buf()
    }
}

fn load_clean(dir: &Path) -> CliResult<UniverseSnapshot> {
    let outcome = load_snapshot_dir(&snapshot_dir(dir))?;
    if let Some(first) = outcome.rejects.first() {
        return Err(CliError::new(
            EXIT_INPUT,
            format!("{}: line {}: {}", dir.display(), first.line, first.reason),
        ));
    }
    Ok(outcome.snapshot)
}

fn cmd_calibrate(dir: &Path, out: &Path, fit: Option<&Path>, min_edges: usize) -> CliResult {
    let out_dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut run = Run::start("calibrate", &out_dir)?;
    let snap_dir = snapshot_dir(dir);
    run.input(&snap_dir.join(crate::ingest::SECURITIES_FILE))?;
    run.input(&snap_dir.join(crate::ingest::HOLDINGS_FILE))?;
    let snapshot = load_clean(dir)?;

    let fit_path = fit.map(Path::to_path_buf).unwrap_or_else(|| dir.join(SEGMENTED_FILE));
    if !fit_path.is_file() {
        return Err(CliError::new(
            EXIT_FIT,
            format!("no segmented fit found at {}", fit_path.display()),
        ));
    }
    run.input(&fit_path)?;
    let segmented: SegmentedFit = read_json(&fit_path)?;
    if !segmented.converged {
        return Err(CliError::new(EXIT_FIT, "segmented fit of W vs n did not converge"));
    }
    let config = CalibrationConfig {
        min_edges,
        ..CalibrationConfig::default()
    };
    let model = calibrate(&snapshot, &segmented, &config).map_err(|e| CliError::fit("calibration", e))?;
    for bin in model.uncalibrated_large_bins() {
        eprintln!("uncalibrated bin [{}, {}): {} funds", bin.lo, bin.hi, bin.count);
    }
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::new(EXIT_INPUT, "--out must name a file"))?;
    run.json(&name, &model)?;
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(name);
    run.finish(&format!("{stem}.{MANIFEST_FILE}"))
}

/// LOESS curves of the empirical and simulated data evaluated on a shared
/// grid spanning both; the empirical column is empty without a reference.
fn comparison_rows(
    empirical: Option<&[(f64, f64)]>,
    simulated: &[(f64, f64)],
    loess: &LoessConfig,
    fit: &str,
) -> CliResult<Vec<[String; 3]>> {
    let all = simulated.iter().chain(empirical.into_iter().flatten());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let grid = if hi > lo {
        crate::estimators::loess::evenly_spaced(lo, hi, LOESS_POINTS)
    } else {
        vec![lo]
    };
    let sim = loess_fit(simulated, loess, &grid).map_err(|e| CliError::fit(fit, e))?;
    let emp = empirical
        .map(|p| loess_fit(p, loess, &grid).map_err(|e| CliError::fit(fit, e)))
        .transpose()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, u)| {
            [
                10f64.powf(*u).to_string(),
                fmt_opt(emp.as_ref().map(|c| c.y[i])),
                sim.y[i].to_string(),
            ]
        })
        .collect())
}

#[derive(Debug, Serialize)]
struct FailureBreakdown<'a> {
    total: usize,
    by_reason: BTreeMap<String, usize>,
    failures: &'a [FundFailure],
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model_path: &Path,
    plan_path: &Path,
    seed: u64,
    workers: Option<usize>,
    out: &Path,
    empirical: Option<&Path>,
    loess: &LoessConfig,
) -> CliResult {
    let mut run = Run::start("simulate", out)?;
    run.manifest.seed = Some(seed);
    run.config(model_path)?;
    run.config(plan_path)?;
    let model: SelectionModel = read_json(model_path)?;
    let plan: SimulationPlan = read_json(plan_path)?;
    let empirical = empirical.map(load_clean).transpose()?;

    let config = SimConfig { seed, model, plan };
    let sim = simulate_universe(&config, workers)?;
    run.snapshot("", &sim.snapshot)?;
    run.json("provenance.json", &sim.provenance)?;

    // too many failed funds make the comparison tables meaningless
    let rate = sim.failure_rate();
    if rate > MAX_FAILURE_RATE {
        let failures = &sim.provenance.failures;
        run.finish(MANIFEST_FILE)?;
        let mut by_reason = BTreeMap::new();
        for f in failures {
            let kind = f.reason.split(':').next().unwrap_or(&f.reason);
            let kind = if kind.starts_with("slot ") {
                "duplicate draws exhausted"
            } else {
                kind
            };
            *by_reason.entry(kind.to_string()).or_insert(0) += 1;
        }
        let breakdown = FailureBreakdown {
            total: failures.len(),
            by_reason,
            failures,
        };
        let text = serde_json::to_string_pretty(&breakdown).map_err(Error::from)?;
        return Err(CliError::new(
            EXIT_SIMULATION,
            format!("{:.2}% of funds failed\n{text}", 100.0 * rate),
        ));
    }

    let emp_w = empirical.as_ref().map(value_points);
    let emp_c = empirical.as_ref().map(capitalization_points);
    let rows = comparison_rows(emp_w.as_deref(), &value_points(&sim.snapshot), loess, "LOESS of W vs n")?;
    write_csv(
        &run.path("comparison_w_vs_n.csv"),
        &["n", "loess_empirical", "loess_simulated"],
        rows,
    )?;
    let rows = comparison_rows(
        emp_c.as_deref(),
        &capitalization_points(&sim.snapshot),
        loess,
        "LOESS of C vs m",
    )?;
    write_csv(
        &run.path("comparison_c_vs_m.csv"),
        &["m", "loess_empirical", "loess_simulated"],
        rows,
    )?;

    run.finish(MANIFEST_FILE)
}

fn cmd_entropy_mc(vol: Option<&Path>, n_grid: &[usize], replicas: usize, seed: u64, out: &Path) -> CliResult {
    let out_dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut run = Run::start("entropy-mc", &out_dir)?;
    run.manifest.seed = Some(seed);
    let config = match vol {
        Some(path) => {
            run.config(path)?;
            read_json(path)?
        }
        None => VolatilityConfig::default(),
    };
    let curve = entropy_under_volatility(n_grid, &config, replicas, seed)?;
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::new(EXIT_INPUT, "--out must name a file"))?;
    curve.write_csv(BufWriter::new(File::create(run.path(&name)).map_err(Error::from)?))?;
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(name);
    run.finish(&format!("{stem}.{MANIFEST_FILE}"))
}

fn cmd_generate(params_path: &Path, seed: u64, workers: Option<usize>, out: &Path) -> CliResult {
    let mut run = Run::start("generate", out)?;
    run.manifest.seed = Some(seed);
    run.config(params_path)?;
    let params: GeneratorParams = read_json(params_path)?;
    let synthetic = generate_synthetic_universe(&params, seed, workers)?;
    run.snapshot("", &synthetic.snapshot)?;
    run.json("ground_truth.json", &synthetic.truth)?;
    let failed = synthetic.truth.failures.len();
    let rate = failed as f64 / params.n_funds as f64;
    run.finish(MANIFEST_FILE)?;
    if rate > MAX_FAILURE_RATE {
        return Err(CliError::new(
            EXIT_SIMULATION,
            format!("{failed} of {} funds failed (see ground_truth.json)", params.n_funds),
        ));
    }
    Ok(())
}
