//! Command-line frontend: membership checks, trajectory dumps, and the
//! Monte Carlo verification experiments.
//!
//! Exit codes are uniform across subcommands: 0 for success (member, all
//! verdicts pass), 1 for usage or precondition errors (malformed flags,
//! bad x0, parameters outside the solvable region), 2 for a semantic
//! negative (non-member, failed verdict). Malformed input never panics.

use besq::mcverify::{self, parse_x0_spec, ExperimentConfig};
use besq::wallach::{self, WallachPoint};
use besq::{sde, symcore, Error, GridSpec, Result, RngStream, SymMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// The only environment variable the tool reads.
const SEED_ENV: &str = "BESQ_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "besq", version, about = "Cone-valued squared Bessel process toolkit")]
struct Cli {
    /// Cap on worker threads for the experiment runners
    /// (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership of (x0, beta) in the admissible parameter set.
    WallachCheck(WallachCheckArgs),
    /// Integrate one of the schemes and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run one named verification experiment.
    Verify(VerifyArgs),
    /// Run the default battery of verification experiments.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct WallachCheckArgs {
    /// Matrix dimension.
    #[arg(short, long)]
    p: usize,
    /// Index beta; the corresponding SDE drift is alpha = 2 beta.
    #[arg(short = 'b', long)]
    beta: f64,
    /// Starting matrix: zero | identity | diag:a,b,... | file:PATH.
    #[arg(long)]
    x0: String,
    /// Relative eigenvalue floor for the numeric rank of x0.
    #[arg(long, default_value_t = symcore::DEFAULT_RANK_EPSILON)]
    epsilon: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Matrix-valued Euler scheme.
    Matrix,
    /// Eigenvalue particle system.
    Particles,
    /// One-dimensional squared Bessel process.
    Scalar,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Flat `key = value` file supplying defaults; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Matrix dimension (matrix mode).
    #[arg(short, long)]
    p: Option<usize>,
    /// Drift parameter (matrix and particle modes).
    #[arg(short = 'a', long)]
    alpha: Option<f64>,
    /// Start: zero | identity | diag:a,b,... | file:PATH.
    /// Scalar mode reads this as a plain number instead.
    #[arg(long)]
    x0: Option<String>,
    /// Particle start, comma-separated in ascending order.
    #[arg(long)]
    lambda0: Option<String>,
    /// Scalar drift; may be negative.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Horizon.
    #[arg(long = "t")]
    t_end: Option<f64>,
    /// Step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of independent paths.
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Particle-drift regularization threshold.
    #[arg(long)]
    eps_reg: Option<f64>,
    /// Scalar mode: draw from the exact transition law instead of Euler.
    /// Needs delta < 0 and x0 = 0.
    #[arg(long)]
    exact_law: bool,
    /// Output file; stdout when omitted (single path only). With several
    /// paths the path index is inserted before the extension.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: laplace, laplace-exact, negativity, negativity-diagnostic,
    /// psd-retention, comparison, noncollision, polynomial.
    experiment: String,
    /// Named base configuration: p2-a3 | p3-a4.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Flat `key = value` file; --set pairs and flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(short, long)]
    p: Option<usize>,
    #[arg(short = 'a', long)]
    alpha: Option<f64>,
    /// Start: zero | identity | diag:a,b,... | file:PATH.
    #[arg(long)]
    x0: Option<String>,
    /// Diagonal of the Laplace test matrix u, comma-separated.
    #[arg(long)]
    u: Option<String>,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t")]
    t_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` override, repeatable; applied before named flags.
    #[arg(long, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the full report as JSON.
    #[arg(long, value_name = "FILE")]
    report_json: Option<PathBuf>,
    /// Write per-path summaries as CSV (experiments that track paths).
    #[arg(long, value_name = "FILE")]
    paths_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for per-experiment reports and the suite summary.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version leave through stdout with a zero code;
            // everything else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::WallachCheck(args) => cmd_wallach_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Suite(args) => cmd_suite(args),
    }
}

/// Seed precedence: --seed, then the environment, then the config file,
/// then the fixed default. A malformed environment value is an error
/// rather than a silent fallback.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var(SEED_ENV) {
        return raw.trim().parse().map_err(|_| {
            Error::Config(format!("{SEED_ENV} must be an unsigned integer, got {raw:?}"))
        });
    }
    Ok(config.unwrap_or(DEFAULT_SEED))
}

fn cmd_wallach_check(args: WallachCheckArgs) -> Result<u8> {
    let entries = parse_x0_spec(args.p, &args.x0)?;
    let x0 = SymMatrix::from_upper_triangle(args.p, &entries)?;
    let point = WallachPoint::new(x0, args.beta)?;
    let verdict = wallach::noncentral_member(&point, args.epsilon)?;
    let mut json = serde_json::to_string_pretty(&verdict)?;
    json.push('\n');
    print!("{json}");
    Ok(if verdict.member { 0 } else { 2 })
}

/// Defaults a simulate run can pick up from a config file. Keys match the
/// experiment config file format where the two overlap.
#[derive(Default)]
struct FileDefaults {
    p: Option<usize>,
    alpha: Option<f64>,
    x0: Option<String>,
    lambda0: Option<String>,
    delta: Option<f64>,
    t_end: Option<f64>,
    dt: Option<f64>,
    n_paths: Option<u64>,
    master_seed: Option<u64>,
    eps_reg: Option<f64>,
}

fn read_sim_config(path: &Path) -> Result<FileDefaults> {
    let text = std::fs::read_to_string(path)?;
    let mut out = FileDefaults::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Config(format!("{}:{}: {msg}", path.display(), idx + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || at(format!("invalid {key}: {value:?}"));
        match key {
            "p" => out.p = Some(value.parse().map_err(|_| bad())?),
            "alpha" => out.alpha = Some(value.parse().map_err(|_| bad())?),
            "x0" => out.x0 = Some(value.to_string()),
            "lambda0" => out.lambda0 = Some(value.to_string()),
            "delta" => out.delta = Some(value.parse().map_err(|_| bad())?),
            "t_end" => out.t_end = Some(value.parse().map_err(|_| bad())?),
            "dt" => out.dt = Some(value.parse().map_err(|_| bad())?),
            "n_paths" => out.n_paths = Some(value.parse().map_err(|_| bad())?),
            "master_seed" => out.master_seed = Some(value.parse().map_err(|_| bad())?),
            "eps_reg" => out.eps_reg = Some(value.parse().map_err(|_| bad())?),
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }
    Ok(out)
}

fn parse_float_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>().map_err(|_| {
                Error::Config(format!("expected comma-separated numbers, got {tok:?}"))
            })
        })
        .collect()
}

/// `dump.csv` with three paths becomes `dump.path0.csv`, `dump.path1.csv`,
/// `dump.path2.csv`; a single path keeps the name as given.
fn path_for(base: &Path, k: u64, total: u64) -> PathBuf {
    if total == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("path");
    let named = match base.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}.path{k}.{ext}"),
        None => format!("{stem}.path{k}"),
    };
    base.with_file_name(named)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let file = match &args.config {
        Some(path) => read_sim_config(path)?,
        None => FileDefaults::default(),
    };
    let t_end = args.t_end.or(file.t_end).unwrap_or(1.0);
    let dt = args.dt.or(file.dt).unwrap_or(sde::DEFAULT_DT);
    let grid = GridSpec::new(t_end, dt)?;
    let paths = args.paths.or(file.n_paths).unwrap_or(1);
    if paths == 0 {
        return Err(Error::Config("--paths must be at least 1".into()));
    }
    if paths > 1 && args.out.is_none() {
        return Err(Error::Config(
            "several paths need --out; stdout takes a single path".into(),
        ));
    }
    if args.exact_law && args.mode != Mode::Scalar {
        return Err(Error::Config("--exact-law applies to scalar mode only".into()));
    }
    let seed = resolve_seed(args.seed, file.master_seed)?;

    // Path k draws from keyed stream k, so dumps are reproducible and any
    // single path can be regenerated alone.
    for k in 0..paths {
        let mut stream = RngStream::new(seed, k);
        let mut buf = Vec::new();
        match args.mode {
            Mode::Matrix => {
                let p = args.p.or(file.p).unwrap_or(2);
                let alpha = args
                    .alpha
                    .or(file.alpha)
                    .ok_or_else(|| Error::Config("matrix mode needs --alpha".into()))?;
                let spec = args.x0.as_deref().or(file.x0.as_deref()).unwrap_or("identity");
                let x0 = SymMatrix::from_upper_triangle(p, &parse_x0_spec(p, spec)?)?;
                let path = sde::simulate_matrix_besq(&x0, alpha, grid, &mut stream)?;
                path.write_csv(&mut buf)?;
            }
            Mode::Particles => {
                let alpha = args
                    .alpha
                    .or(file.alpha)
                    .ok_or_else(|| Error::Config("particle mode needs --alpha".into()))?;
                let spec = args
                    .lambda0
                    .as_deref()
                    .or(file.lambda0.as_deref())
                    .ok_or_else(|| Error::Config("particle mode needs --lambda0".into()))?;
                let lambda0 = parse_float_list(spec)?;
                if let Some(p) = args.p.or(file.p) {
                    if p != lambda0.len() {
                        return Err(Error::Config(format!(
                            "--lambda0 has {} entries but p = {p}",
                            lambda0.len()
                        )));
                    }
                }
                let eps_reg = args.eps_reg.or(file.eps_reg).unwrap_or(sde::DEFAULT_EPS_REG);
                let path = sde::simulate_particles(&lambda0, alpha, grid, &mut stream, eps_reg)?;
                path.write_csv(&mut buf)?;
            }
            Mode::Scalar => {
                let x0 = match args.x0.as_deref().or(file.x0.as_deref()) {
                    Some(s) => s.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("scalar x0 must be a number, got {s:?}"))
                    })?,
                    None => 0.0,
                };
                let delta = args
                    .delta
                    .or(file.delta)
                    .ok_or_else(|| Error::Config("scalar mode needs --delta".into()))?;
                let path = if args.exact_law {
                    sde::simulate_scalar_besq_exact_law(x0, delta, grid, &mut stream)?
                } else {
                    sde::simulate_scalar_besq(x0, delta, grid, &mut stream)?
                };
                path.write_csv(&mut buf)?;
            }
        }
        match &args.out {
            Some(out) => std::fs::write(path_for(out, k, paths), &buf)?,
            None => std::io::stdout().write_all(&buf)?,
        }
    }
    Ok(0)
}

/// Named base configurations for quick runs.
fn preset(experiment: &str, name: &str) -> Result<ExperimentConfig> {
    match name {
        "p2-a3" => {
            let mut c = ExperimentConfig::new(experiment, 2);
            c.alpha = 3.0;
            c.x0 = SymMatrix::from_diagonal(&[1.0, 0.5]).upper_triangle();
            c.u_diag = vec![0.3, 0.1];
            c.n_paths = 20_000;
            Ok(c)
        }
        "p3-a4" => {
            let mut c = ExperimentConfig::new(experiment, 3);
            c.alpha = 4.0;
            c.n_paths = 20_000;
            Ok(c)
        }
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; known presets: p2-a3, p3-a4"
        ))),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let mut cfg = if let Some(name) = &args.preset {
        preset(&args.experiment, name)?
    } else if let Some(path) = &args.config {
        ExperimentConfig::from_kv_file(path)?
    } else {
        ExperimentConfig::new(&args.experiment, 2)
    };
    cfg.experiment = args.experiment.clone();

    for pair in &args.set {
        let (k, v) = pair.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set needs KEY=VALUE, got {pair:?}"))
        })?;
        cfg.apply_kv(k.trim(), v.trim())?;
    }
    // Named flags beat --set pairs; p goes first so size-dependent fields
    // get re-defaulted before x0 and u land.
    if let Some(p) = args.p {
        cfg.apply_kv("p", &p.to_string())?;
    }
    if let Some(a) = args.alpha {
        cfg.apply_kv("alpha", &a.to_string())?;
    }
    if let Some(x0) = &args.x0 {
        cfg.apply_kv("x0", x0)?;
    }
    if let Some(u) = &args.u {
        cfg.apply_kv("u_diag", u)?;
    }
    if let Some(n) = args.paths {
        cfg.apply_kv("n_paths", &n.to_string())?;
    }
    if let Some(dt) = args.dt {
        cfg.apply_kv("dt", &dt.to_string())?;
    }
    if let Some(t) = args.t_end {
        cfg.apply_kv("t_end", &t.to_string())?;
    }
    cfg.master_seed = resolve_seed(args.seed, Some(cfg.master_seed))?;
    if args.report_json.is_some() {
        cfg.report_json = args.report_json.clone();
    }
    if args.paths_csv.is_some() {
        cfg.paths_csv = args.paths_csv.clone();
    }

    let report = mcverify::run_experiment(&cfg)?;
    for e in &report.estimates {
        println!("{}", e.describe());
    }
    let passed = report.passed();
    println!("experiment {}: {}", report.experiment, if passed { "pass" } else { "fail" });
    Ok(if passed { 0 } else { 2 })
}

fn cmd_suite(args: SuiteArgs) -> Result<u8> {
    let seed = resolve_seed(args.seed, None)?;
    let mut configs = mcverify::default_suite(seed);
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        for (i, cfg) in configs.iter_mut().enumerate() {
            let name = format!("{:02}-{}.report.json", i + 1, cfg.experiment);
            cfg.report_json = Some(dir.join(name));
        }
    }
    let summary = mcverify::run_suite(&configs);
    for o in &summary.outcomes {
        match (o.passed, &o.error) {
            (Some(true), _) => println!("{}: pass", o.experiment),
            (Some(false), _) => println!("{}: fail", o.experiment),
            (None, Some(msg)) => println!("{}: error: {msg}", o.experiment),
            (None, None) => println!("{}: error", o.experiment),
        }
    }
    if let Some(dir) = &args.out_dir {
        summary.write_json(&dir.join("suite.json"))?;
    }
    let ok = summary.all_passed();
    println!("suite: {}", if ok { "pass" } else { "fail" });
    Ok(if ok { 0 } else { 2 })
}
