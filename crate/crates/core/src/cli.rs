//! Command-line front end: parameter handling, figure presets and CSV output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::recurrence_concurrences;
use crate::frontier::{bell_frontier, classify_ratio, mems_curve, werner_curve, FrontierCurve, FrontierKind};
use crate::model::SystemParams;
use crate::trajectory::{default_points, sweep, Source, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_BELL_SAMPLES: usize = 100_000;
pub const DEFAULT_CURVE_POINTS: usize = 201;
pub const DEFAULT_RATIO_TOL: f64 = 1e-6;
pub const DEFAULT_Q_MAX: u64 = 1000;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Validation(String),
    /// Failure while computing or writing; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "cavity-mems", version, about = "Two-atom cavity entanglement dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep a trajectory and write its metrics as CSV.
    Evolve(EvolveArgs),
    /// Reproduce the datasets behind one figure panel.
    Figure(FigureArgs),
    /// Write a reference curve as CSV.
    Frontier(FrontierArgs),
    /// Write the recurrence concurrences for λ = 1.
    Recurrences(RecurrenceArgs),
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Detuning in units of g.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Initial weight of |eg> (the rest is in |gg>).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Dephasing rate times g.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Photon-number cutoff of the cavity space.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Flat key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// End of the scaled-time grid.
    #[arg(long)]
    pub gt_max: Option<f64>,
    /// Number of grid points including both ends.
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    /// Recorded in the metadata; trajectories are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Panel tag such as 1a or 3b.
    pub tag: String,
    /// Directory receiving the CSV files.
    #[arg(long, short, default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub source: SourceArg,
    /// Samples for the Bell frontier of figure 3 panels.
    #[arg(long, default_value_t = DEFAULT_BELL_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    pub n_points: usize,
    #[arg(long, default_value_t = DEFAULT_BELL_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 100)]
    pub k_max: u64,
    /// Tolerance for the rational approximation of Δ/Ω.
    #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    pub q_max: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Analytic,
    Spectral,
    Rk4,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Analytic => Source::Analytic,
            SourceArg::Spectral => Source::Spectral,
            SourceArg::Rk4 => Source::Rk4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Werner,
    Mems,
    Bell,
}

/// Fully resolved parameters of an `evolve` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub delta_over_g: f64,
    pub lambda: f64,
    pub gamma_times_g: f64,
    pub gt_max: f64,
    pub n_steps: usize,
    pub n_max: usize,
    pub source: Source,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn params(&self) -> Result<SystemParams, CliError> {
        SystemParams::scaled(self.delta_over_g, self.lambda, self.gamma_times_g)
            .and_then(|p| p.with_n_max(self.n_max))
            .map_err(invalid)
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("delta_over_g".into(), fmt_num(self.delta_over_g)),
            ("lambda".into(), fmt_num(self.lambda)),
            ("gamma_times_g".into(), fmt_num(self.gamma_times_g)),
            ("gt_max".into(), fmt_num(self.gt_max)),
            ("n_steps".into(), self.n_steps.to_string()),
            ("n_max".into(), self.n_max.to_string()),
            ("source".into(), self.source.name().into()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

/// Parses a flat `key = value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self(BTreeMap::new())) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let map = parse_config(&text)?;
        const KNOWN: [&str; 11] = [
            "delta", "delta_over_g", "lambda", "gamma", "gamma_times_g", "gt_max", "n_steps", "n_max", "source",
            "seed", "output",
        ];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(invalid(format!("unknown config key '{k}'")));
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, keys: &[&str]) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        for k in keys {
            if let Some(v) = self.0.get(*k) {
                return v.parse().map(Some).map_err(|e| invalid(format!("config key '{k}': {e}")));
            }
        }
        Ok(None)
    }
}

fn resolve_params(args: &ParamArgs, file: &ConfigFile) -> Result<(f64, f64, f64, usize), CliError> {
    let delta = args.delta.map_or_else(|| file.get(&["delta", "delta_over_g"]), |v| Ok(Some(v)))?.unwrap_or(0.0);
    let lambda = args.lambda.map_or_else(|| file.get(&["lambda"]), |v| Ok(Some(v)))?.unwrap_or(1.0);
    let gamma = args.gamma.map_or_else(|| file.get(&["gamma", "gamma_times_g"]), |v| Ok(Some(v)))?.unwrap_or(0.0);
    let n_max = args.n_max.map_or_else(|| file.get(&["n_max"]), |v| Ok(Some(v)))?.unwrap_or(2);
    Ok((delta, lambda, gamma, n_max))
}

/// Merges flags over the config file over defaults and validates the result.
pub fn resolve_evolve(args: &EvolveArgs) -> Result<RunConfig, CliError> {
    let file = ConfigFile::load(args.params.config.as_deref())?;
    let (delta_over_g, lambda, gamma_times_g, n_max) = resolve_params(&args.params, &file)?;
    let gt_max = args.gt_max.map_or_else(|| file.get(&["gt_max"]), |v| Ok(Some(v)))?.unwrap_or(50.0);
    let source = match args.source {
        Some(s) => s.into(),
        None => file.get::<String>(&["source"])?.map_or(Ok(Source::Analytic), |s| s.parse().map_err(invalid))?,
    };
    let n_steps = match args.n_steps {
        Some(n) => n,
        None => file.get(&["n_steps"])?.unwrap_or_else(|| default_points(gt_max)),
    };
    let seed = args.seed.map_or_else(|| file.get(&["seed"]), |v| Ok(Some(v)))?.unwrap_or(DEFAULT_SEED);
    let output = args.output.clone().or(file.get::<String>(&["output"])?.map(PathBuf::from));
    let cfg = RunConfig { delta_over_g, lambda, gamma_times_g, gt_max, n_steps, n_max, source, seed, output };
    cfg.params()?;
    if !(gt_max.is_finite() && gt_max > 0.0) {
        return Err(invalid(format!("gt_max must be positive, got {gt_max}")));
    }
    if n_steps < 2 {
        return Err(invalid(format!("n_steps must be at least 2, got {n_steps}")));
    }
    Ok(cfg)
}

/// One panel of the reproduced figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigurePreset {
    pub tag: &'static str,
    pub delta_over_g: f64,
    pub lambda: f64,
    pub gamma_times_g: f64,
    pub gt_max: f64,
    pub bell_frontier: bool,
}

const fn preset(tag: &'static str, delta: f64, lambda: f64, gamma: f64, gt_max: f64, bell: bool) -> FigurePreset {
    FigurePreset { tag, delta_over_g: delta, lambda, gamma_times_g: gamma, gt_max, bell_frontier: bell }
}

pub const FIGURE_PRESETS: [FigurePreset; 12] = [
    preset("1a", 0.0, 1.0, 0.0, 50.0, false),
    preset("1b", 0.5, 1.0, 0.0, 50.0, false),
    preset("1c", 5.0, 1.0, 0.0, 50.0, false),
    preset("2a", 0.5, 0.9, 0.0, 500.0, false),
    preset("2b", 0.5, 0.7, 0.0, 500.0, false),
    preset("2c", 0.5, 0.6, 0.0, 500.0, false),
    preset("3a", 0.0, 1.0, 0.0, 500.0, true),
    preset("3b", 0.01, 1.0, 0.0, 500.0, true),
    preset("3c", 5.0, 1.0, 0.0, 500.0, true),
    preset("4a", 0.0, 1.0, 0.01, 500.0, false),
    preset("4b", 0.5, 1.0, 0.01, 500.0, false),
    preset("4c", 1.0, 1.0, 0.01, 500.0, false),
];

pub fn figure_preset(tag: &str) -> Option<&'static FigurePreset> {
    let tag = tag.trim().trim_start_matches("fig").to_ascii_lowercase();
    FIGURE_PRESETS.iter().find(|p| p.tag == tag)
}

/// `printf("%.12g")`-style formatting.
pub fn fmt_num(x: f64) -> String {
    const PRECISION: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct CsvDoc {
    text: String,
}

impl CsvDoc {
    fn new(command: &str, meta: &[(String, String)], timestamp: bool) -> Self {
        let mut text = String::new();
        writeln!(text, "# cavity-mems {VERSION}").unwrap();
        writeln!(text, "# command: {command}").unwrap();
        for (k, v) in meta {
            writeln!(text, "# {k}: {v}").unwrap();
        }
        if timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(text, "# timestamp_unix: {secs}").unwrap();
        }
        Self { text }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(path) => std::fs::write(path, &self.text)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .lock()
                    .write_all(self.text.as_bytes())
                    .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))
            }
        }
    }
}

fn trajectory_csv(traj: &Trajectory, meta: &[(String, String)], timestamp: bool) -> CsvDoc {
    let mut doc = CsvDoc::new("evolve", meta, timestamp);
    doc.row(&["gt", "concurrence", "linear_entropy", "bell_max", "purity"].map(String::from));
    for p in &traj.points {
        doc.row(&[p.gt, p.concurrence, p.linear_entropy, p.bell_max, p.purity].map(fmt_num));
    }
    doc
}

fn curve_csv(curve: &FrontierCurve, meta: &[(String, String)], timestamp: bool) -> CsvDoc {
    let mut doc = CsvDoc::new("frontier", meta, timestamp);
    doc.row(&["linear_entropy", "value"].map(String::from));
    for &(m, v) in curve.points() {
        doc.row(&[fmt_num(m), fmt_num(v)]);
    }
    doc
}

fn build_curve(kind: FrontierKind, n_points: usize, samples: usize, seed: u64) -> Result<FrontierCurve, CliError> {
    match kind {
        FrontierKind::Werner => werner_curve(n_points).map_err(invalid),
        FrontierKind::MemsCm => mems_curve(n_points).map_err(invalid),
        FrontierKind::BellFrontier => bell_frontier(n_points, samples, seed).map_err(invalid),
    }
}

fn curve_meta(kind: FrontierKind, n_points: usize, samples: usize, seed: u64) -> Vec<(String, String)> {
    let mut meta = vec![("kind".to_string(), kind.name().to_string()), ("n_points".into(), n_points.to_string())];
    if kind == FrontierKind::BellFrontier {
        meta.push(("samples".into(), samples.to_string()));
        meta.push(("seed".into(), seed.to_string()));
    }
    meta
}

pub fn cmd_evolve(cfg: &RunConfig, timestamp: bool) -> Result<(), CliError> {
    let p = cfg.params()?;
    let traj = sweep(&p, cfg.gt_max, cfg.n_steps, cfg.source)?;
    trajectory_csv(&traj, &cfg.metadata(), timestamp).write(cfg.output.as_deref())
}

/// Writes `fig<tag>_trajectory.csv`, `fig<tag>_werner.csv`, `fig<tag>_mems.csv`
/// and, for figure 3 panels, `fig<tag>_bell.csv` into `args.output_dir`.
pub fn cmd_figure(args: &FigureArgs) -> Result<Vec<PathBuf>, CliError> {
    let preset = figure_preset(&args.tag).ok_or_else(|| invalid(format!("unknown figure tag '{}'", args.tag)))?;
    let n_steps = args.n_steps.unwrap_or_else(|| default_points(preset.gt_max));
    let cfg = RunConfig {
        delta_over_g: preset.delta_over_g,
        lambda: preset.lambda,
        gamma_times_g: preset.gamma_times_g,
        gt_max: preset.gt_max,
        n_steps,
        n_max: 2,
        source: args.source.into(),
        seed: args.seed,
        output: None,
    };
    if n_steps < 2 {
        return Err(invalid(format!("n_steps must be at least 2, got {n_steps}")));
    }
    let p = cfg.params()?;
    std::fs::create_dir_all(&args.output_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", args.output_dir.display())))?;
    let stamp = !args.no_timestamp;
    let path = |name: &str| args.output_dir.join(format!("fig{}_{name}.csv", preset.tag));
    let mut written = Vec::new();

    let traj = sweep(&p, cfg.gt_max, cfg.n_steps, cfg.source)?;
    let mut meta = vec![("figure".to_string(), preset.tag.to_string())];
    meta.extend(cfg.metadata());
    let out = path("trajectory");
    trajectory_csv(&traj, &meta, stamp).write(Some(&out))?;
    written.push(out);

    let mut kinds = vec![(FrontierKind::Werner, "werner"), (FrontierKind::MemsCm, "mems")];
    if preset.bell_frontier {
        kinds.push((FrontierKind::BellFrontier, "bell"));
    }
    for (kind, name) in kinds {
        let n_points = if kind == FrontierKind::BellFrontier { 101 } else { DEFAULT_CURVE_POINTS };
        let curve = build_curve(kind, n_points, args.samples, args.seed)?;
        let out = path(name);
        curve_csv(&curve, &curve_meta(kind, n_points, args.samples, args.seed), stamp).write(Some(&out))?;
        written.push(out);
    }
    Ok(written)
}

pub fn cmd_frontier(args: &FrontierArgs) -> Result<(), CliError> {
    let kind = match args.kind {
        KindArg::Werner => FrontierKind::Werner,
        KindArg::Mems => FrontierKind::MemsCm,
        KindArg::Bell => FrontierKind::BellFrontier,
    };
    let curve = build_curve(kind, args.n_points, args.samples, args.seed)?;
    curve_csv(&curve, &curve_meta(kind, args.n_points, args.samples, args.seed), !args.no_timestamp)
        .write(args.output.as_deref())
}

pub fn cmd_recurrences(args: &RecurrenceArgs) -> Result<(), CliError> {
    let file = ConfigFile::load(args.params.config.as_deref())?;
    let (delta, lambda, gamma, n_max) = resolve_params(&args.params, &file)?;
    let p = SystemParams::scaled(delta, lambda, gamma).and_then(|p| p.with_n_max(n_max)).map_err(invalid)?;
    if (lambda - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("recurrences are defined for lambda = 1, got {lambda}")));
    }
    let recurrences = recurrence_concurrences(&p, args.k_max).map_err(invalid)?;
    let report = classify_ratio(&p, args.tol, args.q_max).map_err(invalid)?;
    let convergents: Vec<String> = report.convergents.iter().map(|(a, b)| format!("{a}/{b}")).collect();
    let meta = vec![
        ("delta_over_g".to_string(), fmt_num(delta)),
        ("lambda".into(), fmt_num(lambda)),
        ("k_max".into(), args.k_max.to_string()),
        ("ratio_delta_over_omega".into(), fmt_num(report.ratio)),
        ("tol".into(), fmt_num(report.tol)),
        ("q_max".into(), report.q_max.to_string()),
        ("best_q".into(), report.best_q.map_or("none".into(), |q| q.to_string())),
        ("classification".into(), report.classification.label().into()),
        ("convergents".into(), convergents.join(" ")),
    ];
    let mut doc = CsvDoc::new("recurrences", &meta, !args.no_timestamp);
    doc.row(&["k", "gt", "concurrence"].map(String::from));
    for r in &recurrences {
        doc.row(&[r.k.to_string(), fmt_num(r.gt), fmt_num(r.concurrence)]);
    }
    doc.write(args.output.as_deref())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(args) => {
            let cfg = resolve_evolve(&args)?;
            cmd_evolve(&cfg, !args.no_timestamp)
        }
        Command::Figure(args) => cmd_figure(&args).map(|_| ()),
        Command::Frontier(args) => cmd_frontier(&args),
        Command::Recurrences(args) => cmd_recurrences(&args),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
