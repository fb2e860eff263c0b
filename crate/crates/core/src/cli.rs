//! The `lemon` command line.
//!
//! Settings come from flags and an optional `key = value` file; flags win.
//! `LEMON_THREADS` sets the number of worker threads.

use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{orbit, write_orbit_csv};
use crate::error::{Error, Result};
use crate::geometry::{radius_threshold, ArcLabel, LemonTable, ThresholdVariant};
use crate::phase::PhasePoint;
use crate::verify::checks::{verify_all, SuiteConfig};
use crate::verify::lyapunov::{lyapunov_exponent, LyapunovEstimate};
use crate::verify::report::{CheckReport, TableSummary};
use crate::verify::sampling::{sample_mu, stream_rng};
use crate::verify::sweep::{sweep, write_sweep_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_HARD_FAILURE: i32 = 2;

const PORTRAIT_SALT: u64 = 200;
const ORBIT_SALT: u64 = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Print the derived quantities of a table.
    Table,
    /// Write one orbit as CSV.
    Orbit,
    /// Run every check and write JSON reports.
    Verify,
    /// Estimate the Lyapunov exponent.
    Lyapunov,
    /// Defocusing, cone and Lyapunov summaries over a grid.
    Sweep,
    /// Write (phi, theta) point clouds of long orbits.
    Portrait,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Theorem,
    Collected,
}

impl From<VariantArg> for ThresholdVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Theorem => ThresholdVariant::Theorem,
            VariantArg::Collected => ThresholdVariant::Collected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArcArg {
    Small,
    Big,
}

/// Flags, every one optional so that a config file can fill the gaps.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "lemon", version, about = "Asymmetric lemon billiards: simulation and numerical verification")]
pub struct Flags {
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Plain-text file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "phi-star", allow_negative_numbers = true)]
    pub phi_star: Option<f64>,
    #[arg(long = "R", allow_negative_numbers = true)]
    pub big_r: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub orbits: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub threshold_variant: Option<VariantArg>,
    #[arg(long, value_delimiter = ',')]
    pub phi_grid: Option<Vec<f64>>,
    #[arg(long = "R-grid", value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub start_arc: Option<ArcArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub start_phi: Option<f64>,
    #[arg(long)]
    pub start_theta: Option<f64>,
}

/// Config-file keys and the flags they stand for.
const FILE_KEYS: &[(&str, &str)] = &[
    ("command", ""),
    ("phi_star", "--phi-star"),
    ("R", "--R"),
    ("seed", "--seed"),
    ("samples", "--samples"),
    ("orbits", "--orbits"),
    ("steps", "--steps"),
    ("output", "--output"),
    ("threshold_variant", "--threshold-variant"),
    ("phi_grid", "--phi-grid"),
    ("R_grid", "--R-grid"),
    ("start_arc", "--start-arc"),
    ("start_phi", "--start-phi"),
    ("start_theta", "--start-theta"),
];

impl Flags {
    /// `self` where set, `base` otherwise.
    fn over(self, base: Flags) -> Flags {
        Flags {
            command: self.command.or(base.command),
            config: self.config.or(base.config),
            phi_star: self.phi_star.or(base.phi_star),
            big_r: self.big_r.or(base.big_r),
            seed: self.seed.or(base.seed),
            samples: self.samples.or(base.samples),
            orbits: self.orbits.or(base.orbits),
            steps: self.steps.or(base.steps),
            output: self.output.or(base.output),
            threshold_variant: self.threshold_variant.or(base.threshold_variant),
            phi_grid: self.phi_grid.or(base.phi_grid),
            r_grid: self.r_grid.or(base.r_grid),
            start_arc: self.start_arc.or(base.start_arc),
            start_phi: self.start_phi.or(base.start_phi),
            start_theta: self.start_theta.or(base.start_theta),
        }
    }
}

/// Parse a config file. Blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<Flags> {
    let mut flags = Flags::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line: Some(line), message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let flag = FILE_KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, f)| *f)
            .ok_or_else(|| err(format!("unknown key `{key}`")))?;
        let argv: Vec<&str> = if flag.is_empty() { vec!["lemon", value] } else { vec!["lemon", flag, value] };
        let parsed = Flags::try_parse_from(argv).map_err(|e| {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            err(format!("{key}: {first}"))
        })?;
        flags = parsed.over(flags);
    }
    Ok(flags)
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub phi_star: Option<f64>,
    pub big_r: Option<f64>,
    pub seed: u64,
    pub samples: u64,
    pub orbits: u64,
    pub steps: u64,
    pub output: Option<PathBuf>,
    pub threshold_variant: ThresholdVariant,
    pub phi_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub start: Option<PhasePoint>,
}

impl RunConfig {
    fn table(&self) -> Result<LemonTable> {
        let (Some(p), Some(r)) = (self.phi_star, self.big_r) else {
            return Err(Error::Config { line: None, message: "--phi-star and --R are required".into() });
        };
        LemonTable::new(p, r).map_err(|e| Error::Config { line: None, message: e.to_string() })
    }
}

fn config_error(message: impl Into<String>) -> Error {
    Error::Config { line: None, message: message.into() }
}

/// Merge flags over the file named by `--config`, if any, and validate.
pub fn parse_config(argv: &[String]) -> Result<RunConfig> {
    let flags = Flags::try_parse_from(argv).map_err(|e| config_error(e.to_string()))?;
    let flags = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            flags.over(parse_config_file(&text)?)
        }
        None => flags,
    };
    resolve(flags)
}

fn resolve(f: Flags) -> Result<RunConfig> {
    let command = f.command.ok_or_else(|| config_error("no command given"))?;
    let positive = |name: &str, v: Option<u64>, default: u64| -> Result<u64> {
        match v.unwrap_or(default) {
            0 => Err(config_error(format!("{name} must be positive"))),
            n => Ok(n),
        }
    };
    let start = match (f.start_arc, f.start_phi, f.start_theta) {
        (None, None, None) => None,
        (arc, Some(phi), Some(theta)) => Some(PhasePoint {
            arc: match arc.unwrap_or(ArcArg::Small) {
                ArcArg::Small => ArcLabel::Small,
                ArcArg::Big => ArcLabel::Big,
            },
            phi,
            theta,
        }),
        _ => return Err(config_error("start_phi and start_theta must be given together")),
    };
    let default_steps = match command {
        Command::Orbit => 1000,
        Command::Portrait => 10_000,
        _ => 100_000,
    };
    let default_orbits = if command == Command::Portrait { 10 } else { 100 };
    Ok(RunConfig {
        command,
        phi_star: f.phi_star,
        big_r: f.big_r,
        seed: f.seed.unwrap_or(0),
        samples: positive("samples", f.samples, 10_000)?,
        orbits: positive("orbits", f.orbits, default_orbits)?,
        steps: positive("steps", f.steps, default_steps)?,
        output: f.output,
        threshold_variant: f.threshold_variant.map(Into::into).unwrap_or_default(),
        phi_grid: f.phi_grid.unwrap_or_default(),
        r_grid: f.r_grid.unwrap_or_default(),
        start,
    })
}

/// Worker count from `LEMON_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("LEMON_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(config_error(format!("LEMON_THREADS = `{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = open_output(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn print_table(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.table()?;
    let threshold = radius_threshold(t.phi_star, cfg.threshold_variant)?;
    let mut out = open_output(cfg.output.as_deref())?;
    writeln!(out, "phi_star = {}", t.phi_star)?;
    writeln!(out, "R = {}", t.big_r)?;
    writeln!(out, "r = {}", t.r)?;
    writeln!(out, "b = {}", t.b)?;
    writeln!(out, "Phi_star = {}", t.big_phi_star)?;
    writeln!(out, "delta_star = {}", t.delta_star)?;
    writeln!(out, "R(phi_star) = {threshold}")?;
    for v in [ThresholdVariant::Theorem, ThresholdVariant::Collected] {
        let name = if v == ThresholdVariant::Theorem { "theorem" } else { "collected" };
        writeln!(out, "R(phi_star) [{name}] = {}", radius_threshold(t.phi_star, v)?)?;
    }
    let flag = if t.big_r >= threshold { "PASS" } else { "FAIL" };
    writeln!(out, "{flag}: R {} R(phi_star)", if t.big_r >= threshold { ">=" } else { "<" })?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn write_orbit(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.table()?;
    let x = match cfg.start {
        Some(p) => PhasePoint::new(&t, p.arc, p.phi, p.theta)
            .map_err(|e| config_error(format!("start point: {e}")))?,
        None => sample_mu(&t, &mut stream_rng(cfg.seed, ORBIT_SALT, 0)),
    };
    let o = orbit(&t, x, cfg.steps as usize);
    let mut out = open_output(cfg.output.as_deref())?;
    write_orbit_csv(&mut out, &o)?;
    out.flush()?;
    if let Some(s) = o.stopped {
        eprintln!("orbit stopped after {} steps: {s}", o.events.len() - 1);
    }
    Ok(EXIT_OK)
}

fn run_verify(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.table()?;
    let suite = SuiteConfig { samples: cfg.samples, seed: cfg.seed, variant: cfg.threshold_variant };
    let reports: Vec<CheckReport> = verify_all(&t, &suite);
    write_json(cfg.output.as_deref(), &reports)?;
    let mut hard = false;
    for r in &reports {
        let status = if r.hard_failure() {
            hard = true;
            "FAIL"
        } else if r.passed() {
            "PASS"
        } else {
            "VIOLATIONS (hypothesis not met)"
        };
        eprintln!(
            "{:<22} {status}: {} samples, {} violations, {} marginal",
            r.check, r.samples, r.violations, r.marginal
        );
    }
    Ok(if hard { EXIT_HARD_FAILURE } else { EXIT_OK })
}

#[derive(Serialize)]
struct LyapunovOutput {
    table: TableSummary,
    seed: u64,
    #[serde(flatten)]
    estimate: LyapunovEstimate,
}

fn run_lyapunov(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.table()?;
    let estimate = lyapunov_exponent(&t, cfg.orbits, cfg.steps, cfg.seed)
        .map_err(|e| config_error(e.to_string()))?;
    write_json(cfg.output.as_deref(), &LyapunovOutput { table: (&t).into(), seed: cfg.seed, estimate })?;
    Ok(EXIT_OK)
}

fn run_sweep(cfg: &RunConfig) -> Result<i32> {
    let cells = sweep(&cfg.phi_grid, &cfg.r_grid, cfg.samples, cfg.seed, cfg.threshold_variant)
        .map_err(|e| config_error(e.to_string()))?;
    let mut out = open_output(cfg.output.as_deref())?;
    write_sweep_csv(&mut out, &cells)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn run_portrait(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.table()?;
    let clouds: Vec<_> = (0..cfg.orbits)
        .into_par_iter()
        .map(|i| {
            let x = sample_mu(&t, &mut stream_rng(cfg.seed, PORTRAIT_SALT, i));
            orbit(&t, x, cfg.steps as usize)
        })
        .collect();
    let mut out = open_output(cfg.output.as_deref())?;
    writeln!(out, "orbit,arc,phi,theta")?;
    for (i, o) in clouds.iter().enumerate() {
        for e in &o.events {
            // Small-arc angles are shifted to (−π, π] so both arcs share one chart.
            let phi = match e.point.arc {
                ArcLabel::Small => e.point.phi - TAU * (e.point.phi / TAU).round(),
                ArcLabel::Big => e.point.phi,
            };
            writeln!(out, "{i},{},{phi:.16e},{:.16e}", e.point.arc.name(), e.point.theta)?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// Execute a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Command::Table => print_table(cfg),
        Command::Orbit => write_orbit(cfg),
        Command::Verify => run_verify(cfg),
        Command::Lyapunov => run_lyapunov(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Portrait => run_portrait(cfg),
    }
}

/// Entry point: parse, run on a pool sized by `LEMON_THREADS`, map to an
/// exit code.
pub fn run(argv: &[String]) -> i32 {
    if let Err(e) = Flags::try_parse_from(argv) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            print!("{e}");
            return EXIT_OK;
        }
    }
    let outcome = parse_config(argv).and_then(|cfg| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads_from_env()? {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| config_error(e.to_string()))?;
        pool.install(|| execute(&cfg))
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lemon: {e}");
            match e {
                Error::Config { .. } => EXIT_CONFIG,
                _ => EXIT_HARD_FAILURE,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn flags_only() {
        let cfg = parse_config(&argv("lemon verify --phi-star 0.7854 --R 1800 --samples 100 --seed 1")).unwrap();
        assert_eq!(cfg.command, Command::Verify);
        assert_eq!(cfg.samples, 100);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.threshold_variant, ThresholdVariant::Theorem);
    }

    #[test]
    fn file_values_and_overrides() {
        let text = "# run\ncommand = lyapunov\nphi_star = 0.5\nR = 2000\nseed = 7\nthreshold_variant = collected\nR_grid = 10,20\n";
        let file = parse_config_file(text).unwrap();
        let cfg = resolve(file.clone()).unwrap();
        assert_eq!(cfg.command, Command::Lyapunov);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.big_r, Some(2000.0));
        assert_eq!(cfg.r_grid, vec![10.0, 20.0]);
        assert_eq!(cfg.threshold_variant, ThresholdVariant::Collected);
        let flags = Flags::try_parse_from(argv("lemon --seed 42")).unwrap();
        assert_eq!(resolve(flags.over(file)).unwrap().seed, 42);
    }

    #[test]
    fn file_errors_name_the_line() {
        let e = parse_config_file("phi_star = 0.5\nR = abc\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(2), .. }), "{e}");
        let e = parse_config_file("\n\nradius = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(3), .. }), "{e}");
        assert!(e.to_string().contains("unknown key `radius`"));
        let e = parse_config_file("seed 3").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(1), .. }));
    }

    #[test]
    fn validation() {
        assert!(parse_config(&argv("lemon --R 10")).is_err());
        assert!(parse_config(&argv("lemon verify --samples 0")).is_err());
        assert!(parse_config(&argv("lemon orbit --start-phi 3.0")).is_err());
        assert_eq!(run(&argv("lemon table --phi-star 2.0 --R 10")), EXIT_CONFIG);
        assert_eq!(run(&argv("lemon bogus")), EXIT_CONFIG);
    }
}
