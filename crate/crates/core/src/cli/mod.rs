//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 config or usage error,
//! 3 physics error, 4 I/O error.

mod config;
mod figures;
mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, RunConfig, DEFAULT_CYCLES, KEYS};
pub use figures::{grid, Axis, Figure, Quantity, SweepSpec, Table, DEFAULT_POINTS};
pub use validate::{run_checks, Check, CheckStatus, Level};

use crate::conditional::{conditional_numeric, ConditionalNumeric};
use crate::frames::{gate_speed, GateSpeedReport};
use crate::hamiltonian::{gate_phase, h_rotating};
use crate::model::{to_angular, validate_regime, RegimeDiagnostic, RotatingField};
use crate::propagate::{run_gate_traced, CycleRecord, PhaseResult};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("physics error: {0}")]
    Physics(#[from] crate::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0} validation check(s) failed")]
    Validation(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn config(message: impl Into<String>) -> Self {
        CliError::Config(ConfigError::new(message))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "phasegate", version, about = "Nuclear-spin phase gates under rotating fields")]
pub struct Cli {
    /// Run configuration (`key = value` lines, `#` comments).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Machine-readable report on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Monte-Carlo seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trajectories (overrides the config).
    #[arg(long, global = true)]
    pub trajectories: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One gate: regime checks, closed forms and the propagated phases.
    Simulate,
    /// CSV data behind a figure.
    Figure(FigureArgs),
    /// Closed-form quantity over one or two parameters.
    Sweep(SweepArgs),
    /// Cross-check closed forms against numerics.
    Validate(ValidateArgs),
    /// Convert between field and frequency units.
    ConvertUnits(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Add brute-force rows next to the closed form (slow).
    #[arg(long)]
    pub numeric: bool,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// First axis as `key=min:max:steps`.
    #[arg(long)]
    pub x: String,
    /// Optional second axis.
    #[arg(long)]
    pub y: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Unit {
    #[value(name = "mT")]
    #[serde(rename = "mT")]
    MilliTesla,
    #[value(name = "MHz")]
    #[serde(rename = "MHz")]
    MegaHertz,
    #[value(name = "V/cm")]
    #[serde(rename = "V/cm")]
    VoltPerCm,
    #[value(name = "rad/us")]
    #[serde(rename = "rad/us")]
    RadPerMicrosecond,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub value: f64,
    #[arg(value_enum)]
    pub from: Unit,
    #[arg(value_enum)]
    pub to: Unit,
}

pub fn run() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Simulate => simulate(cli, &cfg),
        Command::Figure(args) => {
            let out = cli
                .out
                .as_deref()
                .ok_or_else(|| CliError::config("`figure` needs --out <PATH>"))?;
            let table = figures::figure(&cfg, args.figure, args.numeric, args.points)?;
            write_file(out, &table.to_csv())?;
            if cli.json {
                print_json(&serde_json::json!({ "figure": args.figure, "rows": table.rows.len(), "out": out }))
            } else {
                println!("wrote {} rows to {}", table.rows.len(), out.display());
                Ok(())
            }
        }
        Command::Sweep(args) => {
            let spec = SweepSpec::parse(args.quantity, &args.x, args.y.as_deref())?;
            let table = figures::sweep(&cfg, &spec)?;
            match &cli.out {
                Some(out) => write_file(out, &table.to_csv()),
                None => write_stdout(&table.to_csv()),
            }
        }
        Command::Validate(args) => {
            let checks = run_checks(&cfg, args.level)?;
            let failed = checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
            if let Some(out) = &cli.out {
                write_file(out, &validate::to_csv(&checks))?;
            }
            if cli.json {
                print_json(&checks)?;
            } else {
                for c in &checks {
                    println!("{c}");
                }
                println!(
                    "{} passed, {} expected warnings, {} failed",
                    checks.iter().filter(|c| c.status == CheckStatus::Pass).count(),
                    checks.iter().filter(|c| c.status == CheckStatus::ExpectedWarn).count(),
                    failed
                );
            }
            if failed > 0 {
                Err(CliError::Validation(failed))
            } else {
                Ok(())
            }
        }
        Command::ConvertUnits(args) => {
            let result = convert(&cfg, args.value, args.from, args.to)?;
            if cli.json {
                print_json(&serde_json::json!({
                    "value": args.value, "from": args.from, "to": args.to, "result": result
                }))
            } else {
                println!("{result}");
                Ok(())
            }
        }
    }
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.noise.seed = seed;
    }
    if let Some(n) = cli.trajectories {
        cfg.noise.trajectories = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(io_error(path))
}

fn write_stdout(text: &str) -> CliResult<()> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(io_error(Path::new("<stdout>")))
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    write_stdout(&format!("{text}\n"))
}

/// Everything `simulate` reports; the text and JSON renderings carry the
/// same numbers.
#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub drive: RotatingField,
    pub step_us: f64,
    pub regime: Vec<RegimeDiagnostic>,
    pub closed_form: GateSpeedReport,
    pub numeric: PhaseResult,
    pub numeric_pi_gate_time_us: f64,
    pub conditional: Option<ConditionalNumeric>,
}

pub fn simulate_report(cfg: &RunConfig) -> CliResult<(SimulateReport, Vec<CycleRecord>)> {
    let (c, s, r) = (cfg.constants, cfg.fields, cfg.drive());
    let pc = cfg.propagation();
    let regime = validate_regime(&c, &s, &r);
    for d in &regime {
        if d.status != crate::model::RegimeStatus::Pass {
            log::warn!("{}: {}", d.name, d.message);
        }
    }
    let closed_form = gate_speed(&c, &s, r.omega_prime)?;
    let (numeric, trace) = run_gate_traced(&c, &s, &r, &pc, |t| h_rotating(&c, &r, t, gate_phase(&r, t)))?;
    let conditional = if cfg.carbon {
        Some(conditional_numeric(&c, &s, &r, &pc)?)
    } else {
        None
    };
    Ok((
        SimulateReport {
            drive: r,
            step_us: pc.step,
            regime,
            closed_form,
            numeric_pi_gate_time_us: numeric.pi_gate_time(),
            numeric,
            conditional,
        },
        trace,
    ))
}

fn simulate(cli: &Cli, cfg: &RunConfig) -> CliResult<()> {
    let (report, trace) = simulate_report(cfg)?;
    if let Some(out) = &cli.out {
        let mut text = String::from("cycle,time_us,omega_up_rad,omega_down_rad,relative_rad\n");
        for rec in &trace {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                rec.cycle, rec.time, rec.omega_up, rec.omega_down, rec.relative
            ));
        }
        write_file(out, &text)?;
    }
    if cli.json {
        return print_json(&report);
    }
    let r = &report.drive;
    println!("drive");
    println!("  omega1_MHz        {}", r.omega1);
    println!("  omega_MHz         {}", r.omega);
    println!("  omega_prime_MHz   {}", r.omega_prime);
    println!("  duration_us       {}", r.duration);
    println!("  step_us           {}", report.step_us);
    println!("regime");
    for d in &report.regime {
        let tag = match d.status {
            crate::model::RegimeStatus::Pass => "pass",
            crate::model::RegimeStatus::Warn => "WARN",
        };
        println!("  {tag:<4} {:<22} {}", d.name, d.message);
    }
    let g = &report.closed_form;
    println!("closed form (rad/us)");
    println!("  exact             {}", g.exact);
    println!("  approx            {}", g.approx);
    println!("  geometric_part    {}", g.geometric_part);
    println!("  hyperfine_part    {}", g.hyperfine_part);
    println!("  exact_corrected   {}", g.exact_corrected);
    println!("  pi_gate_time_us   {}", g.pi_gate_time);
    let n = &report.numeric;
    println!("numeric");
    println!("  cycles            {}", n.cycles);
    println!("  omega_up_rad      {}", n.omega_up);
    println!("  omega_down_rad    {}", n.omega_down);
    println!("  raw_rate          {}", n.raw_rate);
    println!("  delta_omega_rate  {}", n.delta_omega_rate);
    println!("  cyclicity         {} {}", n.cyclicity[0], n.cyclicity[1]);
    println!("  pi_gate_time_us   {}", report.numeric_pi_gate_time_us);
    if let Some(cond) = &report.conditional {
        println!("conditional");
        println!("  series_relative   {}", cond.analytic.relative);
        println!("  series_time_us    {}", cond.analytic.gate_time);
        println!("  numeric_relative  {}", cond.relative);
        println!("  numeric_time_us   {}", cond.gate_time);
        println!("  relative_error    {}", cond.relative_error);
    }
    Ok(())
}

/// Unit conversion with the configured γe and d⊥.
pub fn convert(cfg: &RunConfig, value: f64, from: Unit, to: Unit) -> CliResult<f64> {
    let c = &cfg.constants;
    let mhz = match from {
        Unit::MegaHertz => value,
        Unit::MilliTesla => c.zeeman_mhz(value),
        Unit::VoltPerCm => c.stark_mhz(value),
        Unit::RadPerMicrosecond => value / to_angular(1.0),
    };
    let mixed = matches!(
        (from, to),
        (Unit::MilliTesla, Unit::VoltPerCm) | (Unit::VoltPerCm, Unit::MilliTesla)
    );
    if mixed {
        return Err(CliError::config("cannot convert between magnetic and electric fields"));
    }
    Ok(match to {
        Unit::MegaHertz => mhz,
        Unit::MilliTesla => c.field_mt(mhz),
        Unit::VoltPerCm => c.efield_v_per_cm(mhz),
        Unit::RadPerMicrosecond => to_angular(mhz),
    })
}
