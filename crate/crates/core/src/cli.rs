//! Command-line front end.
//!
//! Exit status is 0 on success, 2 for usage and validation errors and 1 for
//! failures while running.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::average_aoi;
use crate::config::SystemConfig;
use crate::error::{AnalyticError, ConfigError, OutputError, SimError, SweepError};
use crate::output::{emit_records, Fields, Format, Records};
use crate::sim::{
    simulate_fsard, simulate_fsard_traced, simulate_slotted_aloha, SimConfig, SimStats,
    DEFAULT_WARMUP_FRAMES,
};
use crate::sweep::{
    optimize_aloha, reproduce_table1, reproduce_table1_fsard, sweep_fsard, GridSpec, ValueGrid,
};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

const DEFAULT_FRAMES: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "fsard",
    version,
    about = "Average age of information of FSA-RD and slotted ALOHA"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write records here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// File of `key = value` lines using the flag names; flags on the
    /// command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form average age and its intermediate quantities.
    Analyze(FsardArgs),
    /// Monte Carlo run of either protocol.
    Simulate(SimulateArgs),
    /// Grid search over (M, γ) for FSA-RD or τ for slotted ALOHA.
    Sweep(SweepArgs),
    /// Closed form next to simulation for one FSA-RD configuration.
    Compare(CompareArgs),
    /// Optimized FSA-RD against optimized slotted ALOHA on the reference grid.
    Table1(Table1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Protocol {
    Fsard,
    Aloha,
}

#[derive(Debug, Args)]
struct FsardArgs {
    /// N
    #[arg(long)]
    users: u32,
    /// M, slots per frame.
    #[arg(long)]
    frame: u32,
    /// V, mini-slots in the reservation slot.
    #[arg(long)]
    minislots: u32,
    /// ρ
    #[arg(long)]
    rho: f64,
    /// γ
    #[arg(long)]
    gamma: f64,
}

impl FsardArgs {
    fn system(&self) -> Result<SystemConfig, ConfigError> {
        SystemConfig::new(self.users, self.frame, self.minislots, self.rho, self.gamma)
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Measured frames (slots for slotted ALOHA) per replication.
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    frames: u64,
    /// Frames discarded before measuring.
    #[arg(long, default_value_t = DEFAULT_WARMUP_FRAMES)]
    warmup: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: u32,
}

impl RunArgs {
    fn sim(&self) -> Result<SimConfig, ConfigError> {
        let sim = SimConfig::new(self.frames, self.seed)
            .with_warmup(self.warmup)
            .with_replications(self.replications);
        sim.validate()?;
        Ok(sim)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Protocol::Fsard)]
    protocol: Protocol,
    #[arg(long)]
    users: u32,
    #[arg(long)]
    rho: f64,
    #[arg(long, required_if_eq("protocol", "fsard"))]
    frame: Option<u32>,
    #[arg(long, required_if_eq("protocol", "fsard"))]
    minislots: Option<u32>,
    #[arg(long, required_if_eq("protocol", "fsard"))]
    gamma: Option<f64>,
    /// Per-slot transmission probability of slotted ALOHA.
    #[arg(long, required_if_eq("protocol", "aloha"))]
    tau: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
    /// Write a slot-level CSV trace of replication 0 (FSA-RD only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Protocol::Fsard)]
    protocol: Protocol,
    #[arg(long)]
    users: u32,
    #[arg(long)]
    rho: f64,
    #[arg(long, required_if_eq("protocol", "fsard"))]
    minislots: Option<u32>,
    /// Smallest M searched.
    #[arg(long)]
    frame_min: Option<u32>,
    /// Largest M searched.
    #[arg(long)]
    frame_max: Option<u32>,
    /// γ values: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    gamma_grid: Option<ValueGrid>,
    /// τ values: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    tau_grid: Option<ValueGrid>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    system: FsardArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// τ values for the ALOHA cells: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    tau_grid: Option<ValueGrid>,
    /// Only the analytic FSA-RD cells.
    #[arg(long)]
    skip_aloha: bool,
    #[command(flatten)]
    run: RunArgs,
}

fn parse_grid(text: &str) -> Result<ValueGrid, String> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [start, stop, step] => Ok(ValueGrid::Range {
            start: number(start)?,
            stop: number(stop)?,
            step: number(step)?,
        }),
        [_] => Ok(ValueGrid::List(
            text.split(',').map(number).collect::<Result<_, _>>()?,
        )),
        _ => Err("expected `a,b,c` or `start:stop:step`".to_owned()),
    }
}

/// Closed-form and simulated figures for one FSA-RD configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub config: SystemConfig,
    pub analytic_aaoi: f64,
    pub simulated_aaoi: f64,
    pub ci_halfwidth: f64,
    /// (simulated − analytic) / analytic.
    pub rel_dev: f64,
    pub e_s: f64,
    pub mean_service: Option<f64>,
    pub e_y: f64,
    pub mean_y: Option<f64>,
    pub mean_interdeparture: Option<f64>,
}

impl Records for Comparison {
    const HEADER: &'static [&'static str] = &[
        "users",
        "frame",
        "minislots",
        "rho",
        "gamma",
        "analytic_aaoi",
        "simulated_aaoi",
        "ci_halfwidth",
        "rel_dev",
        "e_s",
        "mean_service",
        "e_y",
        "mean_y",
        "mean_interdeparture",
    ];

    fn csv_rows(&self) -> Vec<Vec<String>> {
        use crate::output::format_float as f;
        let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
        let c = &self.config;
        vec![vec![
            c.num_users.to_string(),
            c.frame_size.to_string(),
            c.mini_slots.to_string(),
            f(c.arrival_prob),
            f(c.reservation_prob),
            f(self.analytic_aaoi),
            f(self.simulated_aaoi),
            f(self.ci_halfwidth),
            f(self.rel_dev),
            f(self.e_s),
            opt(self.mean_service),
            f(self.e_y),
            opt(self.mean_y),
            opt(self.mean_interdeparture),
        ]]
    }

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError> {
        let [f] = rows else {
            return Err(OutputError::Schema(format!(
                "expected one data row, found {}",
                rows.len()
            )));
        };
        Ok(Comparison {
            config: SystemConfig {
                num_users: f.parse("users")?,
                frame_size: f.parse("frame")?,
                mini_slots: f.parse("minislots")?,
                arrival_prob: f.parse("rho")?,
                reservation_prob: f.parse("gamma")?,
            },
            analytic_aaoi: f.parse("analytic_aaoi")?,
            simulated_aaoi: f.parse("simulated_aaoi")?,
            ci_halfwidth: f.parse("ci_halfwidth")?,
            rel_dev: f.parse("rel_dev")?,
            e_s: f.parse("e_s")?,
            mean_service: f.optional("mean_service")?,
            e_y: f.parse("e_y")?,
            mean_y: f.optional("mean_y")?,
            mean_interdeparture: f.optional("mean_interdeparture")?,
        })
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<AnalyticError> for Failure {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Config(c) => c.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            SimError::Overflow { .. } | SimError::TraceTooLong { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => c.into(),
            SweepError::EmptyGrid(_) => Failure::Usage(e.to_string()),
            SweepError::Sim(s) => s.into(),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `argv` (program name first), runs the command and collects what
/// it would print.
pub fn run_command<I, T>(argv: I) -> RunOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match splice_config_file(argv) {
        Ok(argv) => argv,
        Err(message) => return failure(2, message),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                RunOutcome {
                    code,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                }
            } else {
                failure(2, text)
            };
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => return failure(1, format!("error: thread pool: {e}\n")),
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(bytes) => match &cli.output {
            Some(path) => match std::fs::write(path, &bytes) {
                Ok(()) => RunOutcome {
                    code: 0,
                    stdout: Vec::new(),
                    stderr: String::new(),
                },
                Err(source) => failure(1, format!("error: {}\n", io_error(path, source))),
            },
            None => RunOutcome {
                code: 0,
                stdout: bytes,
                stderr: String::new(),
            },
        },
        Err(Failure::Usage(m)) => failure(2, format!("error: {m}\n")),
        Err(Failure::Runtime(m)) => failure(1, format!("error: {m}\n")),
    }
}

fn failure(code: i32, stderr: String) -> RunOutcome {
    RunOutcome {
        code,
        stdout: Vec::new(),
        stderr,
    }
}

fn io_error(path: &Path, source: std::io::Error) -> OutputError {
    OutputError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Replaces `--config FILE` by the flags it lists, placed right after the
/// subcommand so that later command-line flags override them.
fn splice_config_file(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(i) = argv
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="))
    else {
        return Ok(argv);
    };
    let flag = argv.remove(i).to_string_lossy().into_owned();
    let path = match flag.strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None if i < argv.len() => PathBuf::from(argv.remove(i)),
        None => return Err("error: `--config` needs a file\n".to_owned()),
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("error: {}\n", io_error(&path, e)))?;

    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "error: {}:{}: expected `key = value`\n",
                path.display(),
                n + 1
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if value == "true" {
            flags.push(OsString::from(format!("--{key}")));
        } else if value != "false" {
            flags.push(OsString::from(format!("--{key}={value}")));
        }
    }

    let commands = ["analyze", "simulate", "sweep", "compare", "table1"];
    let at = argv
        .iter()
        .position(|a| commands.iter().any(|c| a == c))
        .map_or(argv.len(), |p| p + 1);
    argv.splice(at..at, flags);
    Ok(argv)
}

fn dispatch(cli: &Cli) -> Result<Vec<u8>, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Analyze(args) => {
            let report = average_aoi(&args.system()?)?;
            Ok(emit_records(&report, format)?)
        }
        Command::Simulate(args) => {
            let sim = args.run.sim()?;
            let stats = simulate(args, &sim)?;
            Ok(emit_records(&stats, format)?)
        }
        Command::Sweep(args) => {
            let result = match args.protocol {
                Protocol::Fsard => {
                    let grid = sweep_grid(args, args.minislots.expect("required for fsard"))?;
                    sweep_fsard(&grid)?
                }
                Protocol::Aloha => optimize_aloha(&sweep_grid(args, 1)?, &args.run.sim()?)?,
            };
            Ok(emit_records(&result, format)?)
        }
        Command::Compare(args) => {
            let cfg = args.system.system()?;
            let sim = args.run.sim()?;
            let report = average_aoi(&cfg)?;
            let stats = simulate_fsard(&cfg, &sim)?;
            let comparison = Comparison {
                config: cfg,
                analytic_aaoi: report.aaoi,
                simulated_aaoi: stats.mean_aoi,
                ci_halfwidth: stats.ci_halfwidth,
                rel_dev: (stats.mean_aoi - report.aaoi) / report.aaoi,
                e_s: report.e_s,
                mean_service: stats.mean_service,
                e_y: report.e_y,
                mean_y: stats.mean_y,
                mean_interdeparture: stats.mean_interdeparture,
            };
            Ok(emit_records(&comparison, format)?)
        }
        Command::Table1(args) => {
            let table = if args.skip_aloha {
                reproduce_table1_fsard()?
            } else {
                let tau_grid = args
                    .tau_grid
                    .clone()
                    .unwrap_or_else(ValueGrid::default_probabilities);
                reproduce_table1(&args.run.sim()?, &tau_grid)?
            };
            Ok(emit_records(&table, format)?)
        }
    }
}

fn simulate(args: &SimulateArgs, sim: &SimConfig) -> Result<SimStats, Failure> {
    match args.protocol {
        Protocol::Fsard => {
            let cfg = SystemConfig::new(
                args.users,
                args.frame.expect("required for fsard"),
                args.minislots.expect("required for fsard"),
                args.rho,
                args.gamma.expect("required for fsard"),
            )?;
            match &args.trace {
                Some(path) => {
                    let file = std::fs::File::create(path)
                        .map_err(|e| Failure::from(io_error(path, e)))?;
                    Ok(simulate_fsard_traced(
                        &cfg,
                        sim,
                        std::io::BufWriter::new(file),
                    )?)
                }
                None => Ok(simulate_fsard(&cfg, sim)?),
            }
        }
        Protocol::Aloha => {
            if args.trace.is_some() {
                return Err(Failure::Usage(
                    "`--trace` is only available for fsard".to_owned(),
                ));
            }
            let tau = args.tau.expect("required for aloha");
            Ok(simulate_slotted_aloha(args.users, args.rho, tau, sim)?)
        }
    }
}

fn sweep_grid(args: &SweepArgs, mini_slots: u32) -> Result<GridSpec, Failure> {
    let mut grid = GridSpec::new(args.users, mini_slots, args.rho);
    if let Some(m) = args.frame_min {
        grid.min_frame = m;
    }
    if let Some(m) = args.frame_max {
        grid.max_frame = m;
    }
    if let Some(g) = &args.gamma_grid {
        grid.gamma_grid = g.clone();
    }
    if let Some(t) = &args.tau_grid {
        grid.tau_grid = t.clone();
    }
    grid.validate()?;
    Ok(grid)
}
