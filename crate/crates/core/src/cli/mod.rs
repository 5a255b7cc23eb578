//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on a usage error, 1 when a validation check
//! fails or a run hits a runtime failure.

pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::bessel::UpsilonIter;
use crate::bounded::BoundedReal;
use crate::constants::{avg_residual_time, time_constant};
use crate::error::NumericError;
use crate::front_chain::{pi, tail_mass, Generator, LadderGenerator, SequenceIter, SEQ_INDEX_CAP};
use crate::simulator::estimate::{height_rate, uniform_sample_times};
use crate::simulator::{
    empirical_front_distribution, empirical_residual_time, estimate_tau, front_of_fpp, run_replicates,
    simulate_fpp_ladder, simulate_front_chain_with, ChainTrajectory, Horizon, InitialCondition, SimConfig,
    SimError, SimEstimate, SimMode, DEFAULT_BURN_IN,
};

pub use output::{Format, Method, OutputRecord, Value};
pub use validate::{Level, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ladder-fpp", version, about = "First-passage percolation on the ladder: exact constants and Monte Carlo checks")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Plain)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified values of π_0, τ, T and π_n.
    Exact(ExactArgs),
    /// The integer sequences a_n, b_n, their scaled differences and Υ columns.
    Sequences(SequencesArgs),
    /// Monte Carlo estimates from the front chain or from first-passage percolation.
    Simulate(SimulateArgs),
    /// Cross-checks closed forms, truncated solves and (for `full`) simulation.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Pi0,
    Tau,
    #[value(name = "T")]
    T,
    #[value(name = "pi_n")]
    PiN,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Absolute error bound requested for each value.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Comma-separated quantities.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Which::Pi0, Which::Tau, Which::T])]
    pub which: Vec<Which>,
    /// Largest n for `pi_n`.
    #[arg(long = "n-max", default_value_t = 10)]
    pub n_max: usize,
}

#[derive(Debug, Args)]
pub struct SequencesArgs {
    #[arg(long = "n-max", value_parser = clap::value_parser!(u64).range(1..=SEQ_INDEX_CAP as u64))]
    pub n_max: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Front,
    Fpp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    Both,
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Tau,
    FrontDist,
    Residual,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Front)]
    pub mode: ModeArg,
    /// Stop when the height reaches this value.
    #[arg(long, value_parser = parse_count, conflicts_with = "t_max", required_unless_present = "t_max")]
    pub height: Option<u64>,
    /// Stop at this time (front mode only).
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicates: u32,
    #[arg(long, value_enum, default_value_t = InitialArg::Both)]
    pub initial: InitialArg,
    #[arg(long = "burn-in", default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: f64,
    /// Defaults to `tau` with `--height` and `front-dist` with `--t-max`.
    #[arg(long, value_enum)]
    pub report: Option<Report>,
    /// Sample times per replicate for `--report residual`.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Largest front state reported.
    #[arg(long = "n-max", default_value_t = 15)]
    pub n_max: usize,
    /// Write replicate 0 as CSV `t,state,height` to this path.
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
    /// Worker threads for replicates.
    #[arg(long, env = "LADDER_FPP_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(value_enum)]
    pub level: Level,
    /// Required for `full`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "LADDER_FPP_JOBS")]
    pub jobs: Option<usize>,
}

/// Accepts `100000` as well as `1e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::InvalidTolerance(_) | NumericError::IndexOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::BurnInTooLong { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &LadderGenerator, out, err)
}

/// [`run`] with the front chain's generator supplied by the caller.
pub fn run_with<I, T>(args: I, gen: &dyn Generator, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Exact(a) => cmd_exact(a).and_then(|r| Ok(output::write_records(out, cli.format, &r)?)).map(|_| EXIT_OK),
        Command::Sequences(a) => cmd_sequences(a, cli.format, out).map(|_| EXIT_OK),
        Command::Simulate(a) => {
            cmd_simulate(a, gen).and_then(|r| Ok(output::write_records(out, cli.format, &r)?)).map(|_| EXIT_OK)
        }
        Command::Validate(a) => cmd_validate(a, gen, cli.format, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Certifies to `tol` in f64, falling back to exact rationals when f64
/// cannot reach it.
fn certified(
    tol: f64,
    float: impl Fn(f64) -> Result<BoundedReal<f64>, NumericError>,
    exact: impl Fn(f64) -> Result<BoundedReal<BigRational>, NumericError>,
) -> Result<(BoundedReal<f64>, &'static str), NumericError> {
    match float(tol) {
        Ok(v) => Ok((v, "f64")),
        Err(NumericError::ToleranceUnattainable { .. }) => Ok((exact(tol)?.to_f64(), "rational")),
        Err(e) => Err(e),
    }
}

fn cmd_exact(args: &ExactArgs) -> Result<Vec<OutputRecord>, CliError> {
    let tol = args.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive and finite, got {tol}")));
    }
    let mut records = Vec::new();
    let mut emit = |name: String, (v, arith): (BoundedReal<f64>, &str)| {
        records.push(
            OutputRecord::real(name, v.value, v.err, Method::ClosedForm)
                .with("tol", format!("{tol:e}"))
                .with("arithmetic", arith),
        );
    };
    for which in &args.which {
        match which {
            Which::Pi0 => emit("pi0".into(), certified(tol, |t| pi(0, t), |t| pi(0, t))?),
            Which::Tau => emit("tau".into(), certified(tol, time_constant, time_constant)?),
            Which::T => emit("T".into(), certified(tol, avg_residual_time, avg_residual_time)?),
            Which::PiN => {
                for n in 0..=args.n_max {
                    emit(format!("pi_{n}"), certified(tol, |t| pi(n, t), |t| pi(n, t))?);
                }
                let n_max = args.n_max;
                emit(
                    format!("tail_above_{n_max}"),
                    certified(tol, |t| tail_mass(n_max, t), |t| tail_mass(n_max, t))?,
                );
            }
        }
    }
    Ok(records)
}

/// One row of the `sequences` table.
#[derive(Debug, Serialize)]
pub struct SequenceRow {
    pub n: usize,
    pub a: String,
    pub b: String,
    #[serde(rename = "A")]
    pub cap_a: String,
    #[serde(rename = "B")]
    pub cap_b: String,
    /// `Υ(n+2, 0)`.
    pub upsilon_n2_0: String,
    /// `2Υ(n+2, 3) + Υ(n+2, 0)`.
    pub upsilon_combo_n2: String,
}

/// `(c_n - c_{n-1}) / n` as text, empty for `n = 1`.
fn scaled_text(cur: &BigInt, prev: Option<&BigInt>, n: usize) -> String {
    let Some(prev) = prev else { return String::new() };
    let (q, r) = (cur - prev).div_rem(&BigInt::from(n));
    if r.is_zero() { q.to_string() } else { format!("{}/{n}", cur - prev) }
}

/// Rows `1..=n_max`, each in constant big-integer work.
pub fn sequence_rows(n_max: usize) -> impl Iterator<Item = SequenceRow> {
    let mut prev: Option<(BigInt, BigInt)> = None;
    // Υ(k, 0) from k = 0 and Υ(k, 3) from k = 3; row n needs k = n + 2
    let u0 = UpsilonIter::new(0).skip(3);
    let u3 = UpsilonIter::new(3);
    SequenceIter::new().zip(u0.zip(u3)).take(n_max).map(move |((n, a, b), (y0, y3))| {
        let row = SequenceRow {
            n,
            cap_a: scaled_text(&a, prev.as_ref().map(|p| &p.0), n),
            cap_b: scaled_text(&b, prev.as_ref().map(|p| &p.1), n),
            a: a.to_string(),
            b: b.to_string(),
            upsilon_combo_n2: (&y3.value * BigInt::from(2) + &y0.value).to_string(),
            upsilon_n2_0: y0.value.to_string(),
        };
        prev = Some((a, b));
        row
    })
}

const SEQUENCE_HEADER: [&str; 7] = ["n", "a", "b", "A", "B", "upsilon_n2_0", "upsilon_combo_n2"];

fn cmd_sequences(args: &SequencesArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = sequence_rows(args.n_max as usize);
    match format {
        Format::Plain => {
            writeln!(out, "{}", SEQUENCE_HEADER.join(" "))?;
            for r in rows {
                let cell = |s: &str| if s.is_empty() { "-".to_string() } else { s.to_string() };
                writeln!(
                    out,
                    "{} {} {} {} {} {} {}",
                    r.n, r.a, r.b, cell(&r.cap_a), cell(&r.cap_b), r.upsilon_n2_0, r.upsilon_combo_n2
                )?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            writeln!(out, "[")?;
            for (i, r) in rows.enumerate() {
                if i > 0 {
                    writeln!(out, ",")?;
                }
                serde_json::to_writer(&mut *out, &r).map_err(|e| CliError::Failure(e.to_string()))?;
            }
            writeln!(out, "\n]")?;
        }
    }
    Ok(())
}

fn sim_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let mode = match args.mode {
        ModeArg::Front => SimMode::FrontChain,
        ModeArg::Fpp => SimMode::FppDijkstra,
    };
    let horizon = match (args.height, args.t_max) {
        (Some(h), None) => Horizon::Height(h),
        (None, Some(t)) => Horizon::Time(t),
        _ => return Err(CliError::Usage("give exactly one of --height and --t-max".into())),
    };
    let initial = match args.initial {
        InitialArg::Both => InitialCondition::BothNodes,
        InitialArg::Single => InitialCondition::SingleNode,
    };
    let cfg = SimConfig::new(args.seed, mode, horizon)
        .with_initial(initial)
        .with_replicates(args.replicates)
        .with_burn_in(args.burn_in);
    cfg.validate()?;
    Ok(cfg)
}

/// The front process of one replicate, from whichever engine the config names.
fn trajectory(cfg: &SimConfig, gen: &dyn Generator, rep: u64) -> Result<ChainTrajectory, SimError> {
    match cfg.mode {
        SimMode::FrontChain => simulate_front_chain_with(gen, cfg, rep),
        SimMode::FppDijkstra => Ok(front_of_fpp(&simulate_fpp_ladder(cfg, rep)?).to_trajectory()),
    }
}

/// Pools per-replicate estimates: mean of means, standard errors in quadrature.
fn pool(parts: &[&SimEstimate]) -> (f64, f64) {
    let r = parts.len() as f64;
    let mean = parts.iter().map(|e| e.mean).sum::<f64>() / r;
    let se = parts.iter().map(|e| e.std_err * e.std_err).sum::<f64>().sqrt() / r;
    (mean, se)
}

fn cmd_simulate(args: &SimulateArgs, gen: &dyn Generator) -> Result<Vec<OutputRecord>, CliError> {
    let cfg = sim_config(args)?;
    let report = args.report.unwrap_or(match cfg.horizon {
        Horizon::Height(_) => Report::Tau,
        Horizon::Time(_) => Report::FrontDist,
    });
    if let Some(path) = &args.dump {
        let traj = trajectory(&cfg, gen, 0)?;
        traj.write_csv(std::fs::File::create(path)?)?;
    }
    let meta = |r: OutputRecord| {
        let r = r
            .with("seed", cfg.seed)
            .with("mode", format!("{:?}", args.mode).to_lowercase())
            .with("initial", format!("{:?}", args.initial).to_lowercase())
            .with("replicates", cfg.replicates);
        match cfg.horizon {
            Horizon::Height(h) => r.with("H", h),
            Horizon::Time(t) => r.with("t_max", t),
        }
    };
    let mut records = Vec::new();
    match (report, cfg.horizon) {
        (Report::Tau, Horizon::Height(_)) if cfg.replicates >= 2 => {
            let rep = estimate_tau(&cfg, args.jobs)?;
            records.push(meta(OutputRecord::estimate("tau", rep.tau.mean, rep.tau.std_err).with("estimator", "T_H/H")));
            records.push(meta(
                OutputRecord::estimate("inv_tau", rep.inv_tau.mean, rep.inv_tau.std_err).with("estimator", "H/T_H"),
            ));
        }
        (Report::Tau, _) => {
            let rates = run_replicates(cfg.replicates, args.jobs, |rep| {
                trajectory(&cfg, gen, rep).and_then(|t| height_rate(&t, cfg.burn_in))
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let (rate, se) = pool(&rates.iter().collect::<Vec<_>>());
            let tag = |r: OutputRecord| meta(r.with("burn_in", cfg.burn_in).with("estimator", "batch_means"));
            // delta method
            records.push(tag(OutputRecord::estimate("tau", 1.0 / rate, se / (rate * rate))));
            records.push(tag(OutputRecord::estimate("inv_tau", rate, se)));
        }
        (Report::FrontDist, _) => {
            let dists = run_replicates(cfg.replicates, args.jobs, |rep| {
                trajectory(&cfg, gen, rep).and_then(|t| empirical_front_distribution(&t, cfg.burn_in))
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            for n in 0..=args.n_max {
                let zero = SimEstimate::from_samples(crate::simulator::Quantity::PiN(n), &[0.0, 0.0]);
                let parts: Vec<&SimEstimate> = dists.iter().map(|d| d.get(n).unwrap_or(&zero)).collect();
                let (m, se) = pool(&parts);
                records.push(meta(OutputRecord::estimate(format!("pi_{n}"), m, se).with("burn_in", cfg.burn_in)));
            }
        }
        (Report::Residual, _) => {
            let ests = run_replicates(cfg.replicates, args.jobs, |rep| {
                let traj = trajectory(&cfg, gen, rep)?;
                let lo = cfg.burn_in.max(traj.start_time);
                if lo >= traj.total_time {
                    return Err(SimError::BurnInTooLong { burn_in: cfg.burn_in, total_time: traj.total_time });
                }
                let times = uniform_sample_times(cfg.seed, u64::MAX - rep, args.samples, lo, traj.total_time);
                Ok(empirical_residual_time(&traj, &times))
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let overall: Vec<&SimEstimate> = ests.iter().map(|e| &e.overall).collect();
            let (m, se) = pool(&overall);
            let excluded: usize = ests.iter().map(|e| e.excluded).sum();
            records.push(meta(
                OutputRecord::estimate("mean_residual", m, se)
                    .with("samples", args.samples)
                    .with("excluded", excluded)
                    .with("burn_in", cfg.burn_in),
            ));
            for n in 0..=args.n_max {
                let parts: Vec<&SimEstimate> = ests.iter().filter_map(|e| e.by_state.get(&n)).collect();
                if parts.is_empty() {
                    continue;
                }
                let (m, se) = pool(&parts);
                let count: usize = parts.iter().map(|p| p.n_samples).sum();
                records.push(meta(OutputRecord::estimate(format!("mean_residual_given_{n}"), m, se).with("samples", count)));
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Serialize)]
struct CheckLine<'a> {
    check: &'a str,
    passed: bool,
    detail: &'a str,
}

fn cmd_validate(args: &ValidateArgs, gen: &dyn Generator, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let seed = match (args.level, args.seed) {
        (Level::Full, None) => return Err(CliError::Usage("validate full needs --seed".into())),
        (_, s) => s.unwrap_or(0),
    };
    let report = validate::validate(args.level, seed, gen, args.jobs);
    let lines: Vec<CheckLine> = report
        .checks
        .iter()
        .map(|c| CheckLine { check: c.name, passed: c.passed, detail: &c.detail })
        .collect();
    match format {
        Format::Plain => {
            for l in &lines {
                writeln!(out, "{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.check, l.detail)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for l in &lines {
                w.serialize(l)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &lines).map_err(|e| CliError::Failure(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAILURE })
}
