//! Command-line driver: run the hat protocols, export decision-time
//! histograms and signal traces as plot-ready CSV, and run the verification
//! suites. Every command is a pure function of its flags; identical
//! invocations produce identical bytes.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inbl::experiments::{
    decision_time_histogram, match_probability, op_count_report, oracle_equivalence, three_sigma,
    ExperimentError, Problem, TrialConfig,
};
use inbl::hats::{
    decide_double_draw, decide_single_draw, setup_hats, DoubleOutcome, HatId, ProtocolError,
};
use inbl::rtw::{derive_seed, ReferenceSystem, SplitMix64};
use inbl::DyadicSample;

use report::{histogram_csv, trace_csv, Check, DoubleRecord, SingleRecord, TraceRow, VerifyReport};

#[derive(Parser)]
#[command(
    name = "inbl",
    version,
    about = "Noise-based-logic hat drawing: exact telegraph-wave protocols, histograms, traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one secret-draw round and identify the deficient hat.
    SimulateSingle(SimulateSingleArgs),
    /// Run one known-pair round and assign the two numbers to their hats.
    SimulateDouble(SimulateDoubleArgs),
    /// Monte Carlo decision-time distribution for the known-pair protocol.
    Histogram(HistogramArgs),
    /// Export a per-clock signal trace.
    Trace(TraceArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateSingleArgs {
    /// Noise-bits in the system (1..=64).
    #[arg(long, default_value_t = 32)]
    bits: u32,
    /// Reproducibility seed, decimal or 0x-hex.
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    /// Which hat loses the number: 1, 2, or random.
    #[arg(long, default_value = "random")]
    hat: String,
    /// The number to draw, or random.
    #[arg(long, default_value = "random")]
    number: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateDoubleArgs {
    #[arg(long, default_value_t = 32)]
    bits: u32,
    /// First announced number.
    #[arg(long)]
    p: u64,
    /// Second announced number.
    #[arg(long)]
    q: u64,
    /// Give up after this many silent clocks.
    #[arg(long, default_value_t = 64)]
    max_clocks: u64,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HistogramArgs {
    #[arg(long, default_value_t = 32)]
    bits: u32,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    q: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 64)]
    max_clocks: u64,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, default_value_t = 32)]
    bits: u32,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
    /// Clock periods to emit, starting at clock 1.
    #[arg(long, default_value_t = 2000)]
    clocks: u64,
    /// universe, product:K, or hat-minus:K.
    #[arg(long, default_value = "universe")]
    signal: String,
    /// Add the logarithmically distorted column.
    #[arg(long)]
    distort: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Oracle,
    Opcount,
    Probability,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

/// Exit 2 for bad flags or arguments, exit 1 for protocol, check, or I/O
/// failures.
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<inbl::rtw::Error> for CliError {
    fn from(e: inbl::rtw::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Argument(a) => CliError::Usage(a.to_string()),
            ProtocolError::IdenticalNumbers { .. } | ProtocolError::DuplicateDraw { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Argument(a) => CliError::Usage(a.to_string()),
            ExperimentError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
            ExperimentError::Protocol(p) => p.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

fn parse_seed(token: &str) -> Result<u64, String> {
    let parsed = if let Some(hex) = token
        .strip_prefix("0x")
        .or_else(|| token.strip_prefix("0X"))
    {
        u64::from_str_radix(hex, 16)
    } else {
        token.parse()
    };
    parsed.map_err(|_| format!("`{token}` is not a decimal or 0x-hex u64"))
}

enum HatChoice {
    Fixed(HatId),
    Random,
}

fn parse_hat(token: &str) -> Result<HatChoice, CliError> {
    match token {
        "1" => Ok(HatChoice::Fixed(HatId::Hat1)),
        "2" => Ok(HatChoice::Fixed(HatId::Hat2)),
        "random" => Ok(HatChoice::Random),
        other => Err(CliError::Usage(format!(
            "--hat must be 1, 2, or random, got `{other}`"
        ))),
    }
}

enum NumberChoice {
    Fixed(u64),
    Random,
}

fn parse_number(token: &str) -> Result<NumberChoice, CliError> {
    if token == "random" {
        return Ok(NumberChoice::Random);
    }
    token.parse().map(NumberChoice::Fixed).map_err(|_| {
        CliError::Usage(format!(
            "--number must be an integer or random, got `{token}`"
        ))
    })
}

enum Signal {
    Universe,
    Product(u64),
    HatMinus(u64),
}

fn parse_signal(token: &str) -> Result<Signal, CliError> {
    if token == "universe" {
        return Ok(Signal::Universe);
    }
    for (prefix, build) in [
        ("product:", Signal::Product as fn(u64) -> Signal),
        ("hat-minus:", Signal::HatMinus as fn(u64) -> Signal),
    ] {
        if let Some(rest) = token.strip_prefix(prefix) {
            return rest.parse().map(build).map_err(|_| {
                CliError::Usage(format!("`{prefix}` needs an integer, got `{rest}`"))
            });
        }
    }
    Err(CliError::Usage(format!(
        "unknown signal `{token}`; expected universe, product:K, or hat-minus:K"
    )))
}

/// System and auxiliary-choice seeds for one command invocation. Choices
/// (random hat, random number, arrangement) never perturb the streams.
fn command_seeds(seed: u64) -> (u64, SplitMix64) {
    (derive_seed(seed, 0), SplitMix64::new(derive_seed(seed, 1)))
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn magnitude_text(witness: &DyadicSample) -> String {
    match witness.pow2_magnitude() {
        Some(exp) => format!("2^{exp}"),
        None => format!("{witness}"),
    }
}

fn run_simulate_single(args: &SimulateSingleArgs) -> Result<(), CliError> {
    let (sys_seed, mut choices) = command_seeds(args.seed);
    let sys = ReferenceSystem::new(args.bits, sys_seed)?;
    let target = match parse_hat(&args.hat)? {
        HatChoice::Fixed(hat) => hat,
        HatChoice::Random => {
            if choices.next_bool() {
                HatId::Hat1
            } else {
                HatId::Hat2
            }
        }
    };
    let number = match parse_number(&args.number)? {
        NumberChoice::Fixed(k) => {
            sys.check_number(k)?;
            k
        }
        NumberChoice::Random => choices.next_bits(args.bits),
    };

    let (mut h1, mut h2) = setup_hats(sys);
    match target {
        HatId::Hat1 => h1.draw(number)?,
        HatId::Hat2 => h2.draw(number)?,
    }
    let decision = decide_single_draw(&sys, &h1, &h2)?;
    if decision.deficient_hat != target {
        return Err(CliError::Failure(format!(
            "decision named {} but the draw was from {target}",
            decision.deficient_hat
        )));
    }

    let record = SingleRecord {
        deficient_hat: decision.deficient_hat.to_string(),
        clocks_used: decision.clocks_used,
        witness_numerator: decision.witness.numerator().to_string(),
        witness_scale: decision.witness.scale(),
        witness_magnitude: magnitude_text(&decision.witness),
    };
    let content = match args.output {
        OutputFormat::Csv => record.to_csv(),
        OutputFormat::Json => to_json(&record)?,
    };
    write_output(args.out.as_ref(), &content)
}

fn run_simulate_double(args: &SimulateDoubleArgs) -> Result<(), CliError> {
    let (sys_seed, mut choices) = command_seeds(args.seed);
    let sys = ReferenceSystem::new(args.bits, sys_seed)?;
    sys.check_number(args.p)?;
    sys.check_number(args.q)?;
    if args.p == args.q {
        return Err(CliError::Usage(format!(
            "--p and --q must differ, both are {}",
            args.p
        )));
    }

    let (mut h1, mut h2) = setup_hats(sys);
    let hat1_loses_p = choices.next_bool();
    let (lost1, lost2) = if hat1_loses_p {
        (args.p, args.q)
    } else {
        (args.q, args.p)
    };
    h1.draw(lost1)?;
    h2.draw(lost2)?;

    let record = match decide_double_draw(&sys, args.p, args.q, &h1, &h2, args.max_clocks)? {
        DoubleOutcome::Decided(d) => {
            if (d.hat1_missing, d.hat2_missing) != (lost1, lost2) {
                return Err(CliError::Failure(
                    "decision assigned the numbers to the wrong hats".into(),
                ));
            }
            DoubleRecord::Decided {
                hat1_missing: d.hat1_missing,
                hat2_missing: d.hat2_missing,
                clocks_used: d.clocks_used,
            }
        }
        DoubleOutcome::Undecided { clocks_exhausted } => {
            DoubleRecord::Undecided { clocks_exhausted }
        }
    };
    let content = match args.output {
        OutputFormat::Csv => record.to_csv(),
        OutputFormat::Json => to_json(&record)?,
    };
    write_output(args.out.as_ref(), &content)
}

fn run_histogram(args: &HistogramArgs) -> Result<(), CliError> {
    let cfg = TrialConfig {
        n_bits: args.bits,
        trials: args.trials,
        base_seed: args.seed,
        max_clocks: args.max_clocks,
        problem: Problem::Double {
            p: args.p,
            q: args.q,
        },
    };
    let histogram = decision_time_histogram(&cfg)?;
    write_output(args.out.as_ref(), &histogram_csv(&histogram))
}

fn run_trace(args: &TraceArgs) -> Result<(), CliError> {
    let signal = parse_signal(&args.signal)?;
    let (sys_seed, _) = command_seeds(args.seed);
    let sys = ReferenceSystem::new(args.bits, sys_seed)?;
    let hat = match signal {
        Signal::Universe => None,
        Signal::Product(k) => {
            sys.check_number(k)?;
            None
        }
        Signal::HatMinus(k) => {
            let (mut hat, _) = setup_hats(sys);
            hat.draw(k)?;
            Some(hat)
        }
    };

    let mut rows = Vec::with_capacity(args.clocks as usize);
    for t in 1..=args.clocks {
        let sample = match &signal {
            Signal::Universe => sys.universe_sample(t),
            Signal::Product(k) => sys.product_sample(*k, t)?,
            Signal::HatMinus(_) => {
                use inbl::SampleStream;
                hat.as_ref().expect("hat built above").sample_at(t)
            }
        };
        rows.push(TraceRow {
            clock: t,
            numerator: sample.numerator().to_string(),
            scale: sample.scale(),
            approx: sample.to_f64(),
            distorted: sample.log_distorted(),
        });
    }
    write_output(args.out.as_ref(), &trace_csv(&rows, args.distort))
}

fn oracle_checks(seed: u64, checks: &mut Vec<Check>) {
    for n_bits in 1..=12u32 {
        let name = format!("oracle_equivalence_n{n_bits}");
        match oracle_equivalence(n_bits, 100, derive_seed(seed, u64::from(n_bits))) {
            Ok(rep) => checks.push(Check::new(
                name,
                true,
                format!(
                    "universe and hat-minus-{} match brute-force sums over {} clocks",
                    rep.drawn, rep.clocks_checked
                ),
            )),
            Err(e) => checks.push(Check::new(name, false, e.to_string())),
        }
    }
}

fn opcount_checks(checks: &mut Vec<Check>) {
    for n_bits in [1u32, 8, 32, 64] {
        let name = format!("universe_ops_n{n_bits}");
        match op_count_report(n_bits) {
            Ok(rep) => {
                let expected = 2 * u64::from(n_bits) - 1;
                let got = rep.universe.arithmetic();
                checks.push(Check::new(
                    name,
                    got == expected,
                    format!("one universe evaluation costs {got} ops, budget {expected}"),
                ));
            }
            Err(e) => checks.push(Check::new(name, false, e.to_string())),
        }
    }
    let mut ratios = Vec::new();
    let mut linear = true;
    for n_bits in [8u32, 16, 32] {
        let small = op_count_report(n_bits).map(|r| r.universe.arithmetic());
        let large = op_count_report(2 * n_bits).map(|r| r.universe.arithmetic());
        match (small, large) {
            (Ok(s), Ok(l)) => {
                linear &= l == 2 * s + 1;
                ratios.push(format!("{:.3}", l as f64 / s as f64));
            }
            _ => linear = false,
        }
    }
    checks.push(Check::new(
        "universe_ops_scaling",
        linear,
        format!("doubling ratios [{}] approach 2", ratios.join(", ")),
    ));
}

fn probability_checks(seed: u64, checks: &mut Vec<Check>) {
    let trials = 100_000;
    for clocks in [1u64, 5] {
        let name = format!("match_probability_{clocks}_clock");
        match match_probability(32, 2, 1, clocks, trials, derive_seed(seed, 200 + clocks)) {
            Ok(rep) => {
                let band = three_sigma(rep.analytic, trials);
                let deviation = (rep.probability - rep.analytic).abs();
                checks.push(Check::new(
                    name,
                    deviation <= band,
                    format!(
                        "empirical {:.5} vs analytic {} (band {:.5})",
                        rep.probability, rep.analytic, band
                    ),
                ));
            }
            Err(e) => checks.push(Check::new(name, false, e.to_string())),
        }
    }
    let name = "match_probability_guarded";
    match match_probability(32, 3, 1, 1, trials, derive_seed(seed, 300)) {
        Ok(rep) => checks.push(Check::new(
            name,
            rep.guarded && rep.probability == 0.0,
            "unequal zero-bit counts give exact probability 0 without simulation",
        )),
        Err(e) => checks.push(Check::new(name, false, e.to_string())),
    }
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let mut checks = Vec::new();
    let suite_name = match args.suite {
        Suite::Oracle => {
            oracle_checks(args.seed, &mut checks);
            "oracle"
        }
        Suite::Opcount => {
            opcount_checks(&mut checks);
            "opcount"
        }
        Suite::Probability => {
            probability_checks(args.seed, &mut checks);
            "probability"
        }
        Suite::All => {
            oracle_checks(args.seed, &mut checks);
            opcount_checks(&mut checks);
            probability_checks(args.seed, &mut checks);
            "all"
        }
    };
    let report = VerifyReport::new(suite_name, args.seed, checks);
    println!("{}", to_json(&report)?);
    if let Some(failed) = report.first_failure() {
        return Err(CliError::Failure(format!(
            "check `{}` failed: {}",
            failed.name, failed.detail
        )));
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::SimulateSingle(args) => run_simulate_single(args),
        Command::SimulateDouble(args) => run_simulate_double(args),
        Command::Histogram(args) => run_histogram(args),
        Command::Trace(args) => run_trace(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
