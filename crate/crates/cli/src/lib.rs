//! The `gatherline` command line: simulate runs, check properties, enumerate
//! small instances, replay traces and serve interactive sessions.
//!
//! [`run_cli`] runs a whole invocation in-process and returns the exit code,
//! so tests can drive the tool without spawning it.

pub mod server;

use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gatherline_core::analysis::{
    enumerate_small, forbidden, gathered_at, never_forbidden_case, robogram_by_name,
    round_decrease_case, run_suite, same_destination_case, CaseOutcome, CheckOptions, CheckReport,
    Counterexample, Property, DEFAULT_ENUMERATION_BUDGET,
};
use gatherline_core::execution::{
    execute, make_demon, round, termination_bound, DemonKind, DemonSpec, DemonicAction, Trace,
    TraceStatus, TraceStep,
};
use gatherline_core::geometry::{Configuration, Location};
use gatherline_core::protocol::{replay, TraceFile};
use gatherline_core::robogram::Robogram;
use gatherline_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_REJECTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gatherline",
    version,
    about = "Gathering of oblivious robots on the real line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one run and write its trace.
    Run(RunArgs),
    /// Check properties on random cases.
    Check(CheckArgs),
    /// Check properties on every configuration over a small grid.
    Enumerate(EnumerateArgs),
    /// Recompute a trace and check every recorded round.
    Replay(ReplayArgs),
    /// Serve interactive sessions where the client plays the demon.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemonArg {
    Fsync,
    RoundRobin,
    RandomFair,
    Scripted,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Initial configuration, e.g. "0:3,1:1,5/2:1,3:3".
    #[arg(long, allow_hyphen_values = true)]
    pub init: String,
    #[arg(long, value_enum, default_value = "fsync")]
    pub demon: DemonArg,
    /// Fairness bound for round-robin and random-fair.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to 4·(n+1)·k.
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Trace output; stdout when absent.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Run from a bivalent start anyway.
    #[arg(long)]
    pub allow_forbidden: bool,
    /// Give the fsync demon random frames drawn from the seed.
    #[arg(long)]
    pub random_frames: bool,
    /// Actions for the scripted demon: a trace file, or one action per line.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value = "gathering")]
    pub robogram: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    SameDestination,
    NeverForbidden,
    RoundDecrease,
    FrameInvariance,
    Progress,
    FixedPoint,
    All,
}

impl SuiteArg {
    fn properties(self) -> Vec<Property> {
        match self {
            SuiteArg::SameDestination => vec![Property::SameDestination],
            SuiteArg::NeverForbidden => vec![Property::NeverForbidden],
            SuiteArg::RoundDecrease => vec![Property::RoundDecrease],
            SuiteArg::FrameInvariance => vec![Property::FrameInvariance],
            SuiteArg::Progress => vec![Property::Progress],
            SuiteArg::FixedPoint => vec![Property::FixedPoint],
            SuiteArg::All => Property::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    pub cases: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; every core when absent.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Program under test: "gathering" or a mutant ("go-to-min", "go-to-max", "own-plus-one").
    #[arg(long, default_value = "gathering")]
    pub robogram: String,
    /// Where the first counterexample is written, as a trace.
    #[arg(long, default_value = "counterexample.jsonl")]
    pub counterexample: PathBuf,
    /// Print reports as JSON lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: usize,
    /// "0..3" (inclusive integer range) or a list like "0,1/2,1".
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Maximum number of configurations.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u128,
    #[arg(long, default_value = "gathering")]
    pub robogram: String,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub trace: PathBuf,
    /// Overrides the robogram named in the header.
    #[arg(long)]
    pub robogram: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    /// One session over stdin/stdout instead of TCP.
    #[arg(long)]
    pub stdio: bool,
}

/// Outcome of a command that did not complete normally.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

type Outcome = std::result::Result<u8, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Check(a) => cmd_check(a, out),
        Command::Enumerate(a) => cmd_enumerate(a, out),
        Command::Replay(a) => cmd_replay(a, out),
        Command::Serve(a) => cmd_serve(a, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_robogram(name: &str) -> std::result::Result<Box<dyn Robogram>, Failure> {
    Ok(robogram_by_name(name)?)
}

/// Reads scripted actions from a trace file or from one JSON action per line.
pub fn read_script(path: &Path) -> gatherline_core::Result<Vec<DemonicAction>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    if let Ok(file) = TraceFile::parse(&text) {
        return Ok(file.actions());
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::MalformedAction(format!("script line {}: {e}", i + 1)))
        })
        .collect()
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let robogram = load_robogram(&a.robogram)?;
    let start = Configuration::parse(&a.init)?;
    if forbidden(&start) && !a.allow_forbidden {
        return Err(Failure {
            code: EXIT_REJECTED,
            message: "initial configuration is bivalent: two towers of equal size can never \
                      be gathered (use --allow-forbidden to explore it)"
                .into(),
        });
    }
    let spec = match a.demon {
        DemonArg::Fsync => DemonSpec::Fsync {
            random_frames: a.random_frames.then_some(a.seed),
        },
        DemonArg::RoundRobin => DemonSpec::RoundRobin { k: a.k },
        DemonArg::RandomFair => DemonSpec::RandomFair {
            seed: a.seed,
            k: a.k,
            zoom_pool: None,
        },
        DemonArg::Scripted => {
            let path = a
                .script
                .as_deref()
                .ok_or_else(|| Failure::usage("--demon scripted needs --script PATH"))?;
            DemonSpec::Scripted(read_script(path)?)
        }
    };
    let mut demon = make_demon(spec)?;
    let max_rounds = a
        .max_rounds
        .unwrap_or_else(|| termination_bound(start.len(), a.k.max(1)));
    let trace = execute(robogram.as_ref(), demon.as_mut(), &start, max_rounds)?;
    let text = TraceFile::from_trace(&trace).to_jsonl();
    let summary: &mut dyn Write = match &a.trace {
        Some(path) => {
            fs::write(path, &text)?;
            out
        }
        None => {
            out.write_all(text.as_bytes())?;
            err
        }
    };
    let rounds = trace.steps.len();
    match &trace.status {
        TraceStatus::Gathered { at } => {
            writeln!(summary, "gathered at {at} after {rounds} rounds")?;
            Ok(EXIT_OK)
        }
        TraceStatus::MaxRounds => {
            writeln!(summary, "not gathered after {rounds} rounds")?;
            Ok(EXIT_VIOLATION)
        }
        TraceStatus::Aborted => {
            writeln!(summary, "demon ran out of actions after {rounds} rounds")?;
            Ok(EXIT_VIOLATION)
        }
    }
}

/// One-round trace reproducing a counterexample, replayable with `replay`.
///
/// For frame invariance the recorded action is whichever of the two frame
/// assignments disagrees with unit frames, since replay compares against
/// those.
pub fn counterexample_trace<R: Robogram + ?Sized>(
    r: &R,
    cx: &Counterexample,
    seed: u64,
) -> gatherline_core::Result<TraceFile> {
    let mut action = cx.action.clone();
    if let Some(alt) = &cx.alternate {
        let unit = unit_frames(&action);
        if round(r, &action, &cx.config)? == round(r, &unit, &cx.config)? {
            action = alt.clone();
        }
    }
    let step = TraceStep::compute(r, action, &cx.config)?;
    let trace = Trace {
        robogram: r.name().to_string(),
        demon: DemonKind::Scripted,
        fairness_bound: None,
        seed: Some(seed),
        initial: cx.config.clone(),
        steps: vec![step],
        status: TraceStatus::Aborted,
    };
    Ok(TraceFile::from_trace(&trace))
}

fn unit_frames(action: &DemonicAction) -> DemonicAction {
    DemonicAction::activate(action.activated())
}

fn print_report(out: &mut dyn Write, report: &CheckReport, json: bool) -> io::Result<()> {
    if json {
        return writeln!(
            out,
            "{}",
            serde_json::to_string(report).expect("reports serialize")
        );
    }
    writeln!(
        out,
        "{}: {} ({} cases, {} passed, {} skipped, {} failed)",
        report.property.label(),
        if report.passed() { "pass" } else { "FAIL" },
        report.cases_run,
        report.passed,
        report.skipped,
        report.failed
    )?;
    if let Some(cx) = &report.counterexample {
        writeln!(out, "  case {} from {}: {}", cx.case, cx.config, cx.detail)?;
    }
    Ok(())
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Outcome {
    let robogram = load_robogram(&a.robogram)?;
    let mut opts = CheckOptions::new(a.cases, a.seed);
    opts.workers = a.workers;
    let mut first_failure = None;
    for property in a.suite.properties() {
        let report = run_suite(robogram.as_ref(), property, &opts)?;
        print_report(out, &report, a.json)?;
        if first_failure.is_none() {
            first_failure = report.counterexample;
        }
    }
    match first_failure {
        None => Ok(EXIT_OK),
        Some(cx) => {
            let file = counterexample_trace(robogram.as_ref(), &cx, a.seed)?;
            fs::write(&a.counterexample, file.to_jsonl())?;
            if !a.json {
                writeln!(
                    out,
                    "counterexample written to {}",
                    a.counterexample.display()
                )?;
            }
            Ok(EXIT_VIOLATION)
        }
    }
}

/// Parses "a..b" (inclusive, integers) or a comma-separated list of rationals.
pub fn parse_grid(text: &str) -> gatherline_core::Result<Vec<Location>> {
    let bad = || Error::InvalidArgument(format!("bad grid {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).map(Location::from_integer).collect());
    }
    let grid = text
        .split(',')
        .map(|s| s.trim().parse::<Location>())
        .collect::<gatherline_core::Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

fn cmd_enumerate(a: EnumerateArgs, out: &mut dyn Write) -> Outcome {
    let robogram = load_robogram(&a.robogram)?;
    let grid = parse_grid(&a.grid)?;
    let report = enumerate_small(robogram.as_ref(), a.n, &grid, a.budget)?;
    writeln!(
        out,
        "{} configurations ({} bivalent, {} gathered)",
        report.configurations, report.forbidden_starts, report.gathered_starts
    )?;
    writeln!(
        out,
        "{} (config,action) cases, {} violations",
        report.cases, report.violations
    )?;
    if let Some(cx) = &report.first_violation {
        writeln!(
            out,
            "first: {} from {}: {}",
            cx.property.label(),
            cx.config,
            cx.detail
        )?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_replay(a: ReplayArgs, out: &mut dyn Write) -> Outcome {
    let text = fs::read_to_string(&a.trace)
        .map_err(|e| Failure::usage(format!("{}: {e}", a.trace.display())))?;
    let file = TraceFile::parse(&text)?;
    let robogram = load_robogram(a.robogram.as_deref().unwrap_or(&file.header.robogram))?;
    let r = robogram.as_ref();

    if let Some(m) = replay(r, &file)? {
        writeln!(
            out,
            "round {}: record does not match recomputation",
            m.round
        )?;
        writeln!(
            out,
            "  expected {}",
            serde_json::to_string(&m.expected).expect("records serialize")
        )?;
        return Ok(EXIT_VIOLATION);
    }

    let mut violations = 0usize;
    let mut before = file.header.initial.clone();
    for record in &file.records {
        let unit = unit_frames(&record.action);
        let invariance = if round(r, &unit, &before)? == record.config {
            CaseOutcome::Pass
        } else {
            CaseOutcome::Fail("result differs from the same robots under unit frames".into())
        };
        let checks = [
            (
                "same-destination",
                same_destination_case(r, &before, &record.action),
            ),
            (
                "never-forbidden",
                never_forbidden_case(r, &before, &record.action),
            ),
            (
                "round-decrease",
                round_decrease_case(r, &before, &record.action),
            ),
            ("frame-invariance", invariance),
        ];
        for (name, outcome) in checks {
            if let CaseOutcome::Fail(detail) = outcome {
                violations += 1;
                writeln!(out, "round {}: {name} violated: {detail}", record.round)?;
            }
        }
        before = record.config.clone();
    }

    if let Some(footer) = &file.footer {
        let consistent = footer.rounds == file.records.len()
            && match &footer.status {
                TraceStatus::Gathered { at } => gathered_at(&before).as_ref() == Some(at),
                _ => true,
            };
        if !consistent {
            violations += 1;
            writeln!(out, "footer does not match the final configuration")?;
        }
    }
    writeln!(
        out,
        "{} rounds replayed, {} violations",
        file.records.len(),
        violations
    )?;
    Ok(if violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_serve(a: ServeArgs, err: &mut dyn Write) -> Outcome {
    if a.stdio {
        server::serve_stream(io::stdin().lock(), io::stdout().lock())?;
        return Ok(EXIT_OK);
    }
    let listener = TcpListener::bind((a.host.as_str(), a.port))?;
    writeln!(err, "listening on {}", listener.local_addr()?)?;
    server::serve_tcp(listener)?;
    Ok(EXIT_OK)
}
