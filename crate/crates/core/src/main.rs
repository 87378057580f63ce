use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use ghzanon::adversary::JunkKind;
use ghzanon::harness::{run_experiment, ExperimentKind, ExperimentPlan, Format, Params};

/// Simulate GHZ-based anonymous communication and check its bounds.
///
/// Exit status: 0 when every check passes, 1 when a bound is violated,
/// 2 on usage or parameter errors.
#[derive(Parser, Debug)]
#[command(name = "ghzanon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the Bell operator and their multiplicities.
    Spectrum(Args),
    /// Brute-force local-realistic maximum.
    LrBound(Args),
    /// Statistical self-test of a (noisy) source.
    Selftest(Args),
    /// Parity protocol success rate.
    Parity(Args),
    /// Anonymous logical OR.
    Veto(Args),
    /// Receiver notification.
    Notify(Args),
    /// Collision detection.
    Collision(Args),
    /// Receiver authentication after notification.
    Authenticate(Args),
    /// Anonymous entanglement generation and its non-abort probability.
    Aeg(Args),
    /// Sender-guessing attacks against the guessing bound.
    Guess(Args),
    /// Closed-form bounds against exact values over an epsilon grid.
    BoundsSweep(Args),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct Args {
    /// Number of agents (odd, >= 3).
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Security parameter.
    #[arg(long = "S", default_value_t = 3)]
    security: usize,
    /// Target violation deficit of the noisy source.
    #[arg(long, conflicts_with = "delta")]
    epsilon: Option<f64>,
    /// Noise weight of the source.
    #[arg(long)]
    delta: Option<f64>,
    /// Junk family: "minus" or "eigen:<value>" (default: eigen:<n-3>).
    #[arg(long)]
    junk: Option<JunkKind>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-reps", default_value_t = 1_000)]
    max_reps: u64,
    /// Number of honest candidate senders.
    #[arg(long)]
    k: Option<usize>,
    /// Input or wish bits, agent 1 first, e.g. 10000.
    #[arg(long)]
    inputs: Option<String>,
    #[arg(long)]
    sender: Option<usize>,
    #[arg(long)]
    receiver: Option<usize>,
    /// Self-test acceptance threshold on the estimated deficit.
    #[arg(long)]
    threshold: Option<f64>,
    /// Allowed mismatches (authenticate) or failed-test fraction (aeg).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the transcripts of trial 0 as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Record wall-clock time (reports are then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

impl Command {
    fn into_plan(self) -> ExperimentPlan {
        let (kind, a) = match self {
            Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
            Command::LrBound(a) => (ExperimentKind::LrBound, a),
            Command::Selftest(a) => (ExperimentKind::Selftest, a),
            Command::Parity(a) => (ExperimentKind::Parity, a),
            Command::Veto(a) => (ExperimentKind::Veto, a),
            Command::Notify(a) => (ExperimentKind::Notify, a),
            Command::Collision(a) => (ExperimentKind::Collision, a),
            Command::Authenticate(a) => (ExperimentKind::Authenticate, a),
            Command::Aeg(a) => (ExperimentKind::Aeg, a),
            Command::Guess(a) => (ExperimentKind::Guess, a),
            Command::BoundsSweep(a) => (ExperimentKind::BoundsSweep, a),
        };
        let params = Params {
            n: a.n,
            security: a.security,
            epsilon: a.epsilon,
            delta: a.delta,
            junk: a.junk,
            trials: a.trials,
            seed: a.seed,
            max_repetitions: a.max_reps,
            k: a.k,
            inputs: a.inputs,
            sender: a.sender,
            receiver: a.receiver,
            threshold: a.threshold,
            tolerance: a.tolerance,
        };
        ExperimentPlan {
            kind,
            params,
            output_path: a.out,
            format: match a.format {
                OutputFormat::Json => Format::Json,
                OutputFormat::Csv => Format::Csv,
            },
            transcript_path: a.transcript,
            timing: a.timing,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let plan = cli.command.into_plan();
    let result = match run_experiment(&plan) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cmd = Cli::command();
            cmd.build();
            let usage = match cmd.find_subcommand_mut(plan.kind.name()) {
                Some(sub) => sub.render_usage(),
                None => cmd.render_usage(),
            };
            eprintln!("{usage}");
            return ExitCode::from(2);
        }
    };
    if plan.output_path.is_none() {
        let rendered = match result.render(plan.format) {
            Ok(bytes) => bytes,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        let mut stdout = std::io::stdout().lock();
        if stdout.write_all(&rendered).and_then(|_| stdout.flush()).is_err() {
            return ExitCode::from(2);
        }
    }
    if result.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
