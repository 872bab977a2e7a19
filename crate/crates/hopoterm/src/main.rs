use clap::{Args, Parser, Subcommand, ValueEnum};
use hopoterm::parse::{parse_input, Input};
use hopoterm::prover::{orient, prove_rule_removal, Backend, ProofOutcome, ProverConfig, Verdict};
use std::io::Read;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "hopoterm",
    version,
    about = "Termination prover for higher-order rewrite systems \
             using polynomial interpretations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove termination of a rewrite system, or orient a constraint
    /// problem, and print the proof.
    Prove(ProveArgs),
}

#[derive(Args)]
struct ProveArgs {
    /// Input file, or `-` for standard input.
    input: String,

    /// How to treat the input. `auto` picks by content: plain rewrite
    /// systems go through iterated rule removal, constraint problems
    /// (a CONSTRAINTS section or a dependency-pair setting) are oriented
    /// in one shot.
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,

    /// Largest value tried for each interpretation coefficient.
    #[arg(long, default_value_t = 3)]
    max_coefficient: u64,

    /// Overall search budget in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,

    /// `internal` solves with the built-in search; `dimacs:<dir>` instead
    /// writes the ground constraint systems to <dir> as DIMACS CNF files
    /// (with .map sidecars) and reports MAYBE.
    #[arg(long, default_value = "internal")]
    backend: String,

    /// Accepted for compatibility; the search is always deterministic.
    #[arg(long)]
    deterministic: bool,

    /// Print every constraint simplification step to standard error.
    #[arg(long)]
    dump_constraints: bool,

    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    RuleRemoval,
    Orient,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

const EXIT_YES: u8 = 0;
const EXIT_MAYBE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
    }
}

fn parse_backend(text: &str) -> Result<Backend, String> {
    if text == "internal" {
        return Ok(Backend::Internal);
    }
    if let Some(dir) = text.strip_prefix("dimacs:") {
        if dir.is_empty() {
            return Err("dimacs backend needs a directory: dimacs:<dir>".into());
        }
        return Ok(Backend::DimacsDir(dir.to_string()));
    }
    Err(format!(
        "unknown backend `{text}` (expected `internal` or `dimacs:<dir>`)"
    ))
}

fn run(args: &ProveArgs) -> Result<ProofOutcome, (u8, String)> {
    let text = read_input(&args.input)
        .map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", args.input)))?;
    let input = parse_input(&text)
        .map_err(|e| (EXIT_USAGE, format!("{}: {e}", args.input)))?;
    let backend = parse_backend(&args.backend).map_err(|e| (EXIT_USAGE, e))?;
    let config = ProverConfig {
        max_coefficient: args.max_coefficient,
        timeout: Duration::from_secs(args.timeout),
        backend,
        trace: args.dump_constraints,
        ..ProverConfig::default()
    };
    match (args.mode, input) {
        (Mode::Auto | Mode::RuleRemoval, Input::System(afs)) => {
            Ok(prove_rule_removal(&afs, &config))
        }
        (Mode::Auto | Mode::Orient, Input::Problem(problem)) => {
            Ok(orient(&problem, &config))
        }
        (Mode::RuleRemoval, Input::Problem(_)) => Err((
            EXIT_USAGE,
            "input is a constraint problem; rule removal needs a plain rewrite system"
                .into(),
        )),
        (Mode::Orient, Input::System(_)) => Err((
            EXIT_USAGE,
            "input is a plain rewrite system; orientation needs a constraint problem"
                .into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Prove(args) = cli.command;
    let outcome = match run(&args) {
        Ok(outcome) => outcome,
        Err((code, message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(code);
        }
    };
    if args.dump_constraints {
        for line in &outcome.dumps {
            eprintln!("{line}");
        }
    }
    match args.output {
        Output::Text => print!("{}", outcome.render()),
        Output::Json => {
            println!("{}", serde_json::to_string_pretty(&outcome).expect("serializable"))
        }
    }
    if outcome.timed_out {
        ExitCode::from(EXIT_TIMEOUT)
    } else {
        match outcome.verdict {
            Verdict::Yes => ExitCode::from(EXIT_YES),
            Verdict::Maybe => ExitCode::from(EXIT_MAYBE),
        }
    }
}
