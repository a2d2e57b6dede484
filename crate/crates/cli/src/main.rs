//! `portus`: translate, solve and cross-check Alloy-subset models.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use portus_core::frontend::query::Selector;
use portus_core::sorts::PolicyMode;
use portus_core::translate::{InjectedBug, ScopeStyle, TransOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status for malformed command lines.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "portus", version, about = "Alloy-subset to many-sorted logic translator")]
struct Cli {
    /// Emit logs as line-delimited JSON on stderr.
    #[arg(long, global = true)]
    log_json: bool,
    /// Raise log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate one command to SMT-LIB, or dump intermediate stages.
    Translate(TranslateArgs),
    /// Translate, ground and decide one command with an external SMT solver.
    Solve(SolveArgs),
    /// Decide one command by exhaustive enumeration of small instances.
    Oracle(OracleArgs),
    /// Compare every translation configuration against the oracle.
    Difftest(DifftestArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args, Debug)]
struct TransArgs {
    /// Command to select, by 0-based index or by name.
    #[arg(long = "cmd", value_name = "N|NAME", default_value = "0")]
    selector: Selector,
    /// Sort inference policy.
    #[arg(long, value_name = "default|partition", default_value = "default")]
    policy: PolicyMode,
    /// Turn functional fields into functions and one-sigs into constants.
    #[arg(long, value_enum, default_value = "on")]
    scalar_opt: Toggle,
    /// How scope bounds are axiomatised.
    #[arg(long, value_name = "cardinality|constants", default_value = "constants")]
    scope_axioms: ScopeStyle,
    /// Keep quantifiers over provably empty ranges instead of folding them.
    #[arg(long)]
    no_shortcircuit: bool,
    /// Maximum number of nodes produced while grounding.
    #[arg(long, value_name = "N", default_value_t = portus_core::ground::DEFAULT_BUDGET)]
    ground_budget: usize,
    #[arg(long, hide = true)]
    inject_bug: Option<InjectedBug>,
}

impl TransArgs {
    fn options(&self) -> TransOptions {
        TransOptions {
            scalar_opt: matches!(self.scalar_opt, Toggle::On),
            scope_axioms: self.scope_axioms,
            policy: self.policy,
            short_circuit: !self.no_shortcircuit,
            inject_bug: self.inject_bug,
        }
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// SMT solver executable, invoked as `<solver> <file.smt2>`.
    #[arg(long, env = "PORTUS_SOLVER", default_value = portus_core::smt::DEFAULT_SOLVER)]
    solver: String,
    /// Wall-clock limit for one solver call, in seconds.
    #[arg(long, env = "PORTUS_TIMEOUT", value_name = "SECS", default_value_t = portus_core::smt::DEFAULT_TIMEOUT.as_secs_f64())]
    timeout_sec: f64,
}

impl SolverArgs {
    fn config(&self) -> anyhow::Result<portus_core::smt::SolverConfig> {
        anyhow::ensure!(self.timeout_sec.is_finite() && self.timeout_sec > 0.0, "timeout must be a positive number of seconds");
        Ok(portus_core::smt::SolverConfig {
            path: self.solver.clone(),
            timeout: std::time::Duration::from_secs_f64(self.timeout_sec),
        })
    }
}

#[derive(Args, Debug)]
struct TranslateArgs {
    /// Model source file.
    file: PathBuf,
    #[command(flatten)]
    trans: TransArgs,
    /// Print the sort assignment as JSON.
    #[arg(long)]
    dump_sorts: bool,
    /// Print the many-sorted theory before grounding.
    #[arg(long)]
    dump_theory: bool,
    /// Print the quantifier-free theory after grounding.
    #[arg(long)]
    dump_ground: bool,
    /// Print the casts introduced by scalar optimisation as JSON.
    #[arg(long)]
    dump_casts: bool,
    /// Write the SMT-LIB script here instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    trans: TransArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the instance as JSON when satisfiable; `-` or no value prints it.
    #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "-")]
    instance_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long = "cmd", value_name = "N|NAME", default_value = "0")]
    selector: Selector,
    /// Give up after evaluating this many candidate instances.
    #[arg(long, default_value_t = portus_core::oracle::DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args, Debug)]
struct DifftestArgs {
    /// Directory of `.als` files to check; every command of every file is compared.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["seed", "count"])]
    corpus: Option<PathBuf>,
    /// Seed for generated models.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of generated models.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Report file; `.html` selects HTML, anything else JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, short = 'j')]
    jobs: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = portus_core::oracle::DEFAULT_CAP)]
    cap: u64,
    #[arg(long, value_name = "N", default_value_t = portus_core::ground::DEFAULT_BUDGET)]
    ground_budget: usize,
    #[arg(long, hide = true)]
    inject_bug: Option<InjectedBug>,
}

fn init_logging(json: bool, verbose: u8) {
    let level = match verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        2 => tracing::Level::DEBUG,
        _ => tracing::Level::TRACE,
    };
    let builder = tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr);
    if json {
        builder.json().flatten_event(true).with_current_span(false).init();
    } else {
        builder.with_target(false).init();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.log_json, cli.verbose);
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<portus_core::Error>().map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
