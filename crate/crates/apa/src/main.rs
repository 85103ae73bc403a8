//! Command-line front end.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use apa::{
    audit, encode, enumerate_admissible, enumerate_complete, halting_equivalence, parse_framework,
    parse_program, reachable, simulate, ApaState, Argument, Configuration, EncodedFramework,
    EnumerationLimits, ExploreLimits, Framework, Gamma, HaltingVerdict, MinskyMachine, RunStatus,
    SemanticsError, SimulationError, Strategy,
};

const EXIT_INPUT: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_SIZE: u8 = 3;
const EXIT_FALSIFIED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "apa",
    version,
    about = "Abstract persuasion argumentation dynamics and counter-machine encoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a counter machine and print its trace.
    Run {
        /// Machine program file.
        program: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        /// Maximum number of machine steps.
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::First)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Compile a machine into a framework and print a finite snapshot of it.
    Encode {
        program: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        /// Materialize rule instances with counter values up to this bound
        /// (default: the larger initial counter plus one).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Replay a machine run as guided framework transitions.
    Simulate {
        program: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::First)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Explore the unguided state space of an encoded machine and classify it.
    Audit {
        program: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        /// Exploration depth bound.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Maximum number of explored states.
        #[arg(long, default_value_t = 100_000)]
        state_cap: usize,
        /// Subset enumeration budget per state.
        #[arg(long, default_value_t = 1 << 16)]
        subset_budget: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Check halting equivalence: a shortest halting run must replay as
    /// exactly twice as many transitions, ending in a dead end.
    Check {
        program: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        /// Maximum machine steps to search for a halting run.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Enumerate admissible and complete sets of a framework state.
    Semantics {
        /// Framework file.
        framework: PathBuf,
        /// Comma-separated argument names (default: the initial state).
        #[arg(long)]
        state: Option<String>,
        /// Largest state size to enumerate exhaustively.
        #[arg(long, default_value_t = 16)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Explore a framework's state space and print it in DOT format.
    Dot {
        framework: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
        #[arg(long, default_value_t = 64)]
        max_depth: usize,
        /// Comma-separated reference set argument names.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, default_value_t = 1 << 16)]
        subset_budget: u64,
    },
}

/// Initial counter values shared by the machine subcommands.
#[derive(Args)]
struct StartArgs {
    /// Initial value of the first counter.
    #[arg(long, default_value_t = 0)]
    n1: u64,
    /// Initial value of the second counter.
    #[arg(long, default_value_t = 0)]
    n2: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    /// Always take the first instruction declared for the current state.
    First,
    /// Breadth-first search for a shortest halting run.
    All,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Strategy {
        match value {
            StrategyArg::First => Strategy::FirstInstruction,
            StrategyArg::All => Strategy::Breadth,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Keyvalue,
    Dot,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

/// Writes a command's output to stdout. A closed pipe (`apa ... | head`)
/// ends the output silently instead of failing; other write errors are
/// reported as input/output failures.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write as _;
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::input(format!("cannot write output: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INPUT)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            program,
            start,
            max_steps,
            strategy,
            format,
        } => cmd_run(&program, &start, max_steps, strategy.into(), format),
        Command::Encode {
            program,
            start,
            bound,
        } => cmd_encode(&program, &start, bound),
        Command::Simulate {
            program,
            start,
            max_steps,
            strategy,
            format,
        } => cmd_simulate(&program, &start, max_steps, strategy.into(), format),
        Command::Audit {
            program,
            start,
            depth,
            state_cap,
            subset_budget,
            format,
        } => cmd_audit(&program, &start, depth, state_cap, subset_budget, format),
        Command::Check {
            program,
            start,
            budget,
            format,
        } => cmd_check(&program, &start, budget, format),
        Command::Semantics {
            framework,
            state,
            bound,
            format,
        } => cmd_semantics(&framework, state.as_deref(), bound, format),
        Command::Dot {
            framework,
            max_states,
            max_depth,
            reference,
            subset_budget,
        } => cmd_dot(
            &framework,
            max_states,
            max_depth,
            reference.as_deref(),
            subset_budget,
        ),
    }
}

fn load_program(path: &Path) -> Result<MinskyMachine, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let machine =
        parse_program(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let violations = machine.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::input(format!(
            "{} is not a valid machine: {}",
            path.display(),
            list.join("; ")
        )));
    }
    Ok(machine)
}

fn load_framework(path: &Path) -> Result<Framework, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    parse_framework(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_encoded(path: &Path, start: &StartArgs) -> Result<EncodedFramework, Failure> {
    let machine = load_program(path)?;
    encode(&machine, start.n1, start.n2).map_err(|e| Failure::input(e.to_string()))
}

fn initial_config(machine: &MinskyMachine, start: &StartArgs) -> Configuration {
    Configuration::new(machine.initial.clone(), start.n1, start.n2)
}

fn cmd_run(
    path: &Path,
    start: &StartArgs,
    max_steps: usize,
    strategy: Strategy,
    format: FormatArg,
) -> Result<(), Failure> {
    let machine = load_program(path)?;
    let trace = machine.run(&initial_config(&machine, start), max_steps, strategy);
    let mut out = String::new();
    match format {
        FormatArg::Text => {
            for (i, config) in trace.configs.iter().enumerate() {
                let _ = writeln!(out, "{i}: {config}");
            }
            match trace.status {
                RunStatus::Halted => {
                    let _ = writeln!(out, "halted after {} steps", trace.taken.len());
                }
                RunStatus::BudgetExhausted => {
                    let _ = writeln!(out, "budget exhausted after {max_steps} steps");
                }
            }
        }
        FormatArg::Keyvalue => {
            let _ = writeln!(out, "status={}", status_word(trace.status));
            let _ = writeln!(out, "steps={}", trace.taken.len());
            let _ = writeln!(out, "final={}", trace.configs.last().expect("nonempty"));
        }
        FormatArg::Dot => {
            return Err(Failure::input("run has no dot output; use text or keyvalue"))
        }
    }
    emit(&out)?;
    match trace.status {
        RunStatus::Halted => Ok(()),
        RunStatus::BudgetExhausted => Err(Failure::budget(format!(
            "no halt within {max_steps} steps"
        ))),
    }
}

fn cmd_encode(path: &Path, start: &StartArgs, bound: Option<u64>) -> Result<(), Failure> {
    let ef = load_encoded(path, start)?;
    let bound = bound.unwrap_or_else(|| start.n1.max(start.n2) + 1);
    emit(&ef.render_snapshot(bound))
}

fn cmd_simulate(
    path: &Path,
    start: &StartArgs,
    max_steps: usize,
    strategy: Strategy,
    format: FormatArg,
) -> Result<(), Failure> {
    let ef = load_encoded(path, start)?;
    let c0 = initial_config(ef.machine(), start);
    let guided = simulate(&ef, &c0, max_steps, strategy).map_err(simulation_failure)?;
    let mut out = String::new();
    match format {
        FormatArg::Text => {
            let _ = writeln!(out, "0: {} = {}", guided.minsky[0], guided.apa[0]);
            for (k, step) in guided.steps.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  select {}: {}",
                    step.instr,
                    render_gamma(&step.selection)
                );
                let _ = writeln!(out, "    mid {}", guided.apa[2 * k + 1]);
                let _ = writeln!(
                    out,
                    "  commit {}: {}",
                    step.instr,
                    render_gamma(&step.effect)
                );
                let _ = writeln!(
                    out,
                    "{}: {} = {}",
                    k + 1,
                    guided.minsky[k + 1],
                    guided.apa[2 * k + 2]
                );
            }
            let _ = writeln!(
                out,
                "{}: {} machine steps realized as {} transitions",
                status_word(guided.status),
                guided.minsky.len() - 1,
                guided.transitions()
            );
        }
        FormatArg::Keyvalue => {
            let _ = writeln!(out, "status={}", status_word(guided.status));
            let _ = writeln!(out, "minsky_steps={}", guided.minsky.len() - 1);
            let _ = writeln!(out, "apa_transitions={}", guided.transitions());
            let _ = writeln!(out, "initial={}", guided.minsky[0]);
            let _ = writeln!(out, "final={}", guided.minsky.last().expect("nonempty"));
        }
        FormatArg::Dot => {
            return Err(Failure::input(
                "simulate has no dot output; use text or keyvalue",
            ))
        }
    }
    emit(&out)?;
    match guided.status {
        RunStatus::Halted => Ok(()),
        RunStatus::BudgetExhausted => Err(Failure::budget(format!(
            "no halt within {max_steps} steps"
        ))),
    }
}

fn cmd_audit(
    path: &Path,
    start: &StartArgs,
    depth: usize,
    state_cap: usize,
    subset_budget: u64,
    format: FormatArg,
) -> Result<(), Failure> {
    if depth == 0 || state_cap == 0 {
        return Err(Failure::input("depth and state cap must be at least 1"));
    }
    let ef = load_encoded(path, start)?;
    let c0 = initial_config(ef.machine(), start);
    let limits = ExploreLimits {
        max_states: state_cap,
        max_depth: depth,
        enumeration: EnumerationLimits {
            subset_budget,
            ..EnumerationLimits::default()
        },
    };
    let report = audit(&ef, &c0, &limits).map_err(simulation_failure)?;
    emit(&match format {
        FormatArg::Text => report.to_text(),
        FormatArg::Keyvalue => report.to_keyvalue(),
        FormatArg::Dot => report.to_dot(),
    })
}

fn cmd_check(
    path: &Path,
    start: &StartArgs,
    budget: usize,
    format: FormatArg,
) -> Result<(), Failure> {
    let ef = load_encoded(path, start)?;
    let c0 = initial_config(ef.machine(), start);
    let verdict = halting_equivalence(&ef, &c0, budget).map_err(simulation_failure)?;
    let mut out = String::new();
    match verdict {
        HaltingVerdict::Confirmed {
            minsky_steps,
            apa_transitions,
            final_config,
        } => {
            match format {
                FormatArg::Text => {
                    let _ = writeln!(out, "confirmed, k={minsky_steps}, apa={apa_transitions}");
                    let _ = writeln!(out, "final {final_config}");
                }
                FormatArg::Keyvalue => {
                    let _ = writeln!(out, "verdict=confirmed");
                    let _ = writeln!(out, "minsky_steps={minsky_steps}");
                    let _ = writeln!(out, "apa_transitions={apa_transitions}");
                    let _ = writeln!(out, "final={final_config}");
                }
                FormatArg::Dot => {
                    return Err(Failure::input(
                        "check has no dot output; use text or keyvalue",
                    ))
                }
            }
            emit(&out)
        }
        HaltingVerdict::Unknown { explored } => {
            match format {
                FormatArg::Text => {
                    let _ = writeln!(
                        out,
                        "unknown: no halting run within {budget} steps \
                         ({explored} configurations searched)"
                    );
                }
                FormatArg::Keyvalue => {
                    let _ = writeln!(out, "verdict=unknown");
                    let _ = writeln!(out, "explored={explored}");
                }
                FormatArg::Dot => {
                    return Err(Failure::input(
                        "check has no dot output; use text or keyvalue",
                    ))
                }
            }
            emit(&out)?;
            Err(Failure::budget(format!(
                "no halting run within {budget} steps"
            )))
        }
    }
}

fn cmd_semantics(
    path: &Path,
    state: Option<&str>,
    bound: usize,
    format: FormatArg,
) -> Result<(), Failure> {
    let fw = load_framework(path)?;
    let state = match state {
        None => fw.initial().clone(),
        Some(names) => parse_argument_list(&fw, names)?
            .into_iter()
            .collect::<ApaState>(),
    };
    let admissible = match enumerate_admissible(&fw, &state, bound) {
        Ok(sets) => sets,
        Err(SemanticsError::SizeExceeded { visible, bound }) => {
            return Err(Failure {
                code: EXIT_SIZE,
                message: format!(
                    "state has {visible} visible arguments, over the bound of {bound}"
                ),
            });
        }
    };
    let complete = enumerate_complete(&fw, &state, bound).expect("same bound as admissible");
    let mut out = String::new();
    match format {
        FormatArg::Text => {
            let _ = writeln!(out, "state: {state}");
            let _ = writeln!(out, "admissible ({}):", admissible.len());
            for set in &admissible {
                let _ = writeln!(out, "  {}", render_argument_set(set));
            }
            let _ = writeln!(out, "complete ({}):", complete.len());
            for set in &complete {
                let _ = writeln!(out, "  {}", render_argument_set(set));
            }
        }
        FormatArg::Keyvalue => {
            let _ = writeln!(out, "state={state}");
            let _ = writeln!(out, "admissible={}", admissible.len());
            let _ = writeln!(out, "complete={}", complete.len());
            for (i, set) in admissible.iter().enumerate() {
                let _ = writeln!(out, "admissible.{i}={}", render_argument_set(set));
            }
            for (i, set) in complete.iter().enumerate() {
                let _ = writeln!(out, "complete.{i}={}", render_argument_set(set));
            }
        }
        FormatArg::Dot => {
            return Err(Failure::input(
                "semantics has no dot output; use text or keyvalue",
            ))
        }
    }
    emit(&out)
}

fn cmd_dot(
    path: &Path,
    max_states: usize,
    max_depth: usize,
    reference: Option<&str>,
    subset_budget: u64,
) -> Result<(), Failure> {
    if max_states == 0 || max_depth == 0 {
        return Err(Failure::input("max states and max depth must be at least 1"));
    }
    let fw = load_framework(path)?;
    let reference: BTreeSet<Argument> = match reference {
        None => BTreeSet::new(),
        Some(names) => parse_argument_list(&fw, names)?,
    };
    let limits = ExploreLimits {
        max_states,
        max_depth,
        enumeration: EnumerationLimits {
            subset_budget,
            ..EnumerationLimits::default()
        },
    };
    let graph = reachable(&fw, &reference, &limits);
    emit(&graph.to_dot())?;
    if !graph.complete {
        eprintln!("note: exploration hit a bound; the graph is incomplete");
    }
    Ok(())
}

/// Parses a comma- or space-separated list of declared argument names.
fn parse_argument_list(fw: &Framework, names: &str) -> Result<BTreeSet<Argument>, Failure> {
    let mut out = BTreeSet::new();
    for name in names.split([',', ' ']).filter(|n| !n.is_empty()) {
        let argument = Argument::opaque(name);
        if !fw.universe().contains(&argument) {
            return Err(Failure::input(format!(
                "argument `{name}` is not declared in the framework"
            )));
        }
        out.insert(argument);
    }
    Ok(out)
}

fn render_argument_set(set: &BTreeSet<Argument>) -> String {
    let mut out = String::from("{");
    for (i, a) in set.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{a}");
    }
    out.push('}');
    out
}

fn render_gamma(gamma: &Gamma) -> String {
    let parts: Vec<String> = gamma.iter().map(|t| format!("[{t}]")).collect();
    parts.join(" ")
}

fn status_word(status: RunStatus) -> &'static str {
    match status {
        RunStatus::Halted => "halted",
        RunStatus::BudgetExhausted => "budget-exhausted",
    }
}

fn simulation_failure(err: SimulationError) -> Failure {
    let code = match &err {
        SimulationError::NotApplicable { .. } | SimulationError::Encode(_) => EXIT_INPUT,
        SimulationError::Transition(_) => EXIT_BUDGET,
        SimulationError::MissingTriple { .. } | SimulationError::Falsified { .. } => {
            EXIT_FALSIFIED
        }
    };
    Failure {
        code,
        message: err.to_string(),
    }
}
