//! Two-counter machines: model, interpreter, halting search, text format.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ParseError;

/// One of the machine's two counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Counter {
    C1,
    C2,
}

impl Counter {
    pub fn index(self) -> u8 {
        match self {
            Counter::C1 => 1,
            Counter::C2 => 2,
        }
    }

    pub fn from_index(index: u8) -> Option<Counter> {
        match index {
            1 => Some(Counter::C1),
            2 => Some(Counter::C2),
            _ => None,
        }
    }
}

/// One machine instruction.
///
/// With `alt` absent: increment `counter` and move to `target`. With `alt`
/// present: test `counter`; move to `target` if it is zero, otherwise
/// decrement and move to `alt`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instruction {
    pub from: String,
    pub counter: Counter,
    pub target: String,
    pub alt: Option<String>,
}

impl Instruction {
    pub fn is_increment(&self) -> bool {
        self.alt.is_none()
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alt {
            None => write!(
                f,
                "{} inc {} -> {}",
                self.from,
                self.counter.index(),
                self.target
            ),
            Some(dec) => write!(
                f,
                "{} test {} zero -> {} dec -> {}",
                self.from,
                self.counter.index(),
                self.target,
                dec
            ),
        }
    }
}

/// A two-counter machine: named control states, an instruction list, an
/// initial state and a halting state. Several instructions may share a
/// `from` state; the step relation is then nondeterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    pub states: BTreeSet<String>,
    pub instructions: Vec<Instruction>,
    pub initial: String,
    pub halting: String,
}

/// A runtime configuration: control state plus the two counter values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub q: String,
    pub n1: u64,
    pub n2: u64,
}

impl Configuration {
    pub fn new(q: impl Into<String>, n1: u64, n2: u64) -> Self {
        Configuration {
            q: q.into(),
            n1,
            n2,
        }
    }

    pub fn counter(&self, counter: Counter) -> u64 {
        match counter {
            Counter::C1 => self.n1,
            Counter::C2 => self.n2,
        }
    }

    fn with_counter(&self, counter: Counter, value: u64, q: &str) -> Configuration {
        let mut next = Configuration::new(q, self.n1, self.n2);
        match counter {
            Counter::C1 => next.n1 = value,
            Counter::C2 => next.n2 = value,
        }
        next
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.q, self.n1, self.n2)
    }
}

/// A well-formedness defect reported by [`MinskyMachine::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineViolation {
    #[error("initial state `{0}` is not declared")]
    UndeclaredInitial(String),
    #[error("halting state `{0}` is not declared")]
    UndeclaredHalting(String),
    #[error("instruction {index} (`{instruction}`) names undeclared state `{name}`")]
    UndeclaredState {
        index: usize,
        instruction: String,
        name: String,
    },
    #[error("instruction {index} (`{instruction}`) starts from the halting state")]
    FromHalting { index: usize, instruction: String },
    #[error("non-halting state `{0}` has no instruction")]
    MissingInstruction(String),
}

impl MinskyMachine {
    /// Checks declaredness of all state names, that no instruction starts
    /// from the halting state, and totality: every non-halting state has at
    /// least one instruction.
    pub fn validate(&self) -> Vec<MachineViolation> {
        let mut violations = Vec::new();
        if !self.states.contains(&self.initial) {
            violations.push(MachineViolation::UndeclaredInitial(self.initial.clone()));
        }
        if !self.states.contains(&self.halting) {
            violations.push(MachineViolation::UndeclaredHalting(self.halting.clone()));
        }
        for (index, instr) in self.instructions.iter().enumerate() {
            let mut names = vec![&instr.from, &instr.target];
            if let Some(alt) = &instr.alt {
                names.push(alt);
            }
            for name in names {
                if !self.states.contains(name) {
                    violations.push(MachineViolation::UndeclaredState {
                        index,
                        instruction: instr.to_string(),
                        name: name.clone(),
                    });
                }
            }
            if instr.from == self.halting {
                violations.push(MachineViolation::FromHalting {
                    index,
                    instruction: instr.to_string(),
                });
            }
        }
        for state in &self.states {
            if state != &self.halting && !self.instructions.iter().any(|i| &i.from == state) {
                violations.push(MachineViolation::MissingInstruction(state.clone()));
            }
        }
        violations
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// The configuration an instruction leads to from `c`.
    pub fn apply_instruction(&self, instr: &Instruction, c: &Configuration) -> Configuration {
        let value = c.counter(instr.counter);
        match &instr.alt {
            None => c.with_counter(instr.counter, value + 1, &instr.target),
            Some(dec_target) => {
                if value > 0 {
                    c.with_counter(instr.counter, value - 1, dec_target)
                } else {
                    c.with_counter(instr.counter, value, &instr.target)
                }
            }
        }
    }

    /// All one-step successors of `c`. Empty exactly when `c` is halting.
    pub fn step(&self, c: &Configuration) -> BTreeSet<Configuration> {
        self.step_indexed(c).into_iter().map(|(_, c)| c).collect()
    }

    /// One-step successors together with the taken instruction's index, in
    /// instruction order.
    pub fn step_indexed(&self, c: &Configuration) -> Vec<(usize, Configuration)> {
        if c.q == self.halting {
            return Vec::new();
        }
        self.instructions
            .iter()
            .enumerate()
            .filter(|(_, i)| i.from == c.q)
            .map(|(idx, i)| (idx, self.apply_instruction(i, c)))
            .collect()
    }

    /// Runs the machine from `c0` for at most `max_steps` steps.
    ///
    /// `FirstInstruction` repeatedly takes the first instruction declared
    /// for the current state; `Breadth` searches all interleavings for a
    /// shortest halting run, returning only the start configuration when
    /// none exists within the budget. The machine must be valid.
    pub fn run(&self, c0: &Configuration, max_steps: usize, strategy: Strategy) -> Trace {
        assert!(self.is_valid(), "run requires a valid machine");
        match strategy {
            Strategy::FirstInstruction => {
                let mut configs = vec![c0.clone()];
                let mut taken = Vec::new();
                let mut current = c0.clone();
                for _ in 0..max_steps {
                    if current.q == self.halting {
                        break;
                    }
                    let (idx, instr) = self
                        .instructions
                        .iter()
                        .enumerate()
                        .find(|(_, i)| i.from == current.q)
                        .expect("validated machine is total");
                    current = self.apply_instruction(instr, &current);
                    configs.push(current.clone());
                    taken.push(idx);
                }
                let status = if current.q == self.halting {
                    RunStatus::Halted
                } else {
                    RunStatus::BudgetExhausted
                };
                Trace {
                    configs,
                    taken,
                    status,
                }
            }
            Strategy::Breadth => match self.halts(c0, max_steps) {
                HaltOutcome::Halted {
                    configs, taken, ..
                } => Trace {
                    configs,
                    taken,
                    status: RunStatus::Halted,
                },
                HaltOutcome::Unknown { .. } => Trace {
                    configs: vec![c0.clone()],
                    taken: Vec::new(),
                    status: RunStatus::BudgetExhausted,
                },
            },
        }
    }

    /// Breadth-first search for a shortest halting run of at most `budget`
    /// steps. The machine must be valid.
    pub fn halts(&self, c0: &Configuration, budget: usize) -> HaltOutcome {
        assert!(self.is_valid(), "halts requires a valid machine");
        if c0.q == self.halting {
            return HaltOutcome::Halted {
                steps: 0,
                configs: vec![c0.clone()],
                taken: Vec::new(),
            };
        }
        let mut parents: HashMap<Configuration, (Configuration, usize)> = HashMap::new();
        let mut visited: HashSet<Configuration> = HashSet::from([c0.clone()]);
        let mut frontier: VecDeque<Configuration> = VecDeque::from([c0.clone()]);
        for depth in 1..=budget {
            let mut next_frontier = VecDeque::new();
            for config in &frontier {
                for (idx, succ) in self.step_indexed(config) {
                    if visited.contains(&succ) {
                        continue;
                    }
                    visited.insert(succ.clone());
                    parents.insert(succ.clone(), (config.clone(), idx));
                    if succ.q == self.halting {
                        let (configs, taken) = unwind_path(&parents, succ);
                        return HaltOutcome::Halted {
                            steps: depth,
                            configs,
                            taken,
                        };
                    }
                    next_frontier.push_back(succ);
                }
            }
            if next_frontier.is_empty() {
                break;
            }
            frontier = next_frontier;
        }
        HaltOutcome::Unknown {
            explored: visited.len(),
        }
    }
}

fn unwind_path(
    parents: &HashMap<Configuration, (Configuration, usize)>,
    last: Configuration,
) -> (Vec<Configuration>, Vec<usize>) {
    let mut configs = vec![last];
    let mut taken = Vec::new();
    while let Some((parent, idx)) = parents.get(configs.last().unwrap()) {
        configs.push(parent.clone());
        taken.push(*idx);
    }
    configs.reverse();
    taken.reverse();
    (configs, taken)
}

/// Scheduling policy for [`MinskyMachine::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    FirstInstruction,
    Breadth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Halted,
    BudgetExhausted,
}

/// A run: the visited configurations and the instruction taken at each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub configs: Vec<Configuration>,
    pub taken: Vec<usize>,
    pub status: RunStatus,
}

/// Result of the bounded halting search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltOutcome {
    Halted {
        steps: usize,
        configs: Vec<Configuration>,
        taken: Vec<usize>,
    },
    Unknown {
        explored: usize,
    },
}

/// Parses the machine text format.
///
/// ```text
/// # comment
/// states q0 q1 qf
/// init q0
/// halt qf
/// q0 test 2 zero -> qf dec -> q1
/// q1 inc 1 -> q0
/// ```
///
/// Instruction order in the file is the machine's instruction order.
pub fn parse_program(text: &str) -> Result<MinskyMachine, ParseError> {
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut halting: Option<(usize, String)> = None;
    let mut instruction_lines: Vec<(usize, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let before_comment = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<String> = before_comment
            .split_whitespace()
            .map(str::to_string)
            .collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0].as_str() {
            "states" => {
                if states.is_some() {
                    return Err(ParseError::new(line, "duplicate `states` line"));
                }
                if tokens.len() < 2 {
                    return Err(ParseError::new(line, "expected `states <name>...`"));
                }
                states = Some((line, tokens[1..].to_vec()));
            }
            "init" => {
                if initial.is_some() {
                    return Err(ParseError::new(line, "duplicate `init` line"));
                }
                if tokens.len() != 2 {
                    return Err(ParseError::new(line, "expected `init <state>`"));
                }
                initial = Some((line, tokens[1].clone()));
            }
            "halt" => {
                if halting.is_some() {
                    return Err(ParseError::new(line, "duplicate `halt` line"));
                }
                if tokens.len() != 2 {
                    return Err(ParseError::new(line, "expected `halt <state>`"));
                }
                halting = Some((line, tokens[1].clone()));
            }
            _ => instruction_lines.push((line, tokens)),
        }
    }

    let (states_line, state_names) =
        states.ok_or_else(|| ParseError::new(0, "missing `states` line"))?;
    let mut state_set = BTreeSet::new();
    for name in &state_names {
        if !state_set.insert(name.clone()) {
            return Err(ParseError::new(
                states_line,
                format!("state `{name}` declared twice"),
            ));
        }
    }

    let check_state = |line: usize, name: &str| -> Result<String, ParseError> {
        if state_set.contains(name) {
            Ok(name.to_string())
        } else {
            Err(ParseError::new(
                line,
                format!("state `{name}` is not in the `states` line"),
            ))
        }
    };

    let (init_line, init_name) =
        initial.ok_or_else(|| ParseError::new(0, "missing `init` line"))?;
    let initial = check_state(init_line, &init_name)?;
    let (halt_line, halt_name) =
        halting.ok_or_else(|| ParseError::new(0, "missing `halt` line"))?;
    let halting = check_state(halt_line, &halt_name)?;

    let mut instructions = Vec::new();
    for (line, tokens) in instruction_lines {
        let parse_counter = |token: &str| -> Result<Counter, ParseError> {
            token
                .parse::<u8>()
                .ok()
                .and_then(Counter::from_index)
                .ok_or_else(|| {
                    ParseError::new(line, format!("counter must be 1 or 2, got `{token}`"))
                })
        };
        let instr = match tokens.get(1).map(String::as_str) {
            Some("inc") => {
                if tokens.len() != 5 || tokens[3] != "->" {
                    return Err(ParseError::new(
                        line,
                        "expected `<state> inc <1|2> -> <state>`",
                    ));
                }
                Instruction {
                    from: check_state(line, &tokens[0])?,
                    counter: parse_counter(&tokens[2])?,
                    target: check_state(line, &tokens[4])?,
                    alt: None,
                }
            }
            Some("test") => {
                if tokens.len() != 9
                    || tokens[3] != "zero"
                    || tokens[4] != "->"
                    || tokens[6] != "dec"
                    || tokens[7] != "->"
                {
                    return Err(ParseError::new(
                        line,
                        "expected `<state> test <1|2> zero -> <state> dec -> <state>`",
                    ));
                }
                Instruction {
                    from: check_state(line, &tokens[0])?,
                    counter: parse_counter(&tokens[2])?,
                    target: check_state(line, &tokens[5])?,
                    alt: Some(check_state(line, &tokens[8])?),
                }
            }
            _ => {
                return Err(ParseError::new(
                    line,
                    format!("expected an `inc` or `test` instruction, got `{}`", tokens.join(" ")),
                ));
            }
        };
        instructions.push(instr);
    }

    Ok(MinskyMachine {
        states: state_set,
        instructions,
        initial,
        halting,
    })
}
