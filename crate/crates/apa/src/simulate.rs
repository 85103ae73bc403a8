//! Replaying machine runs as guided transitions, and checking the
//! two-transitions-per-step correspondence.
//!
//! A machine step from configuration `c` by instruction `x` corresponds to
//! exactly two transitions of the encoded framework: the selection (family
//! 1 alone) and the commit (families 2+4, 3+5, or 6 alone). [`simulate`]
//! replays an interpreter run that way and validates the pairing;
//! [`halting_equivalence`] does the same along a shortest halting run and
//! additionally checks that the final state is a dead end; [`audit`]
//! explores the *unguided* transition system and reports how much of it
//! decodes back to machine configurations. The unguided system genuinely
//! contains extra branches (for example, committing only half of an
//! instruction's effect), so the audit is a diagnostic, not a proof.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::argument::{Argument, PersuasionTriple};
use crate::encoder::{EncodeError, EncodedFramework, StateClass};
use crate::explore::{reachable_from, ExploreLimits, StateGraph};
use crate::minsky::{Configuration, HaltOutcome, RunStatus, Strategy, Trace};
use crate::state::ApaState;
use crate::transition::{
    apply, enabled_persuasions, successors, Gamma, ReferenceSet, TransitionError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    /// The guided step cannot start here (not a configuration state, or the
    /// instruction does not apply to it).
    #[error("guided step is not applicable: {reason}")]
    NotApplicable { reason: String },
    /// A rule instance the encoding promises is not enabled.
    #[error("expected rule instance `{triple}` is not enabled at {state}")]
    MissingTriple {
        state: ApaState,
        triple: PersuasionTriple,
    },
    /// The guided run diverged from the machine run: the correspondence is
    /// falsified at this instance.
    #[error("simulation falsified: {detail}")]
    Falsified { detail: String },
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// The two selections fired for one machine step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuidedStep {
    /// Index of the machine instruction being realized.
    pub instr: usize,
    /// The selection singleton: instruction argument converts the machine
    /// state into the in-flight form.
    pub selection: Gamma,
    /// The commit selection: counter and state updates, fired together.
    pub effect: Gamma,
}

/// The two states a guided step passes through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuidedTransition {
    pub mid: ApaState,
    pub next: ApaState,
    pub step: GuidedStep,
}

/// A machine run replayed as guided transitions.
///
/// `apa` has exactly `2 * (minsky.len() - 1) + 1` states: state `2k`
/// encodes `minsky[k]` and state `2k + 1` is the mid-step state between
/// `minsky[k]` and `minsky[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuidedTrace {
    pub minsky: Vec<Configuration>,
    pub apa: Vec<ApaState>,
    pub steps: Vec<GuidedStep>,
    pub status: RunStatus,
}

impl GuidedTrace {
    /// Number of framework transitions taken.
    pub fn transitions(&self) -> usize {
        self.apa.len() - 1
    }

    /// Checks the pairing invariants against the encoding; any violation is
    /// a falsification.
    pub fn validate(&self, ef: &EncodedFramework) -> Result<(), SimulationError> {
        let steps = self.minsky.len().checked_sub(1).ok_or_else(|| {
            SimulationError::Falsified {
                detail: "guided trace has no configurations".into(),
            }
        })?;
        if self.apa.len() != 2 * steps + 1 || self.steps.len() != steps {
            return Err(SimulationError::Falsified {
                detail: format!(
                    "trace shape is off: {} configurations, {} states, {} guided steps",
                    self.minsky.len(),
                    self.apa.len(),
                    self.steps.len()
                ),
            });
        }
        for (k, config) in self.minsky.iter().enumerate() {
            let expected = ef.config_state(config)?;
            if self.apa[2 * k] != expected {
                return Err(SimulationError::Falsified {
                    detail: format!(
                        "state {} should encode {config} but is {}",
                        2 * k,
                        self.apa[2 * k]
                    ),
                });
            }
        }
        for (k, step) in self.steps.iter().enumerate() {
            match ef.classify(&self.apa[2 * k + 1]) {
                StateClass::Mid { instr, .. } if instr == step.instr => {}
                other => {
                    return Err(SimulationError::Falsified {
                        detail: format!(
                            "state {} should be mid-step for instruction {} but classifies as {other:?}",
                            2 * k + 1,
                            step.instr
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Fires the two transitions realizing instruction `instr` at the
/// configuration state `s`, checking each expected rule instance is enabled
/// before firing it.
pub fn guided_step(
    ef: &EncodedFramework,
    s: &ApaState,
    instr: usize,
) -> Result<GuidedTransition, SimulationError> {
    let machine = ef.machine();
    let instruction = machine.instructions.get(instr).ok_or_else(|| {
        SimulationError::NotApplicable {
            reason: format!("machine has no instruction {instr}"),
        }
    })?;
    let config = match ef.classify(s) {
        StateClass::Config(c) => c,
        other => {
            return Err(SimulationError::NotApplicable {
                reason: format!("state classifies as {other:?}, not a configuration"),
            });
        }
    };
    if config.q != instruction.from {
        return Err(SimulationError::NotApplicable {
            reason: format!(
                "instruction {instr} starts from `{}` but the configuration is at `{}`",
                instruction.from, config.q
            ),
        });
    }

    let fw = ef.framework();
    let no_reference = ReferenceSet::new();

    // First transition: fire the selection triple alone.
    let selection_triple = PersuasionTriple::convert(
        Argument::Instr(instr),
        Argument::MState(config.q.clone()),
        Argument::InstrConv(instr),
    );
    let enabled = enabled_persuasions(fw, s, &no_reference);
    if !enabled.contains(&selection_triple) {
        return Err(SimulationError::MissingTriple {
            state: s.clone(),
            triple: selection_triple,
        });
    }
    let selection: Gamma = [selection_triple].into_iter().collect();
    let mid = apply(s, &selection)?;

    // Second transition: fire the commit selection.
    let value = config.counter(instruction.counter);
    let ctr = |v: u64| match instruction.counter {
        crate::minsky::Counter::C1 => Argument::Counter1(v),
        crate::minsky::Counter::C2 => Argument::Counter2(v),
    };
    let select = Argument::InstrConv(instr);
    let effect: Gamma = match &instruction.alt {
        None => [
            PersuasionTriple::convert(select.clone(), ctr(value), ctr(value + 1)),
            PersuasionTriple::convert(
                ctr(value),
                select.clone(),
                Argument::MState(instruction.target.clone()),
            ),
        ]
        .into_iter()
        .collect(),
        Some(dec_target) if value > 0 => [
            PersuasionTriple::convert(select.clone(), ctr(value), ctr(value - 1)),
            PersuasionTriple::convert(
                ctr(value),
                select.clone(),
                Argument::MState(dec_target.clone()),
            ),
        ]
        .into_iter()
        .collect(),
        Some(_) => [PersuasionTriple::convert(
            ctr(0),
            select.clone(),
            Argument::MState(instruction.target.clone()),
        )]
        .into_iter()
        .collect(),
    };
    let enabled_mid = enabled_persuasions(fw, &mid, &no_reference);
    for triple in &effect {
        if !enabled_mid.contains(triple) {
            return Err(SimulationError::MissingTriple {
                state: mid.clone(),
                triple: triple.clone(),
            });
        }
    }
    let next = apply(&mid, &effect)?;

    // The landing state must encode the machine's own successor.
    let expected = machine.apply_instruction(instruction, &config);
    match ef.classify(&next) {
        StateClass::Config(found) if found == expected => {}
        other => {
            return Err(SimulationError::Falsified {
                detail: format!(
                    "instruction {instr} from {config} should land on {expected}, got {other:?}"
                ),
            });
        }
    }

    Ok(GuidedTransition {
        mid,
        next,
        step: GuidedStep {
            instr,
            selection,
            effect,
        },
    })
}

/// Replays an interpreter trace as guided transitions and validates the
/// pairing invariants.
fn replay(ef: &EncodedFramework, trace: &Trace) -> Result<GuidedTrace, SimulationError> {
    let mut apa = vec![ef.config_state(&trace.configs[0])?];
    let mut steps = Vec::new();
    for &instr in &trace.taken {
        let current = apa.last().expect("nonempty").clone();
        let transition = guided_step(ef, &current, instr)?;
        apa.push(transition.mid);
        apa.push(transition.next);
        steps.push(transition.step);
    }
    let guided = GuidedTrace {
        minsky: trace.configs.clone(),
        apa,
        steps,
        status: trace.status,
    };
    guided.validate(ef)?;
    Ok(guided)
}

/// Runs the machine from `c0` and replays the run as guided transitions.
pub fn simulate(
    ef: &EncodedFramework,
    c0: &Configuration,
    max_steps: usize,
    strategy: Strategy,
) -> Result<GuidedTrace, SimulationError> {
    if !ef.machine().states.contains(&c0.q) {
        return Err(EncodeError::UnknownState(c0.q.clone()).into());
    }
    let trace = ef.machine().run(c0, max_steps, strategy);
    replay(ef, &trace)
}

/// Verdict of [`halting_equivalence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltingVerdict {
    /// A shortest halting machine run exists, its guided replay lands on
    /// the encoding of the final configuration in exactly twice as many
    /// transitions, and that state is a dead end.
    Confirmed {
        minsky_steps: usize,
        apa_transitions: usize,
        final_config: Configuration,
    },
    /// No halting run within the budget; nothing to check.
    Unknown { explored: usize },
}

/// Searches for a shortest halting run and mechanically checks the
/// correspondence along it.
pub fn halting_equivalence(
    ef: &EncodedFramework,
    c0: &Configuration,
    budget: usize,
) -> Result<HaltingVerdict, SimulationError> {
    if !ef.machine().states.contains(&c0.q) {
        return Err(EncodeError::UnknownState(c0.q.clone()).into());
    }
    let (steps, configs, taken) = match ef.machine().halts(c0, budget) {
        HaltOutcome::Unknown { explored } => return Ok(HaltingVerdict::Unknown { explored }),
        HaltOutcome::Halted {
            steps,
            configs,
            taken,
        } => (steps, configs, taken),
    };
    let trace = Trace {
        configs,
        taken,
        status: RunStatus::Halted,
    };
    let guided = replay(ef, &trace)?;
    if guided.transitions() != 2 * steps {
        return Err(SimulationError::Falsified {
            detail: format!(
                "{steps} machine steps came out as {} transitions instead of {}",
                guided.transitions(),
                2 * steps
            ),
        });
    }
    let final_config = trace.configs.last().expect("nonempty").clone();
    let final_state = guided.apa.last().expect("nonempty");
    let out = successors(
        ef.framework(),
        final_state,
        &ReferenceSet::new(),
        &Default::default(),
    )?;
    if !out.states.is_empty() {
        return Err(SimulationError::Falsified {
            detail: format!(
                "halting state {final_state} has {} successors, expected none",
                out.states.len()
            ),
        });
    }
    Ok(HaltingVerdict::Confirmed {
        minsky_steps: steps,
        apa_transitions: guided.transitions(),
        final_config,
    })
}

/// What the unguided state space looks like next to the machine's own
/// reachable configurations.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub graph: StateGraph,
    /// Classification of each graph node, parallel to `graph.nodes`.
    pub classes: Vec<StateClass>,
    pub config_states: usize,
    pub mid_states: usize,
    pub foreign_states: usize,
    /// Nodes whose successor enumeration overflowed the budget.
    pub overflow_states: usize,
    /// Distinct configurations decoded from explored states.
    pub decoded_configs: BTreeSet<Configuration>,
    /// Decoded configurations the machine itself never reaches within the
    /// exploration bound (rogue branches, or out of range when the machine
    /// exploration is incomplete).
    pub unmatched_configs: BTreeSet<Configuration>,
    /// Every foreign state found, in discovery order.
    pub foreign_witnesses: Vec<ApaState>,
    /// Machine configurations visited by the bounded interpreter search.
    pub minsky_visited: usize,
    /// True when the interpreter search closed before hitting its bounds.
    pub minsky_complete: bool,
}

impl AuditReport {
    /// True when every decoded configuration is machine-reachable within
    /// the bound. Only meaningful as a clean verdict when both the graph
    /// and the interpreter search are complete.
    pub fn all_configs_matched(&self) -> bool {
        self.unmatched_configs.is_empty()
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "explored {} states, {} transitions (complete: {})",
            self.graph.nodes.len(),
            self.graph.edges.len(),
            self.graph.complete
        );
        let _ = writeln!(
            out,
            "classes: {} configuration, {} mid-step, {} foreign",
            self.config_states, self.mid_states, self.foreign_states
        );
        if self.overflow_states > 0 {
            let _ = writeln!(
                out,
                "{} states overflowed successor enumeration",
                self.overflow_states
            );
        }
        let _ = writeln!(
            out,
            "decoded {} distinct configurations; machine reaches {} within the bound (complete: {})",
            self.decoded_configs.len(),
            self.minsky_visited,
            self.minsky_complete
        );
        if self.unmatched_configs.is_empty() {
            let _ = writeln!(out, "every decoded configuration is machine-reachable");
        } else {
            let _ = writeln!(
                out,
                "{} decoded configurations are not machine-reachable within the bound:",
                self.unmatched_configs.len()
            );
            for c in &self.unmatched_configs {
                let _ = writeln!(out, "  {c}");
            }
        }
        for state in &self.foreign_witnesses {
            let _ = writeln!(out, "foreign: {state}");
        }
        out
    }

    /// Stable machine-readable summary, one `key=value` per line.
    pub fn to_keyvalue(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states={}", self.graph.nodes.len());
        let _ = writeln!(out, "transitions={}", self.graph.edges.len());
        let _ = writeln!(out, "complete={}", self.graph.complete);
        let _ = writeln!(out, "class.config={}", self.config_states);
        let _ = writeln!(out, "class.mid={}", self.mid_states);
        let _ = writeln!(out, "class.foreign={}", self.foreign_states);
        let _ = writeln!(out, "overflow_states={}", self.overflow_states);
        let _ = writeln!(out, "decoded_configs={}", self.decoded_configs.len());
        let _ = writeln!(out, "minsky.visited={}", self.minsky_visited);
        let _ = writeln!(out, "minsky.complete={}", self.minsky_complete);
        let _ = writeln!(out, "configs_matched={}", self.all_configs_matched());
        for (i, c) in self.unmatched_configs.iter().enumerate() {
            let _ = writeln!(out, "unmatched.{i}={c}");
        }
        for (i, s) in self.foreign_witnesses.iter().enumerate() {
            let _ = writeln!(out, "foreign.{i}={s}");
        }
        out
    }

    /// DOT rendering with nodes colored by class: configuration states
    /// green, mid-step states yellow, foreign states red.
    pub fn to_dot(&self) -> String {
        self.graph.to_dot_styled(|i, _| {
            Some(
                match self.classes[i] {
                    StateClass::Config(_) => "palegreen",
                    StateClass::Mid { .. } => "khaki",
                    StateClass::Foreign(_) => "lightcoral",
                }
                .to_string(),
            )
        })
    }
}

/// Explores the unguided transition system from the encoding of `c0` and
/// classifies everything it finds.
///
/// The machine side is explored breadth-first to the same depth bound, so a
/// decoded configuration counts as matched only when the interpreter itself
/// reaches it within that many steps (a guided pair needs at most half the
/// depth, so the bound is never the reason a genuine pair goes unmatched).
pub fn audit(
    ef: &EncodedFramework,
    c0: &Configuration,
    limits: &ExploreLimits,
) -> Result<AuditReport, SimulationError> {
    let start = ef.config_state(c0)?;
    let graph = reachable_from(ef.framework(), &start, &ReferenceSet::new(), limits);
    let classes: Vec<StateClass> = graph.nodes.iter().map(|n| ef.classify(&n.state)).collect();

    let mut config_states = 0;
    let mut mid_states = 0;
    let mut foreign_states = 0;
    let mut decoded_configs = BTreeSet::new();
    let mut foreign_witnesses = Vec::new();
    for (node, class) in graph.nodes.iter().zip(&classes) {
        match class {
            StateClass::Config(c) => {
                config_states += 1;
                decoded_configs.insert(c.clone());
            }
            StateClass::Mid { .. } => mid_states += 1,
            StateClass::Foreign(_) => {
                foreign_states += 1;
                foreign_witnesses.push(node.state.clone());
            }
        }
    }
    let overflow_states = graph.nodes.iter().filter(|n| n.overflow).count();

    let (visited, minsky_complete) =
        machine_reachable(ef, c0, limits.max_depth, limits.max_states);
    let unmatched_configs: BTreeSet<Configuration> = decoded_configs
        .iter()
        .filter(|c| !visited.contains(*c))
        .cloned()
        .collect();

    Ok(AuditReport {
        graph,
        classes,
        config_states,
        mid_states,
        foreign_states,
        overflow_states,
        decoded_configs,
        unmatched_configs,
        foreign_witnesses,
        minsky_visited: visited.len(),
        minsky_complete,
    })
}

/// Bounded breadth-first closure of the machine's own step relation.
fn machine_reachable(
    ef: &EncodedFramework,
    c0: &Configuration,
    max_depth: usize,
    max_configs: usize,
) -> (BTreeSet<Configuration>, bool) {
    let machine = ef.machine();
    let mut visited: BTreeSet<Configuration> = [c0.clone()].into_iter().collect();
    let mut frontier = vec![c0.clone()];
    let mut complete = true;
    for _ in 0..max_depth {
        let mut next_frontier = Vec::new();
        for config in &frontier {
            for succ in machine.step(config) {
                if visited.contains(&succ) {
                    continue;
                }
                if visited.len() >= max_configs {
                    complete = false;
                    continue;
                }
                visited.insert(succ.clone());
                next_frontier.push(succ);
            }
        }
        if next_frontier.is_empty() {
            return (visited, complete);
        }
        frontier = next_frontier;
    }
    // Depth bound hit with work left.
    if frontier
        .iter()
        .any(|c| !machine.step(c).is_empty())
    {
        complete = false;
    }
    (visited, complete)
}
