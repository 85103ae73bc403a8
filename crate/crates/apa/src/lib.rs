//! Dynamics for abstract persuasion argumentation (APA).
//!
//! An APA framework couples a plain attack relation with *persuasion*
//! triples that induce new arguments or convert visible ones. Firing any
//! nonempty subset of the enabled persuasions transforms the set of visible
//! arguments, giving a transition system over argument sets.
//!
//! The crate provides:
//!
//! * the transition semantics itself ([`transition`]) plus breadth-first
//!   state-space exploration with DOT export ([`explore`]),
//! * state-wise acceptability: conflict-free, admissible and complete sets
//!   under one-step elimination ([`semantics`]),
//! * a two-counter machine interpreter ([`minsky`]),
//! * a compiler from counter machines into APA frameworks whose persuasion
//!   rules are materialized lazily ([`encoder`]),
//! * a checker that replays machine runs as guided APA transitions and
//!   verifies the two-transitions-per-step correspondence ([`simulate`]).

pub mod argument;
pub mod encoder;
pub mod explore;
pub mod framework;
pub mod minsky;
pub mod semantics;
pub mod simulate;
pub mod state;
pub mod transition;

pub use argument::{Argument, PersuasionTriple};
pub use encoder::{encode, EncodeError, EncodedFramework, StateClass};
pub use explore::{reachable, reachable_from, ExploreLimits, GraphEdge, GraphNode, StateGraph};
pub use framework::{
    parse_framework, ExplicitPersuasions, Framework, FrameworkError, PersuasionProvider, Universe,
};
pub use minsky::{
    parse_program, Configuration, Counter, HaltOutcome, Instruction, MachineViolation,
    MinskyMachine, RunStatus, Strategy, Trace,
};
pub use semantics::{
    admissible, complete, conflict_free, defends, eliminable, enumerate_admissible,
    enumerate_complete, proper, SemanticsError,
};
pub use simulate::{
    audit, guided_step, halting_equivalence, simulate, AuditReport, GuidedStep, GuidedTrace,
    GuidedTransition, HaltingVerdict, SimulationError,
};
pub use state::ApaState;
pub use transition::{
    apply, attacks_in, enabled_persuasions, neg_set, pos_set, successor_edges, successors,
    EnumerationLimits, Gamma, LabelledSuccessors, ReferenceSet, SuccessorSet, TransitionError,
};

/// Failure while parsing one of the line-oriented text formats.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number of the offending line.
    pub line: usize,
    /// What was wrong with it.
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}
