//! Frameworks: universe, attacks, persuasion providers, and the text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::argument::{Argument, PersuasionTriple};
use crate::state::ApaState;
use crate::ParseError;

/// The (possibly infinite) pool of arguments a framework may ever show.
#[derive(Clone)]
pub enum Universe {
    /// An explicit finite argument set.
    Finite(BTreeSet<Argument>),
    /// A membership rule, for frameworks with infinitely many arguments.
    Predicate(Arc<dyn Fn(&Argument) -> bool + Send + Sync>),
}

impl Universe {
    pub fn contains(&self, argument: &Argument) -> bool {
        match self {
            Universe::Finite(set) => set.contains(argument),
            Universe::Predicate(p) => p(argument),
        }
    }

    /// The explicit argument set, when the universe is finite.
    pub fn as_finite(&self) -> Option<&BTreeSet<Argument>> {
        match self {
            Universe::Finite(set) => Some(set),
            Universe::Predicate(_) => None,
        }
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Finite(set) => write!(f, "Universe::Finite({} arguments)", set.len()),
            Universe::Predicate(_) => f.write_str("Universe::Predicate"),
        }
    }
}

/// Source of persuasion triples.
///
/// Implementations must be deterministic and must only return triples whose
/// source is visible in `state` and whose target, when present, is visible
/// too; results may lie outside the state but must belong to the universe.
pub trait PersuasionProvider: Send + Sync {
    fn visible_triples(&self, state: &ApaState) -> Vec<PersuasionTriple>;
}

/// Provider backed by an explicit finite triple set.
#[derive(Debug, Clone, Default)]
pub struct ExplicitPersuasions {
    triples: BTreeSet<PersuasionTriple>,
}

impl ExplicitPersuasions {
    pub fn new(triples: BTreeSet<PersuasionTriple>) -> Self {
        ExplicitPersuasions { triples }
    }

    pub fn triples(&self) -> &BTreeSet<PersuasionTriple> {
        &self.triples
    }
}

impl PersuasionProvider for ExplicitPersuasions {
    fn visible_triples(&self, state: &ApaState) -> Vec<PersuasionTriple> {
        self.triples
            .iter()
            .filter(|t| state.contains(&t.source))
            .filter(|t| t.target.as_ref().is_none_or(|a| state.contains(a)))
            .cloned()
            .collect()
    }
}

/// Construction-time validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameworkError {
    #[error("argument `{argument}` used as {role} is not in the universe")]
    OutsideUniverse {
        argument: Argument,
        role: &'static str,
    },
}

/// An abstract persuasion argumentation framework.
///
/// Holds the argument universe, the attack relation, a persuasion provider
/// and the initial state. The attack relation is always finite and explicit;
/// persuasions may be materialized lazily by the provider.
pub struct Framework {
    universe: Universe,
    attacks: BTreeSet<(Argument, Argument)>,
    provider: Box<dyn PersuasionProvider>,
    initial: ApaState,
}

impl Framework {
    /// Builds a framework, checking that the initial state and all attack
    /// endpoints lie inside the universe.
    pub fn new(
        universe: Universe,
        attacks: BTreeSet<(Argument, Argument)>,
        provider: Box<dyn PersuasionProvider>,
        initial: ApaState,
    ) -> Result<Self, FrameworkError> {
        for a in initial.iter() {
            if !universe.contains(a) {
                return Err(FrameworkError::OutsideUniverse {
                    argument: a.clone(),
                    role: "initial state member",
                });
            }
        }
        for (a1, a2) in &attacks {
            for (a, role) in [(a1, "attack source"), (a2, "attack target")] {
                if !universe.contains(a) {
                    return Err(FrameworkError::OutsideUniverse {
                        argument: a.clone(),
                        role,
                    });
                }
            }
        }
        Ok(Framework {
            universe,
            attacks,
            provider,
            initial,
        })
    }

    /// Builds a finite framework from explicit parts, additionally checking
    /// that every persuasion participant lies inside the universe.
    pub fn finite(
        arguments: BTreeSet<Argument>,
        attacks: BTreeSet<(Argument, Argument)>,
        triples: BTreeSet<PersuasionTriple>,
        initial: ApaState,
    ) -> Result<Self, FrameworkError> {
        let universe = Universe::Finite(arguments);
        for t in &triples {
            let mut parts = vec![(&t.source, "persuasion source"), (&t.result, "persuasion result")];
            if let Some(target) = &t.target {
                parts.push((target, "persuasion target"));
            }
            for (a, role) in parts {
                if !universe.contains(a) {
                    return Err(FrameworkError::OutsideUniverse {
                        argument: a.clone(),
                        role,
                    });
                }
            }
        }
        Framework::new(
            universe,
            attacks,
            Box::new(ExplicitPersuasions::new(triples)),
            initial,
        )
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn attacks(&self) -> &BTreeSet<(Argument, Argument)> {
        &self.attacks
    }

    pub fn initial(&self) -> &ApaState {
        &self.initial
    }

    /// True when the attack relation contains `(a1, a2)`.
    pub fn has_attack(&self, a1: &Argument, a2: &Argument) -> bool {
        self.attacks.contains(&(a1.clone(), a2.clone()))
    }

    /// All provider triples whose participants are visible in `state`.
    pub fn visible_triples(&self, state: &ApaState) -> Vec<PersuasionTriple> {
        self.provider.visible_triples(state)
    }
}

impl fmt::Debug for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Framework")
            .field("universe", &self.universe)
            .field("attacks", &self.attacks.len())
            .field("initial", &self.initial)
            .finish()
    }
}

/// Parses the line-oriented framework format.
///
/// ```text
/// # comment
/// arg a
/// arg b
/// attack a b
/// induce a -> c
/// convert a : b -> c
/// init a b
/// ```
///
/// Every referenced name must be declared with `arg` first (declaration
/// order within the file does not matter). `init` lines accumulate.
pub fn parse_framework(text: &str) -> Result<Framework, ParseError> {
    let mut arguments: BTreeMap<String, usize> = BTreeMap::new();

    // First pass: collect declared argument names.
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = match content_tokens(raw) {
            Some(t) => t,
            None => continue,
        };
        if tokens[0] != "arg" {
            continue;
        }
        if tokens.len() != 2 {
            return Err(ParseError::new(line, "expected `arg <name>`"));
        }
        let name = tokens[1];
        if name == ":" || name == "->" {
            return Err(ParseError::new(
                line,
                format!("`{name}` cannot be used as an argument name"),
            ));
        }
        if arguments.insert(name.to_string(), line).is_some() {
            return Err(ParseError::new(
                line,
                format!("argument `{name}` declared twice"),
            ));
        }
    }

    let resolve = |line: usize, name: &str| -> Result<Argument, ParseError> {
        if arguments.contains_key(name) {
            Ok(Argument::opaque(name))
        } else {
            Err(ParseError::new(
                line,
                format!("argument `{name}` is not declared with an `arg` line"),
            ))
        }
    };

    let mut attacks = BTreeSet::new();
    let mut triples = BTreeSet::new();
    let mut initial = BTreeSet::new();

    // Second pass: everything else.
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = match content_tokens(raw) {
            Some(t) => t,
            None => continue,
        };
        match tokens[0] {
            "arg" => {}
            "attack" => {
                if tokens.len() != 3 {
                    return Err(ParseError::new(line, "expected `attack <from> <to>`"));
                }
                attacks.insert((resolve(line, tokens[1])?, resolve(line, tokens[2])?));
            }
            "induce" => {
                if tokens.len() != 4 || tokens[2] != "->" {
                    return Err(ParseError::new(line, "expected `induce <source> -> <result>`"));
                }
                triples.insert(PersuasionTriple::induce(
                    resolve(line, tokens[1])?,
                    resolve(line, tokens[3])?,
                ));
            }
            "convert" => {
                if tokens.len() != 6 || tokens[2] != ":" || tokens[4] != "->" {
                    return Err(ParseError::new(
                        line,
                        "expected `convert <source> : <target> -> <result>`",
                    ));
                }
                triples.insert(PersuasionTriple::convert(
                    resolve(line, tokens[1])?,
                    resolve(line, tokens[3])?,
                    resolve(line, tokens[5])?,
                ));
            }
            "init" => {
                for name in &tokens[1..] {
                    initial.insert(resolve(line, name)?);
                }
            }
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let argument_set: BTreeSet<Argument> = arguments.keys().map(Argument::opaque).collect();
    Framework::finite(argument_set, attacks, triples, ApaState::new(initial))
        .map_err(|e| ParseError::new(0, e.to_string()))
}

/// Strips comments and blank lines; returns the whitespace-split tokens.
fn content_tokens(raw: &str) -> Option<Vec<&str>> {
    let before_comment = match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    };
    let tokens: Vec<&str> = before_comment.split_whitespace().collect();
    if tokens.is_empty() {
        None
    } else {
        Some(tokens)
    }
}
