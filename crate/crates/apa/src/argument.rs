//! Arguments and persuasion triples.

use std::fmt;

/// An abstract argument.
///
/// The tagged constructors keep the argument families pairwise disjoint:
/// counter values, machine states, instruction arguments and their in-flight
/// forms can never collide with each other or with free-form arguments. The
/// derived `Ord` supplies the total order used everywhere a canonical
/// rendering or iteration order is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Argument {
    /// A value of the first counter.
    Counter1(u64),
    /// A value of the second counter.
    Counter2(u64),
    /// A machine control state, by name.
    MState(String),
    /// An instruction argument, by instruction index.
    Instr(usize),
    /// The in-flight form of an instruction argument, marking an instruction
    /// whose effect has been selected but not yet committed.
    InstrConv(usize),
    /// A free-form argument, as declared in framework text files.
    Opaque(String),
}

impl Argument {
    /// Free-form argument with the given name.
    pub fn opaque(name: impl Into<String>) -> Self {
        Argument::Opaque(name.into())
    }

    /// Machine-state argument for the given state name.
    pub fn mstate(name: impl Into<String>) -> Self {
        Argument::MState(name.into())
    }
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Argument::Counter1(n) => write!(f, "c1:{n}"),
            Argument::Counter2(n) => write!(f, "c2:{n}"),
            Argument::MState(q) => write!(f, "q:{q}"),
            Argument::Instr(k) => write!(f, "i:{k}"),
            Argument::InstrConv(k) => write!(f, "ic:{k}"),
            Argument::Opaque(s) => f.write_str(s),
        }
    }
}

/// A persuasion: the source argument tries to induce a new argument
/// (`target` is `None`) or to convert a visible one into the result.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersuasionTriple {
    /// The persuading argument; must be visible for the triple to act.
    pub source: Argument,
    /// The argument to convert, or `None` for an inducement.
    pub target: Option<Argument>,
    /// The argument produced when the triple fires.
    pub result: Argument,
}

impl PersuasionTriple {
    /// Inducement: `source` brings `result` into the state.
    pub fn induce(source: Argument, result: Argument) -> Self {
        PersuasionTriple {
            source,
            target: None,
            result,
        }
    }

    /// Conversion: `source` turns the visible `target` into `result`.
    pub fn convert(source: Argument, target: Argument, result: Argument) -> Self {
        PersuasionTriple {
            source,
            target: Some(target),
            result,
        }
    }

    /// True when this triple converts an existing argument.
    pub fn is_conversion(&self) -> bool {
        self.target.is_some()
    }
}

impl fmt::Display for PersuasionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.target {
            Some(t) => write!(f, "{} : {} -> {}", self.source, t, self.result),
            None => write!(f, "{} -> {}", self.source, self.result),
        }
    }
}
