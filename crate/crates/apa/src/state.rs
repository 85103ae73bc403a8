//! States: canonical finite sets of visible arguments.

use std::collections::BTreeSet;
use std::fmt;

use crate::argument::Argument;

/// The set of arguments visible at one point of the dynamics.
///
/// Backed by a sorted set, so two states with the same members are equal,
/// hash identically and render identically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ApaState {
    visible: BTreeSet<Argument>,
}

impl ApaState {
    /// The empty state.
    pub fn empty() -> Self {
        ApaState::default()
    }

    pub fn new(visible: BTreeSet<Argument>) -> Self {
        ApaState { visible }
    }

    pub fn contains(&self, argument: &Argument) -> bool {
        self.visible.contains(argument)
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Argument> {
        self.visible.iter()
    }

    /// The underlying sorted set.
    pub fn visible(&self) -> &BTreeSet<Argument> {
        &self.visible
    }

    /// True when every member of `other` is visible here.
    pub fn is_superset(&self, other: &BTreeSet<Argument>) -> bool {
        other.iter().all(|a| self.visible.contains(a))
    }
}

impl FromIterator<Argument> for ApaState {
    fn from_iter<I: IntoIterator<Item = Argument>>(iter: I) -> Self {
        ApaState {
            visible: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for ApaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.visible.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}
