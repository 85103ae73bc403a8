//! The transition semantics: enabled persuasions, firing, successors.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::argument::{Argument, PersuasionTriple};
use crate::framework::Framework;
use crate::state::ApaState;

/// A set of persuasion triples selected to fire simultaneously.
pub type Gamma = BTreeSet<PersuasionTriple>;

/// Arguments whose say disables the persuasions they attack.
pub type ReferenceSet = BTreeSet<Argument>;

/// Budgets for subset enumeration during successor computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Hard cap on the number of nonempty subsets of the enabled set.
    pub subset_budget: u64,
    /// Truncate after this many distinct successor states.
    pub successor_cap: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            subset_budget: 1 << 16,
            successor_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    /// A transition must fire a nonempty selection of enabled persuasions.
    #[error("a transition requires a nonempty persuasion selection")]
    EmptySelection,
    /// Enumerating every nonempty subset of the enabled set would exceed the budget.
    #[error("{enabled} enabled persuasions give more than {budget} nonempty subsets")]
    EnumerationOverflow { enabled: usize, budget: u64 },
}

/// True when `a1` attacks `a2` inside the state induced by `s`: both
/// arguments must be visible and the pair must be in the attack relation.
pub fn attacks_in(fw: &Framework, s: &ApaState, a1: &Argument, a2: &Argument) -> bool {
    s.contains(a1) && s.contains(a2) && fw.has_attack(a1, a2)
}

/// The persuasions enabled at `s` under `reference`.
///
/// A provider triple is enabled when its source is visible, its target (for
/// conversions) is visible, and no member of the reference set attacks the
/// source within `s`. Invisible reference members cannot disable anything,
/// because an attack only acts between visible arguments.
pub fn enabled_persuasions(fw: &Framework, s: &ApaState, reference: &ReferenceSet) -> Gamma {
    fw.visible_triples(s)
        .into_iter()
        .filter(|t| s.contains(&t.source))
        .filter(|t| t.target.as_ref().is_none_or(|a| s.contains(a)))
        .filter(|t| !reference.iter().any(|r| attacks_in(fw, s, r, &t.source)))
        .collect()
}

/// Arguments removed when `gamma` fires at `s`: the visible conversion
/// targets of triples whose source is visible.
pub fn neg_set(s: &ApaState, gamma: &Gamma) -> BTreeSet<Argument> {
    gamma
        .iter()
        .filter(|t| s.contains(&t.source))
        .filter_map(|t| t.target.as_ref())
        .filter(|target| s.contains(target))
        .cloned()
        .collect()
}

/// Arguments produced when `gamma` fires at `s`: the results of triples
/// whose source is visible and whose target is visible or absent.
pub fn pos_set(s: &ApaState, gamma: &Gamma) -> BTreeSet<Argument> {
    gamma
        .iter()
        .filter(|t| s.contains(&t.source))
        .filter(|t| t.target.as_ref().is_none_or(|a| s.contains(a)))
        .map(|t| t.result.clone())
        .collect()
}

/// Fires `gamma` at `s`: removes the converted arguments, then adds every
/// produced one. Production wins, so an argument that is both converted
/// away and produced stays visible.
pub fn apply(s: &ApaState, gamma: &Gamma) -> Result<ApaState, TransitionError> {
    if gamma.is_empty() {
        return Err(TransitionError::EmptySelection);
    }
    let neg = neg_set(s, gamma);
    let pos = pos_set(s, gamma);
    Ok(s.iter()
        .filter(|a| !neg.contains(a))
        .cloned()
        .chain(pos)
        .collect())
}

/// The distinct one-step successors of `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorSet {
    pub states: BTreeSet<ApaState>,
    /// True when the successor cap dropped at least one distinct state.
    pub truncated: bool,
}

/// Distinct successors together with one witness selection each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledSuccessors {
    /// Sorted by state; the witness is the first selection (in subset
    /// enumeration order over the sorted enabled set) reaching that state.
    pub edges: Vec<(Gamma, ApaState)>,
    pub truncated: bool,
}

/// Enumerates every nonempty subset of the enabled set and fires it.
pub fn successors(
    fw: &Framework,
    s: &ApaState,
    reference: &ReferenceSet,
    limits: &EnumerationLimits,
) -> Result<SuccessorSet, TransitionError> {
    let labelled = successor_edges(fw, s, reference, limits)?;
    Ok(SuccessorSet {
        states: labelled.edges.into_iter().map(|(_, state)| state).collect(),
        truncated: labelled.truncated,
    })
}

/// Like [`successors`], but keeps one witness selection per distinct state.
pub fn successor_edges(
    fw: &Framework,
    s: &ApaState,
    reference: &ReferenceSet,
    limits: &EnumerationLimits,
) -> Result<LabelledSuccessors, TransitionError> {
    let enabled: Vec<PersuasionTriple> = enabled_persuasions(fw, s, reference).into_iter().collect();
    let m = enabled.len();
    if m >= 64 || (m > 0 && (1u128 << m) - 1 > u128::from(limits.subset_budget)) {
        return Err(TransitionError::EnumerationOverflow {
            enabled: m,
            budget: limits.subset_budget,
        });
    }

    let mut found: BTreeMap<ApaState, Gamma> = BTreeMap::new();
    let mut truncated = false;
    let total: u64 = if m == 0 { 0 } else { (1u64 << m) - 1 };
    for mask in 1..=total {
        let gamma: Gamma = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| enabled[i].clone())
            .collect();
        let next = apply(s, &gamma).expect("nonempty selection");
        if found.contains_key(&next) {
            continue;
        }
        if found.len() == limits.successor_cap {
            truncated = true;
            break;
        }
        found.insert(next, gamma);
    }

    Ok(LabelledSuccessors {
        edges: found.into_iter().map(|(state, gamma)| (gamma, state)).collect(),
        truncated,
    })
}
