//! State-wise acceptability under one-step elimination.
//!
//! Classical acceptability is evaluated inside one state of the dynamics,
//! strengthened by a second requirement: a defended argument must also
//! survive every one-step transition taken with the candidate set as the
//! reference set. Since production overrides removal, an argument can only
//! disappear through an enabled conversion with a different result, which
//! is what [`eliminable`] checks directly.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::argument::Argument;
use crate::framework::Framework;
use crate::state::ApaState;
use crate::transition::{attacks_in, enabled_persuasions, ReferenceSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    /// The state is too large for exhaustive subset enumeration.
    #[error("state has {visible} visible arguments, over the enumeration bound of {bound}")]
    SizeExceeded { visible: usize, bound: usize },
}

/// True when no two members of `candidate` attack each other in `s`.
///
/// Invisible members cannot take part in any attack, so they never break
/// conflict-freeness; properness is a separate check.
pub fn conflict_free(fw: &Framework, s: &ApaState, candidate: &BTreeSet<Argument>) -> bool {
    candidate
        .iter()
        .all(|a| candidate.iter().all(|b| !attacks_in(fw, s, a, b)))
}

/// True when every member of `candidate` is visible in `s`.
pub fn proper(s: &ApaState, candidate: &BTreeSet<Argument>) -> bool {
    candidate.iter().all(|a| s.contains(a))
}

/// True when some single enabled conversion can remove `a` from `s`, taking
/// `reference` as the reference set.
///
/// This is exactly the condition under which *any* selection of enabled
/// persuasions removes `a`: a selection removes `a` only if it contains an
/// enabled conversion of `a` whose result is a different argument (a
/// self-producing conversion puts `a` straight back), and any such
/// conversion already removes `a` when fired alone.
pub fn eliminable(fw: &Framework, s: &ApaState, reference: &ReferenceSet, a: &Argument) -> bool {
    enabled_persuasions(fw, s, reference)
        .iter()
        .any(|t| t.target.as_ref() == Some(a) && t.result != *a)
}

/// True when `candidate` defends `a` in `s`.
///
/// Vacuously true for invisible `a`. Otherwise `candidate` must counter
/// every visible attacker of `a`, and `a` must survive every one-step
/// transition taken with `candidate` as the reference set.
pub fn defends(fw: &Framework, s: &ApaState, candidate: &BTreeSet<Argument>, a: &Argument) -> bool {
    if !s.contains(a) {
        return true;
    }
    let countered = s.iter().all(|attacker| {
        !attacks_in(fw, s, attacker, a)
            || candidate.iter().any(|d| attacks_in(fw, s, d, attacker))
    });
    countered && !eliminable(fw, s, candidate, a)
}

/// True when `candidate` is admissible in `s`: proper, conflict-free, and
/// defending each of its members.
pub fn admissible(fw: &Framework, s: &ApaState, candidate: &BTreeSet<Argument>) -> bool {
    proper(s, candidate)
        && conflict_free(fw, s, candidate)
        && candidate.iter().all(|a| defends(fw, s, candidate, a))
}

/// True when `candidate` is complete in `s`: admissible and containing
/// every visible argument it defends.
pub fn complete(fw: &Framework, s: &ApaState, candidate: &BTreeSet<Argument>) -> bool {
    admissible(fw, s, candidate)
        && s.iter()
            .all(|a| !defends(fw, s, candidate, a) || candidate.contains(a))
}

/// All admissible subsets of the visible arguments, in lexicographic order.
pub fn enumerate_admissible(
    fw: &Framework,
    s: &ApaState,
    bound: usize,
) -> Result<Vec<BTreeSet<Argument>>, SemanticsError> {
    enumerate_where(fw, s, bound, admissible)
}

/// All complete subsets of the visible arguments, in lexicographic order.
pub fn enumerate_complete(
    fw: &Framework,
    s: &ApaState,
    bound: usize,
) -> Result<Vec<BTreeSet<Argument>>, SemanticsError> {
    enumerate_where(fw, s, bound, complete)
}

fn enumerate_where(
    fw: &Framework,
    s: &ApaState,
    bound: usize,
    keep: impl Fn(&Framework, &ApaState, &BTreeSet<Argument>) -> bool,
) -> Result<Vec<BTreeSet<Argument>>, SemanticsError> {
    let visible: Vec<&Argument> = s.iter().collect();
    let n = visible.len();
    if n > bound || n >= 64 {
        return Err(SemanticsError::SizeExceeded {
            visible: n,
            bound,
        });
    }
    let mut out = Vec::new();
    for mask in 0..(1u64 << n) {
        let candidate: BTreeSet<Argument> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| visible[i].clone())
            .collect();
        if keep(fw, s, &candidate) {
            out.push(candidate);
        }
    }
    out.sort();
    Ok(out)
}
