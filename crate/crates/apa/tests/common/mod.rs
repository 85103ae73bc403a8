//! Shared fixtures for the integration suites: seeded random generators for
//! machines and finite frameworks, plus oracles that re-derive transition
//! behaviour from the raw framework data without calling the library's own
//! enabledness or update code.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;

use apa::{
    ApaState, Argument, Configuration, Counter, Framework, Instruction, MinskyMachine,
    PersuasionTriple,
};

/// Counter-transfer program: moves the second counter into the first.
pub const ADDITION: &str = "\
states q0 q1 qf
init q0
halt qf
q0 test 2 zero -> qf dec -> q1
q1 inc 1 -> q0
";

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// A finite framework kept as raw parts so the oracles can work on plain
/// lists instead of going through the library accessors.
pub struct RawFramework {
    pub arguments: Vec<Argument>,
    pub attacks: Vec<(Argument, Argument)>,
    pub triples: Vec<PersuasionTriple>,
    pub initial: BTreeSet<Argument>,
}

impl RawFramework {
    pub fn build(&self) -> Framework {
        Framework::finite(
            self.arguments.iter().cloned().collect(),
            self.attacks.iter().cloned().collect(),
            self.triples.iter().cloned().collect(),
            ApaState::new(self.initial.clone()),
        )
        .expect("generated parts are inside the declared universe")
    }

    pub fn initial_state(&self) -> ApaState {
        ApaState::new(self.initial.clone())
    }
}

fn pick<T: Clone>(rng: &mut StdRng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

/// A framework over at most four arguments with at most five persuasion
/// triples, random attacks, and a random initial state.
pub fn random_framework(rng: &mut StdRng) -> RawFramework {
    let n = rng.gen_range(1..=NAMES.len());
    let arguments: Vec<Argument> = NAMES[..n].iter().copied().map(Argument::opaque).collect();
    let mut attacks = Vec::new();
    for a in &arguments {
        for b in &arguments {
            if rng.gen_bool(0.2) {
                attacks.push((a.clone(), b.clone()));
            }
        }
    }
    let mut triples = Vec::new();
    for _ in 0..rng.gen_range(0..=5) {
        let source = pick(rng, &arguments);
        let result = pick(rng, &arguments);
        triples.push(if rng.gen_bool(0.7) {
            PersuasionTriple::convert(source, pick(rng, &arguments), result)
        } else {
            PersuasionTriple::induce(source, result)
        });
    }
    let initial = arguments
        .iter()
        .filter(|_| rng.gen_bool(0.7))
        .cloned()
        .collect();
    RawFramework {
        arguments,
        attacks,
        triples,
        initial,
    }
}

/// A valid machine with at most five states (one of them halting) and at
/// most eight instructions; every non-halting state gets at least one.
pub fn random_machine(rng: &mut StdRng) -> MinskyMachine {
    let working = rng.gen_range(1..=4);
    let mut states: BTreeSet<String> = (0..working).map(|i| format!("q{i}")).collect();
    states.insert("qf".into());
    let all: Vec<String> = states.iter().cloned().collect();
    let mut instructions = Vec::new();
    for i in 0..working {
        instructions.push(random_instruction(rng, format!("q{i}"), &all));
    }
    for _ in 0..rng.gen_range(0..=(8 - working)) {
        let from = format!("q{}", rng.gen_range(0..working));
        instructions.push(random_instruction(rng, from, &all));
    }
    let machine = MinskyMachine {
        states,
        instructions,
        initial: "q0".into(),
        halting: "qf".into(),
    };
    assert!(machine.is_valid(), "generator produced an invalid machine");
    machine
}

fn random_instruction(rng: &mut StdRng, from: String, all: &[String]) -> Instruction {
    Instruction {
        from,
        counter: if rng.gen_bool(0.5) {
            Counter::C1
        } else {
            Counter::C2
        },
        target: pick(rng, all),
        alt: if rng.gen_bool(0.5) {
            Some(pick(rng, all))
        } else {
            None
        },
    }
}

/// A configuration at a random declared state with counters up to `max`.
pub fn random_config(rng: &mut StdRng, machine: &MinskyMachine, max: u64) -> Configuration {
    let states: Vec<String> = machine.states.iter().cloned().collect();
    Configuration::new(
        pick(rng, &states),
        rng.gen_range(0..=max),
        rng.gen_range(0..=max),
    )
}

/// Enabledness read straight off the definition: the source is visible, a
/// conversion target is visible, and no reference-set member both is
/// visible and attacks the source.
pub fn oracle_enabled(
    raw: &RawFramework,
    visible: &BTreeSet<Argument>,
    reference: &BTreeSet<Argument>,
) -> Vec<PersuasionTriple> {
    let mut out: Vec<PersuasionTriple> = Vec::new();
    for t in &raw.triples {
        if !visible.contains(&t.source) {
            continue;
        }
        if let Some(target) = &t.target {
            if !visible.contains(target) {
                continue;
            }
        }
        let blocked = raw
            .attacks
            .iter()
            .any(|(x, y)| y == &t.source && reference.contains(x) && visible.contains(x));
        if !blocked && !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

/// The update clauses applied one by one: every fired triple's result is in
/// the next state; a fired conversion's target is out unless some fired
/// triple produces it; everything else carries over.
pub fn clause_apply(visible: &BTreeSet<Argument>, gamma: &[PersuasionTriple]) -> BTreeSet<Argument> {
    let produced: BTreeSet<&Argument> = gamma.iter().map(|t| &t.result).collect();
    let converted: BTreeSet<&Argument> = gamma.iter().filter_map(|t| t.target.as_ref()).collect();
    let mut next: BTreeSet<Argument> = visible
        .iter()
        .filter(|a| !converted.contains(a) || produced.contains(a))
        .cloned()
        .collect();
    next.extend(produced.into_iter().cloned());
    next
}

/// As [`clause_apply`], but reading the removal rule literally as also
/// requiring the conversion's *result* to be visible beforehand. This
/// variant contradicts the clause-by-clause reading whenever a conversion
/// produces a fresh argument; it exists to document the divergence.
pub fn clause_apply_literal_removal(
    visible: &BTreeSet<Argument>,
    gamma: &[PersuasionTriple],
) -> BTreeSet<Argument> {
    let produced: BTreeSet<&Argument> = gamma.iter().map(|t| &t.result).collect();
    let converted: BTreeSet<&Argument> = gamma
        .iter()
        .filter_map(|t| {
            let target = t.target.as_ref()?;
            visible.contains(&t.result).then_some(target)
        })
        .collect();
    let mut next: BTreeSet<Argument> = visible
        .iter()
        .filter(|a| !converted.contains(a) || produced.contains(a))
        .cloned()
        .collect();
    next.extend(produced.into_iter().cloned());
    next
}

fn subsets_of<'a>(
    enabled: &'a [PersuasionTriple],
) -> impl Iterator<Item = Vec<PersuasionTriple>> + 'a {
    let m = enabled.len();
    assert!(m < 32, "oracle subset enumeration is for small instances");
    (1u32..(1u32 << m)).map(move |mask| {
        (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| enabled[i].clone())
            .collect()
    })
}

/// Every state reachable in one step: fire each nonempty subset of the
/// enabled triples and apply the update clauses.
pub fn oracle_successors(
    raw: &RawFramework,
    state: &ApaState,
    reference: &BTreeSet<Argument>,
) -> BTreeSet<ApaState> {
    let enabled = oracle_enabled(raw, state.visible(), reference);
    subsets_of(&enabled)
        .map(|gamma| ApaState::new(clause_apply(state.visible(), &gamma)))
        .collect()
}

/// One-step successors under the literal removal reading.
pub fn oracle_successors_literal_removal(
    raw: &RawFramework,
    state: &ApaState,
    reference: &BTreeSet<Argument>,
) -> BTreeSet<ApaState> {
    let enabled = oracle_enabled(raw, state.visible(), reference);
    subsets_of(&enabled)
        .map(|gamma| ApaState::new(clause_apply_literal_removal(state.visible(), &gamma)))
        .collect()
}

/// Brute-force elimination check: `a` is removed from the state by some
/// nonempty subset of the triples enabled with `reference` in charge.
/// An argument that is not there to begin with cannot be removed.
pub fn oracle_eliminable(
    raw: &RawFramework,
    state: &ApaState,
    reference: &BTreeSet<Argument>,
    a: &Argument,
) -> bool {
    if !state.contains(a) {
        return false;
    }
    let enabled = oracle_enabled(raw, state.visible(), reference);
    let removed = subsets_of(&enabled).any(|gamma| !clause_apply(state.visible(), &gamma).contains(a));
    removed
}

/// All subsets of the given arguments, for candidate-set sweeps.
pub fn power_set(arguments: &[Argument]) -> Vec<BTreeSet<Argument>> {
    let n = arguments.len();
    assert!(n < 16, "power set sweep is for small instances");
    (0u32..(1u32 << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| arguments[i].clone())
                .collect()
        })
        .collect()
}
