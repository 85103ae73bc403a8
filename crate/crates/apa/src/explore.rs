//! Breadth-first exploration of the transition system, with DOT export.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::framework::Framework;
use crate::state::ApaState;
use crate::transition::{
    enabled_persuasions, successor_edges, EnumerationLimits, Gamma, ReferenceSet,
};

/// Bounds for state-space exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    /// Stop inserting new states past this count.
    pub max_states: usize,
    /// Do not expand states at this depth.
    pub max_depth: usize,
    /// Per-state successor enumeration budgets.
    pub enumeration: EnumerationLimits,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: 100_000,
            max_depth: 64,
            enumeration: EnumerationLimits::default(),
        }
    }
}

/// One explored state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub state: ApaState,
    /// Distance from the start state in transitions.
    pub depth: usize,
    /// Successor enumeration overflowed the subset budget here.
    pub overflow: bool,
    /// The successor cap dropped at least one distinct successor here.
    pub truncated: bool,
}

/// A transition between two explored states, labelled with one witness
/// selection that produces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub gamma: Gamma,
}

/// The explored fragment of the transition system.
///
/// Nodes are in breadth-first discovery order; node 0 is the start state.
/// `complete` is true only when every state was expanded with no budget,
/// depth, or state-count limit getting in the way — in that case the graph
/// is the whole reachable system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub complete: bool,
}

impl StateGraph {
    /// Index of `state` in the node list, if explored.
    pub fn node_index(&self, state: &ApaState) -> Option<usize> {
        self.nodes.iter().position(|n| &n.state == state)
    }

    /// True when some explored transition goes from `from` to `to`.
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    /// Renders the graph in DOT format.
    pub fn to_dot(&self) -> String {
        self.to_dot_styled(|_, _| None)
    }

    /// Renders the graph in DOT format, filling each node with the color
    /// returned by `fill` (an X11 color name or `#rrggbb`).
    pub fn to_dot_styled(&self, fill: impl Fn(usize, &ApaState) -> Option<String>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph apa {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
        for (i, node) in self.nodes.iter().enumerate() {
            let mut attrs = format!("label=\"{}\"", escape_dot(&node.state.to_string()));
            if i == 0 {
                attrs.push_str(", penwidth=2");
            }
            if node.overflow || node.truncated {
                attrs.push_str(", style=\"filled,dashed\"");
            }
            if let Some(color) = fill(i, &node.state) {
                if !node.overflow && !node.truncated {
                    attrs.push_str(", style=filled");
                }
                let _ = write!(attrs, ", fillcolor=\"{}\"", escape_dot(&color));
            }
            let _ = writeln!(out, "  s{i} [{attrs}];");
        }
        for edge in &self.edges {
            let label: Vec<String> = edge.gamma.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}\"];",
                edge.from,
                edge.to,
                escape_dot(&label.join(", "))
            );
        }
        let _ = writeln!(out, "}}");
        out
    }
}

fn escape_dot(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Breadth-first closure of the framework's initial state. See
/// [`reachable_from`].
pub fn reachable(fw: &Framework, reference: &ReferenceSet, limits: &ExploreLimits) -> StateGraph {
    reachable_from(fw, fw.initial(), reference, limits)
}

/// Breadth-first closure of `start` under the transition relation, with the
/// reference set fixed across all transitions.
///
/// Budget overflow while enumerating one state's successors is recorded on
/// that node (which then gets no outgoing edges) and exploration continues.
/// Any overflow, truncation, unexpanded non-terminal frontier state, or
/// state-count cutoff clears the `complete` flag.
pub fn reachable_from(
    fw: &Framework,
    start: &ApaState,
    reference: &ReferenceSet,
    limits: &ExploreLimits,
) -> StateGraph {
    assert!(limits.max_states >= 1, "max_states must be at least 1");
    assert!(limits.max_depth >= 1, "max_depth must be at least 1");

    let mut nodes = vec![GraphNode {
        state: start.clone(),
        depth: 0,
        overflow: false,
        truncated: false,
    }];
    let mut edges = Vec::new();
    let mut index: HashMap<ApaState, usize> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut complete = true;

    while let Some(id) = queue.pop_front() {
        let (state, depth) = (nodes[id].state.clone(), nodes[id].depth);
        if depth == limits.max_depth {
            // Not expanded; the graph stays complete only if nothing fires here.
            if !enabled_persuasions(fw, &state, reference).is_empty() {
                complete = false;
            }
            continue;
        }
        let labelled = match successor_edges(fw, &state, reference, &limits.enumeration) {
            Ok(l) => l,
            Err(_) => {
                nodes[id].overflow = true;
                complete = false;
                continue;
            }
        };
        if labelled.truncated {
            nodes[id].truncated = true;
            complete = false;
        }
        for (gamma, next) in labelled.edges {
            let to = match index.get(&next) {
                Some(&to) => to,
                None => {
                    if nodes.len() == limits.max_states {
                        complete = false;
                        continue;
                    }
                    let to = nodes.len();
                    nodes.push(GraphNode {
                        state: next.clone(),
                        depth: depth + 1,
                        overflow: false,
                        truncated: false,
                    });
                    index.insert(next, to);
                    queue.push_back(to);
                    to
                }
            };
            edges.push(GraphEdge {
                from: id,
                to,
                gamma,
            });
        }
    }

    StateGraph {
        nodes,
        edges,
        complete,
    }
}
