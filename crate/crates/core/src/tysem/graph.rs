use super::state::{normalize, SymState};
use super::step::{sym_step, Label};
use crate::fencing::{is_fenced, FenceFailure};
use crate::syntax::{Type, TypeSystem};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::Write;
use thiserror::Error;

pub const DEFAULT_STATE_BUDGET: usize = 200_000;

#[derive(Debug, Error, Clone)]
pub enum ReachError {
    #[error("type system is not fenced")]
    NotFenced(Box<FenceFailure>),
    #[error("state budget of {0} exceeded")]
    Budget(usize),
}

/// The symbolic state graph reachable from `∅ ⊢ t0⟨⟩`.
#[derive(Clone, Debug)]
pub struct Graph {
    pub k: usize,
    pub states: Vec<SymState>,
    /// Outgoing edges per state.
    pub edges: Vec<Vec<(Label, usize)>>,
    /// BFS parent of every state but the initial one.
    pub parent: Vec<Option<(usize, Label)>>,
}

impl Graph {
    pub fn transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Labelled path from the initial state to `target`.
    pub fn path_to(&self, target: usize) -> Vec<(Option<Label>, usize)> {
        let mut rev = vec![];
        let mut cur = target;
        while let Some((p, l)) = self.parent[cur] {
            rev.push((Some(l), cur));
            cur = p;
        }
        rev.push((None, cur));
        rev.reverse();
        rev
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n  node [shape=box, fontname=monospace];\n");
        for (i, st) in self.states.iter().enumerate() {
            let term = st.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(s, "  s{i} [label=\"{i}: {term}\"];");
        }
        for (i, es) in self.edges.iter().enumerate() {
            for (l, j) in es {
                let _ = writeln!(s, "  s{i} -> s{j} [label=\"{l}\"];");
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn initial_state(k: usize) -> SymState {
    normalize(
        Vec::new(),
        Vec::new(),
        vec![Type::Call(TypeSystem::entry_name(), Vec::new())],
        Some(k),
    )
}

/// Reachable symbolic graph; rejects unfenced systems.
pub fn reachable(sys: &TypeSystem, k: usize) -> Result<Graph, ReachError> {
    reachable_with_budget(sys, k, DEFAULT_STATE_BUDGET)
}

pub fn reachable_with_budget(
    sys: &TypeSystem,
    k: usize,
    budget: usize,
) -> Result<Graph, ReachError> {
    let fence = is_fenced(sys);
    if !fence.fenced {
        let f = fence
            .failure()
            .cloned()
            .expect("failing check carries a failure");
        return Err(ReachError::NotFenced(Box::new(f)));
    }
    explore_from(initial_state(k), sys, k, budget)
}

/// Breadth-first closure from an arbitrary state, without the fencing check.
pub fn explore_from(
    init: SymState,
    sys: &TypeSystem,
    k: usize,
    budget: usize,
) -> Result<Graph, ReachError> {
    let mut index: HashMap<SymState, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    let mut parent = vec![None];
    index.insert(init, 0);
    let mut edges: Vec<Vec<(Label, usize)>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let succs: Vec<Vec<(Label, SymState)>> = frontier
            .par_iter()
            .map(|&i| sym_step(&states[i], sys, k))
            .collect();
        let mut next = Vec::new();
        for (&i, ss) in frontier.iter().zip(succs) {
            for (l, s) in ss {
                let j = match index.get(&s) {
                    Some(&j) => j,
                    None => {
                        let j = states.len();
                        if j >= budget {
                            return Err(ReachError::Budget(budget));
                        }
                        index.insert(s.clone(), j);
                        states.push(s);
                        parent.push(Some((i, l)));
                        edges.push(Vec::new());
                        next.push(j);
                        j
                    }
                };
                edges[i].push((l, j));
            }
        }
        frontier = next;
    }
    Ok(Graph {
        k,
        states,
        edges,
        parent,
    })
}
