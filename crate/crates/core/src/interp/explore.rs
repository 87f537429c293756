use super::state::RuntimeState;
use super::step::{step, ActionLabel};
use crate::syntax::Program;
use rayon::prelude::*;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Write;
use std::hash::{Hash, Hasher};
use thiserror::Error;

pub const DEFAULT_PROCESS_BUDGET: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("state budget of {0} exceeded")]
    Budget(usize),
}

/// Canonical states reachable within a number of reduction steps.
#[derive(Clone, Debug)]
pub struct ProcGraph {
    pub states: Vec<RuntimeState>,
    pub edges: Vec<Vec<(ActionLabel, usize)>>,
    pub parent: Vec<Option<(usize, ActionLabel)>>,
    pub depth: Vec<usize>,
    /// States left unexpanded although they have successors.
    pub frontier: Vec<bool>,
}

impl ProcGraph {
    pub fn transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        !self.frontier.iter().any(|f| *f)
    }

    /// Labelled path from the initial state; each entry carries the label
    /// of the edge leading into it.
    pub fn path_to(&self, target: usize) -> Vec<(Option<ActionLabel>, usize)> {
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
        let mut s = String::from("digraph explore {\n  node [shape=box, fontname=monospace];\n");
        for (i, st) in self.states.iter().enumerate() {
            let term = st.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            let style = if self.frontier[i] {
                ", style=dashed"
            } else {
                ""
            };
            let _ = writeln!(
                s,
                "  s{i} [label=\"{:016x}\\n{term}\"{style}];",
                state_hash(st)
            );
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

pub fn state_hash(s: &RuntimeState) -> u64 {
    let mut h = DefaultHasher::new();
    s.to_string().hash(&mut h);
    h.finish()
}

pub fn initial(p: &Program) -> RuntimeState {
    RuntimeState::from_proc(&p.main)
}

pub fn explore(p: &Program, depth: usize) -> Result<ProcGraph, ExploreError> {
    explore_with_budget(p, depth, DEFAULT_PROCESS_BUDGET)
}

pub fn explore_with_budget(
    p: &Program,
    depth: usize,
    budget: usize,
) -> Result<ProcGraph, ExploreError> {
    explore_state(initial(p), p, depth, budget)
}

/// Level-by-level closure of `step` from `init`.
pub fn explore_state(
    init: RuntimeState,
    p: &Program,
    depth: usize,
    budget: usize,
) -> Result<ProcGraph, ExploreError> {
    let mut g = ProcGraph {
        states: vec![init.clone()],
        edges: vec![Vec::new()],
        parent: vec![None],
        depth: vec![0],
        frontier: vec![false],
    };
    let mut index: HashMap<RuntimeState, usize> = HashMap::from([(init, 0)]);
    let mut level = vec![0usize];
    let mut d = 0;
    while !level.is_empty() {
        let succs: Vec<Vec<(ActionLabel, RuntimeState)>> =
            level.par_iter().map(|&i| step(&g.states[i], p)).collect();
        let mut next = Vec::new();
        for (&i, ss) in level.iter().zip(succs) {
            if d == depth {
                g.frontier[i] = !ss.is_empty();
                continue;
            }
            for (l, s) in ss {
                let j = match index.get(&s) {
                    Some(&j) => j,
                    None => {
                        let j = g.states.len();
                        if j >= budget {
                            return Err(ExploreError::Budget(budget));
                        }
                        index.insert(s.clone(), j);
                        g.states.push(s);
                        g.edges.push(Vec::new());
                        g.parent.push(Some((i, l)));
                        g.depth.push(d + 1);
                        g.frontier.push(false);
                        next.push(j);
                        j
                    }
                };
                g.edges[i].push((l, j));
            }
        }
        if d == depth {
            break;
        }
        level = next;
        d += 1;
    }
    Ok(g)
}
