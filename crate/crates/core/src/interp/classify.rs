use super::explore::{explore, ExploreError, ProcGraph};
use super::step::ActionLabel;
use crate::syntax::{Guard, Proc, Program};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StarError {
    #[error("program has no conditionals")]
    NoConditionals,
    #[error("no conditional carries mark {0}")]
    UnknownMark(u32),
}

fn visit_ifs(p: &Proc, f: &mut impl FnMut(&Guard, Option<u32>)) {
    match p {
        Proc::Nil | Proc::Call { .. } | Proc::Buf { .. } => {}
        Proc::Pre(_, k) | Proc::Close(_, k) | Proc::Res(_, k) => visit_ifs(k, f),
        Proc::New { body, .. } => visit_ifs(body, f),
        Proc::Select(bs) => bs.iter().for_each(|(_, k)| visit_ifs(k, f)),
        Proc::Par(ps) => ps.iter().for_each(|p| visit_ifs(p, f)),
        Proc::If {
            guard,
            then,
            els,
            mark,
        } => {
            f(guard, *mark);
            visit_ifs(then, f);
            visit_ifs(els, f);
        }
    }
}

fn program_ifs(p: &Program) -> Vec<(bool, Option<u32>)> {
    let mut out = Vec::new();
    let mut note = |g: &Guard, m: Option<u32>| out.push((matches!(g, Guard::Star), m));
    for d in &p.defs {
        visit_ifs(&d.body, &mut note);
    }
    visit_ifs(&p.main, &mut note);
    out
}

/// Marks of the program's deterministic conditionals.
pub fn marks(p: &Program) -> BTreeSet<u32> {
    program_ifs(p)
        .into_iter()
        .filter(|(star, _)| !star)
        .filter_map(|(_, m)| m)
        .collect()
}

fn star_proc(p: &Proc, marks: &BTreeSet<u32>) -> Proc {
    let go = |k: &Proc| Box::new(star_proc(k, marks));
    match p {
        Proc::Nil | Proc::Call { .. } | Proc::Buf { .. } => p.clone(),
        Proc::Pre(a, k) => Proc::Pre(a.clone(), go(k)),
        Proc::Close(c, k) => Proc::Close(*c, go(k)),
        Proc::Res(c, k) => Proc::Res(*c, go(k)),
        Proc::New {
            var,
            sort,
            cap,
            body,
        } => Proc::New {
            var: *var,
            sort: *sort,
            cap: *cap,
            body: go(body),
        },
        Proc::Select(bs) => Proc::Select(
            bs.iter()
                .map(|(a, k)| (a.clone(), star_proc(k, marks)))
                .collect(),
        ),
        Proc::Par(ps) => Proc::Par(ps.iter().map(|p| star_proc(p, marks)).collect()),
        Proc::If {
            guard,
            then,
            els,
            mark,
        } => Proc::If {
            guard: match mark {
                Some(m) if marks.contains(m) => Guard::Star,
                _ => guard.clone(),
            },
            then: go(then),
            els: go(els),
            mark: *mark,
        },
    }
}

/// Replaces the conditionals carrying the given marks by `if *`.
pub fn star_transform(p: &Program, selected: &BTreeSet<u32>) -> Result<Program, StarError> {
    if program_ifs(p).is_empty() {
        return Err(StarError::NoConditionals);
    }
    let present = marks(p);
    if let Some(m) = selected.iter().find(|m| !present.contains(m)) {
        return Err(StarError::UnknownMark(*m));
    }
    let mut out = p.clone();
    for d in &mut out.defs {
        d.body = star_proc(&d.body, selected);
    }
    out.main = star_proc(&p.main, selected);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MarkClass {
    NeverFired,
    FinitelyObserved,
    /// Fired on a cycle of the explored graph, or at least twice on a run
    /// cut off by the depth bound. The witness lists the states involved.
    InfiniteSuspect(Vec<usize>),
}

/// Bounded evidence about conditionals. Heuristic: class membership over
/// infinite traces is not decided.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalReport {
    pub heuristic: bool,
    pub marks: BTreeMap<u32, MarkClass>,
    /// Every explored state can reach a terminated state.
    pub may_terminate: bool,
    /// Some mark fires on a cycle.
    pub infinite_evidence: bool,
    pub states: usize,
    pub complete: bool,
}

pub fn classify_conditionals(p: &Program, depth: usize) -> Result<ConditionalReport, ExploreError> {
    let g = explore(p, depth.max(1))?;
    Ok(classify_graph(&g, &marks(p)))
}

pub fn classify_graph(g: &ProcGraph, all_marks: &BTreeSet<u32>) -> ConditionalReport {
    let mut pg = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..g.states.len()).map(|i| pg.add_node(i)).collect();
    for (i, es) in g.edges.iter().enumerate() {
        for (_, j) in es {
            pg.add_edge(nodes[i], nodes[*j], ());
        }
    }
    let mut comp = vec![0usize; g.states.len()];
    for (ci, scc) in tarjan_scc(&pg).into_iter().enumerate() {
        for n in scc {
            comp[pg[n]] = ci;
        }
    }
    let mut classes: BTreeMap<u32, MarkClass> = all_marks
        .iter()
        .map(|m| (*m, MarkClass::NeverFired))
        .collect();
    for (i, es) in g.edges.iter().enumerate() {
        for &(l, j) in es {
            let ActionLabel::If(m, _) = l else { continue };
            let entry = classes.entry(m).or_insert(MarkClass::NeverFired);
            if matches!(entry, MarkClass::InfiniteSuspect(_)) {
                continue;
            }
            *entry = if comp[i] == comp[j] {
                MarkClass::InfiniteSuspect(cycle(g, i, j, &comp))
            } else {
                MarkClass::FinitelyObserved
            };
        }
    }
    // a mark fired repeatedly on a run that is still going at the bound
    for f in (0..g.states.len()).filter(|&i| g.frontier[i]) {
        let path = g.path_to(f);
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for (l, _) in &path {
            if let Some(ActionLabel::If(m, _)) = l {
                *counts.entry(*m).or_default() += 1;
            }
        }
        for (m, c) in counts {
            let entry = classes.entry(m).or_insert(MarkClass::NeverFired);
            if c >= 2 && !matches!(entry, MarkClass::InfiniteSuspect(_)) {
                *entry = MarkClass::InfiniteSuspect(path.iter().map(|(_, s)| *s).collect());
            }
        }
    }
    // states that can reach a terminated state
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); g.states.len()];
    for (i, es) in g.edges.iter().enumerate() {
        for (_, j) in es {
            rev[*j].push(i);
        }
    }
    let mut reach = vec![false; g.states.len()];
    let mut q: VecDeque<usize> = (0..g.states.len())
        .filter(|&i| g.states[i].is_nil())
        .collect();
    for &i in &q {
        reach[i] = true;
    }
    while let Some(i) = q.pop_front() {
        for &j in &rev[i] {
            if !reach[j] {
                reach[j] = true;
                q.push_back(j);
            }
        }
    }
    let infinite_evidence = classes
        .values()
        .any(|c| matches!(c, MarkClass::InfiniteSuspect(_)));
    ConditionalReport {
        heuristic: true,
        marks: classes,
        may_terminate: reach.iter().all(|r| *r),
        infinite_evidence,
        states: g.states.len(),
        complete: g.is_complete(),
    }
}

/// A cycle through the edge `from -> to`, inside their component.
fn cycle(g: &ProcGraph, from: usize, to: usize, comp: &[usize]) -> Vec<usize> {
    let mut prev = vec![usize::MAX; g.states.len()];
    let mut q = VecDeque::from([to]);
    prev[to] = to;
    while let Some(i) = q.pop_front() {
        if i == from {
            break;
        }
        for &(_, j) in &g.edges[i] {
            if prev[j] == usize::MAX && comp[j] == comp[from] {
                prev[j] = i;
                q.push_back(j);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        cur = prev[cur];
        path.push(cur);
    }
    path.push(from);
    path.reverse();
    path.dedup();
    path
}
