use super::explore::{explore, ExploreError, ProcGraph};
use super::state::{normalize, RuntimeState};
use super::step::{barbs, step, ActionLabel};
use crate::syntax::Program;
use crate::tysem::Barb;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleWitness {
    pub state: usize,
    pub barb: Barb,
    /// For safety: the offending weak barb.
    pub offending: Option<Barb>,
    pub path: Vec<(Option<ActionLabel>, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OracleVerdict {
    /// No violation inside the explored region.
    UpToDepth,
    Violation(OracleWitness),
    /// A barb whose search reached unexplored states without a match.
    Inconclusive(OracleWitness),
}

impl OracleVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, OracleVerdict::Violation(_))
    }
}

struct Reach {
    barbs: BTreeSet<Barb>,
    touched_frontier: bool,
}

struct Region<'a> {
    g: &'a ProcGraph,
    p: &'a Program,
    index: HashMap<&'a RuntimeState, usize>,
}

impl<'a> Region<'a> {
    fn new(g: &'a ProcGraph, p: &'a Program) -> Region<'a> {
        Region {
            g,
            p,
            index: g.states.iter().enumerate().map(|(i, s)| (s, i)).collect(),
        }
    }

    /// Weak barbs of state `from`, searched inside the explored graph.
    ///
    /// Canonical renaming may permute channel names between a state and its
    /// successors, so the search steps a copy whose channels stay free and
    /// keep their names; each visited term is closed again only to locate it
    /// in the graph.
    fn weak(&self, from: usize, done: impl Fn(&BTreeSet<Barb>) -> bool) -> Reach {
        let origin = &self.g.states[from];
        let start = RuntimeState {
            binders: Vec::new(),
            threads: origin.threads.clone(),
        };
        let mut seen = HashSet::from([start.clone()]);
        let mut q = VecDeque::from([start]);
        let mut r = Reach {
            barbs: BTreeSet::new(),
            touched_frontier: false,
        };
        while let Some(o) = q.pop_front() {
            let mut binders = origin.binders.clone();
            binders.extend(o.binders.iter().copied());
            let at = self
                .index
                .get(&normalize(binders, o.threads.clone()))
                .copied();
            match at {
                Some(i) if !self.g.frontier[i] => {}
                _ => {
                    r.touched_frontier = true;
                    continue;
                }
            }
            r.barbs.extend(barbs(&o, self.p));
            if done(&r.barbs) {
                break;
            }
            for (_, t) in step(&o, self.p) {
                if seen.insert(t.clone()) {
                    q.push_back(t);
                }
            }
        }
        r
    }
}

fn witness(g: &ProcGraph, state: usize, barb: Barb, offending: Option<Barb>) -> OracleWitness {
    OracleWitness {
        state,
        barb,
        offending,
        path: g
            .path_to(state)
            .into_iter()
            .map(|(l, s)| (l, g.states[s].to_string()))
            .collect(),
    }
}

fn unmatched(own: &BTreeSet<Barb>, weak: &BTreeSet<Barb>) -> Option<Barb> {
    let sync = |a| weak.contains(&Barb::Sync(a));
    own.iter()
        .find(|b| match b {
            Barb::In(a) | Barb::Out(a) => !sync(*a),
            Barb::Multi(ms) => !ms.iter().any(|m| m.channel().is_some_and(sync)),
            _ => false,
        })
        .cloned()
}

pub fn liveness_on(g: &ProcGraph, p: &Program) -> OracleVerdict {
    let all: Vec<BTreeSet<Barb>> = g.states.par_iter().map(|s| barbs(s, p)).collect();
    let region = Region::new(g, p);
    let results: Vec<Option<(Barb, bool)>> = (0..g.states.len())
        .into_par_iter()
        .map(|i| {
            unmatched(&all[i], &BTreeSet::new())?;
            let r = region.weak(i, |w| unmatched(&all[i], w).is_none());
            unmatched(&all[i], &r.barbs).map(|b| (b, r.touched_frontier))
        })
        .collect();
    let mut inconclusive = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some((b, false)) => return OracleVerdict::Violation(witness(g, i, b, None)),
            Some((b, true)) if inconclusive.is_none() => {
                inconclusive = Some(witness(g, i, b, None))
            }
            _ => {}
        }
    }
    inconclusive.map_or(OracleVerdict::UpToDepth, OracleVerdict::Inconclusive)
}

pub fn safety_on(g: &ProcGraph, p: &Program) -> OracleVerdict {
    let all: Vec<BTreeSet<Barb>> = g.states.par_iter().map(|s| barbs(s, p)).collect();
    let region = Region::new(g, p);
    let bad = |own: &BTreeSet<Barb>, w: &BTreeSet<Barb>| {
        own.iter().find_map(|b| match b {
            Barb::Closed(a) => [Barb::End(*a), Barb::Out(*a)]
                .into_iter()
                .find(|o| w.contains(o))
                .map(|o| (b.clone(), o)),
            _ => None,
        })
    };
    let results: Vec<Option<(Barb, Barb)>> = (0..g.states.len())
        .into_par_iter()
        .map(|i| {
            if !all[i].iter().any(|b| matches!(b, Barb::Closed(_))) {
                return None;
            }
            let r = region.weak(i, |w| bad(&all[i], w).is_some());
            bad(&all[i], &r.barbs)
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        if let Some((b, o)) = r {
            return OracleVerdict::Violation(witness(g, i, b, Some(o)));
        }
    }
    OracleVerdict::UpToDepth
}

pub fn oracle_liveness(p: &Program, depth: usize) -> Result<OracleVerdict, ExploreError> {
    Ok(liveness_on(&explore(p, depth)?, p))
}

pub fn oracle_safety(p: &Program, depth: usize) -> Result<OracleVerdict, ExploreError> {
    Ok(safety_on(&explore(p, depth)?, p))
}
