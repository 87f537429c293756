//! Bounded liveness and channel-safety checks over the symbolic graph.

use crate::fencing::{is_fenced, FenceFailure};
use crate::name::Name;
use crate::syntax::{Type, TypeSystem};
use crate::tysem::{
    normalize, reachable_with_budget, sym_step, type_barbs, Barb, Graph, ReachError, SymState,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// Cap on the states visited by one weak-barb search.
pub const WEAK_SEARCH_BUDGET: usize = 100_000;

/// The state `N ⊢ T` with `N = fn(T)` from which weak barbs of a reachable
/// `(ν ã)T` are searched, together with the search bound `k + |N|`.
pub fn weak_start(s: &SymState, k: usize) -> (SymState, usize) {
    let mut pinned: Vec<Name> = s.pinned.clone();
    pinned.extend(s.binders.iter().copied());
    pinned.extend(s.free_names());
    pinned.sort();
    pinned.dedup();
    let n = k + pinned.len();
    (normalize(pinned, Vec::new(), s.threads.clone(), Some(n)), n)
}

#[derive(Clone, Debug, Default)]
pub struct WeakSearch {
    pub barbs: BTreeSet<Barb>,
    /// False when the search stopped on its state budget.
    pub complete: bool,
}

/// Closure of `s` under reductions of the symbolic semantics at bound
/// `k + |N|`, stopping early once `done` holds of the barbs found so far.
/// Smaller terms are expanded first, so that runs which wind processes
/// down are tried before runs which spawn more of them.
pub fn weak_search(
    s: &SymState,
    sys: &TypeSystem,
    k: usize,
    done: impl Fn(&BTreeSet<Barb>) -> bool,
) -> WeakSearch {
    let (start, n) = weak_start(s, k);
    let mut seen: HashSet<SymState> = HashSet::new();
    let mut out = WeakSearch {
        barbs: BTreeSet::new(),
        complete: true,
    };
    let mut queue = BinaryHeap::new();
    let mut tick = 0usize;
    queue.push(Reverse((weight(&start), tick, start.clone())));
    seen.insert(start);
    while let Some(Reverse((_, _, st))) = queue.pop() {
        out.barbs.extend(type_barbs(&st, sys));
        if done(&out.barbs) {
            return out;
        }
        for (l, t) in sym_step(&st, sys, n) {
            if l.is_reduction() && !seen.contains(&t) {
                if seen.len() >= WEAK_SEARCH_BUDGET {
                    out.complete = false;
                    return out;
                }
                seen.insert(t.clone());
                tick += 1;
                queue.push(Reverse((weight(&t), tick, t)));
            }
        }
    }
    out
}

fn weight(s: &SymState) -> usize {
    fn go(t: &Type) -> usize {
        match t {
            Type::Nil | Type::Buf(..) | Type::Closed(_) => 0,
            Type::Call(..) => 2,
            Type::Pre(_, k) | Type::End(_, k) | Type::New(_, _, k) | Type::Res(_, k) => 1 + go(k),
            Type::Choice(ts) | Type::Par(ts) => 1 + ts.iter().map(go).sum::<usize>(),
            Type::Branch(bs) => 1 + bs.iter().map(|(_, t)| go(t)).sum::<usize>(),
        }
    }
    s.threads.iter().map(go).sum()
}

/// Every weak barb of a reachable state `(ν ã)T` at bound `k`.
pub fn weak_barbs(s: &SymState, sys: &TypeSystem, k: usize) -> BTreeSet<Barb> {
    weak_search(s, sys, k, |_| false).barbs
}

/// `T ⇓ₖ o`, for a reachable state `(ν ã)T`.
pub fn weak_barb_k(s: &SymState, o: &Barb, sys: &TypeSystem, k: usize) -> bool {
    weak_search(s, sys, k, |b| b.contains(o)).barbs.contains(o)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    /// Label of the transition into `state`; absent for the initial state.
    pub label: Option<String>,
    pub state: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub k: usize,
    pub state: usize,
    pub term: String,
    /// The barb left unmatched (liveness) or the closed-channel barb (safety).
    pub barb: Barb,
    /// For safety: the offending weak barb.
    pub offending: Option<Barb>,
    /// The weak-barb search hit its budget before finding a match.
    pub inconclusive: bool,
    pub witness: Vec<WitnessStep>,
}

impl Violation {
    pub fn describe(&self) -> String {
        match &self.offending {
            None if self.inconclusive => {
                format!(
                    "no synchronisation for barb {} found before the search budget ran out",
                    self.barb
                )
            }
            None => format!(
                "barb {} never synchronises within bound {}",
                self.barb, self.k
            ),
            Some(o) => format!(
                "{} while {} is reachable within bound {}",
                self.barb, o, self.k
            ),
        }
    }
}

fn witness(g: &Graph, target: usize) -> Vec<WitnessStep> {
    g.path_to(target)
        .into_iter()
        .map(|(l, s)| WitnessStep {
            label: l.map(|l| l.to_string()),
            state: g.states[s].to_string(),
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct Checks {
    pub liveness: Option<Violation>,
    pub safety: Option<Violation>,
}

/// Per-state findings: an unmatched barb, flagged when its search hit the
/// budget, and a closed barb with the offending weak barb.
type Findings = (Option<(Barb, bool)>, Option<(Barb, Barb)>);

/// Runs both checks over every state of `g`.
pub fn check_graph(g: &Graph, sys: &TypeSystem) -> Checks {
    let k = g.k;
    // Only the lowest violating index is reported, so states above one
    // already found skip that part of the check.
    let first_live = AtomicUsize::new(usize::MAX);
    let first_safe = AtomicUsize::new(usize::MAX);
    let results: Vec<Findings> = g
        .states
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let barbs = type_barbs(s, sys);
            let want_live = i < first_live.load(Ordering::Relaxed)
                && barbs
                    .iter()
                    .any(|b| matches!(b, Barb::In(_) | Barb::Out(_) | Barb::Multi(_)));
            let want_safe = i < first_safe.load(Ordering::Relaxed)
                && barbs.iter().any(|b| matches!(b, Barb::Closed(_)));
            if !want_live && !want_safe {
                return (None, None);
            }
            let unmatched = |weak: &BTreeSet<Barb>| {
                if want_live {
                    unmatched_barb(&barbs, weak)
                } else {
                    None
                }
            };
            let unsafe_pair = |weak: &BTreeSet<Barb>| {
                if want_safe {
                    closed_violation(&barbs, weak)
                } else {
                    None
                }
            };
            let search = weak_search(s, sys, k, |w| {
                unmatched(w).is_none() && (!want_safe || unsafe_pair(w).is_some())
            });
            let live = unmatched(&search.barbs).map(|b| (b, !search.complete));
            let safe = unsafe_pair(&search.barbs);
            if live.is_some() {
                first_live.fetch_min(i, Ordering::Relaxed);
            }
            if safe.is_some() {
                first_safe.fetch_min(i, Ordering::Relaxed);
            }
            (live, safe)
        })
        .collect();
    let mut out = Checks::default();
    for (i, (live, safe)) in results.into_iter().enumerate() {
        if out.liveness.is_none() {
            if let Some((b, inconclusive)) = live {
                out.liveness = Some(Violation {
                    k,
                    state: i,
                    term: g.states[i].to_string(),
                    barb: b,
                    offending: None,
                    inconclusive,
                    witness: witness(g, i),
                });
            }
        }
        if out.safety.is_none() {
            if let Some((b, o)) = safe {
                out.safety = Some(Violation {
                    k,
                    state: i,
                    term: g.states[i].to_string(),
                    barb: b,
                    offending: Some(o),
                    inconclusive: false,
                    witness: witness(g, i),
                });
            }
        }
    }
    out
}

fn unmatched_barb(barbs: &BTreeSet<Barb>, weak: &BTreeSet<Barb>) -> Option<Barb> {
    let sync = |a: Name| weak.contains(&Barb::Sync(a));
    barbs
        .iter()
        .find(|b| match b {
            Barb::In(a) | Barb::Out(a) => !sync(*a),
            Barb::Multi(ms) => !ms.iter().any(|m| m.channel().is_some_and(sync)),
            _ => false,
        })
        .cloned()
}

fn closed_violation(barbs: &BTreeSet<Barb>, weak: &BTreeSet<Barb>) -> Option<(Barb, Barb)> {
    barbs.iter().find_map(|b| match b {
        Barb::Closed(a) => [Barb::End(*a), Barb::Out(*a)]
            .into_iter()
            .find(|o| weak.contains(o))
            .map(|o| (b.clone(), o)),
        _ => None,
    })
}

pub fn check_k_liveness(sys: &TypeSystem, k: usize) -> Result<Option<Violation>, ReachError> {
    let g = reachable_with_budget(sys, k, crate::tysem::DEFAULT_STATE_BUDGET)?;
    Ok(check_graph(&g, sys).liveness)
}

pub fn check_k_safety(sys: &TypeSystem, k: usize) -> Result<Option<Violation>, ReachError> {
    let g = reachable_with_budget(sys, k, crate::tysem::DEFAULT_STATE_BUDGET)?;
    Ok(check_graph(&g, sys).safety)
}

/// Distinct channel binders across the system plus the widest parameter
/// list, and never below 2.
pub fn heuristic_k(sys: &TypeSystem) -> usize {
    let mut binders = BTreeSet::new();
    for e in &sys.eqs {
        collect_binders(&e.body, &mut binders);
    }
    (binders.len() + sys.max_arity()).max(2)
}

fn collect_binders(t: &Type, out: &mut BTreeSet<Name>) {
    match t {
        Type::New(a, _, k) => {
            out.insert(*a);
            collect_binders(k, out);
        }
        Type::Pre(_, k) | Type::End(_, k) | Type::Res(_, k) => collect_binders(k, out),
        Type::Choice(ts) | Type::Par(ts) => ts.iter().for_each(|t| collect_binders(t, out)),
        Type::Branch(bs) => bs.iter().for_each(|(_, t)| collect_binders(t, out)),
        Type::Nil | Type::Call(..) | Type::Buf(..) | Type::Closed(_) => {}
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Fixed(usize),
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct VerificationConfig {
    pub k: Bound,
    /// Informational: buffer bounds in the system drive the semantics.
    pub asynchronous: bool,
    pub state_budget: usize,
    pub witness: bool,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            k: Bound::Auto,
            asynchronous: false,
            state_budget: crate::tysem::DEFAULT_STATE_BUDGET,
            witness: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub k: usize,
    pub live: bool,
    pub safe: bool,
    pub states: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub fenced: bool,
    pub fence_failure: Option<FenceFailure>,
    pub k: Option<usize>,
    pub auto: bool,
    pub live: Option<bool>,
    pub safe: Option<bool>,
    pub liveness_violation: Option<Violation>,
    pub safety_violation: Option<Violation>,
    pub states: usize,
    pub transitions: usize,
    pub sweep: Vec<SweepEntry>,
    pub budget_exceeded: bool,
    pub millis: u64,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.fenced && self.live == Some(true) && self.safe == Some(true)
    }

    pub fn to_json(&self, include_witness: bool) -> JsonReport {
        let v = self
            .liveness_violation
            .as_ref()
            .or(self.safety_violation.as_ref());
        JsonReport {
            fenced: self.fenced,
            k: self.k,
            live: self.live,
            safe: self.safe,
            states: self.states,
            transitions: self.transitions,
            witness: match v {
                Some(v) if include_witness => v.witness.clone(),
                _ => Vec::new(),
            },
            violation: v.map(|v| v.describe()),
            millis: self.millis,
        }
    }

    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        if !self.fenced {
            s.push_str("not fenced\n");
            if let Some(f) = &self.fence_failure {
                let _ = write!(s, "{f}");
            }
            return s;
        }
        let mark = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        let k = self.k.map_or("-".to_string(), |k| k.to_string());
        let _ = writeln!(s, "fenced: yes");
        let _ = writeln!(s, "k: {k}{}", if self.auto { " (auto)" } else { "" });
        let _ = writeln!(s, "live: {}", mark(self.live));
        let _ = writeln!(s, "safe: {}", mark(self.safe));
        let _ = writeln!(
            s,
            "states: {}, transitions: {}",
            self.states, self.transitions
        );
        if self.budget_exceeded {
            let _ = writeln!(s, "state budget exceeded");
        }
        for v in [&self.liveness_violation, &self.safety_violation]
            .into_iter()
            .flatten()
        {
            let _ = writeln!(s, "violation at k={}: {}", v.k, v.describe());
            for w in &v.witness {
                match &w.label {
                    Some(l) => {
                        let _ = writeln!(s, "  --{l}--> {}", w.state);
                    }
                    None => {
                        let _ = writeln!(s, "  {}", w.state);
                    }
                }
            }
        }
        s
    }
}

/// Machine-readable report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonReport {
    pub fenced: bool,
    pub k: Option<usize>,
    pub live: Option<bool>,
    pub safe: Option<bool>,
    pub states: usize,
    pub transitions: usize,
    pub witness: Vec<WitnessStep>,
    pub violation: Option<String>,
    pub millis: u64,
}

pub fn verify(sys: &TypeSystem, cfg: &VerificationConfig) -> VerificationReport {
    let start = Instant::now();
    let fence = is_fenced(sys);
    let mut report = VerificationReport {
        fenced: fence.fenced,
        fence_failure: fence.failure().cloned(),
        k: None,
        auto: cfg.k == Bound::Auto,
        live: None,
        safe: None,
        liveness_violation: None,
        safety_violation: None,
        states: 0,
        transitions: 0,
        sweep: Vec::new(),
        budget_exceeded: false,
        millis: 0,
    };
    if !fence.fenced {
        report.millis = start.elapsed().as_millis() as u64;
        return report;
    }
    let (main_k, ks): (usize, Vec<usize>) = match cfg.k {
        Bound::Fixed(k) => (k, vec![k]),
        Bound::Auto => {
            let h = heuristic_k(sys);
            (h, (1..=h).collect())
        }
    };
    report.k = Some(main_k);
    let mut live = true;
    let mut safe = true;
    for k in ks {
        let g = match reachable_with_budget(sys, k, cfg.state_budget) {
            Ok(g) => g,
            Err(_) => {
                report.budget_exceeded = true;
                live = false;
                safe = false;
                break;
            }
        };
        let checks = check_graph(&g, sys);
        report.sweep.push(SweepEntry {
            k,
            live: checks.liveness.is_none(),
            safe: checks.safety.is_none(),
            states: g.states.len(),
        });
        if k == main_k {
            report.states = g.states.len();
            report.transitions = g.transitions();
        }
        if let Some(v) = checks.liveness {
            live = false;
            if report.liveness_violation.is_none() {
                report.liveness_violation = Some(strip(v, cfg.witness));
            }
        }
        if let Some(v) = checks.safety {
            safe = false;
            if report.safety_violation.is_none() {
                report.safety_violation = Some(strip(v, cfg.witness));
            }
        }
    }
    if !report.budget_exceeded {
        report.live = Some(live);
        report.safe = Some(safe);
    }
    report.millis = start.elapsed().as_millis() as u64;
    report
}

fn strip(mut v: Violation, keep: bool) -> Violation {
    if !keep {
        v.witness.clear();
    }
    v
}
