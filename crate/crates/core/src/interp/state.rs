use crate::name::{fresh, Name};
use crate::syntax::{FreeNames, Prefix, Proc, Sub};
use std::collections::BTreeSet;
use std::fmt;

/// A runtime configuration `(ν c̃)(P₁ | … | Pₙ)` in normal form: restrictions
/// hoisted and named `c#0, c#1, …`, threads flattened and sorted, dead
/// buffers dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuntimeState {
    pub binders: Vec<Name>,
    pub threads: Vec<Proc>,
}

impl RuntimeState {
    pub fn from_proc(p: &Proc) -> RuntimeState {
        normalize(Vec::new(), vec![p.clone()])
    }

    pub fn to_proc(&self) -> Proc {
        let mut p = Proc::par(self.threads.clone());
        for b in self.binders.iter().rev() {
            p = Proc::Res(*b, Box::new(p));
        }
        p
    }

    pub fn is_nil(&self) -> bool {
        self.threads.is_empty()
    }

    /// Names used anywhere in the state, for fresh-name generation.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.binders.iter().copied().collect();
        for t in &self.threads {
            out.extend(t.free_names());
        }
        out
    }
}

impl fmt::Display for RuntimeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_proc())
    }
}

/// Flattens, hoists, garbage-collects and renames to canonical form.
pub fn normalize(binders: Vec<Name>, threads: Vec<Proc>) -> RuntimeState {
    let mut binders = binders;
    let mut taken: BTreeSet<Name> = binders.iter().copied().collect();
    for t in &threads {
        taken.extend(t.free_names());
    }
    let mut flat = Vec::new();
    for t in threads {
        flatten(t, &mut binders, &mut taken, &mut flat);
    }
    collect_garbage(&mut binders, &mut flat);
    rename(binders, flat)
}

fn flatten(p: Proc, binders: &mut Vec<Name>, taken: &mut BTreeSet<Name>, out: &mut Vec<Proc>) {
    match p {
        Proc::Nil => {}
        Proc::Par(ps) => {
            for p in ps {
                flatten(p, binders, taken, out);
            }
        }
        Proc::Res(c, body) => {
            let c2 = fresh(c.as_str(), |n| taken.contains(&n));
            taken.insert(c2);
            binders.push(c2);
            let body = if c2 == c {
                *body
            } else {
                body.subst(&[(c, Sub::Chan(c2))])
            };
            flatten(body, binders, taken, out);
        }
        other => out.push(other),
    }
}

fn buffer_of(p: &Proc) -> Option<Name> {
    match p {
        Proc::Buf { chan, .. } => Some(*chan),
        _ => None,
    }
}

fn collect_garbage(binders: &mut Vec<Name>, threads: &mut Vec<Proc>) {
    let mut used = BTreeSet::new();
    for t in threads.iter() {
        if buffer_of(t).is_none() {
            used.extend(t.free_names());
        }
    }
    let dead: Vec<Name> = binders
        .iter()
        .copied()
        .filter(|b| !used.contains(b))
        .collect();
    if dead.is_empty() {
        return;
    }
    binders.retain(|b| used.contains(b));
    threads.retain(|t| buffer_of(t).is_none_or(|a| !dead.contains(&a)));
}

fn canonical_names(n: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    (0..)
        .map(|i| Name::new(&format!("c#{i}")))
        .filter(|c| !avoid.contains(c))
        .take(n)
        .collect()
}

/// Renames binders to `c#i` by first occurrence in the sorted threads,
/// repeating until the order is stable. Free names are left alone and
/// never reused.
fn rename(binders: Vec<Name>, threads: Vec<Proc>) -> RuntimeState {
    let hole = Name::new("?");
    let mut avoid = BTreeSet::new();
    for t in &threads {
        avoid.extend(t.free_names());
    }
    for b in &binders {
        avoid.remove(b);
    }
    let mut binders = binders;
    let mut threads = threads;
    for _ in 0..4 {
        let blank = blank_of(&binders, hole);
        let mut keyed: Vec<(Proc, Proc)> =
            threads.into_iter().map(|t| (t.subst(&blank), t)).collect();
        keyed.sort();
        threads = keyed.into_iter().map(|(_, t)| t).collect();
        let mut order = Vec::new();
        for t in &threads {
            occurrences(t, &mut Vec::new(), &mut order);
        }
        order.retain(|n| binders.contains(n));
        let mut seen = BTreeSet::new();
        order.retain(|n| seen.insert(*n));
        let target = canonical_names(order.len(), &avoid);
        let stable = order == target;
        let sub: Vec<(Name, Sub)> = order
            .iter()
            .zip(&target)
            .map(|(a, b)| (*a, Sub::Chan(*b)))
            .collect();
        threads = threads.iter().map(|t| t.subst(&sub)).collect();
        binders = target;
        if stable {
            threads.sort_by_cached_key(|t| (t.subst(&blank_of(&binders, hole)), t.clone()));
            break;
        }
    }
    RuntimeState { binders, threads }
}

fn blank_of(binders: &[Name], hole: Name) -> Vec<(Name, Sub)> {
    binders.iter().map(|b| (*b, Sub::Chan(hole))).collect()
}

/// Free channel occurrences of `p` in traversal order.
fn occurrences(p: &Proc, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    let note = |c: Name, bound: &Vec<Name>, out: &mut Vec<Name>| {
        if !bound.contains(&c) {
            out.push(c);
        }
    };
    match p {
        Proc::Nil => {}
        Proc::Pre(pre, k) => prefixed(pre, k, bound, out),
        Proc::Close(c, k) => {
            note(*c, bound, out);
            occurrences(k, bound, out);
        }
        Proc::Select(bs) => bs.iter().for_each(|(pre, k)| prefixed(pre, k, bound, out)),
        Proc::If { then, els, .. } => {
            occurrences(then, bound, out);
            occurrences(els, bound, out);
        }
        Proc::New { var, body, .. } | Proc::Res(var, body) => {
            bound.push(*var);
            occurrences(body, bound, out);
            bound.pop();
        }
        Proc::Par(ps) => ps.iter().for_each(|p| occurrences(p, bound, out)),
        Proc::Call { chans, .. } => chans.iter().for_each(|c| note(*c, bound, out)),
        Proc::Buf { chan, .. } => note(*chan, bound, out),
    }
}

fn prefixed(pre: &Prefix, k: &Proc, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    match pre {
        Prefix::Send(c, _) => {
            if !bound.contains(c) {
                out.push(*c);
            }
            occurrences(k, bound, out);
        }
        Prefix::Recv(c, y) => {
            if !bound.contains(c) {
                out.push(*c);
            }
            bound.push(*y);
            occurrences(k, bound, out);
            bound.pop();
        }
        Prefix::Tau => occurrences(k, bound, out),
    }
}
