use crate::name::Name;
use crate::syntax::{FreeNames, Type};
use itertools::Itertools;
use std::collections::BTreeSet;
use std::fmt;

/// A type term in normal form: restrictions hoisted to the front in creation
/// order, parallel threads flattened and sorted.
///
/// `pinned` names are free names that count towards the tracked set `N`
/// (used when searching for weak barbs from a fixed term). Binder `i` is
/// tracked iff `i < k - |pinned|`; `k = None` tracks everything.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymState {
    pub pinned: Vec<Name>,
    pub binders: Vec<Name>,
    pub threads: Vec<Type>,
}

pub type CanonicalTerm = SymState;

impl SymState {
    pub fn tracked_limit(&self, k: Option<usize>) -> usize {
        match k {
            None => self.binders.len(),
            Some(k) => k.saturating_sub(self.pinned.len()).min(self.binders.len()),
        }
    }

    /// The tracked set `N`: pinned names, free names and the tracked binders.
    pub fn tracked(&self, k: Option<usize>) -> BTreeSet<Name> {
        let mut n: BTreeSet<Name> = self.free_names();
        n.extend(self.pinned.iter().copied());
        n.extend(self.binders[..self.tracked_limit(k)].iter().copied());
        n
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for t in &self.threads {
            out.extend(t.free_names());
        }
        for b in &self.binders {
            out.remove(b);
        }
        out
    }

    /// The term `(ν binders)(threads)`.
    pub fn to_type(&self) -> Type {
        let mut t = Type::par(self.threads.clone());
        for b in self.binders.iter().rev() {
            t = Type::Res(*b, Box::new(t));
        }
        t
    }

    /// The body without its restrictions.
    pub fn body(&self) -> Type {
        Type::par(self.threads.clone())
    }

    pub fn is_nil(&self) -> bool {
        self.threads.is_empty()
    }
}

impl fmt::Display for SymState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_type())
    }
}

/// Normal form of a closed-world term: every name is tracked.
pub fn canonicalize(t: &Type) -> CanonicalTerm {
    normalize(Vec::new(), Vec::new(), vec![t.clone()], None)
}

/// Flattens, hoists, garbage-collects and renames. `binders` lists
/// restrictions outermost first; restrictions found inside `threads`
/// are appended after them.
pub fn normalize(
    pinned: Vec<Name>,
    binders: Vec<Name>,
    threads: Vec<Type>,
    k: Option<usize>,
) -> SymState {
    let mut binders = binders;
    let mut flat = Vec::new();
    for t in threads {
        flatten(t, &mut binders, &mut flat);
    }
    collect_garbage(&mut binders, &mut flat);
    rename(pinned, binders, flat, k)
}

fn flatten(t: Type, binders: &mut Vec<Name>, out: &mut Vec<Type>) {
    match t {
        Type::Nil => {}
        Type::Par(ts) => {
            for t in ts {
                flatten(t, binders, out);
            }
        }
        Type::Res(a, body) => {
            let a2 = crate::name::fresh("$r", |n| binders.contains(&n));
            binders.push(a2);
            flatten(body.rename(a, a2), binders, out);
        }
        other => out.push(other),
    }
}

fn buffer_of(t: &Type) -> Option<Name> {
    match t {
        Type::Buf(a, ..) | Type::Closed(a) => Some(*a),
        _ => None,
    }
}

/// Drops restrictions whose name only occurs in its own buffer.
fn collect_garbage(binders: &mut Vec<Name>, threads: &mut Vec<Type>) {
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

const PERMUTATION_CAP: usize = 5040;

fn rename(pinned: Vec<Name>, binders: Vec<Name>, threads: Vec<Type>, k: Option<usize>) -> SymState {
    let mut avoid: BTreeSet<Name> = pinned.iter().copied().collect();
    for t in &threads {
        avoid.extend(t.free_names());
    }
    for b in &binders {
        avoid.remove(b);
    }
    let limit = match k {
        None => binders.len(),
        Some(k) => k.saturating_sub(pinned.len()).min(binders.len()),
    };
    let tracked_names = canonical_names("n", limit, &avoid);
    let untracked_names = canonical_names("u", binders.len() - limit, &avoid);

    let untracked: Vec<(Name, Name)> = binders[limit..]
        .iter()
        .copied()
        .zip(untracked_names.iter().copied())
        .collect();
    let tracked = &binders[..limit];

    let order = tracked_order(tracked, &threads, &untracked);
    let mut best: Option<Vec<Type>> = None;
    for perm in order {
        let mut sub = untracked.clone();
        sub.extend(perm.iter().copied().zip(tracked_names.iter().copied()));
        let mut ts: Vec<Type> = threads.iter().map(|t| t.subst(&sub)).collect();
        ts.sort();
        if best.as_ref().is_none_or(|b| ts < *b) {
            best = Some(ts);
        }
    }
    let mut pinned = pinned;
    pinned.sort();
    let mut all = tracked_names;
    all.extend(untracked_names);
    SymState {
        pinned,
        binders: all,
        threads: best.unwrap_or_default(),
    }
}

fn canonical_names(prefix: &str, n: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while out.len() < n {
        let c = Name::new(&format!("{prefix}#{i}"));
        if !avoid.contains(&c) {
            out.push(c);
        }
        i += 1;
    }
    out
}

/// Candidate orderings of the tracked binders: sorted by a renaming-invariant
/// signature, with every permutation inside groups of equal signature.
fn tracked_order(tracked: &[Name], threads: &[Type], untracked: &[(Name, Name)]) -> Vec<Vec<Name>> {
    if tracked.len() <= 1 {
        return vec![tracked.to_vec()];
    }
    let me = Name::new("@");
    let other = Name::new("?");
    let mut sigs: Vec<(Vec<Type>, Name)> = tracked
        .iter()
        .map(|&x| {
            let mut sub: Vec<(Name, Name)> = untracked.to_vec();
            sub.extend(
                tracked
                    .iter()
                    .map(|&y| (y, if y == x { me } else { other })),
            );
            let mut sig: Vec<Type> = threads
                .iter()
                .filter(|t| t.free_names().contains(&x))
                .map(|t| t.subst(&sub))
                .collect();
            sig.sort();
            (sig, x)
        })
        .collect();
    sigs.sort_by(|a, b| a.0.cmp(&b.0));
    let groups: Vec<Vec<Name>> = sigs
        .iter()
        .chunk_by(|(s, _)| s.clone())
        .into_iter()
        .map(|(_, g)| g.map(|(_, n)| *n).collect())
        .collect();
    let mut total: usize = 1;
    for g in &groups {
        total = total.saturating_mul((1..=g.len()).product());
    }
    if total > PERMUTATION_CAP {
        return vec![groups.concat()];
    }
    let mut acc: Vec<Vec<Name>> = vec![Vec::new()];
    for g in &groups {
        let mut next = Vec::new();
        for perm in g.iter().copied().permutations(g.len()) {
            for a in &acc {
                let mut v = a.clone();
                v.extend(perm.iter().copied());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}
