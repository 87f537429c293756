use super::state::{normalize, SymState};
use crate::name::Name;
use crate::syntax::{Act, Type, TypeSystem};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    Send(Name),
    Recv(Name),
    Tau,
    Sync(Name),
    End(Name),
    CloseDual(Name),
    ClosedSend(Name),
    Push(Name),
    Pop(Name),
}

impl Label {
    /// τ and synchronisations: the moves a closed system makes on its own.
    pub fn is_reduction(self) -> bool {
        matches!(self, Label::Tau | Label::Sync(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Send(a) => write!(f, "!{a}"),
            Label::Recv(a) => write!(f, "?{a}"),
            Label::Tau => f.write_str("tau"),
            Label::Sync(a) => write!(f, "[{a}]"),
            Label::End(a) => write!(f, "end[{a}]"),
            Label::CloseDual(a) => write!(f, "close[{a}]"),
            Label::ClosedSend(a) => write!(f, "closed[{a}]"),
            Label::Push(a) => write!(f, "push[{a}]"),
            Label::Pop(a) => write!(f, "pop[{a}]"),
        }
    }
}

/// Unary capability of a single thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cap {
    Tau,
    Out(Name),
    In(Name),
    End(Name),
    CloseDual(Name),
    ClosedSend(Name),
    Push(Name),
    Pop(Name),
}

impl Cap {
    fn label(self) -> Label {
        match self {
            Cap::Tau => Label::Tau,
            Cap::Out(a) => Label::Send(a),
            Cap::In(a) => Label::Recv(a),
            Cap::End(a) => Label::End(a),
            Cap::CloseDual(a) => Label::CloseDual(a),
            Cap::ClosedSend(a) => Label::ClosedSend(a),
            Cap::Push(a) => Label::Push(a),
            Cap::Pop(a) => Label::Pop(a),
        }
    }
}

pub(crate) fn act_cap(a: Act) -> Cap {
    match a {
        Act::Send(x) => Cap::Out(x),
        Act::Recv(x) => Cap::In(x),
        Act::Tau => Cap::Tau,
    }
}

/// Binary interaction of two capabilities, in either order.
fn interact(x: Cap, y: Cap) -> Option<Label> {
    let one = |p: Cap, q: Cap| match (p, q) {
        (Cap::Out(a) | Cap::ClosedSend(a), Cap::In(b)) if a == b => Some(Label::Sync(a)),
        (Cap::End(a), Cap::CloseDual(b)) if a == b => Some(Label::Tau),
        (Cap::Out(a), Cap::Push(b)) if a == b => Some(Label::Sync(a)),
        (Cap::Pop(a), Cap::In(b)) if a == b => Some(Label::Sync(a)),
        _ => None,
    };
    one(x, y).or_else(|| one(y, x))
}

pub(crate) fn fresh_binder() -> Name {
    Name::new("$new")
}

/// A move available to one atom: capability, replacement threads and an
/// optional freshly created binder.
pub(crate) struct Move {
    pub cap: Cap,
    pub cont: Vec<Type>,
    pub created: Option<Name>,
}

pub(crate) fn moves(atom: &Type) -> Vec<Move> {
    let mv = |cap, cont: Vec<Type>| Move {
        cap,
        cont,
        created: None,
    };
    match atom {
        Type::Pre(a, k) => vec![mv(act_cap(*a), vec![(**k).clone()])],
        Type::Choice(ts) => ts.iter().map(|t| mv(Cap::Tau, vec![t.clone()])).collect(),
        Type::Branch(bs) => bs
            .iter()
            .map(|(a, k)| mv(act_cap(*a), vec![k.clone()]))
            .collect(),
        Type::New(a, n, k) => {
            let b = fresh_binder();
            vec![Move {
                cap: Cap::Tau,
                cont: vec![k.rename(*a, b), Type::Buf(b, 0, *n)],
                created: Some(b),
            }]
        }
        Type::End(a, k) => vec![mv(Cap::End(*a), vec![(**k).clone()])],
        Type::Buf(a, c, n) => {
            let mut out = vec![mv(Cap::CloseDual(*a), vec![Type::Closed(*a)])];
            if c < n {
                out.push(mv(Cap::Push(*a), vec![Type::Buf(*a, c + 1, *n)]));
            }
            if *c >= 1 {
                out.push(mv(Cap::Pop(*a), vec![Type::Buf(*a, c - 1, *n)]));
            }
            out
        }
        Type::Closed(a) => vec![mv(Cap::ClosedSend(*a), vec![atom.clone()])],
        Type::Nil | Type::Par(_) | Type::Call(..) | Type::Res(..) => Vec::new(),
    }
}

/// Unfolds head calls of a thread into its parallel atoms. Calls rejected by
/// `allow`, or to an equation already being unfolded on the same path, stay
/// folded and inert.
pub(crate) fn expand(
    t: &Type,
    sys: &TypeSystem,
    allow: &dyn Fn(&[Name]) -> bool,
    out: &mut Vec<Type>,
) {
    expand_in(t, sys, allow, &mut Vec::new(), out)
}

fn expand_in(
    t: &Type,
    sys: &TypeSystem,
    allow: &dyn Fn(&[Name]) -> bool,
    seen: &mut Vec<Name>,
    out: &mut Vec<Type>,
) {
    match t {
        Type::Nil => {}
        Type::Par(ts) => ts.iter().for_each(|t| expand_in(t, sys, allow, seen, out)),
        Type::Call(s, args) => {
            let eq = sys.eq(*s).filter(|e| e.params.len() == args.len());
            match eq {
                Some(eq) if allow(args) && !seen.contains(s) => {
                    let sub: Vec<(Name, Name)> = eq
                        .params
                        .iter()
                        .copied()
                        .zip(args.iter().copied())
                        .collect();
                    let body = eq.body.subst(&sub);
                    seen.push(*s);
                    expand_in(&body, sys, allow, seen, out);
                    seen.pop();
                }
                _ => out.push(t.clone()),
            }
        }
        other => out.push(other.clone()),
    }
}

/// The unfolding gate of the bounded semantics: a call may unfold when it has
/// no arguments or one of them is tracked.
pub(crate) fn gate(tracked: &BTreeSet<Name>) -> impl Fn(&[Name]) -> bool + '_ {
    move |args: &[Name]| args.is_empty() || args.iter().any(|a| tracked.contains(a))
}

/// Transitions of a state. `k = None` is the unbounded semantics. With
/// `open`, unary labels on free names are also produced.
pub fn successors(
    s: &SymState,
    sys: &TypeSystem,
    k: Option<usize>,
    open: bool,
) -> Vec<(Label, SymState)> {
    let tracked = s.tracked(k);
    let allow = gate(&tracked);
    let atoms: Vec<Vec<Type>> = s
        .threads
        .iter()
        .map(|t| {
            let mut v = Vec::new();
            expand(t, sys, &allow, &mut v);
            v
        })
        .collect();
    let all_moves: Vec<Vec<Vec<Move>>> = atoms
        .iter()
        .map(|a| a.iter().map(moves).collect())
        .collect();

    let build = |edits: &[(usize, usize, &Move)]| -> SymState {
        let mut threads = Vec::new();
        let mut binders = s.binders.clone();
        for (i, t) in s.threads.iter().enumerate() {
            if !edits.iter().any(|(ti, ..)| *ti == i) {
                threads.push(t.clone());
                continue;
            }
            for (j, a) in atoms[i].iter().enumerate() {
                match edits.iter().find(|(ti, aj, _)| *ti == i && *aj == j) {
                    Some((.., m)) => {
                        threads.extend(m.cont.iter().cloned());
                        binders.extend(m.created);
                    }
                    None => threads.push(a.clone()),
                }
            }
        }
        normalize(s.pinned.clone(), binders, threads, k)
    };

    let free = s.free_names();
    let mut out: Vec<(Label, SymState)> = Vec::new();
    let flat: Vec<(usize, usize, &Move)> = all_moves
        .iter()
        .enumerate()
        .flat_map(|(i, per)| {
            per.iter()
                .enumerate()
                .flat_map(move |(j, ms)| ms.iter().map(move |m| (i, j, m)))
        })
        .collect();
    for (x, &(i, j, m)) in flat.iter().enumerate() {
        let label = m.cap.label();
        let visible = match m.cap {
            Cap::Tau => true,
            Cap::Out(a)
            | Cap::In(a)
            | Cap::End(a)
            | Cap::CloseDual(a)
            | Cap::ClosedSend(a)
            | Cap::Push(a)
            | Cap::Pop(a) => open && free.contains(&a),
        };
        if visible {
            out.push((label, build(&[(i, j, m)])));
        }
        for &(i2, j2, m2) in &flat[x + 1..] {
            if i == i2 && j == j2 {
                continue;
            }
            if let Some(l) = interact(m.cap, m2.cap) {
                out.push((l, build(&[(i, j, m), (i2, j2, m2)])));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Concrete type LTS on canonical terms, including unary labels on free names.
pub fn type_step(t: &SymState, sys: &TypeSystem) -> Vec<(Label, SymState)> {
    successors(t, sys, None, true)
}

/// Bounded symbolic transitions of a closed state.
pub fn sym_step(s: &SymState, sys: &TypeSystem, k: usize) -> Vec<(Label, SymState)> {
    successors(s, sys, Some(k), false)
}
