use super::eval::eval_closed;
use super::state::{normalize, RuntimeState};
use crate::name::{fresh, Name};
use crate::syntax::{Act, Guard, ParamKind, Prefix, Proc, Program, Sub, Type, Value};
use crate::tysem::Barb;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    L,
    R,
}

/// `ε`, or the branch taken by a marked conditional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActionLabel {
    Eps,
    If(u32, Side),
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Eps => f.write_str("ε"),
            ActionLabel::If(n, s) => write!(f, "if({n},{s:?})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Scom,
    Sclose,
    Close,
    Tau,
    Newc,
    If,
    Out,
    Ina,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Scom => "scom",
            Rule::Sclose => "sclose",
            Rule::Close => "close",
            Rule::Tau => "tau",
            Rule::Newc => "newc",
            Rule::If => "if",
            Rule::Out => "out",
            Rule::Ina => "ina",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub label: ActionLabel,
    pub rule: Rule,
    pub channel: Option<Name>,
    pub state: RuntimeState,
}

/// Unfolds calls until every thread is a prefix, close, select,
/// conditional, channel creation or buffer. A call met again while unfolding
/// itself stays folded; so does a call whose arguments fail to evaluate.
pub(crate) fn expand(p: &Proc, prog: &Program, stack: &mut Vec<Name>, out: &mut Vec<Proc>) {
    match p {
        Proc::Nil => {}
        Proc::Par(ps) => ps.iter().for_each(|p| expand(p, prog, stack, out)),
        Proc::Call { name, args, chans } => {
            let Some(body) = unfold(prog, *name, args, chans) else {
                out.push(p.clone());
                return;
            };
            if stack.contains(name) {
                out.push(p.clone());
                return;
            }
            stack.push(*name);
            expand(&body, prog, stack, out);
            stack.pop();
        }
        other => out.push(other.clone()),
    }
}

pub(crate) fn unfold(
    prog: &Program,
    name: Name,
    args: &[crate::syntax::Expr],
    chans: &[Name],
) -> Option<Proc> {
    let def = prog.def(name)?;
    let mut vals = args.iter();
    let mut cs = chans.iter();
    let mut sub = Vec::with_capacity(def.params.len());
    for p in &def.params {
        match p.kind {
            ParamKind::Val(_) => sub.push((p.name, Sub::Val(eval_closed(vals.next()?).ok()?))),
            ParamKind::Chan(_) => sub.push((p.name, Sub::Chan(*cs.next()?))),
        }
    }
    Some(def.body.subst(&sub))
}

type Push<'a> = dyn FnMut(Vec<(usize, Proc)>, ActionLabel, Rule, Option<Name>) + 'a;

struct Atoms {
    /// Unfolded atoms of each thread.
    per_thread: Vec<Vec<Proc>>,
    /// `(thread, index)` for every atom.
    index: Vec<(usize, usize)>,
}

impl Atoms {
    fn of(s: &RuntimeState, prog: &Program) -> Atoms {
        let mut per_thread = Vec::with_capacity(s.threads.len());
        let mut index = Vec::new();
        for (t, p) in s.threads.iter().enumerate() {
            let mut out = Vec::new();
            expand(p, prog, &mut Vec::new(), &mut out);
            for j in 0..out.len() {
                index.push((t, j));
            }
            per_thread.push(out);
        }
        Atoms { per_thread, index }
    }

    fn atom(&self, i: usize) -> &Proc {
        let (t, j) = self.index[i];
        &self.per_thread[t][j]
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    /// Successor threads with the given atoms replaced.
    fn rebuild(&self, s: &RuntimeState, edits: &[(usize, Proc)]) -> Vec<Proc> {
        let touched: BTreeSet<usize> = edits.iter().map(|(i, _)| self.index[*i].0).collect();
        let mut out = Vec::new();
        for (t, p) in s.threads.iter().enumerate() {
            if !touched.contains(&t) {
                out.push(p.clone());
                continue;
            }
            for (j, a) in self.per_thread[t].iter().enumerate() {
                match edits.iter().find(|(i, _)| self.index[*i] == (t, j)) {
                    Some((_, q)) => out.push(q.clone()),
                    None => out.push(a.clone()),
                }
            }
        }
        out
    }
}

struct Sender {
    atom: usize,
    chan: Name,
    value: Value,
    cont: Proc,
}

struct Receiver {
    atom: usize,
    chan: Name,
    var: Name,
    cont: Proc,
}

fn buffer(p: &Proc) -> Option<(Name, u32, &Vec<Value>, bool)> {
    match p {
        Proc::Buf {
            chan,
            cap,
            vals,
            closed,
            ..
        } => Some((*chan, *cap, vals, *closed)),
        _ => None,
    }
}

fn with_vals(p: &Proc, new_vals: Vec<Value>, now_closed: bool) -> Proc {
    match p {
        Proc::Buf {
            chan, sort, cap, ..
        } => Proc::Buf {
            chan: *chan,
            sort: *sort,
            cap: *cap,
            vals: new_vals,
            closed: now_closed,
        },
        _ => unreachable!("not a buffer"),
    }
}

/// All one-step successors, with the rule that produced each.
pub fn transitions(s: &RuntimeState, prog: &Program) -> Vec<Transition> {
    let atoms = Atoms::of(s, prog);
    let mut out = Vec::new();
    let mut senders = Vec::new();
    let mut receivers = Vec::new();
    let mut closers = Vec::new();
    let mut push = |edits: Vec<(usize, Proc)>, label, rule, channel| {
        let threads = atoms.rebuild(s, &edits);
        out.push(Transition {
            label,
            rule,
            channel,
            state: normalize(s.binders.clone(), threads),
        });
    };
    let mut taken: Option<BTreeSet<Name>> = None;
    for i in 0..atoms.len() {
        let mut offer = |pre: &Prefix, k: &Proc, push: &mut Push| match pre {
            Prefix::Tau => push(vec![(i, k.clone())], ActionLabel::Eps, Rule::Tau, None),
            Prefix::Send(c, e) => {
                if let Ok(v) = eval_closed(e) {
                    senders.push(Sender {
                        atom: i,
                        chan: *c,
                        value: v,
                        cont: k.clone(),
                    });
                }
            }
            Prefix::Recv(c, y) => receivers.push(Receiver {
                atom: i,
                chan: *c,
                var: *y,
                cont: k.clone(),
            }),
        };
        match atoms.atom(i) {
            Proc::Pre(pre, k) => offer(pre, k, &mut push),
            Proc::Select(bs) => bs.iter().for_each(|(pre, k)| offer(pre, k, &mut push)),
            Proc::Close(c, k) => closers.push((i, *c, (**k).clone())),
            Proc::If {
                guard,
                then,
                els,
                mark,
            } => {
                let label = |side| match mark {
                    Some(m) => ActionLabel::If(*m, side),
                    None => ActionLabel::Eps,
                };
                match guard {
                    Guard::Star => {
                        push(
                            vec![(i, (**then).clone())],
                            ActionLabel::Eps,
                            Rule::If,
                            None,
                        );
                        push(vec![(i, (**els).clone())], ActionLabel::Eps, Rule::If, None);
                    }
                    Guard::Expr(e) => match eval_closed(e) {
                        Ok(Value::Bool(true)) => {
                            push(vec![(i, (**then).clone())], label(Side::L), Rule::If, None)
                        }
                        Ok(Value::Bool(false)) => {
                            push(vec![(i, (**els).clone())], label(Side::R), Rule::If, None)
                        }
                        _ => {}
                    },
                }
            }
            Proc::New {
                var,
                sort,
                cap,
                body,
            } => {
                let taken = taken.get_or_insert_with(|| s.names());
                let c = fresh(var.as_str(), |n| taken.contains(&n));
                let created = Proc::Res(
                    c,
                    Box::new(Proc::Par(vec![
                        body.subst(&[(*var, Sub::Chan(c))]),
                        Proc::Buf {
                            chan: c,
                            sort: *sort,
                            cap: *cap,
                            vals: Vec::new(),
                            closed: false,
                        },
                    ])),
                );
                push(vec![(i, created)], ActionLabel::Eps, Rule::Newc, Some(c));
            }
            _ => {}
        }
    }
    let buffers: Vec<(usize, Name)> = (0..atoms.len())
        .filter_map(|i| buffer(atoms.atom(i)).map(|b| (i, b.0)))
        .collect();
    for &(bi, c) in &buffers {
        let bp = atoms.atom(bi);
        let (_, cap, vals, closed) = buffer(bp).unwrap();
        for snd in senders.iter().filter(|x| x.chan == c) {
            if !closed && vals.is_empty() {
                for rcv in receivers
                    .iter()
                    .filter(|x| x.chan == c && x.atom != snd.atom)
                {
                    let got = rcv.cont.subst(&[(rcv.var, Sub::Val(snd.value))]);
                    push(
                        vec![(snd.atom, snd.cont.clone()), (rcv.atom, got)],
                        ActionLabel::Eps,
                        Rule::Scom,
                        Some(c),
                    );
                }
            }
            if !closed && (vals.len() as u32) < cap {
                let mut vs = vec![snd.value];
                vs.extend(vals.iter().copied());
                push(
                    vec![(snd.atom, snd.cont.clone()), (bi, with_vals(bp, vs, false))],
                    ActionLabel::Eps,
                    Rule::Out,
                    Some(c),
                );
            }
        }
        for rcv in receivers.iter().filter(|x| x.chan == c) {
            if let Some((&last, rest)) = vals.split_last() {
                let got = rcv.cont.subst(&[(rcv.var, Sub::Val(last))]);
                push(
                    vec![(rcv.atom, got), (bi, with_vals(bp, rest.to_vec(), closed))],
                    ActionLabel::Eps,
                    Rule::Ina,
                    Some(c),
                );
            } else if closed {
                let Proc::Buf { sort, .. } = bp else {
                    unreachable!()
                };
                let got = rcv.cont.subst(&[(rcv.var, Sub::Val(sort.bottom()))]);
                push(
                    vec![(rcv.atom, got)],
                    ActionLabel::Eps,
                    Rule::Sclose,
                    Some(c),
                );
            }
        }
        if !closed {
            for (ci, cc, k) in closers.iter().filter(|x| x.1 == c) {
                push(
                    vec![(*ci, k.clone()), (bi, with_vals(bp, vals.clone(), true))],
                    ActionLabel::Eps,
                    Rule::Close,
                    Some(*cc),
                );
            }
        }
    }
    out.sort_by(|a, b| (a.label, &a.state, a.rule).cmp(&(b.label, &b.state, b.rule)));
    out.dedup_by(|a, b| a.label == b.label && a.state == b.state && a.rule == b.rule);
    out
}

/// One-step successors tagged with their action labels.
pub fn step(s: &RuntimeState, prog: &Program) -> Vec<(ActionLabel, RuntimeState)> {
    let mut out: Vec<(ActionLabel, RuntimeState)> = transitions(s, prog)
        .into_iter()
        .map(|t| (t.label, t.state))
        .collect();
    out.dedup();
    out
}

/// Barbs of a state with its restrictions stripped; calls unfold.
pub fn barbs(s: &RuntimeState, prog: &Program) -> BTreeSet<Barb> {
    let atoms = Atoms::of(s, prog);
    let shapes: Vec<Type> = (0..atoms.len())
        .filter_map(|i| shape(atoms.atom(i)))
        .collect();
    crate::tysem::barbs_of_atoms(&shapes)
}

/// The behavioural outline of an atom, enough to read off its barbs.
fn shape(p: &Proc) -> Option<Type> {
    let act = |pre: &Prefix| match pre {
        Prefix::Send(c, _) => Act::Send(*c),
        Prefix::Recv(c, _) => Act::Recv(*c),
        Prefix::Tau => Act::Tau,
    };
    Some(match p {
        Proc::Pre(pre, _) => Type::pre(act(pre), Type::Nil),
        Proc::Close(c, _) => Type::End(*c, Box::new(Type::Nil)),
        Proc::Select(bs) => Type::Branch(bs.iter().map(|(pre, _)| (act(pre), Type::Nil)).collect()),
        Proc::Buf {
            chan,
            cap,
            vals,
            closed,
            ..
        } => {
            if *closed {
                Type::Closed(*chan)
            } else {
                Type::Buf(*chan, vals.len() as u32, *cap)
            }
        }
        _ => return None,
    })
}
