use super::ast::*;
use crate::name::{fresh, Name};
use std::collections::BTreeSet;

/// Replacement for a process variable: another name or a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sub {
    Chan(Name),
    Val(Value),
}

pub trait FreeNames {
    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>);

    fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }
}

fn note(n: Name, bound: &[Name], out: &mut BTreeSet<Name>) {
    if !bound.contains(&n) {
        out.insert(n);
    }
}

impl FreeNames for Expr {
    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let mut vs = Vec::new();
        self.vars(&mut vs);
        for v in vs {
            note(v, bound, out);
        }
    }
}

impl FreeNames for Prefix {
    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Prefix::Send(c, e) => {
                note(*c, bound, out);
                e.collect_free(bound, out);
            }
            Prefix::Recv(c, _) => note(*c, bound, out),
            Prefix::Tau => {}
        }
    }
}

fn under<T: FreeNames + ?Sized>(
    x: Name,
    body: &T,
    bound: &mut Vec<Name>,
    out: &mut BTreeSet<Name>,
) {
    bound.push(x);
    body.collect_free(bound, out);
    bound.pop();
}

fn prefixed(pre: &Prefix, k: &Proc, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    pre.collect_free(bound, out);
    match pre {
        Prefix::Recv(_, y) => under(*y, k, bound, out),
        _ => k.collect_free(bound, out),
    }
}

impl FreeNames for Proc {
    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Proc::Nil => {}
            Proc::Pre(p, k) => prefixed(p, k, bound, out),
            Proc::Close(c, k) => {
                note(*c, bound, out);
                k.collect_free(bound, out);
            }
            Proc::Select(bs) => {
                for (p, k) in bs {
                    prefixed(p, k, bound, out);
                }
            }
            Proc::If {
                guard, then, els, ..
            } => {
                if let Guard::Expr(e) = guard {
                    e.collect_free(bound, out);
                }
                then.collect_free(bound, out);
                els.collect_free(bound, out);
            }
            Proc::New { var, body, .. } => under(*var, body.as_ref(), bound, out),
            Proc::Par(ps) => ps.iter().for_each(|p| p.collect_free(bound, out)),
            Proc::Call { args, chans, .. } => {
                args.iter().for_each(|e| e.collect_free(bound, out));
                chans.iter().for_each(|c| note(*c, bound, out));
            }
            Proc::Res(c, k) => under(*c, k.as_ref(), bound, out),
            Proc::Buf { chan, .. } => note(*chan, bound, out),
        }
    }
}

impl FreeNames for Type {
    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Nil => {}
            Type::Pre(a, k) => {
                if let Some(c) = a.channel() {
                    note(c, bound, out);
                }
                k.collect_free(bound, out);
            }
            Type::Choice(ts) | Type::Par(ts) => ts.iter().for_each(|t| t.collect_free(bound, out)),
            Type::Branch(bs) => {
                for (a, k) in bs {
                    if let Some(c) = a.channel() {
                        note(c, bound, out);
                    }
                    k.collect_free(bound, out);
                }
            }
            Type::New(a, _, k) | Type::Res(a, k) => under(*a, k.as_ref(), bound, out),
            Type::End(a, k) => {
                note(*a, bound, out);
                k.collect_free(bound, out);
            }
            Type::Call(_, args) => args.iter().for_each(|a| note(*a, bound, out)),
            Type::Buf(a, ..) | Type::Closed(a) => note(*a, bound, out),
        }
    }
}

/// Every name spelled anywhere in a type, bound or free.
pub fn all_type_names(t: &Type, out: &mut BTreeSet<Name>) {
    match t {
        Type::Nil => {}
        Type::Pre(a, k) => {
            out.extend(a.channel());
            all_type_names(k, out);
        }
        Type::Choice(ts) | Type::Par(ts) => ts.iter().for_each(|t| all_type_names(t, out)),
        Type::Branch(bs) => {
            for (a, k) in bs {
                out.extend(a.channel());
                all_type_names(k, out);
            }
        }
        Type::New(a, _, k) | Type::Res(a, k) | Type::End(a, k) => {
            out.insert(*a);
            all_type_names(k, out);
        }
        Type::Call(_, args) => out.extend(args.iter().copied()),
        Type::Buf(a, ..) | Type::Closed(a) => {
            out.insert(*a);
        }
    }
}

// ------------------------------------------------------------ type substitution

impl Type {
    /// Capture-avoiding simultaneous renaming of free names.
    pub fn subst(&self, s: &[(Name, Name)]) -> Type {
        if s.is_empty() {
            return self.clone();
        }
        let look = |n: Name| s.iter().find(|(x, _)| *x == n).map_or(n, |(_, u)| *u);
        match self {
            Type::Nil => Type::Nil,
            Type::Pre(a, k) => Type::Pre(a.rename(&look), Box::new(k.subst(s))),
            Type::Choice(ts) => Type::Choice(ts.iter().map(|t| t.subst(s)).collect()),
            Type::Par(ts) => Type::Par(ts.iter().map(|t| t.subst(s)).collect()),
            Type::Branch(bs) => Type::Branch(
                bs.iter()
                    .map(|(a, k)| (a.rename(&look), k.subst(s)))
                    .collect(),
            ),
            Type::End(a, k) => Type::End(look(*a), Box::new(k.subst(s))),
            Type::Call(t, args) => Type::Call(*t, args.iter().map(|a| look(*a)).collect()),
            Type::Buf(a, n, c) => Type::Buf(look(*a), *n, *c),
            Type::Closed(a) => Type::Closed(look(*a)),
            Type::New(a, n, k) => {
                let (a2, k2) = subst_binder(*a, k, s);
                Type::New(a2, *n, Box::new(k2))
            }
            Type::Res(a, k) => {
                let (a2, k2) = subst_binder(*a, k, s);
                Type::Res(a2, Box::new(k2))
            }
        }
    }

    pub fn rename(&self, from: Name, to: Name) -> Type {
        self.subst(&[(from, to)])
    }
}

fn subst_binder(a: Name, body: &Type, s: &[(Name, Name)]) -> (Name, Type) {
    let inner: Vec<(Name, Name)> = s.iter().copied().filter(|(x, _)| *x != a).collect();
    if inner.is_empty() {
        return (a, body.clone());
    }
    let fv = body.free_names();
    let live: Vec<(Name, Name)> = inner.into_iter().filter(|(x, _)| fv.contains(x)).collect();
    if live.is_empty() {
        return (a, body.clone());
    }
    if live.iter().any(|(_, u)| *u == a) {
        let a2 = fresh(a.as_str(), |n| {
            fv.contains(&n) || live.iter().any(|(x, u)| *x == n || *u == n)
        });
        let mut s2 = live.clone();
        s2.push((a, a2));
        (a2, body.subst(&s2))
    } else {
        (a, body.subst(&live))
    }
}

// --------------------------------------------------------- process substitution

impl Expr {
    pub fn subst(&self, s: &[(Name, Sub)]) -> Expr {
        match self {
            Expr::Var(x) => match s.iter().find(|(y, _)| y == x) {
                Some((_, Sub::Val(v))) => Expr::Lit(*v),
                Some((_, Sub::Chan(c))) => Expr::Var(*c),
                None => self.clone(),
            },
            Expr::Lit(_) => self.clone(),
            Expr::Not(e) => Expr::Not(Box::new(e.subst(s))).folded(),
            Expr::Succ(e) => Expr::Succ(Box::new(e.subst(s))).folded(),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.subst(s), r.subst(s)).folded(),
        }
    }

    /// Evaluates an operator whose operands are literals; failures stay symbolic.
    fn folded(self) -> Expr {
        let closed = match &self {
            Expr::Not(e) | Expr::Succ(e) => matches!(**e, Expr::Lit(_)),
            Expr::Bin(_, l, r) => matches!((&**l, &**r), (Expr::Lit(_), Expr::Lit(_))),
            _ => false,
        };
        match closed.then(|| crate::interp::eval_closed(&self)) {
            Some(Ok(v)) => Expr::Lit(v),
            _ => self,
        }
    }
}

fn chan_of(n: Name, s: &[(Name, Sub)]) -> Name {
    match s.iter().find(|(x, _)| *x == n) {
        Some((_, Sub::Chan(c))) => *c,
        _ => n,
    }
}

impl Proc {
    /// Capture-avoiding simultaneous substitution of names and values for free variables.
    pub fn subst(&self, s: &[(Name, Sub)]) -> Proc {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Proc::Nil => Proc::Nil,
            Proc::Pre(p, k) => {
                let (p2, k2) = subst_prefixed(p, k, s);
                Proc::Pre(p2, Box::new(k2))
            }
            Proc::Close(c, k) => Proc::Close(chan_of(*c, s), Box::new(k.subst(s))),
            Proc::Select(bs) => {
                Proc::Select(bs.iter().map(|(p, k)| subst_prefixed(p, k, s)).collect())
            }
            Proc::If {
                guard,
                then,
                els,
                mark,
            } => Proc::If {
                guard: match guard {
                    Guard::Expr(e) => Guard::Expr(e.subst(s)),
                    Guard::Star => Guard::Star,
                },
                then: Box::new(then.subst(s)),
                els: Box::new(els.subst(s)),
                mark: *mark,
            },
            Proc::New {
                var,
                sort,
                cap,
                body,
            } => {
                let (v2, b2) = proc_binder(*var, body, s);
                Proc::New {
                    var: v2,
                    sort: *sort,
                    cap: *cap,
                    body: Box::new(b2),
                }
            }
            Proc::Par(ps) => Proc::Par(ps.iter().map(|p| p.subst(s)).collect()),
            Proc::Call { name, args, chans } => Proc::Call {
                name: *name,
                args: args.iter().map(|e| e.subst(s)).collect(),
                chans: chans.iter().map(|c| chan_of(*c, s)).collect(),
            },
            Proc::Res(c, k) => {
                let (c2, k2) = proc_binder(*c, k, s);
                Proc::Res(c2, Box::new(k2))
            }
            Proc::Buf {
                chan,
                sort,
                cap,
                vals,
                closed,
            } => Proc::Buf {
                chan: chan_of(*chan, s),
                sort: *sort,
                cap: *cap,
                vals: vals.clone(),
                closed: *closed,
            },
        }
    }
}

fn subst_prefixed(p: &Prefix, k: &Proc, s: &[(Name, Sub)]) -> (Prefix, Proc) {
    match p {
        Prefix::Send(c, e) => (Prefix::Send(chan_of(*c, s), e.subst(s)), k.subst(s)),
        Prefix::Tau => (Prefix::Tau, k.subst(s)),
        Prefix::Recv(c, y) => {
            let (y2, k2) = proc_binder(*y, k, s);
            (Prefix::Recv(chan_of(*c, s), y2), k2)
        }
    }
}

fn proc_binder(y: Name, body: &Proc, s: &[(Name, Sub)]) -> (Name, Proc) {
    let inner: Vec<(Name, Sub)> = s.iter().copied().filter(|(x, _)| *x != y).collect();
    if inner.is_empty() {
        return (y, body.clone());
    }
    let fv = body.free_names();
    let live: Vec<(Name, Sub)> = inner.into_iter().filter(|(x, _)| fv.contains(x)).collect();
    if live.is_empty() {
        return (y, body.clone());
    }
    if live.iter().any(|(_, u)| *u == Sub::Chan(y)) {
        let y2 = fresh(y.as_str(), |n| {
            fv.contains(&n) || live.iter().any(|(x, u)| *x == n || *u == Sub::Chan(n))
        });
        let mut s2 = live.clone();
        s2.push((y, Sub::Chan(y2)));
        (y2, body.subst(&s2))
    } else {
        (y, body.subst(&live))
    }
}

pub fn free_names<T: FreeNames>(t: &T) -> BTreeSet<Name> {
    t.free_names()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn fn_of_send() {
        let t = Type::send("a", Type::Nil);
        assert_eq!(t.free_names(), [n("a")].into_iter().collect());
    }

    #[test]
    fn fn_under_restriction() {
        let t = Type::Res(
            n("a"),
            Box::new(Type::Par(vec![
                Type::send("a", Type::Nil),
                Type::recv("b", Type::Nil),
            ])),
        );
        assert_eq!(t.free_names(), [n("b")].into_iter().collect());
    }

    #[test]
    fn substitution_avoids_capture() {
        // newchan b (f<x,b>) with x := b must rename the binder
        let t = Type::new_chan("b", 0, Type::call("f", &["x", "b"]));
        let u = t.subst(&[(n("x"), n("b"))]);
        match u {
            Type::New(b2, _, k) => {
                assert_ne!(b2, n("b"));
                assert_eq!(*k, Type::Call(n("f"), vec![n("b"), b2]));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn process_substitution_values_and_channels() {
        let p = Proc::pre(
            Prefix::Send(n("c"), Expr::var("k")),
            Proc::pre(Prefix::Recv(n("c"), n("y")), Proc::Nil),
        );
        let q = p.subst(&[
            (n("k"), Sub::Val(Value::Int(3))),
            (n("c"), Sub::Chan(n("d"))),
        ]);
        let expect = Proc::pre(
            Prefix::Send(n("d"), Expr::int(3)),
            Proc::pre(Prefix::Recv(n("d"), n("y")), Proc::Nil),
        );
        assert_eq!(q, expect);
    }

    #[test]
    fn recv_binder_shadows() {
        let p = Proc::pre(
            Prefix::Recv(n("c"), n("x")),
            Proc::pre(Prefix::Send(n("c"), Expr::var("x")), Proc::Nil),
        );
        let q = p.subst(&[(n("x"), Sub::Val(Value::Int(1)))]);
        assert_eq!(p, q);
    }
}
