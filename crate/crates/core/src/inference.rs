//! Behavioural type inference for programs and runtime states.
//!
//! Each definition `X(x̃, ỹ) = P` yields an equation `t_X(ỹ) = T` with the
//! value parameters erased, and the main process becomes `t0() = S`.
//! Expressions are checked with a plain sort checker.

use crate::interp::RuntimeState;
use crate::name::{fresh, Name};
use crate::syntax::{
    Act, BinOp, Equation, Expr, Guard, Param, ParamKind, Prefix, Proc, Program, Sort, Sub, Type,
    TypeSystem, Value,
};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InferError {
    #[error("{def}: sort mismatch in {what}: expected {expected}, found {found}")]
    SortMismatch {
        def: String,
        what: String,
        expected: Sort,
        found: Sort,
    },
    #[error("{def}: conditional guard has sort {found}, expected bool")]
    GuardNotBool { def: String, found: Sort },
    #[error("{def}: unknown definition {name}")]
    UnknownDef { def: String, name: String },
    #[error("{def}: unbound name {name}")]
    Unbound { def: String, name: String },
    #[error("{def}: {name} is not a channel")]
    NotAChannel { def: String, name: String },
    #[error("{def}: channel {name} used as a value")]
    NotAValue { def: String, name: String },
    #[error("{def}: {name} expects {expected} arguments, found {found}")]
    Arity {
        def: String,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("two buffers for channel {0} in parallel")]
    DuplicateBuffer(Name),
}

/// Equation name for definition `x`.
pub fn equation_name(x: Name) -> Name {
    Name::new(&format!("t_{x}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Binding {
    Chan(Sort, Option<u32>),
    Val(Sort),
}

/// Γ: channel and value bindings plus the signatures of the definitions.
#[derive(Clone, Debug)]
pub struct TypingContext<'a> {
    names: HashMap<Name, Binding>,
    sigs: HashMap<Name, &'a [Param]>,
}

impl<'a> TypingContext<'a> {
    pub fn new(p: &'a Program) -> TypingContext<'a> {
        TypingContext {
            names: HashMap::new(),
            sigs: p
                .defs
                .iter()
                .map(|d| (d.name, d.params.as_slice()))
                .collect(),
        }
    }

    fn bind_chan(&mut self, c: Name, sort: Sort, cap: Option<u32>) {
        self.names.insert(c, Binding::Chan(sort, cap));
    }

    fn bind_val(&mut self, x: Name, sort: Sort) {
        self.names.insert(x, Binding::Val(sort));
    }

    pub fn chan_sort(&self, c: Name) -> Option<Sort> {
        match self.names.get(&c) {
            Some(Binding::Chan(s, _)) => Some(*s),
            _ => None,
        }
    }

    pub fn val_sort(&self, x: Name) -> Option<Sort> {
        match self.names.get(&x) {
            Some(Binding::Val(s)) => Some(*s),
            _ => None,
        }
    }

    fn contains(&self, n: Name) -> bool {
        self.names.contains_key(&n)
    }
}

/// Channels that own a live buffer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BufferSet(pub BTreeSet<Name>);

impl BufferSet {
    fn union(mut self, o: BufferSet) -> Result<BufferSet, InferError> {
        for c in o.0 {
            if !self.0.insert(c) {
                return Err(InferError::DuplicateBuffer(c));
            }
        }
        Ok(self)
    }
}

struct Infer<'a> {
    def: String,
    /// Runtime states carry closed values and channels without declared
    /// sorts, so sorts are only checked where known.
    lenient: bool,
    ctx: TypingContext<'a>,
}

impl Infer<'_> {
    fn unbound<T>(&self, n: Name) -> Result<T, InferError> {
        Err(InferError::Unbound {
            def: self.def.clone(),
            name: n.to_string(),
        })
    }

    fn expect(
        &self,
        what: impl Into<String>,
        expected: Sort,
        found: Sort,
    ) -> Result<(), InferError> {
        if expected == found {
            return Ok(());
        }
        Err(InferError::SortMismatch {
            def: self.def.clone(),
            what: what.into(),
            expected,
            found,
        })
    }

    fn expr(&self, e: &Expr) -> Result<Sort, InferError> {
        Ok(match e {
            Expr::Lit(Value::Int(_)) => Sort::Int,
            Expr::Lit(Value::Bool(_)) => Sort::Bool,
            Expr::Var(x) => match self.ctx.names.get(x) {
                Some(Binding::Val(s)) => *s,
                Some(Binding::Chan(..)) => {
                    return Err(InferError::NotAValue {
                        def: self.def.clone(),
                        name: x.to_string(),
                    })
                }
                None => return self.unbound(*x),
            },
            Expr::Not(e) => {
                self.expect("negation", Sort::Bool, self.expr(e)?)?;
                Sort::Bool
            }
            Expr::Succ(e) => {
                self.expect("successor", Sort::Int, self.expr(e)?)?;
                Sort::Int
            }
            Expr::Bin(op, l, r) => {
                let (ls, rs) = (self.expr(l)?, self.expr(r)?);
                let what = format!("operand of {}", op.symbol());
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Mod => {
                        self.expect(&what, Sort::Int, ls)?;
                        self.expect(&what, Sort::Int, rs)?;
                        Sort::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.expect(&what, Sort::Int, ls)?;
                        self.expect(&what, Sort::Int, rs)?;
                        Sort::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        self.expect(&what, ls, rs)?;
                        Sort::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        self.expect(&what, Sort::Bool, ls)?;
                        self.expect(&what, Sort::Bool, rs)?;
                        Sort::Bool
                    }
                }
            }
        })
    }

    fn chan(&self, c: Name) -> Result<Option<Sort>, InferError> {
        match self.ctx.names.get(&c) {
            Some(Binding::Chan(s, _)) => Ok(Some(*s)),
            Some(Binding::Val(_)) => Err(InferError::NotAChannel {
                def: self.def.clone(),
                name: c.to_string(),
            }),
            None if self.lenient => Ok(None),
            None => self.unbound(c),
        }
    }

    fn prefix(&mut self, a: &Prefix) -> Result<Act, InferError> {
        Ok(match a {
            Prefix::Tau => Act::Tau,
            Prefix::Send(c, e) => {
                let found = self.expr(e);
                if let Some(s) = self.chan(*c)? {
                    self.expect(format!("payload sent on {c}"), s, found?)?;
                } else if !self.lenient {
                    found?;
                }
                Act::Send(*c)
            }
            Prefix::Recv(c, x) => {
                let s = self.chan(*c)?;
                self.ctx.bind_val(*x, s.unwrap_or(Sort::Int));
                Act::Recv(*c)
            }
        })
    }

    /// Types `p` under the current context, which is restored afterwards.
    fn scoped(&mut self, p: &Proc) -> Result<(Type, BufferSet), InferError> {
        let saved = self.ctx.names.clone();
        let r = self.proc(p);
        self.ctx.names = saved;
        r
    }

    fn proc(&mut self, p: &Proc) -> Result<(Type, BufferSet), InferError> {
        Ok(match p {
            Proc::Nil => (Type::Nil, BufferSet::default()),
            Proc::Pre(a, k) => {
                let a = self.prefix(a)?;
                let (t, b) = self.proc(k)?;
                (Type::pre(a, t), b)
            }
            Proc::Close(c, k) => {
                self.chan(*c)?;
                let (t, b) = self.proc(k)?;
                (Type::End(*c, Box::new(t)), b)
            }
            Proc::Select(bs) => {
                let mut out = Vec::new();
                let mut bufs = BufferSet::default();
                for (a, k) in bs {
                    let saved = self.ctx.names.clone();
                    let a = self.prefix(a)?;
                    let (t, b) = self.proc(k)?;
                    self.ctx.names = saved;
                    out.push((a, t));
                    bufs = bufs.union(b)?;
                }
                (Type::Branch(out), bufs)
            }
            Proc::If {
                guard, then, els, ..
            } => {
                if let Guard::Expr(e) = guard {
                    match self.expr(e) {
                        Ok(Sort::Bool) => {}
                        Ok(found) => {
                            return Err(InferError::GuardNotBool {
                                def: self.def.clone(),
                                found,
                            })
                        }
                        Err(e) if !self.lenient => return Err(e),
                        Err(_) => {}
                    }
                }
                let (t, b1) = self.scoped(then)?;
                let (e, b2) = self.scoped(els)?;
                (Type::Choice(vec![t, e]), b1.union(b2)?)
            }
            Proc::New {
                var,
                sort,
                cap,
                body,
            } => {
                let c = fresh(var.as_str(), |n| self.ctx.contains(n));
                let body = if c == *var {
                    (**body).clone()
                } else {
                    body.subst(&[(*var, Sub::Chan(c))])
                };
                self.ctx.bind_chan(c, *sort, Some(*cap));
                let (t, b) = self.proc(&body)?;
                (Type::New(c, *cap, Box::new(t)), b)
            }
            Proc::Par(ps) => {
                let mut ts = Vec::new();
                let mut bufs = BufferSet::default();
                for p in ps {
                    let (t, b) = self.scoped(p)?;
                    ts.push(t);
                    bufs = bufs.union(b)?;
                }
                (Type::Par(ts), bufs)
            }
            Proc::Call { name, args, chans } => {
                (self.call(*name, args, chans)?, BufferSet::default())
            }
            Proc::Res(c, k) => {
                let saved = self.ctx.names.clone();
                if !self.ctx.names.contains_key(c) || self.lenient {
                    self.ctx.names.remove(c);
                }
                let (t, mut b) = self.proc(k)?;
                self.ctx.names = saved;
                b.0.remove(c);
                (Type::Res(*c, Box::new(t)), b)
            }
            Proc::Buf {
                chan,
                cap,
                vals,
                closed,
                ..
            } => {
                let t = if *closed {
                    Type::Closed(*chan)
                } else {
                    Type::Buf(*chan, vals.len() as u32, *cap)
                };
                (t, BufferSet([*chan].into_iter().collect()))
            }
        })
    }

    fn call(&self, name: Name, args: &[Expr], chans: &[Name]) -> Result<Type, InferError> {
        let Some(params) = self.ctx.sigs.get(&name) else {
            return Err(InferError::UnknownDef {
                def: self.def.clone(),
                name: name.to_string(),
            });
        };
        let vals: Vec<Sort> = params
            .iter()
            .filter_map(|p| match p.kind {
                ParamKind::Val(s) => Some(s),
                ParamKind::Chan(_) => None,
            })
            .collect();
        let chs: Vec<Sort> = params
            .iter()
            .filter_map(|p| match p.kind {
                ParamKind::Chan(s) => Some(s),
                ParamKind::Val(_) => None,
            })
            .collect();
        if vals.len() != args.len() || chs.len() != chans.len() {
            return Err(InferError::Arity {
                def: self.def.clone(),
                name: name.to_string(),
                expected: params.len(),
                found: args.len() + chans.len(),
            });
        }
        for (i, (e, s)) in args.iter().zip(&vals).enumerate() {
            match self.expr(e) {
                Ok(found) => self.expect(format!("argument {} of {name}", i + 1), *s, found)?,
                Err(e) if !self.lenient => return Err(e),
                Err(_) => {}
            }
        }
        for (c, s) in chans.iter().zip(&chs) {
            if let Some(found) = self.chan(*c)? {
                self.expect(format!("channel argument {c} of {name}"), *s, found)?;
            }
        }
        Ok(Type::Call(equation_name(name), chans.to_vec()))
    }
}

/// Infers the type system of a program.
pub fn infer(p: &Program) -> Result<TypeSystem, InferError> {
    let mut eqs = Vec::new();
    for d in &p.defs {
        let mut inf = Infer {
            def: d.name.to_string(),
            lenient: false,
            ctx: TypingContext::new(p),
        };
        for prm in &d.params {
            match prm.kind {
                ParamKind::Val(s) => inf.ctx.bind_val(prm.name, s),
                ParamKind::Chan(s) => inf.ctx.bind_chan(prm.name, s, None),
            }
        }
        let (body, _) = inf.proc(&d.body)?;
        eqs.push(Equation {
            name: equation_name(d.name),
            params: d.chan_params().map(|p| p.name).collect(),
            body: tidy(body),
        });
    }
    let mut inf = Infer {
        def: "main".to_string(),
        lenient: false,
        ctx: TypingContext::new(p),
    };
    let (body, _) = inf.proc(&p.main)?;
    eqs.push(Equation {
        name: TypeSystem::entry_name(),
        params: Vec::new(),
        body: tidy(body),
    });
    Ok(TypeSystem { eqs })
}

/// Types a runtime state. Calls are named as in [`infer`]; the program is
/// only needed for the call signatures.
pub fn infer_runtime(s: &RuntimeState, p: &Program) -> Result<(Type, BufferSet), InferError> {
    let mut inf = Infer {
        def: "state".to_string(),
        lenient: true,
        ctx: TypingContext::new(p),
    };
    inf.proc(&s.to_proc()).map(|(t, b)| (tidy(t), b))
}

/// Drops trivial parallel compositions left by the translation.
fn tidy(t: Type) -> Type {
    let go = |t: Box<Type>| Box::new(tidy(*t));
    match t {
        Type::Par(ts) => {
            let mut out = Vec::new();
            for t in ts.into_iter().map(tidy) {
                match t {
                    Type::Nil => {}
                    Type::Par(inner) => out.extend(inner),
                    t => out.push(t),
                }
            }
            Type::par(out)
        }
        Type::Pre(a, k) => Type::Pre(a, go(k)),
        Type::Choice(ts) => Type::Choice(ts.into_iter().map(tidy).collect()),
        Type::Branch(bs) => Type::Branch(bs.into_iter().map(|(a, t)| (a, tidy(t))).collect()),
        Type::New(c, n, k) => Type::New(c, n, go(k)),
        Type::End(c, k) => Type::End(c, go(k)),
        Type::Res(c, k) => Type::Res(c, go(k)),
        t @ (Type::Nil | Type::Call(..) | Type::Buf(..) | Type::Closed(_)) => t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_type_system};

    fn rename_eqs(sys: &TypeSystem, map: &[(&str, &str)]) -> TypeSystem {
        let m = |n: Name| {
            map.iter()
                .find(|(a, _)| Name::new(a) == n)
                .map_or(n, |(_, b)| Name::new(b))
        };
        fn go(t: &Type, m: &impl Fn(Name) -> Name) -> Type {
            match t {
                Type::Call(x, a) => Type::Call(m(*x), a.clone()),
                Type::Pre(a, k) => Type::pre(*a, go(k, m)),
                Type::Choice(ts) => Type::Choice(ts.iter().map(|t| go(t, m)).collect()),
                Type::Branch(bs) => Type::Branch(bs.iter().map(|(a, t)| (*a, go(t, m))).collect()),
                Type::Par(ts) => Type::Par(ts.iter().map(|t| go(t, m)).collect()),
                Type::New(c, n, k) => Type::New(*c, *n, Box::new(go(k, m))),
                Type::End(c, k) => Type::End(*c, Box::new(go(k, m))),
                Type::Res(c, k) => Type::Res(*c, Box::new(go(k, m))),
                t => t.clone(),
            }
        }
        TypeSystem {
            eqs: sys
                .eqs
                .iter()
                .map(|e| Equation {
                    name: m(e.name),
                    params: e.params.clone(),
                    body: go(&e.body, &m),
                })
                .collect(),
        }
    }

    fn sorted(mut s: TypeSystem) -> TypeSystem {
        s.eqs.sort_by_key(|e| e.name.to_string());
        s
    }

    #[test]
    fn sieve() {
        let p = parse_program(
            "def G(n: int, x: chan int) = x!<n>; G<n + 1, x>;
                 F(n: int, x: chan int, y: chan int) =
                     x?(m); if m % n != 0 then y!<m>; F<n, x, y> else F<n, x, y>;
                 R(x: chan int) = x?(n); new b: int; (F<n, x, b> | R<b>)
             in new a: int; (G<2, a> | R<a>)",
        )
        .unwrap();
        let got = rename_eqs(
            &infer(&p).unwrap(),
            &[("t_G", "g"), ("t_F", "f"), ("t_R", "r")],
        );
        let want = parse_type_system(
            "g(x) = send x; g<x>
             f(x, y) = recv x; oplus { send y; f<x, y>, f<x, y> }
             r(x) = recv x; newchan b; (f<x, b> | r<b>)
             t0() = newchan a; (g<a> | r<a>)",
        )
        .unwrap();
        assert_eq!(sorted(got), sorted(want));
    }

    #[test]
    fn fib() {
        let p = parse_program(
            "def Fib(n: int, x: chan int) =
                 if n <= 1 then x!<n>
                 else new b: int; (Fib<n - 1, b> | b?(u); b?(v); x!<u + v> | Fib<n - 2, b>)
             in new a: int; (Fib<10, a> | a?(r))",
        )
        .unwrap();
        let got = rename_eqs(&infer(&p).unwrap(), &[("t_Fib", "fib")]);
        let want = parse_type_system(
            "fib(x) = oplus { send x, newchan b; (fib<b> | recv b; recv b; send x | fib<b>) }
             t0() = newchan a; (fib<a> | recv a)",
        )
        .unwrap();
        assert_eq!(sorted(got), sorted(want));
    }

    #[test]
    fn inaction() {
        let sys = infer(&parse_program("def in 0").unwrap()).unwrap();
        assert_eq!(sys.eqs.len(), 1);
        assert_eq!(sys.entry().unwrap().body, Type::Nil);
    }

    #[test]
    fn async_ping_pong() {
        let p = parse_program(
            "def P(x: chan int, y: chan int) = (x!<1>; y?(u) | y!<2>; x?(v))
             in new x: int, 1; new y: int, 1; P<x, y>",
        )
        .unwrap();
        let sys = infer(&p).unwrap();
        let want = parse_type_system(
            "t_P(x, y) = (send x; recv y | send y; recv x)
             t0() = newchan x, 1; newchan y, 1; t_P<x, y>",
        )
        .unwrap();
        assert_eq!(sorted(sys), sorted(want));
    }

    #[test]
    fn errors() {
        let lenient = |s: &str| crate::syntax::parse_program_lenient(s).unwrap();
        let e = infer(&lenient("def in new c: bool; c!<1>")).unwrap_err();
        assert!(
            matches!(
                e,
                InferError::SortMismatch {
                    expected: Sort::Bool,
                    found: Sort::Int,
                    ..
                }
            ),
            "{e}"
        );
        let e = infer(&lenient("def in if 1 + 1 then 0 else 0")).unwrap_err();
        assert!(matches!(e, InferError::GuardNotBool { .. }), "{e}");
        let mut p = parse_program("def X() = 0 in X<>").unwrap();
        p.defs.clear();
        assert!(matches!(
            infer(&p).unwrap_err(),
            InferError::UnknownDef { .. }
        ));
    }

    #[test]
    fn deterministic() {
        let p = parse_program("def A(c: chan int) = c!<1>; A<c> in new c: int; (A<c> | c?(x); 0)")
            .unwrap();
        assert_eq!(infer(&p), infer(&p));
    }

    #[test]
    fn runtime_states() {
        let p = parse_program("def G(c: chan int) = c!<1>; G<c> in new c: int; G<c>").unwrap();
        let s = crate::interp::step(&crate::interp::initial(&p), &p)
            .remove(0)
            .1;
        let (t, b) = infer_runtime(&s, &p).unwrap();
        let c = s.binders[0];
        let want = Type::Res(
            c,
            Box::new(Type::Par(vec![
                Type::Call(Name::new("t_G"), vec![c]),
                Type::Buf(c, 0, 0),
            ])),
        );
        assert_eq!(
            crate::tysem::canonicalize(&t),
            crate::tysem::canonicalize(&want)
        );
        assert!(b.0.is_empty());
        let closed = RuntimeState {
            binders: Vec::new(),
            threads: vec![Proc::Buf {
                chan: Name::new("c"),
                sort: Sort::Int,
                cap: 0,
                vals: Vec::new(),
                closed: true,
            }],
        };
        let (t, b) = infer_runtime(&closed, &p).unwrap();
        assert_eq!(t, Type::Closed(Name::new("c")));
        assert_eq!(b.0, [Name::new("c")].into_iter().collect());
        let mut dup = closed.clone();
        dup.threads.push(closed.threads[0].clone());
        assert_eq!(
            infer_runtime(&dup, &p).unwrap_err(),
            InferError::DuplicateBuffer(Name::new("c"))
        );
    }
}
