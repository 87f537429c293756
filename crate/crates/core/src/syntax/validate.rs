use super::ast::*;
use crate::name::Name;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Definition the problem was found in; `None` for the main process.
    pub def: Option<Name>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.def {
            Some(d) => write!(f, "in definition {d}: {}", self.message),
            None => write!(f, "in main: {}", self.message),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Chan(Sort),
    Val(Sort),
}

struct Checker<'a> {
    prog: &'a Program,
    def: Option<Name>,
    out: Vec<Diagnostic>,
    marks: BTreeMap<u32, usize>,
}

/// Well-formedness check. An empty result means the program is valid.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut c = Checker {
        prog: p,
        def: None,
        out: Vec::new(),
        marks: BTreeMap::new(),
    };
    let mut seen = BTreeSet::new();
    for d in &p.defs {
        c.def = Some(d.name);
        if !seen.insert(d.name) {
            c.report(format!("duplicate definition {}", d.name));
        }
        let mut env: Vec<(Name, Kind)> = Vec::new();
        for prm in &d.params {
            if env.iter().any(|(n, _)| *n == prm.name) {
                c.report(format!("duplicate parameter {}", prm.name));
            }
            env.push((
                prm.name,
                match prm.kind {
                    ParamKind::Val(s) => Kind::Val(s),
                    ParamKind::Chan(s) => Kind::Chan(s),
                },
            ));
        }
        c.proc(&d.body, &mut env);
    }
    c.def = None;
    c.proc(&p.main, &mut Vec::new());
    let dups: Vec<u32> = c
        .marks
        .iter()
        .filter(|(_, n)| **n > 1)
        .map(|(m, _)| *m)
        .collect();
    for m in dups {
        c.report(format!("conditional mark {m} is used more than once"));
    }
    c.out
}

impl Checker<'_> {
    fn report(&mut self, message: String) {
        self.out.push(Diagnostic {
            def: self.def,
            message,
        });
    }

    fn lookup(env: &[(Name, Kind)], n: Name) -> Option<Kind> {
        env.iter().rev().find(|(m, _)| *m == n).map(|(_, k)| *k)
    }

    fn chan(&mut self, env: &[(Name, Kind)], c: Name) -> Option<Sort> {
        match Self::lookup(env, c) {
            Some(Kind::Chan(s)) => Some(s),
            Some(Kind::Val(_)) => {
                self.report(format!("{c} is a value but is used as a channel"));
                None
            }
            None => {
                self.report(format!("unbound channel {c}"));
                None
            }
        }
    }

    fn expr(&mut self, env: &[(Name, Kind)], e: &Expr) {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        for v in vs {
            match Self::lookup(env, v) {
                Some(Kind::Val(_)) => {}
                Some(Kind::Chan(_)) => {
                    self.report(format!("channel {v} used inside an expression"))
                }
                None => self.report(format!("unbound variable {v}")),
            }
        }
    }

    fn prefixed(&mut self, pre: &Prefix, k: &Proc, env: &mut Vec<(Name, Kind)>) {
        match pre {
            Prefix::Send(c, e) => {
                self.chan(env, *c);
                self.expr(env, e);
                self.proc(k, env);
            }
            Prefix::Recv(c, y) => {
                let s = self.chan(env, *c).unwrap_or(Sort::Int);
                env.push((*y, Kind::Val(s)));
                self.proc(k, env);
                env.pop();
            }
            Prefix::Tau => self.proc(k, env),
        }
    }

    fn proc(&mut self, p: &Proc, env: &mut Vec<(Name, Kind)>) {
        match p {
            Proc::Nil => {}
            Proc::Pre(pre, k) => self.prefixed(pre, k, env),
            Proc::Close(c, k) => {
                self.chan(env, *c);
                self.proc(k, env);
            }
            Proc::Select(bs) => {
                if bs.is_empty() {
                    self.report("select without branches".into());
                }
                for (pre, k) in bs {
                    self.prefixed(pre, k, env);
                }
            }
            Proc::If {
                guard,
                then,
                els,
                mark,
            } => {
                if let Guard::Expr(e) = guard {
                    self.expr(env, e);
                }
                if let Some(m) = mark {
                    *self.marks.entry(*m).or_default() += 1;
                }
                self.proc(then, env);
                self.proc(els, env);
            }
            Proc::New {
                var, sort, body, ..
            } => {
                env.push((*var, Kind::Chan(*sort)));
                self.proc(body, env);
                env.pop();
            }
            Proc::Par(ps) => ps.iter().for_each(|q| self.proc(q, env)),
            Proc::Call { name, args, chans } => {
                let prog = self.prog;
                match prog.def(*name) {
                    None => self.report(format!("call to unknown definition {name}")),
                    Some(d) => {
                        let nv = d.value_params().count();
                        let nc = d.chan_params().count();
                        if nv != args.len() || nc != chans.len() {
                            self.report(format!(
                                "call to {name} expects {} arguments, got {}",
                                nv + nc,
                                args.len() + chans.len()
                            ));
                        }
                    }
                }
                for e in args {
                    self.expr(env, e);
                }
                for c in chans {
                    self.chan(env, *c);
                }
            }
            Proc::Res(c, k) => {
                self.report(format!("runtime restriction of {c} in source text"));
                env.push((*c, Kind::Chan(Sort::Int)));
                self.proc(k, env);
                env.pop();
            }
            Proc::Buf { chan, .. } => {
                self.report(format!("runtime buffer for {chan} in source text"));
            }
        }
    }
}
