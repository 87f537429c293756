//! The fencing restriction on type systems and the size / unfolding /
//! occurrence measures that bound its finite control.

use crate::name::Name;
use crate::syntax::{Type, TypeSystem};
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

/// `u ≺ x`: `u` drops a non-empty prefix of `x` and appends as many names
/// foreign to `x`.
pub fn prec(u: &[Name], x: &[Name]) -> bool {
    let n = x.len();
    if u.len() != n {
        return false;
    }
    (1..=n).any(|k| u[..n - k] == x[k..] && u[n - k..].iter().all(|a| !x.contains(a)))
}

/// Stand-in for every name outside the checked equation's parameters.
fn foreign() -> Name {
    Name::new("_")
}

const SEEN_BUDGET: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomInstance {
    pub args: Vec<Name>,
    pub y: Vec<Name>,
    pub z: Vec<Name>,
    pub holds: bool,
}

impl fmt::Display for AxiomInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = |v: &[Name]| -> String {
            if v.is_empty() {
                "ε".into()
            } else {
                v.iter().map(|n| n.as_str()).collect::<Vec<_>>().join("")
            }
        };
        if !self.y.is_empty() {
            write!(f, "y = {} is non-empty", seq(&self.y))
        } else if self.holds {
            write!(f, "{} ≺ {}", seq(&self.args), seq(&self.z))
        } else {
            write!(f, "{} ⊀ {}", seq(&self.args), seq(&self.z))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FenceFailure {
    pub equation: Name,
    /// Judgements from the root down to the failing leaf.
    pub path: Vec<String>,
    /// `None` when the search budget ran out instead of an axiom failing.
    pub axiom: Option<AxiomInstance>,
}

impl fmt::Display for FenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.axiom {
            Some(a) => writeln!(f, "equation {} is not fenced: {a}", self.equation)?,
            None => writeln!(
                f,
                "equation {} is not fenced: unfolding budget exhausted",
                self.equation
            )?,
        }
        for (i, j) in self.path.iter().enumerate() {
            writeln!(f, "{:indent$}{j}", "", indent = 2 * (i + 1))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationCheck {
    pub equation: Name,
    pub params: Vec<Name>,
    pub ok: bool,
    /// Every axiom instance met, in derivation order.
    pub axioms: Vec<AxiomInstance>,
    pub failure: Option<FenceFailure>,
}

struct Fencer<'a> {
    sys: &'a TypeSystem,
    t: Name,
    params: Vec<Name>,
    seen: Vec<(Name, Vec<Name>)>,
    path: Vec<String>,
    axioms: Vec<AxiomInstance>,
    failure: Option<FenceFailure>,
    budget: usize,
}

impl Fencer<'_> {
    fn fail(&mut self, axiom: Option<AxiomInstance>) -> bool {
        if self.failure.is_none() {
            self.failure = Some(FenceFailure {
                equation: self.t,
                path: self.path.clone(),
                axiom,
            });
        }
        false
    }

    fn judge(&mut self, y: &[Name], z: &[Name], t: &Type) -> bool {
        self.path.push(format!(
            "{}; {}; {} ⊢ {}",
            self.seen.len(),
            show(y),
            show(z),
            t
        ));
        let ok = self.rule(y, z, t);
        self.path.pop();
        ok
    }

    fn rule(&mut self, y: &[Name], z: &[Name], t: &Type) -> bool {
        match t {
            Type::Nil | Type::Buf(..) | Type::Closed(_) => true,
            Type::Pre(_, k) | Type::End(_, k) | Type::New(_, _, k) | Type::Res(_, k) => {
                self.judge(y, z, k)
            }
            Type::Choice(ts) => ts.iter().all(|k| self.judge(y, z, k)),
            Type::Branch(bs) => bs.iter().all(|(_, k)| self.judge(y, z, k)),
            Type::Par(ts) => {
                let zy: Vec<Name> = z.iter().chain(y).copied().collect();
                ts.iter().all(|k| self.judge(&[], &zy, k))
            }
            Type::Call(s, args) if *s == self.t => {
                let holds = !y.is_empty() || prec(args, z);
                let inst = AxiomInstance {
                    args: args.clone(),
                    y: y.to_vec(),
                    z: z.to_vec(),
                    holds,
                };
                self.axioms.push(inst.clone());
                if holds {
                    true
                } else {
                    self.fail(Some(inst))
                }
            }
            Type::Call(s, args) => {
                let key: Vec<Name> = args
                    .iter()
                    .map(|a| {
                        if self.params.contains(a) {
                            *a
                        } else {
                            foreign()
                        }
                    })
                    .collect();
                if self.seen.iter().any(|(n, u)| n == s && *u == key) {
                    return true;
                }
                let Some(eq) = self.sys.eq(*s) else {
                    return true;
                };
                if self.budget == 0 {
                    return self.fail(None);
                }
                self.budget -= 1;
                let sub: Vec<(Name, Name)> =
                    eq.params.iter().copied().zip(key.iter().copied()).collect();
                let body = eq.body.subst(&sub);
                self.seen.push((*s, key));
                let ok = self.judge(y, z, &body);
                self.seen.pop();
                ok
            }
        }
    }
}

fn show(v: &[Name]) -> String {
    if v.is_empty() {
        "ε".into()
    } else {
        v.iter().map(|n| n.as_str()).collect::<Vec<_>>().join("·")
    }
}

/// Derives `ε; x; ε ⊢_t T` for the equation `t(x) = T`.
pub fn check_equation(t: Name, sys: &TypeSystem) -> EquationCheck {
    let eq = sys.eq(t).unwrap_or_else(|| panic!("no equation named {t}"));
    let mut f = Fencer {
        sys,
        t,
        params: eq.params.clone(),
        seen: Vec::new(),
        path: Vec::new(),
        axioms: Vec::new(),
        failure: None,
        budget: SEEN_BUDGET,
    };
    let ok = eq.params.is_empty() || f.judge(&eq.params, &[], &eq.body);
    EquationCheck {
        equation: t,
        params: eq.params.clone(),
        ok,
        axioms: f.axioms,
        failure: f.failure,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FenceVerdict {
    pub fenced: bool,
    pub checks: Vec<EquationCheck>,
}

impl FenceVerdict {
    pub fn failure(&self) -> Option<&FenceFailure> {
        self.checks.iter().find_map(|c| c.failure.as_ref())
    }

    pub fn failing_equations(&self) -> Vec<Name> {
        self.checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.equation)
            .collect()
    }
}

pub fn is_fenced(sys: &TypeSystem) -> FenceVerdict {
    let checks: Vec<EquationCheck> = sys
        .eqs
        .iter()
        .map(|e| check_equation(e.name, sys))
        .collect();
    FenceVerdict {
        fenced: checks.iter().all(|c| c.ok),
        checks,
    }
}

// ------------------------------------------------------------------ measures

pub fn ty_size(t: &Type, sys: &TypeSystem) -> u64 {
    size_in(t, sys, &mut HashSet::new())
}

fn size_in(t: &Type, sys: &TypeSystem, g: &mut HashSet<Name>) -> u64 {
    match t {
        Type::Nil | Type::Buf(..) | Type::Closed(_) => 0,
        Type::Pre(_, k) | Type::End(_, k) | Type::New(_, _, k) | Type::Res(_, k) => {
            1 + size_in(k, sys, g)
        }
        Type::Choice(ts) | Type::Par(ts) => ts.iter().map(|k| size_in(k, sys, g)).sum(),
        Type::Branch(bs) => bs.iter().map(|(_, k)| 1 + size_in(k, sys, g)).sum(),
        Type::Call(s, args) => {
            if g.contains(s) {
                return 0;
            }
            let Some(eq) = sys.eq(*s) else { return 0 };
            let sub: Vec<(Name, Name)> = eq
                .params
                .iter()
                .copied()
                .zip(args.iter().copied())
                .collect();
            g.insert(*s);
            let n = size_in(&eq.body.subst(&sub), sys, g);
            g.remove(s);
            n
        }
    }
}

/// The `k`-th unfolding of `t` with respect to the names `a`.
pub fn limited_unfold(k: u32, a: &[Name], t: &Type, sys: &TypeSystem) -> Type {
    let mut budget: BTreeMap<Name, u32> = sys.eqs.iter().map(|e| (e.name, k)).collect();
    unfold_in(a, t, sys, &mut budget)
}

fn unfold_in(a: &[Name], t: &Type, sys: &TypeSystem, g: &mut BTreeMap<Name, u32>) -> Type {
    match t {
        Type::Nil | Type::Buf(..) | Type::Closed(_) => t.clone(),
        Type::Pre(x, k) => Type::Pre(*x, Box::new(unfold_in(a, k, sys, g))),
        Type::End(x, k) => Type::End(*x, Box::new(unfold_in(a, k, sys, g))),
        Type::New(x, n, k) => Type::New(*x, *n, Box::new(unfold_in(a, k, sys, g))),
        Type::Res(x, k) => Type::Res(*x, Box::new(unfold_in(a, k, sys, g))),
        Type::Choice(ts) => Type::Choice(ts.iter().map(|k| unfold_in(a, k, sys, g)).collect()),
        Type::Par(ts) => Type::Par(ts.iter().map(|k| unfold_in(a, k, sys, g)).collect()),
        Type::Branch(bs) => Type::Branch(
            bs.iter()
                .map(|(x, k)| (*x, unfold_in(a, k, sys, g)))
                .collect(),
        ),
        Type::Call(s, args) => {
            let i = g.get(s).copied().unwrap_or(0);
            let Some(eq) = sys.eq(*s) else {
                return t.clone();
            };
            if i == 0 || !args.iter().any(|b| a.contains(b)) {
                return t.clone();
            }
            let sub: Vec<(Name, Name)> = eq
                .params
                .iter()
                .copied()
                .zip(args.iter().copied())
                .collect();
            let body = eq.body.subst(&sub);
            g.insert(*s, i - 1);
            let out = unfold_in(a, &body, sys, g);
            g.insert(*s, i);
            out
        }
    }
}

/// Occurrences of calls to `t`: summed across `|`, maximised across choices.
pub fn occurrences(t: &Type, var: Name) -> u64 {
    match t {
        Type::Nil | Type::Buf(..) | Type::Closed(_) => 0,
        Type::Pre(_, k) | Type::End(_, k) | Type::New(_, _, k) | Type::Res(_, k) => {
            occurrences(k, var)
        }
        Type::Choice(ts) => ts.iter().map(|k| occurrences(k, var)).max().unwrap_or(0),
        Type::Branch(bs) => bs
            .iter()
            .map(|(_, k)| occurrences(k, var))
            .max()
            .unwrap_or(0),
        Type::Par(ts) => ts.iter().map(|k| occurrences(k, var)).sum(),
        Type::Call(s, _) => u64::from(*s == var),
    }
}
