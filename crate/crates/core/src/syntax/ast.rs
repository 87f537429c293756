use crate::name::Name;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sort {
    Int,
    Bool,
}

impl Sort {
    pub fn bottom(self) -> Value {
        match self {
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("int"),
            Sort::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Mod => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Lit(Value),
    Var(Name),
    Not(Box<Expr>),
    Succ(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    pub fn var(s: &str) -> Expr {
        Expr::Var(Name::new(s))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn vars(&self, out: &mut Vec<Name>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(x) => out.push(*x),
            Expr::Not(e) | Expr::Succ(e) => e.vars(out),
            Expr::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    pub fn subst_value(&self, x: Name, v: Value) -> Expr {
        match self {
            Expr::Var(y) if *y == x => Expr::Lit(v),
            Expr::Lit(_) | Expr::Var(_) => self.clone(),
            Expr::Not(e) => Expr::Not(Box::new(e.subst_value(x, v))),
            Expr::Succ(e) => Expr::Succ(Box::new(e.subst_value(x, v))),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.subst_value(x, v), r.subst_value(x, v)),
        }
    }
}

/// Communication prefix of a process.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    Send(Name, Expr),
    Recv(Name, Name),
    Tau,
}

impl Prefix {
    pub fn channel(&self) -> Option<Name> {
        match self {
            Prefix::Send(c, _) | Prefix::Recv(c, _) => Some(*c),
            Prefix::Tau => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    Expr(Expr),
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proc {
    Nil,
    Pre(Prefix, Box<Proc>),
    Close(Name, Box<Proc>),
    Select(Vec<(Prefix, Proc)>),
    If {
        guard: Guard,
        then: Box<Proc>,
        els: Box<Proc>,
        mark: Option<u32>,
    },
    New {
        var: Name,
        sort: Sort,
        cap: u32,
        body: Box<Proc>,
    },
    Par(Vec<Proc>),
    Call {
        name: Name,
        args: Vec<Expr>,
        chans: Vec<Name>,
    },
    /// Runtime only.
    Res(Name, Box<Proc>),
    /// Runtime only. `vals[0]` is the newest element.
    Buf {
        chan: Name,
        sort: Sort,
        cap: u32,
        vals: Vec<Value>,
        closed: bool,
    },
}

impl Proc {
    pub fn pre(p: Prefix, k: Proc) -> Proc {
        Proc::Pre(p, Box::new(k))
    }

    pub fn par(ps: Vec<Proc>) -> Proc {
        match ps.len() {
            0 => Proc::Nil,
            1 => ps.into_iter().next().unwrap(),
            _ => Proc::Par(ps),
        }
    }

    pub fn is_runtime(&self) -> bool {
        matches!(self, Proc::Res(..) | Proc::Buf { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamKind {
    Val(Sort),
    Chan(Sort),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: Name,
    pub kind: ParamKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub struct Def {
    pub name: Name,
    pub params: Vec<Param>,
    pub body: Proc,
    pub pos: Pos,
}

impl PartialEq for Def {
    fn eq(&self, o: &Def) -> bool {
        self.name == o.name && self.params == o.params && self.body == o.body
    }
}

impl Def {
    pub fn value_params(&self) -> impl Iterator<Item = &Param> {
        self.params
            .iter()
            .filter(|p| matches!(p.kind, ParamKind::Val(_)))
    }

    pub fn chan_params(&self) -> impl Iterator<Item = &Param> {
        self.params
            .iter()
            .filter(|p| matches!(p.kind, ParamKind::Chan(_)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub defs: Vec<Def>,
    pub main: Proc,
}

impl Program {
    pub fn def(&self, name: Name) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }
}

// ---------------------------------------------------------------- types

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Act {
    Send(Name),
    Recv(Name),
    Tau,
}

impl Act {
    pub fn channel(self) -> Option<Name> {
        match self {
            Act::Send(a) | Act::Recv(a) => Some(a),
            Act::Tau => None,
        }
    }

    pub fn rename(self, f: &impl Fn(Name) -> Name) -> Act {
        match self {
            Act::Send(a) => Act::Send(f(a)),
            Act::Recv(a) => Act::Recv(f(a)),
            Act::Tau => Act::Tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Nil,
    Pre(Act, Box<Type>),
    /// Internal choice.
    Choice(Vec<Type>),
    /// External choice; each branch guarded by an action.
    Branch(Vec<(Act, Type)>),
    Par(Vec<Type>),
    New(Name, u32, Box<Type>),
    End(Name, Box<Type>),
    Call(Name, Vec<Name>),
    /// Runtime only.
    Res(Name, Box<Type>),
    /// Runtime only: open buffer holding `count` of `cap` messages.
    Buf(Name, u32, u32),
    /// Runtime only.
    Closed(Name),
}

impl Type {
    pub fn pre(a: Act, k: Type) -> Type {
        Type::Pre(a, Box::new(k))
    }

    pub fn send(a: &str, k: Type) -> Type {
        Type::pre(Act::Send(Name::new(a)), k)
    }

    pub fn recv(a: &str, k: Type) -> Type {
        Type::pre(Act::Recv(Name::new(a)), k)
    }

    pub fn call(t: &str, args: &[&str]) -> Type {
        Type::Call(Name::new(t), args.iter().map(|a| Name::new(a)).collect())
    }

    pub fn new_chan(a: &str, cap: u32, k: Type) -> Type {
        Type::New(Name::new(a), cap, Box::new(k))
    }

    pub fn par(ts: Vec<Type>) -> Type {
        match ts.len() {
            0 => Type::Nil,
            1 => ts.into_iter().next().unwrap(),
            _ => Type::Par(ts),
        }
    }

    pub fn is_runtime(&self) -> bool {
        matches!(self, Type::Res(..) | Type::Buf(..) | Type::Closed(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSystem {
    pub eqs: Vec<Equation>,
}

impl TypeSystem {
    pub fn entry_name() -> Name {
        Name::new("t0")
    }

    pub fn eq(&self, name: Name) -> Option<&Equation> {
        self.eqs.iter().find(|e| e.name == name)
    }

    pub fn entry(&self) -> Option<&Equation> {
        self.eq(Self::entry_name())
    }

    pub fn max_arity(&self) -> usize {
        self.eqs.iter().map(|e| e.params.len()).max().unwrap_or(0)
    }
}
