use super::ast::*;
use std::fmt::{self, Display, Formatter, Write};

fn has_gt(e: &Expr) -> bool {
    match e {
        Expr::Bin(BinOp::Gt, ..) => true,
        Expr::Bin(_, l, r) => has_gt(l) || has_gt(r),
        Expr::Not(_) | Expr::Succ(_) | Expr::Lit(_) | Expr::Var(_) => false,
    }
}

fn expr_prec(e: &Expr, f: &mut Formatter<'_>, min: u8) -> fmt::Result {
    match e {
        Expr::Lit(v) => write!(f, "{v}"),
        Expr::Var(x) => write!(f, "{x}"),
        Expr::Not(e) => write!(f, "not({e})"),
        Expr::Succ(e) => write!(f, "succ({e})"),
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            if p < min {
                f.write_char('(')?;
            }
            expr_prec(l, f, p)?;
            write!(f, " {} ", op.symbol())?;
            expr_prec(r, f, p + 1)?;
            if p < min {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        expr_prec(self, f, 0)
    }
}

/// Expression placed between angle brackets.
struct Angled<'a>(&'a Expr);

impl Display for Angled<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if has_gt(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Display for Prefix {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Send(c, e) => write!(f, "{c}!<{}>", Angled(e)),
            Prefix::Recv(c, y) => write!(f, "{c}?({y})"),
            Prefix::Tau => f.write_str("tau"),
        }
    }
}

/// Process in a position that does not admit an unparenthesised `|`.
struct Seq<'a>(&'a Proc);

impl Display for Seq<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Proc::Par(_) = self.0 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn proc_cont(f: &mut Formatter<'_>, k: &Proc) -> fmt::Result {
    if *k == Proc::Nil {
        Ok(())
    } else {
        write!(f, "; {}", Seq(k))
    }
}

impl Display for Proc {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Proc::Nil => f.write_str("0"),
            Proc::Pre(p, k) => {
                write!(f, "{p}")?;
                proc_cont(f, k)
            }
            Proc::Close(c, k) => {
                write!(f, "close {c}")?;
                proc_cont(f, k)
            }
            Proc::Select(bs) => {
                f.write_str("select { ")?;
                for (i, (p, k)) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" [] ")?;
                    }
                    write!(f, "{p}")?;
                    proc_cont(f, k)?;
                }
                f.write_str(" }")
            }
            Proc::If {
                guard, then, els, ..
            } => {
                match guard {
                    Guard::Star => f.write_str("if * ")?,
                    Guard::Expr(e) => write!(f, "if {e} ")?,
                }
                write!(f, "then {} else {}", Seq(then), Seq(els))
            }
            Proc::New {
                var,
                sort,
                cap,
                body,
            } => {
                write!(f, "new {var}: {sort}")?;
                if *cap > 0 {
                    write!(f, ", {cap}")?;
                }
                write!(f, "; {}", Seq(body))
            }
            Proc::Par(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", Seq(p))?;
                }
                Ok(())
            }
            Proc::Call { name, args, chans } => {
                write!(f, "{name}<")?;
                let mut first = true;
                for e in args {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    write!(f, "{}", Angled(e))?;
                }
                for c in chans {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    write!(f, "{c}")?;
                }
                f.write_char('>')
            }
            Proc::Res(c, k) => write!(f, "(nu {c}) {}", Seq(k)),
            Proc::Buf {
                chan,
                sort,
                cap,
                vals,
                closed,
            } => {
                let kw = if *closed { "closed" } else { "buf" };
                write!(f, "{kw}[{chan}:{sort}/{cap}](")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for Param {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParamKind::Val(s) => write!(f, "{}: {s}", self.name),
            ParamKind::Chan(s) => write!(f, "{}: chan {s}", self.name),
        }
    }
}

impl Display for Def {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") = {}", self.body)
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("def")?;
        for (i, d) in self.defs.iter().enumerate() {
            if i > 0 {
                f.write_char(';')?;
            }
            write!(f, "\n  {d}")?;
        }
        if self.defs.is_empty() {
            write!(f, " in {}", self.main)
        } else {
            write!(f, "\nin {}", self.main)
        }
    }
}

// ---------------------------------------------------------------- types

impl Display for Act {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Act::Send(a) => write!(f, "send {a}"),
            Act::Recv(a) => write!(f, "recv {a}"),
            Act::Tau => f.write_str("tau"),
        }
    }
}

struct TSeq<'a>(&'a Type);

impl Display for TSeq<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Type::Par(_) = self.0 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn type_cont(f: &mut Formatter<'_>, k: &Type) -> fmt::Result {
    if *k == Type::Nil {
        Ok(())
    } else {
        write!(f, "; {}", TSeq(k))
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nil => f.write_str("0"),
            Type::Pre(a, k) => {
                write!(f, "{a}")?;
                type_cont(f, k)
            }
            Type::Choice(ts) => {
                f.write_str("oplus { ")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(" }")
            }
            Type::Branch(bs) => {
                f.write_str("branch { ")?;
                for (i, (a, k)) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" [] ")?;
                    }
                    write!(f, "{a}")?;
                    type_cont(f, k)?;
                }
                f.write_str(" }")
            }
            Type::Par(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", TSeq(t))?;
                }
                Ok(())
            }
            Type::New(a, n, k) => {
                write!(f, "newchan {a}")?;
                if *n > 0 {
                    write!(f, ", {n}")?;
                }
                write!(f, "; {}", TSeq(k))
            }
            Type::End(a, k) => {
                write!(f, "end[{a}]")?;
                type_cont(f, k)
            }
            Type::Call(t, args) => {
                write!(f, "{t}<")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char('>')
            }
            Type::Res(a, k) => write!(f, "(nu {a}) {}", TSeq(k)),
            Type::Buf(a, k, n) => write!(f, "buf[{a}:{k}/{n}]"),
            Type::Closed(a) => write!(f, "closed[{a}]"),
        }
    }
}

impl Display for Equation {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") = {}", self.body)
    }
}

impl Display for TypeSystem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for e in &self.eqs {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
