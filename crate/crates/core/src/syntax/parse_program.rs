use super::ast::*;
use super::lexer::{describe, Cursor, SyntaxError, Tok};
use super::validate::{validate, Diagnostic};
use crate::name::Name;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: call to {name} expects {expected} arguments, got {got}")]
    Arity {
        pos: Pos,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{pos}: unknown definition {name}")]
    UnknownDef { pos: Pos, name: String },
    #[error("{pos}: argument {index} of call to {name} must be a channel name")]
    ChannelArg {
        pos: Pos,
        name: String,
        index: usize,
    },
    #[error("{0}")]
    Invalid(Diagnostic),
}

struct Raw {
    name: Name,
    args: Vec<Expr>,
    pos: Pos,
}

struct P {
    cur: Cursor,
    marks: u32,
    calls: Vec<Raw>,
}

/// Parses and resolves a program, reporting the first well-formedness problem as an error.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let prog = parse_program_lenient(src)?;
    if let Some(d) = validate(&prog).into_iter().next() {
        return Err(ParseError::Invalid(d));
    }
    Ok(prog)
}

/// Syntax and call resolution only; binding problems are left to [`validate`].
pub fn parse_program_lenient(src: &str) -> Result<Program, ParseError> {
    let mut p = P {
        cur: Cursor::new(src)?,
        marks: 0,
        calls: Vec::new(),
    };
    let (defs, main) = p.program()?;
    let mut prog = Program { defs, main };
    resolve_calls(&mut prog, &p.calls)?;
    Ok(prog)
}

fn resolve_calls(prog: &mut Program, raws: &[Raw]) -> Result<(), ParseError> {
    let sigs: Vec<(Name, Vec<ParamKind>)> = prog
        .defs
        .iter()
        .map(|d| (d.name, d.params.iter().map(|p| p.kind).collect()))
        .collect();
    let mut idx = 0usize;
    let mut err = None;
    let mut fix = |p: &mut Proc| {
        if let Proc::Call { name, args, chans } = p {
            let raw = &raws[idx];
            idx += 1;
            debug_assert_eq!(raw.name, *name);
            let Some((_, kinds)) = sigs.iter().find(|(n, _)| n == name) else {
                err.get_or_insert(ParseError::UnknownDef {
                    pos: raw.pos,
                    name: name.to_string(),
                });
                return;
            };
            if kinds.len() != raw.args.len() {
                err.get_or_insert(ParseError::Arity {
                    pos: raw.pos,
                    name: name.to_string(),
                    expected: kinds.len(),
                    got: raw.args.len(),
                });
                return;
            }
            let mut vals = Vec::new();
            let mut cs = Vec::new();
            for (i, (k, e)) in kinds.iter().zip(&raw.args).enumerate() {
                match k {
                    ParamKind::Val(_) => vals.push(e.clone()),
                    ParamKind::Chan(_) => match e {
                        Expr::Var(c) => cs.push(*c),
                        _ => {
                            err.get_or_insert(ParseError::ChannelArg {
                                pos: raw.pos,
                                name: name.to_string(),
                                index: i,
                            });
                            return;
                        }
                    },
                }
            }
            *args = vals;
            *chans = cs;
        }
    };
    for d in &mut prog.defs {
        walk_mut(&mut d.body, &mut fix);
    }
    walk_mut(&mut prog.main, &mut fix);
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Pre-order traversal in source order.
pub(crate) fn walk_mut(p: &mut Proc, f: &mut impl FnMut(&mut Proc)) {
    f(p);
    match p {
        Proc::Nil | Proc::Call { .. } | Proc::Buf { .. } => {}
        Proc::Pre(_, k) | Proc::Close(_, k) | Proc::Res(_, k) => walk_mut(k, f),
        Proc::New { body, .. } => walk_mut(body, f),
        Proc::Select(bs) => bs.iter_mut().for_each(|(_, k)| walk_mut(k, f)),
        Proc::If { then, els, .. } => {
            walk_mut(then, f);
            walk_mut(els, f);
        }
        Proc::Par(ps) => ps.iter_mut().for_each(|q| walk_mut(q, f)),
    }
}

impl P {
    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax(SyntaxError {
            pos: self.cur.pos(),
            msg: msg.into(),
        }))
    }

    fn program(&mut self) -> Result<(Vec<Def>, Proc), ParseError> {
        let mut defs = Vec::new();
        if self.cur.eat_kw("def") {
            loop {
                if self.cur.is_kw("in") {
                    break;
                }
                self.cur.eat_kw("def");
                defs.push(self.def()?);
                if !self.cur.eat_sym(";") && !self.cur.is_kw("def") && !self.cur.is_kw("in") {
                    return self.fail(format!(
                        "expected ';' or 'in', found {}",
                        describe(self.cur.peek())
                    ));
                }
            }
            self.cur.expect_kw("in")?;
        }
        let main = self.process()?;
        if !self.cur.at_eof() {
            return self.fail(format!(
                "unexpected {} after program",
                describe(self.cur.peek())
            ));
        }
        Ok((defs, main))
    }

    fn def(&mut self) -> Result<Def, ParseError> {
        let pos = self.cur.pos();
        let name = Name::new(&self.cur.ident()?);
        self.cur.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.cur.is_sym(")") {
            loop {
                let pn = Name::new(&self.cur.ident()?);
                self.cur.expect_sym(":")?;
                let kind = if self.cur.eat_kw("chan") {
                    ParamKind::Chan(self.sort()?)
                } else {
                    ParamKind::Val(self.sort()?)
                };
                params.push(Param { name: pn, kind });
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
        }
        self.cur.expect_sym(")")?;
        self.cur.expect_sym("=")?;
        let body = self.process()?;
        Ok(Def {
            name,
            params,
            body,
            pos,
        })
    }

    fn sort(&mut self) -> Result<Sort, SyntaxError> {
        if self.cur.eat_kw("int") {
            Ok(Sort::Int)
        } else if self.cur.eat_kw("bool") {
            Ok(Sort::Bool)
        } else {
            self.cur.err(format!(
                "expected sort, found {}",
                describe(self.cur.peek())
            ))
        }
    }

    fn process(&mut self) -> Result<Proc, ParseError> {
        let mut parts = vec![self.seq()?];
        while self.cur.eat_sym("|") {
            parts.push(self.seq()?);
        }
        Ok(Proc::par(parts))
    }

    /// `;` followed by something other than a definition header continues a prefix.
    fn continues(&self) -> bool {
        if !self.cur.is_sym(";") {
            return false;
        }
        match self.cur.peek_at(1) {
            Tok::Ident(s) if s == "in" || s == "def" => false,
            Tok::Ident(_) => !matches!(self.cur.peek_at(2), Tok::Sym("(")),
            Tok::Eof => false,
            _ => true,
        }
    }

    fn cont(&mut self) -> Result<Proc, ParseError> {
        if self.continues() {
            self.cur.next();
            self.seq()
        } else {
            Ok(Proc::Nil)
        }
    }

    fn prefix(&mut self) -> Result<Option<Prefix>, ParseError> {
        if self.cur.eat_kw("tau") {
            return Ok(Some(Prefix::Tau));
        }
        if let Tok::Ident(s) = self.cur.peek().clone() {
            if super::lexer::is_keyword(&s) {
                return Ok(None);
            }
            match self.cur.peek_at(1) {
                Tok::Sym("!") => {
                    self.cur.next();
                    self.cur.next();
                    self.cur.expect_sym("<")?;
                    let e = self.expr(true)?;
                    self.cur.expect_sym(">")?;
                    return Ok(Some(Prefix::Send(Name::new(&s), e)));
                }
                Tok::Sym("?") => {
                    self.cur.next();
                    self.cur.next();
                    self.cur.expect_sym("(")?;
                    let y = self.cur.ident()?;
                    self.cur.expect_sym(")")?;
                    return Ok(Some(Prefix::Recv(Name::new(&s), Name::new(&y))));
                }
                _ => {}
            }
        }
        Ok(None)
    }

    fn seq(&mut self) -> Result<Proc, ParseError> {
        if let Some(pre) = self.prefix()? {
            let k = self.cont()?;
            return Ok(Proc::pre(pre, k));
        }
        match self.cur.peek().clone() {
            Tok::Int(0) => {
                self.cur.next();
                Ok(Proc::Nil)
            }
            Tok::Sym("(") => {
                if matches!(self.cur.peek_at(1), Tok::Ident(s) if s == "nu") {
                    self.cur.next();
                    self.cur.next();
                    let c = Name::new(&self.cur.ident()?);
                    self.cur.expect_sym(")")?;
                    let k = self.seq()?;
                    return Ok(Proc::Res(c, Box::new(k)));
                }
                self.cur.next();
                let p = self.process()?;
                self.cur.expect_sym(")")?;
                Ok(p)
            }
            Tok::Ident(kw) => match kw.as_str() {
                "close" => {
                    self.cur.next();
                    let c = Name::new(&self.cur.ident()?);
                    let k = self.cont()?;
                    Ok(Proc::Close(c, Box::new(k)))
                }
                "select" => {
                    self.cur.next();
                    self.cur.expect_sym("{")?;
                    let mut bs = Vec::new();
                    loop {
                        let Some(pre) = self.prefix()? else {
                            return self.fail("expected select branch prefix");
                        };
                        let k = if self.cur.eat_sym(";") {
                            self.seq()?
                        } else {
                            Proc::Nil
                        };
                        bs.push((pre, k));
                        if !self.cur.eat_sym("[]") {
                            break;
                        }
                    }
                    self.cur.expect_sym("}")?;
                    Ok(Proc::Select(bs))
                }
                "if" => {
                    self.cur.next();
                    let guard = if self.cur.eat_sym("*") {
                        Guard::Star
                    } else {
                        Guard::Expr(self.expr(false)?)
                    };
                    let mark = self.marks;
                    self.marks += 1;
                    self.cur.expect_kw("then")?;
                    let then = self.seq()?;
                    self.cur.expect_kw("else")?;
                    let els = self.seq()?;
                    Ok(Proc::If {
                        guard,
                        then: Box::new(then),
                        els: Box::new(els),
                        mark: Some(mark),
                    })
                }
                "new" => {
                    self.cur.next();
                    let var = Name::new(&self.cur.ident()?);
                    self.cur.expect_sym(":")?;
                    self.cur.eat_kw("chan");
                    let sort = self.sort()?;
                    let cap = if self.cur.eat_sym(",") {
                        self.cur.nat()?
                    } else {
                        0
                    };
                    self.cur.expect_sym(";")?;
                    let body = self.seq()?;
                    Ok(Proc::New {
                        var,
                        sort,
                        cap,
                        body: Box::new(body),
                    })
                }
                "buf" | "closed" => {
                    self.cur.next();
                    self.cur.expect_sym("[")?;
                    let chan = Name::new(&self.cur.ident()?);
                    self.cur.expect_sym(":")?;
                    let sort = self.sort()?;
                    self.cur.expect_sym("/")?;
                    let cap = self.cur.nat()?;
                    self.cur.expect_sym("]")?;
                    self.cur.expect_sym("(")?;
                    let mut vals = Vec::new();
                    if !self.cur.is_sym(")") {
                        loop {
                            vals.push(self.value()?);
                            if !self.cur.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.cur.expect_sym(")")?;
                    Ok(Proc::Buf {
                        chan,
                        sort,
                        cap,
                        vals,
                        closed: kw == "closed",
                    })
                }
                _ if !super::lexer::is_keyword(&kw)
                    && matches!(self.cur.peek_at(1), Tok::Sym("<")) =>
                {
                    let pos = self.cur.pos();
                    self.cur.next();
                    self.cur.next();
                    let mut args = Vec::new();
                    if !self.cur.is_sym(">") {
                        loop {
                            args.push(self.expr(true)?);
                            if !self.cur.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.cur.expect_sym(">")?;
                    let name = Name::new(&kw);
                    self.calls.push(Raw {
                        name,
                        args: args.clone(),
                        pos,
                    });
                    Ok(Proc::Call {
                        name,
                        args,
                        chans: Vec::new(),
                    })
                }
                _ => self.fail(format!("expected process, found '{kw}'")),
            },
            t => self.fail(format!("expected process, found {}", describe(&t))),
        }
    }

    fn value(&mut self) -> Result<Value, SyntaxError> {
        let neg = self.cur.eat_sym("-");
        match self.cur.next() {
            Tok::Int(i) => Ok(Value::Int(if neg { -i } else { i })),
            Tok::Ident(s) if s == "true" && !neg => Ok(Value::Bool(true)),
            Tok::Ident(s) if s == "false" && !neg => Ok(Value::Bool(false)),
            t => self
                .cur
                .err(format!("expected value, found {}", describe(&t))),
        }
    }

    fn expr(&mut self, no_gt: bool) -> Result<Expr, SyntaxError> {
        self.binary(1, no_gt)
    }

    fn binop(&self, no_gt: bool) -> Option<BinOp> {
        let op = match self.cur.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("%") => BinOp::Mod,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") if !no_gt => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("&&") => BinOp::And,
            Tok::Sym("||") => BinOp::Or,
            Tok::Ident(s) if s == "mod" => BinOp::Mod,
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min: u8, no_gt: bool) -> Result<Expr, SyntaxError> {
        let mut lhs = self.atom()?;
        while let Some(op) = self.binop(no_gt) {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.cur.next();
            let rhs = self.binary(p + 1, no_gt)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.cur.next() {
            Tok::Int(i) => Ok(Expr::int(i)),
            Tok::Sym("-") => match self.cur.peek().clone() {
                Tok::Int(i) => {
                    self.cur.next();
                    Ok(Expr::int(-i))
                }
                _ => Ok(Expr::bin(BinOp::Sub, Expr::int(0), self.atom()?)),
            },
            Tok::Sym("(") => {
                let e = self.expr(false)?;
                self.cur.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => Ok(Expr::Lit(Value::Bool(true))),
                "false" => Ok(Expr::Lit(Value::Bool(false))),
                "not" | "succ" => {
                    self.cur.expect_sym("(")?;
                    let e = self.expr(false)?;
                    self.cur.expect_sym(")")?;
                    Ok(if s == "not" {
                        Expr::Not(Box::new(e))
                    } else {
                        Expr::Succ(Box::new(e))
                    })
                }
                _ if super::lexer::is_keyword(&s) => self
                    .cur
                    .err(format!("unexpected keyword '{s}' in expression")),
                _ => Ok(Expr::Var(Name::new(&s))),
            },
            t => self
                .cur
                .err(format!("expected expression, found {}", describe(&t))),
        }
    }
}
