use super::ast::*;
use super::lexer::{describe, Cursor, SyntaxError, Tok};
use crate::name::Name;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("missing entry equation t0()")]
    MissingEntry,
    #[error("entry equation t0 must have no parameters")]
    EntryParams,
    #[error("duplicate equation {0}")]
    Duplicate(String),
    #[error("call to undefined type variable {0}")]
    Undefined(String),
    #[error("call {name} expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("equation {eq} mentions free name {name} that is not a parameter")]
    FreeName { eq: String, name: String },
    #[error("equation {0} contains a runtime-only constructor")]
    Runtime(String),
}

pub fn parse_type_system(src: &str) -> Result<TypeSystem, TypeParseError> {
    let mut cur = Cursor::new(src)?;
    let mut eqs = Vec::new();
    while !cur.at_eof() {
        let name = Name::new(&cur.ident()?);
        cur.expect_sym("(")?;
        let mut params = Vec::new();
        if !cur.is_sym(")") {
            loop {
                params.push(Name::new(&cur.ident()?));
                if !cur.eat_sym(",") {
                    break;
                }
            }
        }
        cur.expect_sym(")")?;
        cur.expect_sym("=")?;
        let body = term(&mut cur)?;
        cur.eat_sym(";");
        eqs.push(Equation { name, params, body });
    }
    let sys = TypeSystem { eqs };
    check_system(&sys)?;
    Ok(sys)
}

/// Parses a single (possibly runtime) type term.
pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let t = term(&mut cur)?;
    if !cur.at_eof() {
        return cur.err(format!("unexpected {}", describe(cur.peek())));
    }
    Ok(t)
}

pub fn check_system(sys: &TypeSystem) -> Result<(), TypeParseError> {
    let mut seen = BTreeSet::new();
    for e in &sys.eqs {
        if !seen.insert(e.name) {
            return Err(TypeParseError::Duplicate(e.name.to_string()));
        }
    }
    let entry = sys.entry().ok_or(TypeParseError::MissingEntry)?;
    if !entry.params.is_empty() {
        return Err(TypeParseError::EntryParams);
    }
    for e in &sys.eqs {
        let mut err = None;
        visit_calls(&e.body, &mut |t, args| {
            if err.is_some() {
                return;
            }
            match sys.eq(t) {
                None => err = Some(TypeParseError::Undefined(t.to_string())),
                Some(d) if d.params.len() != args.len() => {
                    err = Some(TypeParseError::Arity {
                        name: t.to_string(),
                        expected: d.params.len(),
                        got: args.len(),
                    })
                }
                _ => {}
            }
        });
        if let Some(x) = err {
            return Err(x);
        }
        if contains_runtime(&e.body) {
            return Err(TypeParseError::Runtime(e.name.to_string()));
        }
        use super::names::FreeNames;
        if let Some(n) = e
            .body
            .free_names()
            .into_iter()
            .find(|n| !e.params.contains(n))
        {
            return Err(TypeParseError::FreeName {
                eq: e.name.to_string(),
                name: n.to_string(),
            });
        }
    }
    Ok(())
}

pub(crate) fn visit_calls(t: &Type, f: &mut impl FnMut(Name, &[Name])) {
    match t {
        Type::Nil | Type::Buf(..) | Type::Closed(_) => {}
        Type::Pre(_, k) | Type::New(_, _, k) | Type::End(_, k) | Type::Res(_, k) => {
            visit_calls(k, f)
        }
        Type::Choice(ts) | Type::Par(ts) => ts.iter().for_each(|t| visit_calls(t, f)),
        Type::Branch(bs) => bs.iter().for_each(|(_, t)| visit_calls(t, f)),
        Type::Call(n, args) => f(*n, args),
    }
}

fn contains_runtime(t: &Type) -> bool {
    match t {
        Type::Res(..) | Type::Buf(..) | Type::Closed(_) => true,
        Type::Nil | Type::Call(..) => false,
        Type::Pre(_, k) | Type::New(_, _, k) | Type::End(_, k) => contains_runtime(k),
        Type::Choice(ts) | Type::Par(ts) => ts.iter().any(contains_runtime),
        Type::Branch(bs) => bs.iter().any(|(_, t)| contains_runtime(t)),
    }
}

fn term(cur: &mut Cursor) -> Result<Type, SyntaxError> {
    let mut parts = vec![seq(cur)?];
    while cur.eat_sym("|") {
        parts.push(seq(cur)?);
    }
    Ok(Type::par(parts))
}

/// `;` continues a prefix unless an equation header follows.
fn cont(cur: &mut Cursor) -> Result<Type, SyntaxError> {
    if cur.is_sym(";") {
        let header =
            matches!(cur.peek_at(1), Tok::Ident(_)) && matches!(cur.peek_at(2), Tok::Sym("("));
        let end = matches!(cur.peek_at(1), Tok::Eof);
        if !header && !end {
            cur.next();
            return seq(cur);
        }
    }
    Ok(Type::Nil)
}

fn act(cur: &mut Cursor) -> Result<Option<Act>, SyntaxError> {
    if cur.eat_kw("send") {
        return Ok(Some(Act::Send(Name::new(&cur.ident()?))));
    }
    if cur.eat_kw("recv") {
        return Ok(Some(Act::Recv(Name::new(&cur.ident()?))));
    }
    if cur.eat_kw("tau") {
        return Ok(Some(Act::Tau));
    }
    Ok(None)
}

fn seq(cur: &mut Cursor) -> Result<Type, SyntaxError> {
    if let Some(a) = act(cur)? {
        let k = cont(cur)?;
        return Ok(Type::pre(a, k));
    }
    match cur.peek().clone() {
        Tok::Int(0) => {
            cur.next();
            Ok(Type::Nil)
        }
        Tok::Sym("(") => {
            cur.next();
            if cur.eat_kw("nu") {
                let a = Name::new(&cur.ident()?);
                cur.expect_sym(")")?;
                let k = seq(cur)?;
                return Ok(Type::Res(a, Box::new(k)));
            }
            let t = term(cur)?;
            cur.expect_sym(")")?;
            Ok(t)
        }
        Tok::Ident(kw) => match kw.as_str() {
            "oplus" => {
                cur.next();
                cur.expect_sym("{")?;
                let mut ts = vec![term(cur)?];
                while cur.eat_sym(",") {
                    ts.push(term(cur)?);
                }
                cur.expect_sym("}")?;
                Ok(Type::Choice(ts))
            }
            "branch" => {
                cur.next();
                cur.expect_sym("{")?;
                let mut bs = Vec::new();
                loop {
                    let Some(a) = act(cur)? else {
                        return cur.err("expected branch action (send, recv or tau)");
                    };
                    let k = if cur.eat_sym(";") {
                        seq(cur)?
                    } else {
                        Type::Nil
                    };
                    bs.push((a, k));
                    if !cur.eat_sym("[]") {
                        break;
                    }
                }
                cur.expect_sym("}")?;
                Ok(Type::Branch(bs))
            }
            "newchan" => {
                cur.next();
                let a = Name::new(&cur.ident()?);
                let n = if cur.eat_sym(",") { cur.nat()? } else { 0 };
                cur.expect_sym(";")?;
                let k = seq(cur)?;
                Ok(Type::New(a, n, Box::new(k)))
            }
            "end" => {
                cur.next();
                cur.expect_sym("[")?;
                let a = Name::new(&cur.ident()?);
                cur.expect_sym("]")?;
                let k = cont(cur)?;
                Ok(Type::End(a, Box::new(k)))
            }
            "buf" => {
                cur.next();
                cur.expect_sym("[")?;
                let a = Name::new(&cur.ident()?);
                cur.expect_sym(":")?;
                let k = cur.nat()?;
                cur.expect_sym("/")?;
                let n = cur.nat()?;
                cur.expect_sym("]")?;
                if k > n {
                    return cur.err("buffer count exceeds capacity");
                }
                Ok(Type::Buf(a, k, n))
            }
            "closed" => {
                cur.next();
                cur.expect_sym("[")?;
                let a = Name::new(&cur.ident()?);
                cur.expect_sym("]")?;
                Ok(Type::Closed(a))
            }
            _ if !super::lexer::is_keyword(&kw) && matches!(cur.peek_at(1), Tok::Sym("<")) => {
                cur.next();
                cur.next();
                let mut args = Vec::new();
                if !cur.is_sym(">") {
                    loop {
                        args.push(Name::new(&cur.ident()?));
                        if !cur.eat_sym(",") {
                            break;
                        }
                    }
                }
                cur.expect_sym(">")?;
                Ok(Type::Call(Name::new(&kw), args))
            }
            _ => cur.err(format!("expected type, found '{kw}'")),
        },
        t => cur.err(format!("expected type, found {}", describe(&t))),
    }
}
