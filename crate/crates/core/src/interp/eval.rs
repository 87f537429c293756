use crate::name::Name;
use crate::syntax::{BinOp, Expr, Value};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Name),
    #[error("sort mismatch in {0}")]
    Sort(String),
    #[error("modulo by zero in {0}")]
    ModZero(String),
    #[error("integer overflow in {0}")]
    Overflow(String),
}

pub type Env = HashMap<Name, Value>;

pub fn eval_expr(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    let mismatch = || EvalError::Sort(e.to_string());
    match e {
        Expr::Lit(v) => Ok(*v),
        Expr::Var(x) => env.get(x).copied().ok_or(EvalError::Unbound(*x)),
        Expr::Not(a) => match eval_expr(a, env)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            _ => Err(mismatch()),
        },
        Expr::Succ(a) => match eval_expr(a, env)? {
            Value::Int(i) => i
                .checked_add(1)
                .map(Value::Int)
                .ok_or(EvalError::Overflow(e.to_string())),
            _ => Err(mismatch()),
        },
        Expr::Bin(op, l, r) => {
            let l = eval_expr(l, env)?;
            let r = eval_expr(r, env)?;
            binop(*op, l, r).ok_or_else(|| match (op, r) {
                (BinOp::Mod, Value::Int(0)) => EvalError::ModZero(e.to_string()),
                _ if l.sort() == r.sort() && matches!(l, Value::Int(_)) => {
                    EvalError::Overflow(e.to_string())
                }
                _ => mismatch(),
            })
        }
    }
}

/// Evaluates a closed expression.
pub fn eval_closed(e: &Expr) -> Result<Value, EvalError> {
    eval_expr(e, &Env::new())
}

fn binop(op: BinOp, l: Value, r: Value) -> Option<Value> {
    use Value::{Bool, Int};
    Some(match (op, l, r) {
        (BinOp::Add, Int(a), Int(b)) => Int(a.checked_add(b)?),
        (BinOp::Sub, Int(a), Int(b)) => Int(a.checked_sub(b)?),
        (BinOp::Mul, Int(a), Int(b)) => Int(a.checked_mul(b)?),
        (BinOp::Mod, Int(a), Int(b)) => Int(a.checked_rem_euclid(b)?),
        (BinOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinOp::Le, Int(a), Int(b)) => Bool(a <= b),
        (BinOp::Gt, Int(a), Int(b)) => Bool(a > b),
        (BinOp::Ge, Int(a), Int(b)) => Bool(a >= b),
        (BinOp::Eq, a, b) if a.sort() == b.sort() => Bool(a == b),
        (BinOp::Ne, a, b) if a.sort() == b.sort() => Bool(a != b),
        (BinOp::And, Bool(a), Bool(b)) => Bool(a && b),
        (BinOp::Or, Bool(a), Bool(b)) => Bool(a || b),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(e: Expr) -> Value {
        eval_closed(&e).unwrap()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(ev(Expr::Succ(Box::new(Expr::int(2)))), Value::Int(3));
        let m = Expr::bin(BinOp::Mod, Expr::int(9), Expr::int(3));
        assert_eq!(
            ev(Expr::bin(BinOp::Ne, m, Expr::int(0))),
            Value::Bool(false)
        );
        assert_eq!(
            ev(Expr::Not(Box::new(Expr::Lit(Value::Bool(true))))),
            Value::Bool(false)
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            eval_closed(&Expr::var("x")),
            Err(EvalError::Unbound(Name::new("x")))
        );
        let bad = Expr::bin(BinOp::Add, Expr::int(1), Expr::Lit(Value::Bool(true)));
        assert!(matches!(eval_closed(&bad), Err(EvalError::Sort(_))));
        let z = Expr::bin(BinOp::Mod, Expr::int(1), Expr::int(0));
        assert!(matches!(eval_closed(&z), Err(EvalError::ModZero(_))));
    }

    #[test]
    fn environment_lookup() {
        let mut env = Env::new();
        env.insert(Name::new("n"), Value::Int(4));
        let e = Expr::bin(BinOp::Le, Expr::var("n"), Expr::int(1));
        assert_eq!(eval_expr(&e, &env), Ok(Value::Bool(false)));
    }
}
