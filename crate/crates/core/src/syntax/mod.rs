//! Abstract syntax, concrete syntax and well-formedness for programs and types.

pub mod ast;
pub mod lexer;
pub mod names;
pub mod parse_program;
pub mod parse_types;
pub mod pretty;
pub mod validate;

pub use ast::*;
pub use lexer::SyntaxError;
pub use names::{free_names, FreeNames, Sub};
pub use parse_program::{parse_program, parse_program_lenient, ParseError};
pub use parse_types::{parse_type, parse_type_system, TypeParseError};
pub use validate::{validate, Diagnostic};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::Name;

    const SIEVE_TYPES: &str = "
        g(x) = send x; g<x>
        f(x, y) = recv x; oplus { send y; f<x, y>, f<x, y> }
        r(x) = recv x; newchan b; (f<x, b> | r<b>)
        t0() = newchan a; (g<a> | r<a>)";

    const FIB_TYPES: &str = "
        fib(x) = oplus { send x, newchan b; (fib<b> | recv b; recv b; send x | fib<b>) }
        t0() = newchan a; (fib<a> | recv a)";

    #[test]
    fn sieve_types_parse() {
        let s = parse_type_system(SIEVE_TYPES).unwrap();
        assert_eq!(s.eqs.len(), 4);
        let r = s.eq(Name::new("r")).unwrap();
        assert_eq!(r.body.free_names(), [Name::new("x")].into_iter().collect());
    }

    #[test]
    fn missing_entry() {
        let e = parse_type_system("g(x) = send x; g<x>").unwrap_err();
        assert_eq!(e, TypeParseError::MissingEntry);
        assert_eq!(e.to_string(), "missing entry equation t0()");
    }

    #[test]
    fn fib_types_round_trip() {
        let s = parse_type_system(FIB_TYPES).unwrap();
        let again = parse_type_system(&s.to_string()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn empty_program() {
        let p = parse_program("def in 0").unwrap();
        assert!(p.defs.is_empty());
        assert_eq!(p.main, Proc::Nil);
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn sieve_program_round_trip() {
        let src = "
            def G(n: int, c: chan int) = c!<n>; G<n + 1, c>;
                F(n: int, i: chan int, o: chan int) =
                    i?(x); if x % n != 0 then o!<x>; F<n, i, o> else F<n, i, o>;
                R(c: chan int) = c?(x); new d: int; (F<x, c, d> | R<d>)
            in new c: int; (G<2, c> | R<c>)";
        let p = parse_program(src).unwrap();
        let names: Vec<&str> = p.defs.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["G", "F", "R"]);
        assert_eq!(p.main.to_string(), "new c: int; (G<2, c> | R<c>)");
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn runtime_type_terms_parse() {
        let t = parse_type("(nu a) (send a | buf[a:0/1] | closed[b])").unwrap();
        assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn marks_left_to_right() {
        let p = parse_program(
            "def A(n: int) = if n > 0 then 0 else if * then 0 else 0 in if true then A<1> else 0",
        )
        .unwrap();
        let mut marks = Vec::new();
        let mut grab = |q: &Proc| {
            if let Proc::If { mark: Some(m), .. } = q {
                marks.push(*m)
            }
        };
        fn walk(p: &Proc, f: &mut impl FnMut(&Proc)) {
            f(p);
            if let Proc::If { then, els, .. } = p {
                walk(then, f);
                walk(els, f);
            }
        }
        walk(&p.defs[0].body, &mut grab);
        walk(&p.main, &mut grab);
        assert_eq!(marks, [0, 1, 2]);
    }

    #[test]
    fn syntax_error_position() {
        let e = parse_program("def in\n  new c: int; c!<1> |").unwrap_err();
        match e {
            ParseError::Syntax(s) => assert_eq!(s.pos.line, 2),
            other => panic!("{other:?}"),
        }
    }
}
