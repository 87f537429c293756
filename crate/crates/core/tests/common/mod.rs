#![allow(dead_code)]

use migo::inference::{infer, infer_runtime};
use migo::interp::{barbs, initial, step, RuntimeState};
use migo::syntax::{parse_program, Act, FreeNames, Program, Type, TypeSystem};
use migo::tysem::{canonicalize, normalize, type_barbs, type_step, Barb, SymState};
use migo::Name;
use proptest::prelude::*;
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Shape of a random process; channels and variables are picked by index
/// when the shape is rendered in a scope.
#[derive(Clone, Debug)]
pub enum Shape {
    Nil,
    Send(u8, Box<Shape>),
    Recv(u8, Box<Shape>),
    Tau(Box<Shape>),
    Close(u8, Box<Shape>),
    Select(Vec<(u8, bool, Shape)>, bool),
    If(bool, Box<Shape>, Box<Shape>),
    Par(Box<Shape>, Box<Shape>),
    Call(u8, u8),
    New(u8, Box<Shape>),
}

pub fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        Just(Shape::Nil),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Shape::Call(a, b))
    ];
    leaf.prop_recursive(4, 16, 3, |inner| {
        prop_oneof![
            3 => (any::<u8>(), inner.clone()).prop_map(|(c, k)| Shape::Send(c, Box::new(k))),
            3 => (any::<u8>(), inner.clone()).prop_map(|(c, k)| Shape::Recv(c, Box::new(k))),
            1 => inner.clone().prop_map(|k| Shape::Tau(Box::new(k))),
            1 => (any::<u8>(), inner.clone()).prop_map(|(c, k)| Shape::Close(c, Box::new(k))),
            1 => (prop::collection::vec((any::<u8>(), any::<bool>(), inner.clone()), 1..3), any::<bool>())
                .prop_map(|(bs, t)| Shape::Select(bs, t)),
            1 => (any::<bool>(), inner.clone(), inner.clone()).prop_map(|(s, a, b)| Shape::If(s, Box::new(a), Box::new(b))),
            2 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Par(Box::new(a), Box::new(b))),
            1 => (0u8..2, inner).prop_map(|(c, k)| Shape::New(c, Box::new(k))),
        ]
    })
}

struct Scope {
    chans: Vec<String>,
    vals: Vec<String>,
    fresh: usize,
}

fn render(s: &Shape, sc: &mut Scope) -> String {
    let ch = |sc: &Scope, i: u8| sc.chans[i as usize % sc.chans.len()].clone();
    let payload = |sc: &Scope| {
        sc.vals
            .last()
            .map_or("1".to_string(), |v| format!("{v} + 1"))
    };
    match s {
        Shape::Nil => "0".into(),
        Shape::Send(c, k) => format!("{}!<{}>; {}", ch(sc, *c), payload(sc), render(k, sc)),
        Shape::Recv(c, k) => {
            sc.fresh += 1;
            let v = format!("v{}", sc.fresh);
            let c = ch(sc, *c);
            sc.vals.push(v.clone());
            let body = render(k, sc);
            sc.vals.pop();
            format!("{c}?({v}); {body}")
        }
        Shape::Tau(k) => format!("tau; {}", render(k, sc)),
        Shape::Close(c, k) => format!("close {}; {}", ch(sc, *c), render(k, sc)),
        Shape::Select(bs, tau) => {
            let mut arms = Vec::new();
            for (c, send, k) in bs {
                let c = ch(sc, *c);
                if *send {
                    let p = payload(sc);
                    arms.push(format!("{c}!<{p}>; {}", render(k, sc)));
                } else {
                    sc.fresh += 1;
                    let v = format!("v{}", sc.fresh);
                    sc.vals.push(v.clone());
                    arms.push(format!("{c}?({v}); {}", render(k, sc)));
                    sc.vals.pop();
                }
            }
            if *tau {
                arms.push("tau; 0".into());
            }
            format!("select {{ {} }}", arms.join(" [] "))
        }
        Shape::If(star, a, b) => {
            let g = match (star, sc.vals.last()) {
                (true, _) => "*".to_string(),
                (false, Some(v)) => format!("{v} > 1"),
                (false, None) => "1 < 2".to_string(),
            };
            format!("if {g} then {} else {}", render(a, sc), render(b, sc))
        }
        Shape::Par(a, b) => format!("({} | {})", render(a, sc), render(b, sc)),
        Shape::Call(a, b) => format!("W<{}, {}>", ch(sc, *a), ch(sc, *b)),
        Shape::New(cap, k) => {
            sc.fresh += 1;
            let c = format!("n{}", sc.fresh);
            sc.chans.push(c.clone());
            let body = render(k, sc);
            sc.chans.pop();
            format!("new {c}: int, {cap}; {body}")
        }
    }
}

/// A random program with one recursive definition `W` over two channels.
pub fn program() -> impl Strategy<Value = Program> {
    (shape(), shape(), 0u32..2, 0u32..2).prop_map(|(def, main, ca, cb)| {
        let mut sc = Scope {
            chans: vec!["x".into(), "y".into()],
            vals: Vec::new(),
            fresh: 0,
        };
        let body = render(&def, &mut sc);
        sc.chans = vec!["a".into(), "b".into()];
        let m = render(&main, &mut sc);
        let src = format!(
            "def W(x: chan int, y: chan int) = {body} in new a: int, {ca}; new b: int, {cb}; {m}"
        );
        parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
    })
}

/// Canonical form of a closed type term.
pub fn canon(t: &migo::syntax::Type) -> SymState {
    normalize(Vec::new(), Vec::new(), vec![t.clone()], None)
}

/// Type terms reachable from `from` by at most `depth` reductions.
pub fn type_closure(
    from: &SymState,
    sys: &TypeSystem,
    depth: usize,
    cap: usize,
) -> HashSet<SymState> {
    let mut seen = HashSet::from([from.clone()]);
    let mut q = VecDeque::from([(from.clone(), 0)]);
    while let Some((s, d)) = q.pop_front() {
        if d == depth || seen.len() >= cap {
            continue;
        }
        for (l, t) in type_step(&s, sys) {
            if l.is_reduction() && seen.insert(t.clone()) {
                q.push_back((t, d + 1));
            }
        }
    }
    seen
}

/// The state with its restrictions dropped, so that its channels stay free
/// and keep their names under stepping.
pub fn open(s: &RuntimeState) -> RuntimeState {
    RuntimeState {
        binders: Vec::new(),
        threads: s.threads.clone(),
    }
}

/// Barbs on `names` reachable from `s` within `depth` process steps.
pub fn process_weak_barbs(
    s: &RuntimeState,
    p: &Program,
    names: &BTreeSet<Name>,
    depth: usize,
    cap: usize,
) -> BTreeSet<Barb> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::from([s.clone()]);
    let mut q = VecDeque::from([(s.clone(), 0)]);
    while let Some((s, d)) = q.pop_front() {
        out.extend(barbs(&s, p).into_iter().filter(|b| on_names(b, names)));
        if d == depth || seen.len() >= cap {
            continue;
        }
        for (_, t) in step(&s, p) {
            if seen.insert(t.clone()) {
                q.push_back((t, d + 1));
            }
        }
    }
    out
}

pub fn on_names(b: &Barb, names: &BTreeSet<Name>) -> bool {
    match b {
        Barb::Multi(ms) => ms.iter().all(|m| on_names(m, names)),
        b => b.channel().is_some_and(|c| names.contains(&c)),
    }
}

/// Searches the type closure of `from` breadth-first until every barb in
/// `wanted` has been seen; returns the ones left unmatched.
pub fn unmatched_type_barbs(
    from: &SymState,
    sys: &TypeSystem,
    wanted: &BTreeSet<Barb>,
    depth: usize,
    cap: usize,
) -> BTreeSet<Barb> {
    let mut left = wanted.clone();
    let mut seen = HashSet::from([from.clone()]);
    let mut q = VecDeque::from([(from.clone(), 0)]);
    while let Some((s, d)) = q.pop_front() {
        for b in type_barbs(&s, sys) {
            left.remove(&b);
        }
        if left.is_empty() {
            break;
        }
        if d == depth || seen.len() >= cap {
            continue;
        }
        for (l, t) in type_step(&s, sys) {
            if l.is_reduction() && seen.insert(t.clone()) {
                q.push_back((t, d + 1));
            }
        }
    }
    left
}

/// Barbs of every term in a type closure.
pub fn closure_barbs(c: &HashSet<SymState>, sys: &TypeSystem) -> BTreeSet<Barb> {
    c.iter().flat_map(|s| type_barbs(s, sys)).collect()
}

/// Verdict of the type-level checker on a bundled fixture.
pub fn fixture_report(f: &migo::corpus::Fixture) -> migo::verification::VerificationReport {
    use migo::verification::{verify, Bound, VerificationConfig};
    let cfg = VerificationConfig {
        k: f.k.map_or(Bound::Auto, Bound::Fixed),
        ..VerificationConfig::default()
    };
    verify(&f.types().unwrap(), &cfg)
}

/// Compares a fixture's verdicts with its manifest.
pub fn matches_manifest(f: &migo::corpus::Fixture) -> Result<(), String> {
    let r = fixture_report(f);
    let got = (r.fenced, r.live, r.safe);
    let want = (f.fenced, f.live, f.safe);
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {got:?}, expected {want:?}", f.name))
    }
}

pub const ORACLE_DEPTH: usize = 200;

/// The process oracle finds a violation exactly when the types do, and
/// reports no inconclusive barbs on a fully explored graph.
pub fn oracle_agrees(f: &migo::corpus::Fixture) -> Result<(), String> {
    use migo::interp::{explore, liveness_on, safety_on, OracleVerdict};
    let p = f
        .program()
        .ok_or("not a program")?
        .map_err(|e| e.to_string())?;
    let g = explore(&p, ORACLE_DEPTH).map_err(|e| e.to_string())?;
    if !g.is_complete() {
        return Err(format!(
            "{}: graph not complete at depth {ORACLE_DEPTH}",
            f.name
        ));
    }
    let r = fixture_report(f);
    for (what, ty, proc) in [
        ("liveness", r.live, liveness_on(&g, &p)),
        ("safety", r.safe, safety_on(&g, &p)),
    ] {
        let ok = matches!(
            (ty, &proc),
            (Some(true), OracleVerdict::UpToDepth) | (Some(false), OracleVerdict::Violation(_))
        );
        if !ok {
            return Err(format!(
                "{}: {what} types say {ty:?}, process oracle says {proc:?}",
                f.name
            ));
        }
    }
    Ok(())
}

/// Checks every step of the states reachable within `depth`; returns the
/// number of steps checked.
pub fn subject_reduction(p: &Program, depth: usize, cap: usize) -> Result<usize, String> {
    let sys = infer(p).map_err(|e| e.to_string())?;
    let ty = |s: &RuntimeState| {
        infer_runtime(s, p)
            .map(|(t, _)| canon(&t))
            .map_err(|e| format!("{s}: {e}"))
    };
    let mut seen = HashSet::from([initial(p)]);
    let mut q = VecDeque::from([(initial(p), 0)]);
    let mut checked = 0;
    while let Some((s, d)) = q.pop_front() {
        if d == depth {
            continue;
        }
        let t = ty(&s)?;
        let reach = type_closure(&t, &sys, 1, usize::MAX);
        for (l, s2) in step(&s, p) {
            let t2 = ty(&s2)?;
            if !reach.contains(&t2) {
                return Err(format!(
                    "step {l}\n  from {s}\n  to   {s2}\n  type {t}\n  has no step to {t2}"
                ));
            }
            checked += 1;
            if seen.len() < cap && seen.insert(s2.clone()) {
                q.push_back((s2, d + 1));
            }
        }
    }
    Ok(checked)
}

pub const PROCESS_DEPTH: usize = 4;

pub fn region(p: &Program, depth: usize, cap: usize) -> Vec<RuntimeState> {
    let mut seen = HashSet::from([initial(p)]);
    let mut out = vec![initial(p)];
    let mut q = VecDeque::from([(initial(p), 0)]);
    while let Some((s, d)) = q.pop_front() {
        if d == depth {
            continue;
        }
        for (_, s2) in step(&s, p) {
            if seen.len() < cap && seen.insert(s2.clone()) {
                out.push(s2.clone());
                q.push_back((s2, d + 1));
            }
        }
    }
    out
}

/// Every weak barb of a process state on its own channels is a weak barb of
/// its type.
pub fn barb_correspondence(p: &Program, depth: usize, cap: usize) -> Result<usize, String> {
    let sys = infer(p).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for s in region(p, depth, cap) {
        let o = open(&s);
        let names: BTreeSet<_> = s.binders.iter().copied().collect();
        let proc_barbs = process_weak_barbs(&o, p, &names, PROCESS_DEPTH, 2_000);
        if proc_barbs.is_empty() {
            continue;
        }
        let (t, _) = infer_runtime(&o, p).map_err(|e| e.to_string())?;
        let left = unmatched_type_barbs(&canon(&t), &sys, &proc_barbs, 3 * PROCESS_DEPTH, 20_000);
        if let Some(b) = left.first() {
            return Err(format!(
                "state {s}\n  weak barb {b} has no type counterpart"
            ));
        }
        checked += proc_barbs.len();
    }
    Ok(checked)
}

const NAMES: [&str; 3] = ["a", "b", "c"];

pub fn name() -> impl Strategy<Value = Name> {
    (0..NAMES.len()).prop_map(|i| Name::new(NAMES[i]))
}

fn act() -> impl Strategy<Value = Act> {
    prop_oneof![
        name().prop_map(Act::Send),
        name().prop_map(Act::Recv),
        Just(Act::Tau)
    ]
}

pub fn term() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![
        3 => Just(Type::Nil),
        1 => prop::collection::vec(name(), 0..3).prop_map(|xs| Type::Call(Name::new("t"), xs)),
        1 => (name(), 0u32..3).prop_map(|(x, n)| Type::Buf(x, n.min(1), n)),
        1 => name().prop_map(Type::Closed),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            3 => (act(), inner.clone()).prop_map(|(a, k)| Type::pre(a, k)),
            1 => prop::collection::vec(inner.clone(), 2..3).prop_map(Type::Choice),
            1 => prop::collection::vec((act(), inner.clone()), 1..3).prop_map(Type::Branch),
            3 => prop::collection::vec(inner.clone(), 2..4).prop_map(Type::Par),
            1 => (name(), 0u32..2, inner.clone()).prop_map(|(x, n, k)| Type::New(x, n, Box::new(k))),
            1 => (name(), inner.clone()).prop_map(|(x, k)| Type::End(x, Box::new(k))),
            2 => (name(), inner).prop_map(|(x, k)| Type::Res(x, Box::new(k))),
        ]
    })
}

pub fn res(x: Name, t: Type) -> Type {
    Type::Res(x, Box::new(t))
}

/// Checks that canonical forms identify terms related by the structural
/// congruence axioms instantiated with `a`, `b`, `c`, `x` and `y`.
pub fn congruence_axioms(a: &Type, b: &Type, c: &Type, x: Name, y: Name) -> Result<(), String> {
    let same = |what: &str, l: Type, r: Type| {
        let (cl, cr) = (canonicalize(&l), canonicalize(&r));
        if cl == cr {
            Ok(())
        } else {
            Err(format!("{what}:\n  {l}\n  {r}\n  give {cl} and {cr}"))
        }
    };
    let par = |ts: &[&Type]| Type::Par(ts.iter().map(|t| (*t).clone()).collect());
    let ca = canonicalize(a);
    if canonicalize(&ca.to_type()) != ca {
        return Err(format!("not idempotent on {a}"));
    }
    same("commutativity", par(&[a, b]), par(&[b, a]))?;
    same("unit", par(&[a, &Type::Nil]), a.clone())?;
    same(
        "associativity",
        par(&[a, &par(&[b, c])]),
        par(&[&par(&[a, b]), c]),
    )?;
    same(
        "restriction swap",
        res(x, res(y, a.clone())),
        res(y, res(x, a.clone())),
    )?;
    let z = Name::new("z");
    same("alpha", res(x, a.clone()), res(z, a.rename(x, z)))?;
    if !b.free_names().contains(&x) {
        same(
            "scope extrusion",
            par(&[&res(x, a.clone()), b]),
            res(x, par(&[a, b])),
        )?;
        for buf in [Type::Closed(x), Type::Buf(x, 0, 1), Type::Buf(x, 1, 2)] {
            same("dead buffer", res(x, par(&[&buf, b])), b.clone())?;
        }
    }
    Ok(())
}
