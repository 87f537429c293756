mod common;

use common::{
    barb_correspondence, congruence_axioms, matches_manifest, name, oracle_agrees, program,
    subject_reduction, term,
};
use migo::corpus::{corpus, fixture};
use migo::fencing::{is_fenced, limited_unfold, occurrences, prec, ty_size};
use migo::syntax::{parse_type, parse_type_system, TypeSystem};
use migo::tysem::{explore_from, normalize, reachable, sym_step, Label, SymState};
use migo::verification::check_k_liveness;
use migo::Name;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CASES: u32 = 256;

const SIEVE: &str = "
    g(x) = send x; g<x>
    f(x, y) = recv x; oplus { send y; f<x, y>, f<x, y> }
    r(x) = recv x; newchan b; (f<x, b> | r<b>)
    t0() = newchan a; (g<a> | r<a>)";

const FIB: &str = "
    fib(x) = oplus { send x, newchan b; (fib<b> | recv b; recv b; send x | fib<b>) }
    t0() = newchan a; (fib<a> | recv a)";

fn n(s: &str) -> Name {
    Name::new(s)
}

fn ns(s: &str) -> Vec<Name> {
    s.chars().map(|c| Name::new(&c.to_string())).collect()
}

fn types(name: &str) -> Result<TypeSystem, String> {
    let f = fixture(name).ok_or(format!("no fixture {name}"))?;
    f.types().map_err(|e| e.to_string())
}

fn is_k_live(sys: &TypeSystem, k: usize) -> Result<bool, String> {
    check_k_liveness(sys, k)
        .map(|v| v.is_none())
        .map_err(|e| e.to_string())
}

fn table_verdicts() -> Outcome {
    let start = Instant::now();
    let table: Vec<_> = corpus().into_iter().filter(|f| f.table).collect();
    for f in &table {
        let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), f.file);
        let out = Command::new(env!("CARGO_BIN_EXE_migo"))
            .args(["check", &path, "--json"])
            .output()
            .map_err(|e| e.to_string())?;
        let v: serde_json::Value =
            serde_json::from_slice(&out.stdout).map_err(|e| format!("{}: {e}", f.name))?;
        let got = (v["live"].as_bool(), v["safe"].as_bool());
        if got != (f.live, f.safe) {
            return Err(format!(
                "{}: live/safe {got:?}, expected {:?}",
                f.name,
                (f.live, f.safe)
            ));
        }
        let want_code = if f.live == Some(true) && f.safe == Some(true) {
            0
        } else {
            1
        };
        if out.status.code() != Some(want_code) {
            return Err(format!("{}: exit {:?}", f.name, out.status.code()));
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        return Err(format!("took {t:.1?}"));
    }
    Ok(format!("{} programs in {t:.2?}", table.len()))
}

fn bound_sensitivity() -> Outcome {
    let four = types("four-round-k2")?;
    if !is_k_live(&four, 2)? {
        return Err("four-round filter not 2-live".into());
    }
    if is_k_live(&four, 3)? {
        return Err("four-round filter 3-live".into());
    }
    let nl = types("not-live")?;
    for k in 0..=4 {
        if is_k_live(&nl, k)? {
            return Err(format!("spawning system {k}-live"));
        }
    }
    Ok("2-live, not 3-live; spawning system not k-live for k in 0..=4".into())
}

fn sieve_fragment(k: usize, threads: &str) -> Result<SymState, String> {
    let t = parse_type(threads).map_err(|e| e.to_string())?;
    Ok(normalize(vec![n("a")], vec![n("b")], vec![t], Some(k)))
}

fn symbolic_stuckness() -> Outcome {
    let sys = parse_type_system(SIEVE).map_err(|e| e.to_string())?;
    let start = sieve_fragment(1, "g<a> | f<a, b> | r<b>")?;
    let g = explore_from(start, &sys, 1, 1000).map_err(|e| e.to_string())?;
    if !g.edges[0].iter().any(|(l, _)| *l == Label::Sync(n("a"))) {
        return Err("no [a] synchronisation at k=1".into());
    }
    let stuck = sieve_fragment(1, "g<a> | send b; f<a, b> | r<b>")?;
    let i = g
        .states
        .iter()
        .position(|s| *s == stuck)
        .ok_or("state after [a] not reached")?;
    if !g.edges[i].is_empty() {
        return Err(format!("k=1 state {stuck} has successors"));
    }
    let st = sieve_fragment(2, "g<a> | send b; f<a, b> | r<b>")?;
    let t =
        parse_type("g<a> | f<a, q> | newchan b; (f<q, b> | r<b>)").map_err(|e| e.to_string())?;
    let spawned = normalize(vec![n("a")], vec![n("q")], vec![t], Some(2));
    if !sym_step(&st, &sys, 2).contains(&(Label::Sync(st.binders[0]), spawned)) {
        return Err("no [b] synchronisation spawning a filter at k=2".into());
    }
    Ok("stuck after [a] at k=1; [b] spawns a filter at k=2".into())
}

fn fencing() -> Outcome {
    for (what, sys) in [
        (
            "sieve",
            parse_type_system(SIEVE).map_err(|e| e.to_string())?,
        ),
        ("fib", parse_type_system(FIB).map_err(|e| e.to_string())?),
        ("inferred sieve", types("sieve")?),
        ("inferred fib", types("fib")?),
    ] {
        if !is_fenced(&sys).fenced {
            return Err(format!("{what} not fenced"));
        }
    }
    let rw = is_fenced(&types("unfenced-rw")?);
    if rw.fenced || rw.failing_equations() != [n("t1")] {
        return Err(format!(
            "reader/writer: fenced={} failing={:?}",
            rw.fenced,
            rw.failing_equations()
        ));
    }
    if !prec(&ns("yza"), &ns("xyz")) || prec(&ns("xaz"), &ns("xyz")) || prec(&ns("x"), &ns("x")) {
        return Err("prec examples".into());
    }
    Ok("sieve and fib fenced; reader/writer fails at t1; prec examples hold".into())
}

fn asynchrony() -> Outcome {
    for (name, live) in [("pingpong-sync", false), ("pingpong-async", true)] {
        let r = common::fixture_report(&fixture(name).ok_or(name)?);
        if r.live != Some(live) || r.safe != Some(true) {
            return Err(format!("{name}: live={:?} safe={:?}", r.live, r.safe));
        }
    }
    Ok("capacity 0 not live; capacity 1 live".into())
}

fn sweep<S, F>(what: &str, strategy: S, check: F) -> Result<(), String>
where
    S: proptest::strategy::Strategy,
    F: Fn(S::Value) -> Result<(), String>,
{
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map_err(|e| format!("{what}: {e}"))
}

fn property_suites() -> Outcome {
    let mut programs = 0;
    for f in corpus() {
        let Some(p) = f.program() else { continue };
        let p = p.map_err(|e| e.to_string())?;
        subject_reduction(&p, 8, 400).map_err(|e| format!("subject reduction, {}: {e}", f.name))?;
        barb_correspondence(&p, 5, 60).map_err(|e| format!("barbs, {}: {e}", f.name))?;
        programs += 1;
    }
    sweep("subject reduction", program(), |p| {
        subject_reduction(&p, 5, 150).map(|_| ())
    })?;
    sweep("barbs", program(), |p| {
        barb_correspondence(&p, 3, 40).map(|_| ())
    })?;

    let mut systems = 0;
    for f in corpus() {
        let sys = f.types().map_err(|e| e.to_string())?;
        if f.fenced {
            for k in 1..=3 {
                reachable(&sys, k)
                    .map_err(|e| format!("finite control, {} at k={k}: {e}", f.name))?;
            }
        }
        for eq in &sys.eqs {
            let bound = ty_size(&eq.body, &sys).pow(eq.params.len() as u32);
            for k in 0..=3 {
                let occ = occurrences(&limited_unfold(k, &eq.params, &eq.body, &sys), eq.name);
                if occ > bound {
                    return Err(format!(
                        "unfolding bound, {} {}: {occ} > {bound} at k={k}",
                        f.name, eq.name
                    ));
                }
            }
        }
        systems += 1;
    }
    sweep(
        "congruence",
        (term(), term(), term(), name(), name()),
        |(a, b, c, x, y)| congruence_axioms(&a, &b, &c, x, y),
    )?;
    Ok(format!(
        "{programs} fixture programs, {systems} systems, {CASES} random cases per suite"
    ))
}

fn oracle_agreement() -> Outcome {
    let fixtures: Vec<_> = corpus().into_iter().filter(|f| f.explorable).collect();
    for f in &fixtures {
        oracle_agrees(f)?;
    }
    let manifest: Vec<String> = corpus()
        .iter()
        .filter_map(|f| matches_manifest(f).err())
        .collect();
    if !manifest.is_empty() {
        return Err(manifest.join("; "));
    }
    let names: Vec<&str> = fixtures.iter().map(|f| f.name.as_str()).collect();
    Ok(format!("agrees on {}", names.join(", ")))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("table verdicts", table_verdicts),
        ("bound sensitivity", bound_sensitivity),
        ("symbolic stuckness", symbolic_stuckness),
        ("fencing", fencing),
        ("asynchrony", asynchrony),
        ("property suites", property_suites),
        ("oracle agreement", oracle_agreement),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (what, run)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match out {
            Ok(detail) => println!("PASS {} {what}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {what}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
