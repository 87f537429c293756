mod common;

use common::{congruence_axioms, name, term};
use migo::corpus::corpus;
use migo::fencing::{is_fenced, limited_unfold, occurrences, ty_size};
use migo::interp::explore;
use migo::syntax::TypeSystem;
use migo::tysem::reachable;
use migo::verification::{verify, VerificationConfig};
use proptest::prelude::*;
use std::collections::HashSet;

fn fenced_systems() -> Vec<(String, TypeSystem)> {
    corpus()
        .into_iter()
        .filter(|f| f.fenced)
        .map(|f| {
            let sys = f.types().unwrap();
            (f.name, sys)
        })
        .collect()
}

#[test]
fn fenced_fixtures_have_finite_control() {
    for (name, sys) in fenced_systems() {
        assert!(is_fenced(&sys).fenced, "{name}");
        for k in 1..=3 {
            let g = reachable(&sys, k).unwrap_or_else(|e| panic!("{name} at k={k}: {e}"));
            assert!(!g.states.is_empty());
        }
    }
}

#[test]
fn unfolding_respects_size_bound() {
    for f in corpus() {
        let sys = f.types().unwrap();
        for eq in &sys.eqs {
            let bound = ty_size(&eq.body, &sys).pow(eq.params.len() as u32);
            for k in 0..=3 {
                let u = limited_unfold(k, &eq.params, &eq.body, &sys);
                let n = occurrences(&u, eq.name);
                assert!(
                    n <= bound,
                    "{} {}: k={k} gives {n} > {bound}",
                    f.name,
                    eq.name
                );
            }
        }
    }
}

#[test]
fn exploration_is_monotone_in_depth() {
    for f in corpus() {
        let Some(p) = f.program() else { continue };
        let p = p.unwrap();
        let mut prev: HashSet<_> = HashSet::new();
        for d in 0..6 {
            let g = explore(&p, d).unwrap();
            let now: HashSet<_> = g.states.into_iter().collect();
            assert!(prev.is_subset(&now), "{} at depth {d}", f.name);
            prev = now;
        }
    }
}

#[test]
fn verification_is_deterministic() {
    for (name, sys) in fenced_systems() {
        let cfg = VerificationConfig::default();
        let mut a = verify(&sys, &cfg).to_json(true);
        let mut b = verify(&sys, &cfg).to_json(true);
        a.millis = 0;
        b.millis = 0;
        assert_eq!(a, b, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn canonical_forms_quotient_congruence(a in term(), b in term(), c in term(), x in name(), y in name()) {
        if let Err(e) = congruence_axioms(&a, &b, &c, x, y) {
            prop_assert!(false, "{}", e);
        }
    }
}
