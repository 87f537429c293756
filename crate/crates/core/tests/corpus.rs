mod common;

use common::{fixture_report, matches_manifest, oracle_agrees};
use migo::corpus::{corpus, fixture};
use migo::verification::JsonReport;

#[test]
fn verdicts_match_manifest() {
    let failures: Vec<String> = corpus()
        .iter()
        .filter_map(|f| matches_manifest(f).err())
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn oracle_agrees_on_explorable_fixtures() {
    let explorable: Vec<_> = corpus().into_iter().filter(|f| f.explorable).collect();
    assert!(explorable.len() >= 3);
    for f in explorable {
        oracle_agrees(&f).unwrap();
    }
}

#[test]
fn json_report_round_trips() {
    for name in ["sieve", "fib_bad", "mismatch", "double-close"] {
        let r = fixture_report(&fixture(name).unwrap());
        let text = serde_json::to_string_pretty(&r.to_json(true)).unwrap();
        let back: JsonReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text, "{name}");
    }
}

#[test]
fn violations_carry_witnesses() {
    let r = fixture_report(&fixture("fib_bad").unwrap());
    let j = r.to_json(true);
    assert_eq!(j.live, Some(false));
    assert!(!j.witness.is_empty());
    assert!(j.violation.is_some());
    assert!(r.to_json(false).witness.is_empty());
}
