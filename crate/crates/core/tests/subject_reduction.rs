mod common;

use common::subject_reduction;
use migo::corpus::corpus;
use proptest::prelude::*;

#[test]
fn every_fixture_step_has_a_type_step() {
    for f in corpus() {
        let Some(p) = f.program() else { continue };
        let p = p.unwrap();
        let n = subject_reduction(&p, 8, 400).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        assert!(n > 0, "{}", f.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_program_steps_have_type_steps(p in common::program()) {
        if let Err(e) = subject_reduction(&p, 5, 150) {
            prop_assert!(false, "{}\n{}", p, e);
        }
    }
}
