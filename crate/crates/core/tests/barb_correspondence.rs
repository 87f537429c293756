mod common;

use common::barb_correspondence;
use migo::corpus::corpus;
use proptest::prelude::*;

#[test]
fn fixture_barbs_have_type_barbs() {
    for f in corpus() {
        let Some(p) = f.program() else { continue };
        let p = p.unwrap();
        let n = barb_correspondence(&p, 5, 60).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        assert!(n > 0, "{}", f.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_program_barbs_have_type_barbs(p in common::program()) {
        if let Err(e) = barb_correspondence(&p, 3, 40) {
            prop_assert!(false, "{}\n{}", p, e);
        }
    }
}
