mod support;

use proptest::prelude::*;
use voxagent_core::world::{generate_world, WorldKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn primitives_balance_against_the_tables(seed in any::<u64>()) {
        support::check_conservation(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn same_seed_same_outcome(seed in any::<u64>()) {
        support::check_determinism(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn diff_reproduces_the_end_state(seed in any::<u64>()) {
        support::check_diff_apply(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn regenerating_gives_the_same_world(seed in 0u64..10_000, regular in any::<bool>()) {
        let kind = if regular { WorldKind::Regular } else { WorldKind::Flat };
        let a = generate_world(seed, kind);
        let b = generate_world(seed, kind);
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
        prop_assert_eq!(a.reset().fingerprint(), a.fingerprint());
    }
}
