use irwin::oracle::{brute_force_sum, OracleMode};
use irwin::{partial_sum, ConditionSet, Fixed};
use proptest::prelude::*;

/// Largest digit-length whose numbers stay within a cheap enumeration.
fn affordable_power(base: u32) -> u32 {
    let mut p = 0;
    let mut n: u128 = 1;
    while n * base as u128 <= 200_000 {
        n *= base as u128;
        p += 1;
    }
    p
}

fn condition_set() -> impl Strategy<Value = ConditionSet> {
    (2u32..=10)
        .prop_flat_map(|base| {
            let digits = proptest::sample::subsequence((0..base).collect::<Vec<_>>(), 1..=base.min(3) as usize);
            (Just(base), digits, proptest::collection::vec(0u32..=2, 3))
        })
        .prop_map(|(base, digits, counts)| {
            let pairs: Vec<(i64, i64)> = digits.into_iter().zip(counts).map(|(d, n)| (d as i64, n as i64)).collect();
            ConditionSet::new(base, pairs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn partial_sums_match_enumeration(cs in condition_set()) {
        let power = affordable_power(cs.base());
        let limit = (cs.base() as u128).pow(power);
        let engine = partial_sum(&cs, power, 15).unwrap();
        let exact = brute_force_sum(&cs, limit, OracleMode::ExactCount, 15).unwrap();
        let at_most = brute_force_sum(&cs, limit, OracleMode::AtMost, 15).unwrap();
        let tol = Fixed::new(10.into(), 15);
        prop_assert!((&engine.requested_sum - &exact).abs() <= tol, "{:?}: {} vs {}", cs, engine.requested_sum, exact);
        prop_assert!((&engine.at_most_sum - &at_most).abs() <= tol, "{:?}: {} vs {}", cs, engine.at_most_sum, at_most);
    }

    #[test]
    fn index_round_trips(cs in condition_set(), seed in 0usize..1000) {
        let cells = cs.cell_count().unwrap();
        let index = seed % cells;
        let vector = cs.unindex(index).unwrap();
        prop_assert_eq!(cs.index(&vector).unwrap(), index);
        for (k, n) in vector.counts().iter().zip(cs.counts()) {
            prop_assert!(*k <= n);
        }
    }
}
