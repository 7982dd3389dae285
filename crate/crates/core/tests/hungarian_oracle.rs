mod support;

use avqa_core::agreement::hungarian_max;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::brute_force_assignment as brute_force;

#[test]
fn thousand_random_matrices_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let r = rng.gen_range(1..=6);
        let c = rng.gen_range(1..=6);
        let hi = if case % 3 == 0 { 3 } else { 50 };
        let w: Vec<Vec<u64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(0..=hi)).collect())
            .collect();
        let m = hungarian_max(&w).unwrap();
        assert_eq!(m.total_overlap, brute_force(&w), "case {case}: {w:?}");
    }
}

proptest! {
    #[test]
    fn matching_is_a_valid_assignment(
        w in (1usize..7, 1usize..7).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0u64..20, c), r))
    ) {
        let m = hungarian_max(&w).unwrap();
        let rows: std::collections::BTreeSet<_> = m.pairs.iter().map(|p| p.0).collect();
        let cols: std::collections::BTreeSet<_> = m.pairs.iter().map(|p| p.1).collect();
        prop_assert_eq!(rows.len(), m.pairs.len());
        prop_assert_eq!(cols.len(), m.pairs.len());
        prop_assert_eq!(m.pairs.len(), w.len().min(w[0].len()));
        let total: u64 = m.pairs.iter().map(|&(i, j)| w[i][j]).sum();
        prop_assert_eq!(total, m.total_overlap);
        prop_assert_eq!(total, brute_force(&w));
    }
}
