mod common;

use holo_core::solver::{dedup_classes, residual_norm, solve_raw, solve_variety, Ansatz, SolverConfig};
use holo_core::tangles::trivial_tangle;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stored_residuals_match(seed in any::<u64>()) {
        let c = trivial_tangle(3).unwrap().constraints(true, true, Ansatz::None);
        let cfg = SolverConfig { restarts: 16, seed, ..Default::default() };
        for p in solve_raw(&c, &cfg).unwrap() {
            prop_assert!(p.residual < cfg.tol);
            prop_assert!((residual_norm(&c, &p.rep).unwrap() - p.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn dedup_idempotent_and_permutation_invariant(seed in any::<u64>(), shift in 0usize..64) {
        let c = trivial_tangle(2).unwrap().constraints(true, true, Ansatz::Abelian);
        let cfg = SolverConfig { restarts: 64, seed, ..Default::default() };
        let raw = solve_raw(&c, &cfg).unwrap();
        let once = dedup_classes(raw.clone());
        prop_assert_eq!(dedup_classes(once.clone()), once.clone());
        let mut rotated = raw.clone();
        rotated.rotate_left(shift % raw.len().max(1));
        rotated.reverse();
        let other = dedup_classes(rotated);
        prop_assert_eq!(other.len(), once.len());
        for (a, b) in other.iter().zip(&once) {
            prop_assert!(holo_core::solver::fingerprint_distance(&a.fingerprint, &b.fingerprint) < 1e-6);
        }
    }
}

#[test]
fn trivial_tangle_abelian_counts() {
    for (n, want) in [(2, 2), (3, 4)] {
        let c = trivial_tangle(n).unwrap().constraints(true, true, Ansatz::Abelian);
        let cfg = SolverConfig { restarts: 128, seed: 17, ..Default::default() };
        assert_eq!(solve_variety(&c, &cfg).unwrap().len(), want);
    }
}

#[test]
fn bit_reproducible() {
    let c = trivial_tangle(3).unwrap().constraints(true, true, Ansatz::None);
    let cfg = SolverConfig { restarts: 24, seed: 99, ..Default::default() };
    let a = serde_json::to_string(&solve_variety(&c, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&solve_variety(&c, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}
