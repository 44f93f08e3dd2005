mod common;

use holo_core::cohomology::d0_matrix;
use holo_core::linalg::rank;
use holo_core::reduction::{
    moment, pillowcase_chart, pillowcase_rep, random_abelian_boundary_point, random_traceless_point, torus_act,
};
use holo_core::sampling::random_unit_quaternion;
use holo_core::solver::{fingerprint, fingerprint_distance};
use holo_core::surface::{random_point, surface_presentation, SurfaceModel};
use holo_core::Representation;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Jacobian of `(t, ξ) ↦ Ad_{e^ξ}(ρ·t)` at the origin, right-translated.
fn orbit_jacobian(model: &SurfaceModel, rho: &Representation) -> DMatrix<f64> {
    let n = model.n;
    let g = rho.len();
    let mut j = DMatrix::zeros(3 * g, n + 3);
    let h = 1e-6;
    for i in 0..n {
        let mut tp = vec![0.0; n];
        tp[i] = h;
        let p = torus_act(model, rho, &tp).unwrap();
        tp[i] = -h;
        let m = torus_act(model, rho, &tp).unwrap();
        for k in 0..g {
            let base = rho.values()[k].inverse();
            let d = ((p.values()[k] * base).im() - (m.values()[k] * base).im()).scale(0.5 / h);
            j[(3 * k, i)] = d.x;
            j[(3 * k + 1, i)] = d.y;
            j[(3 * k + 2, i)] = d.z;
        }
    }
    j.view_mut((0, n), (3 * g, 3)).copy_from(&d0_matrix(rho));
    j
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_action_fixes_traces(seed in any::<u64>(), t in prop::collection::vec(-7.0f64..7.0, 3)) {
        let model = surface_presentation(3).unwrap();
        let rho = random_point(&model, &mut common::rng(seed));
        let a = moment(&model, &rho).unwrap();
        let b = moment(&model, &torus_act(&model, &rho, &t).unwrap()).unwrap();
        prop_assert_eq!(a.t, b.t);
    }

    #[test]
    fn free_action_on_irreducible_restrictions(seed in any::<u64>(), t in prop::collection::vec(0.3f64..6.0, 2)) {
        let model = surface_presentation(2).unwrap();
        let rho = random_traceless_point(&model, &mut common::rng(seed));
        let moved = torus_act(&model, &rho, &t).unwrap();
        prop_assert!(fingerprint_distance(&fingerprint(&rho), &fingerprint(&moved)) > 1e-6);
        let back = torus_act(&model, &rho, &[t[0] + std::f64::consts::TAU, 0.0]).unwrap();
        let once = torus_act(&model, &rho, &[t[0], 0.0]).unwrap();
        prop_assert!(back.max_distance(&once) < 1e-12);
        prop_assert_eq!(rank(&orbit_jacobian(&model, &rho)), 5);
    }

    #[test]
    fn abelian_restriction_has_a_stabilizer_direction(seed in any::<u64>()) {
        let model = surface_presentation(2).unwrap();
        let rho = random_abelian_boundary_point(&model, &mut common::rng(seed)).unwrap();
        prop_assert_eq!(rank(&orbit_jacobian(&model, &rho)), 4);
    }

    #[test]
    fn chart_is_conjugation_invariant(seed in any::<u64>(), g in 0.0f64..3.1, th in 0.0f64..6.28) {
        let rho = pillowcase_rep(g, th);
        let h = random_unit_quaternion(&mut common::rng(seed));
        let a = pillowcase_chart(&rho).unwrap();
        let b = pillowcase_chart(&rho.conjugate(h)).unwrap();
        prop_assert!((a.gamma - b.gamma).abs() < 1e-9);
        prop_assert!((a.theta - b.theta).abs() < 1e-9);
    }
}
