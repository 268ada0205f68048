use std::sync::Arc;

use kwise_core::radial::{make_grid, Params, RadialGrid, SystemState};
use kwise_core::scalar::{compute_c, ScalarProblem};
use kwise_core::system::{
    energy_gradient_weak, interaction_matrix, m_project, nehari_project, quantities, constraints_g,
};
use kwise_core::thresholds::reduced_quotient_f;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    make_grid(12.0, 600, 2).unwrap()
}

/// Sums of two Gaussian bumps per component.
fn smooth_state(g: &Arc<RadialGrid>, coeffs: &[(f64, f64, f64)]) -> SystemState {
    let comps = coeffs
        .chunks(2)
        .map(|pair| {
            g.nodes
                .iter()
                .map(|&r| {
                    pair.iter()
                        .map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
                        .sum()
                })
                .collect()
        })
        .collect();
    SystemState::new(g.clone(), comps).unwrap()
}

fn bump() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.3f64..1.5, 0.0f64..3.0, 0.6f64..2.0)
}

fn energy(u: &SystemState, params: &Params) -> f64 {
    quantities(u, params).energy(params)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_central_differences(
        coeffs in prop::collection::vec(bump(), 6),
        dir in prop::collection::vec(bump(), 6),
        beta in -3.0f64..3.0,
        q in prop::sample::select(vec![1.0, 1.5, 2.0]),
    ) {
        let g = grid();
        let params = Params::uniform(2, 3, q, beta).unwrap();
        let u = smooth_state(&g, &coeffs);
        let v = smooth_state(&g, &dir);
        let grad = energy_gradient_weak(&u, &params).unwrap();
        let analytic: f64 = grad
            .iter()
            .zip(&v.components)
            .map(|(e, d)| e.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        let h = 1e-5;
        let fd = (energy(&u.axpy(h, &v.components), &params) - energy(&u.axpy(-h, &v.components), &params)) / (2.0 * h);
        let scale = analytic.abs().max(1e-3);
        prop_assert!((analytic - fd).abs() < 1e-6 * scale.max(1.0), "{analytic} vs {fd}");
    }

    #[test]
    fn nehari_projection_lands_on_the_constraint(
        coeffs in prop::collection::vec(bump(), 6),
        beta in 0.0f64..5.0,
    ) {
        let g = grid();
        let params = Params::uniform(2, 3, 2.0, beta).unwrap();
        let (_, v) = nehari_project(&smooth_state(&g, &coeffs), &params).unwrap();
        let qn = quantities(&v, &params);
        let n: f64 = qn.norms.iter().sum();
        prop_assert!(qn.nehari_residual(&params).abs() < 1e-10 * n);
        let (t, _) = nehari_project(&v, &params).unwrap();
        prop_assert!((t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn componentwise_projection_satisfies_every_identity(
        coeffs in prop::collection::vec(bump(), 6),
        beta in -0.5f64..0.5,
    ) {
        let g = grid();
        let params = Params::uniform(2, 3, 2.0, beta).unwrap();
        let u = smooth_state(&g, &coeffs);
        let projected = m_project(&u, &params);
        prop_assert!(projected.is_ok());
        if let Ok((_, v)) = projected {
            let qn = quantities(&v, &params);
            for (gi, n) in constraints_g(&v, &params).unwrap().iter().zip(&qn.norms) {
                prop_assert!(gi.abs() < 1e-9 * n.max(1.0));
            }
            let p = params.p();
            let expected = (0.5 - 1.0 / p) * qn.norms.iter().sum::<f64>();
            prop_assert!((qn.energy(&params) - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn repulsive_interaction_matrix_is_negative_definite(
        coeffs in prop::collection::vec(bump(), 6),
        beta in -8.0f64..-0.01,
    ) {
        let g = grid();
        let params = Params::uniform(2, 3, 2.0, beta).unwrap();
        if let Ok((_, v)) = m_project(&smooth_state(&g, &coeffs), &params) {
            let m = interaction_matrix(&v, &params).unwrap();
            prop_assert!(m.max_eigenvalue < 0.0);
        }
    }

    #[test]
    fn reduced_quotient_is_symmetric_in_the_free_coordinates(
        a in 0.05f64..20.0,
        b in 0.05f64..20.0,
        q in prop::sample::select(vec![1.0, 1.5, 2.0]),
    ) {
        let f1 = reduced_quotient_f(&[a, b], 3, q).unwrap();
        let f2 = reduced_quotient_f(&[b, a], 3, q).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-12 * f1.abs().max(1.0));
        let floor = 3f64.powf(3.0 * q / 2.0 - 1.0) - 1.0;
        prop_assert!(f1 >= floor - 1e-9 * floor);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn scalar_constant_obeys_the_scaling_law(lambda in 0.5f64..3.0, mu in 0.5f64..3.0) {
        let g = make_grid(24.0, 2400, 2).unwrap();
        let (d, p) = (2.0, 4.0);
        let base = compute_c(&ScalarProblem::full(p, 1.0, 1.0), &g).unwrap();
        let c = compute_c(&ScalarProblem::full(p, lambda, mu), &g).unwrap();
        let expected = base * lambda.powf(1.0 - d / 2.0 + d / p) * mu.powf(-2.0 / p);
        prop_assert!((c - expected).abs() < 2e-3 * expected, "{c} vs {expected}");
    }
}
