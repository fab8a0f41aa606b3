use adabfgs_core::stepsize::{
    adaptive_step, model_upper, model_upper_sa2, omega, omega_inv_upper, sa2_step, Branch, StepContext,
};
use adabfgs_testkit::{grid_argmin_step, model_slope, random_step_context, rng, OracleConfig, UpperModel};
use proptest::prelude::*;

fn ctx(m: f64, eta: f64, alpha: f64, dx: f64) -> StepContext {
    StepContext { g_dot_d: -eta * dx, d_norm: 1.0, d_weighted_norm: dx, m, l: Some((dx / alpha).powi(2)) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn omega_lower_bounds(z in 0.0f64..50.0) {
        let w = omega(z).unwrap();
        let bound = if z < 1.0 { z * z / 4.0 } else { z / 4.0 };
        prop_assert!(w >= bound * (1.0 - 1e-12), "ω({z}) = {w} < {bound}");
    }

    #[test]
    fn omega_strictly_increasing(z in 0.0f64..50.0, dz in 1e-6f64..1.0) {
        prop_assert!(omega(z + dz).unwrap() > omega(z).unwrap());
    }

    #[test]
    fn omega_inverse_upper_bound(y in 0.0f64..100.0) {
        let u = omega_inv_upper(y).unwrap();
        prop_assert!(omega(u).unwrap() >= y * (1.0 - 1e-14));
    }

    #[test]
    fn branch_continuity(m in 1e-3f64..2.0, eta in 0.01f64..5.0, dx in 0.5f64..2.0) {
        let alpha = 1.0 / (1.0 + m * eta);
        let c = ctx(m, eta, alpha, dx);
        let first = eta / ((1.0 + m * eta) * dx);
        let second = (m * eta * alpha * alpha + (1.0 - alpha).powi(2)) / (m * dx);
        prop_assert!((first - second).abs() <= 1e-12 * (1.0 + first));
        let t = sa2_step(&c).unwrap().t;
        prop_assert!((t - first).abs() <= 1e-12 * (1.0 + first));
    }

    #[test]
    fn sa2_dominates_adaptive(m in 0.0f64..2.0, eta in 0.01f64..5.0, alpha in 1e-6f64..=1.0, dx in 0.5f64..2.0) {
        let c = ctx(m, eta, alpha, dx);
        let a = adaptive_step(&c).unwrap().t;
        let s = sa2_step(&c).unwrap().t;
        prop_assert!(s >= a * (1.0 - 1e-14), "sa2 {s} < adaptive {a}");
    }

    #[test]
    fn small_m_limit(eta in 0.01f64..5.0, alpha in 1e-6f64..=1.0, dx in 0.5f64..2.0) {
        let newton = eta / dx;
        for rule in [adaptive_step, sa2_step] {
            let at_zero = rule(&ctx(0.0, eta, alpha, dx)).unwrap().t;
            let near_zero = rule(&ctx(1e-12, eta, alpha, dx)).unwrap().t;
            prop_assert!((at_zero - newton).abs() <= 1e-15 * newton);
            prop_assert!((near_zero - at_zero).abs() <= 1e-6 * at_zero);
        }
    }

    #[test]
    fn adaptive_step_inside_model_domain(m in 1e-6f64..2.0, eta in 0.01f64..5.0, dx in 0.5f64..2.0) {
        let c = ctx(m, eta, 1.0, dx);
        prop_assert!(adaptive_step(&c).unwrap().t < 1.0 / (m * dx));
    }

    #[test]
    fn sa2_model_is_c1_at_breakpoint(m in 1e-2f64..2.0, eta in 0.01f64..5.0, alpha in 0.05f64..0.95, dx in 0.5f64..2.0) {
        let c = ctx(m, eta, alpha, dx);
        let tu = (1.0 - alpha) / (m * dx);
        let h = 1e-7 * tu;
        let left = (model_upper_sa2(&c, tu).unwrap() - model_upper_sa2(&c, tu - h).unwrap()) / h;
        let right = (model_upper_sa2(&c, tu + h).unwrap() - model_upper_sa2(&c, tu).unwrap()) / h;
        prop_assert!((left - right).abs() <= 1e-5 * (1.0 + left.abs()), "{left} vs {right}");
    }
}

#[test]
fn closed_form_steps_match_grid_minimizers() {
    let cfg = OracleConfig::default();
    let mut r = rng(2024);
    for case in 0..100 {
        let c = random_step_context(&mut r);
        let a = adaptive_step(&c).unwrap();
        let upper = if c.m > 0.0 { (1.0 - 1e-9) / (c.m * c.d_weighted_norm) } else { 10.0 * a.t };
        let grid = grid_argmin_step(&c, UpperModel::SelfConcordant, upper, &cfg).unwrap();
        assert!((grid - a.t).abs() <= 1e-4 * a.t, "case {case}: adaptive {} vs grid {grid}", a.t);
        let slope = model_slope(&c, UpperModel::SelfConcordant, a.t);
        assert!(slope.abs() <= 1e-8, "case {case}: adaptive slope {slope:e} {c:?} t={}", a.t);

        let s = sa2_step(&c).unwrap();
        let grid = grid_argmin_step(&c, UpperModel::SmoothnessAided, 10.0 * s.t, &cfg).unwrap();
        assert!((grid - s.t).abs() <= 1e-4 * s.t, "case {case}: sa2 {} vs grid {grid}", s.t);
        let slope = model_slope(&c, UpperModel::SmoothnessAided, s.t);
        assert!(slope.abs() <= 1e-8, "case {case}: sa2 slope {slope:e} ({:?})", s.branch);
    }
}

#[test]
fn library_models_agree_with_direct_formulas() {
    let mut r = rng(7);
    for _ in 0..200 {
        let c = random_step_context(&mut r);
        let t = sa2_step(&c).unwrap().t;
        for s in [0.3 * t, t, 1.7 * t] {
            let lib = model_upper_sa2(&c, s).unwrap();
            let direct = adabfgs_testkit::eval_model(&c, UpperModel::SmoothnessAided, s);
            assert!((lib - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{lib} vs {direct}");
        }
        let t = adaptive_step(&c).unwrap().t;
        let lib = model_upper(&c, t).unwrap();
        let direct = adabfgs_testkit::eval_model(&c, UpperModel::SelfConcordant, t);
        assert!((lib - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }
}

#[test]
fn sa2_branch_selection() {
    assert_eq!(sa2_step(&ctx(1.0, 1.0, 0.5, 1.0)).unwrap().branch, Branch::SelfConcordant);
    assert_eq!(sa2_step(&ctx(1.0, 1.0, 0.8, 1.0)).unwrap().branch, Branch::SmoothnessAided);
    assert_eq!(sa2_step(&ctx(0.0, 1.0, 1.0, 1.0)).unwrap().branch, Branch::SelfConcordant);
}
