use proptest::prelude::*;

use gkdv_waves::abelian::{abelian_integral, grid_bounds, ratio_f};
use gkdv_waves::identities::{identity_residual, identity_residual_exact, identity_scale};
use gkdv_waves::quadrature::DEFAULT_REL_TOL;
use gkdv_waves::{FixedPointKind, ModelParams};

fn model() -> impl Strategy<Value = ModelParams> {
    (1u32..=12).prop_map(|n| ModelParams::new(n).unwrap())
}

/// A model together with a fraction in (0, 1).
fn model_and_fraction() -> impl Strategy<Value = (ModelParams, f64)> {
    (model(), 1e-4f64..(1.0 - 1e-4))
}

proptest! {
    #[test]
    fn involution_preserves_level_and_is_idempotent((p, t) in model_and_fraction()) {
        let u = t * p.right_extent();
        let v = p.involution(u).unwrap();
        prop_assert!((p.potential(v) - p.potential(u)).abs() <= 1e-10);
        prop_assert!((p.involution(v).unwrap() - u).abs() <= 1e-8);
        // opposite side of the center
        prop_assert!((u - p.center_u()) * (v - p.center_u()) <= 0.0);
    }

    #[test]
    fn potential_is_monotone_on_each_branch((p, t) in model_and_fraction()) {
        let left = t * p.center_u();
        let right = p.center_u() + t * (p.right_extent() - p.center_u());
        prop_assert!(p.potential_deriv(left) < 0.0);
        prop_assert!(p.potential_deriv(right) > 0.0);
    }

    #[test]
    fn turning_points_bracket_the_center_and_nest((p, t) in model_and_fraction(), dt in 1e-3f64..0.5) {
        let (lo, hi) = grid_bounds(&p);
        let h1 = lo + t * (hi - lo);
        let h2 = h1 + dt * (hi - h1);
        let g1 = p.turning_points(h1).unwrap();
        let g2 = p.turning_points(h2).unwrap();
        prop_assert!(0.0 < g1.alpha && g1.alpha < p.center_u());
        prop_assert!(p.center_u() < g1.beta && g1.beta < p.right_extent());
        prop_assert!((p.potential(g1.alpha) - h1).abs() <= 1e-12);
        prop_assert!((p.potential(g1.beta) - h1).abs() <= 1e-12);
        prop_assert!(g2.alpha < g1.alpha && g2.beta > g1.beta);
        let mid = 0.5 * (g1.alpha + g1.beta);
        prop_assert!(h1 - p.potential(mid) > 0.0);
    }

    #[test]
    fn ratio_stays_within_bounds((p, t) in model_and_fraction()) {
        let (lo, hi) = grid_bounds(&p);
        let r = ratio_f(&p, lo + t * (hi - lo), DEFAULT_REL_TOL).unwrap();
        let nf = f64::from(p.n());
        prop_assert!(r.a0 > 0.0);
        prop_assert!(r.ratio < nf + 1.0);
        prop_assert!(r.ratio > 2.0 * (nf + 1.0) * (nf + 2.0) / (3.0 * nf + 4.0));
        prop_assert!(r.limit_speed_c0 > 1.0 / nf);
        prop_assert!(r.limit_speed_c0 < (3.0 * nf + 4.0) / (2.0 * nf * nf + 3.0 * nf));
    }

    #[test]
    fn identity_holds_in_floating_point(n in 1u32..=12, u in 0.0f64..3.0, v in 0.0f64..3.0) {
        let rel = identity_residual(n, u, v).abs() / (1.0 + identity_scale(n, u, v));
        prop_assert!(rel <= 1e-9);
    }

    #[test]
    fn identity_holds_exactly(n in 1u32..=8, u in -50i64..50, v in -50i64..50) {
        prop_assert_eq!(identity_residual_exact(n, u, v), Some(0));
    }

    #[test]
    fn fixed_point_kind_follows_hessian(p in model()) {
        for fp in p.fixed_points() {
            let det = p.hessian_det(fp.u);
            prop_assert_eq!(fp.y, 0.0);
            prop_assert_eq!(fp.kind == FixedPointKind::Saddle, det < 0.0);
        }
    }
}

#[test]
fn doubling_nodes_stays_within_error_estimate() {
    for n in [1, 3, 5, 9] {
        let p = ModelParams::new(n).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let h = p.p1() * (1.0 - t);
            for k in [0, n] {
                let coarse = abelian_integral(&p, k, h, DEFAULT_REL_TOL).unwrap();
                let fine = abelian_integral(&p, k, h, 1e-14).unwrap();
                assert!(
                    (coarse.value - fine.value).abs() <= coarse.error,
                    "n={n} h={h} k={k}: change {} > estimate {}",
                    (coarse.value - fine.value).abs(),
                    coarse.error
                );
            }
        }
    }
}
