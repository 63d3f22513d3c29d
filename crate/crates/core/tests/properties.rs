use h1cutoff::norms::weight_sum_sqrt;
use h1cutoff::{
    apply_cutoff, multiplier, uniform_norm, weighted_norm, CutoffConfig, Grid, GridFunction, WeightedNormSpec,
};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(6, 32).unwrap()
}

/// Smooth compactly supported profile on `[-3, 3]`.
fn profile(amp: f64, freq: f64, phase: f64, centre: f64) -> GridFunction {
    GridFunction::sample_scalar(grid(), move |x| {
        let t = x - centre;
        if t.abs() >= 3.0 {
            0.0
        } else {
            let r = 1.0 - (t / 3.0).powi(2);
            amp * r.powi(3) * (freq * t + phase).sin()
        }
    })
}

fn arb_function() -> impl Strategy<Value = GridFunction> {
    (-5.0..5.0f64, 0.1..6.0f64, 0.0..6.3f64, -1.0..1.0f64).prop_map(|(a, f, p, c)| profile(a, f, p, c))
}

fn close(a: &GridFunction, b: &GridFunction, tol: f64) -> bool {
    a.sub(b).unwrap().max_abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_is_linear(u in arb_function(), v in arb_function(), s in -3.0..3.0f64) {
        let lhs = u.axpy(s, &v).unwrap().derivative();
        let rhs = u.derivative().axpy(s, &v.derivative()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-9));
    }

    #[test]
    fn multiply_is_bilinear_and_commutative(
        u in arb_function(), v in arb_function(), w in arb_function(), s in -3.0..3.0f64
    ) {
        let left = u.axpy(s, &v).unwrap().pointwise_multiply(&w).unwrap();
        let split = u.pointwise_multiply(&w).unwrap().axpy(s, &v.pointwise_multiply(&w).unwrap()).unwrap();
        prop_assert!(close(&left, &split, 1e-10));
        prop_assert_eq!(u.pointwise_multiply(&w).unwrap(), w.pointwise_multiply(&u).unwrap());
    }

    #[test]
    fn weighted_norm_is_a_norm(u in arb_function(), v in arb_function(), s in -4.0..4.0f64, eta in 0.05..2.0f64) {
        let spec = WeightedNormSpec::new(eta).unwrap();
        let nu = weighted_norm(&u, spec);
        prop_assert!(nu >= 0.0);
        prop_assert!((weighted_norm(&u.scale(s), spec) - s.abs() * nu).abs() <= 1e-10 * (1.0 + nu));
        let sum = weighted_norm(&u.add(&v).unwrap(), spec);
        prop_assert!(sum <= nu + weighted_norm(&v, spec) + 1e-10);
        prop_assert_eq!(weighted_norm(&GridFunction::zeros(grid(), 1), spec), 0.0);
    }

    #[test]
    fn uniform_norm_is_a_norm(u in arb_function(), v in arb_function(), s in -4.0..4.0f64) {
        let nu = uniform_norm(&u);
        prop_assert!((uniform_norm(&u.scale(s)) - s.abs() * nu).abs() <= 1e-10 * (1.0 + nu));
        prop_assert!(uniform_norm(&u.add(&v).unwrap()) <= nu + uniform_norm(&v) + 1e-10);
    }

    #[test]
    fn weighted_norm_decreases_in_eta(u in arb_function(), a in 0.05..1.0f64, b in 0.05..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n_lo = weighted_norm(&u, WeightedNormSpec::new(lo).unwrap());
        let n_hi = weighted_norm(&u, WeightedNormSpec::new(hi).unwrap());
        prop_assert!(n_hi <= n_lo + 1e-12);
    }

    #[test]
    fn weighted_norm_is_dominated_by_uniform(u in arb_function(), eta in 0.05..1.0f64) {
        let spec = WeightedNormSpec::new(eta).unwrap();
        prop_assert!(weighted_norm(&u, spec) <= weight_sum_sqrt(grid(), spec) * uniform_norm(&u) + 1e-10);
    }

    #[test]
    fn multiplier_lies_in_unit_interval(u in arb_function(), eps in 0.05..2.0f64) {
        let cfg = CutoffConfig::standard(eps).unwrap();
        let w = multiplier(&u.scale(1.0 / eps), &cfg).unwrap();
        for &x in w.samples() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x), "w = {}", x);
        }
    }

    #[test]
    fn translation_is_an_isometry(u in arb_function(), k in -32i64..32) {
        let moved = u.translate(k).unwrap();
        prop_assert!((uniform_norm(&moved) - uniform_norm(&u)).abs() <= 1e-12 * (1.0 + uniform_norm(&u)));
    }

    #[test]
    fn cutoff_commutes_with_translation(u in arb_function(), k in -32i64..32, eps in 0.1..1.0f64) {
        let cfg = CutoffConfig::standard(eps).unwrap();
        let lhs = apply_cutoff(&u.translate(k).unwrap(), &cfg).unwrap();
        let rhs = apply_cutoff(&u, &cfg).unwrap().translate(k).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-9 * (1.0 + u.max_abs())));
    }

    #[test]
    fn cutoff_is_bounded_by_eight_eps(u in arb_function(), eps in 0.05..2.0f64) {
        let cfg = CutoffConfig::standard(eps).unwrap();
        prop_assert!(uniform_norm(&apply_cutoff(&u, &cfg).unwrap()) <= 8.0 * eps);
    }

    #[test]
    fn small_inputs_pass_unchanged(u in arb_function(), eps in 0.05..2.0f64) {
        // keeps rho below 1 everywhere
        let n = uniform_norm(&u);
        prop_assume!(n > 0.0);
        let v = u.scale(0.05 * eps / n);
        let cfg = CutoffConfig::standard(eps).unwrap();
        prop_assert!(close(&apply_cutoff(&v, &cfg).unwrap(), &v, 1e-12));
    }

    #[test]
    fn cutoff_is_odd(u in arb_function(), eps in 0.1..1.0f64) {
        let cfg = CutoffConfig::standard(eps).unwrap();
        let neg = apply_cutoff(&u.scale(-1.0), &cfg).unwrap();
        prop_assert!(close(&neg, &apply_cutoff(&u, &cfg).unwrap().scale(-1.0), 1e-12));
    }
}
