use std::cmp::Ordering;

use lattice_smooth::dependence::{lex_compare, v_set_contains};
use lattice_smooth::experiment::fit_slope;
use lattice_smooth::orlicz::{c_k_coefficient, d_k_coefficient, luxemburg_norm, psi_eval, quantile_q};
use lattice_smooth::{EstimationProblem, KernelSpec, LatticeShape, MarginalSpec, YoungFunctionBeta};
use proptest::prelude::*;

fn marginal() -> impl Strategy<Value = MarginalSpec> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|mass| MarginalSpec::PointMass { mass }),
        (0.1f64..5.0).prop_map(|half_width| MarginalSpec::Uniform { half_width }),
        (0.1f64..5.0).prop_map(|sigma| MarginalSpec::Gaussian { sigma }),
        prop::collection::vec(-4.0f64..4.0, 1..12).prop_map(|sample| MarginalSpec::Empirical { sample }),
    ]
}

fn kernel(d: usize) -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::uniform(d).unwrap()),
        (0.1f64..3.0, 0.0f64..3.0).prop_map(move |(a, b)| KernelSpec::pedestal(d, a, b).unwrap()),
    ]
}

proptest! {
    #[test]
    fn kernel_is_symmetric_bounded_and_supported(k in kernel(2), u in prop::collection::vec(-1.5f64..1.5, 2)) {
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        prop_assert_eq!(k.eval(&u), k.eval(&neg));
        let inside = u.iter().all(|v| v.abs() <= 1.0);
        if inside {
            prop_assert!(k.lower() - 1e-15 <= k.eval(&u) && k.eval(&u) <= k.upper() + 1e-15);
        } else {
            prop_assert_eq!(k.eval(&u), 0.0);
        }
    }

    #[test]
    fn estimator_is_affine_equivariant(
        k in kernel(1),
        n in 8usize..80,
        hf in 0.3f64..0.9,
        x in 0.0f64..=1.0,
        y in prop::collection::vec(-3.0f64..3.0, 80),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let h = (2.5 / n as f64).max(hf * 0.5);
        let problem = EstimationProblem::new(LatticeShape::new(1, n).unwrap(), k, h).unwrap();
        let y = &y[..n];
        let moved: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let lhs = problem.estimate(&moved, &[x]).unwrap();
        let rhs = a * problem.estimate(y, &[x]).unwrap() + b;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let g = problem.estimate(y, &[x]).unwrap();
        prop_assert!(lo - 1e-12 <= g && g <= hi + 1e-12);
    }

    #[test]
    fn lex_order_is_a_total_order(
        a in prop::collection::vec(-3i64..3, 3),
        b in prop::collection::vec(-3i64..3, 3),
        c in prop::collection::vec(-3i64..3, 3),
    ) {
        let ab = lex_compare(&a, &b).unwrap();
        prop_assert_eq!(ab.reverse(), lex_compare(&b, &a).unwrap());
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if ab != Ordering::Greater && lex_compare(&b, &c).unwrap() != Ordering::Greater {
            prop_assert_ne!(lex_compare(&a, &c).unwrap(), Ordering::Greater);
        }
        let first_diff = a.iter().zip(&b).position(|(x, y)| x != y);
        if let Some(p) = first_diff {
            prop_assert_eq!(ab, a[p].cmp(&b[p]));
        }
    }

    #[test]
    fn v_sets_are_nested(
        i in prop::collection::vec(-4i64..4, 2),
        j in prop::collection::vec(-4i64..4, 2),
        k in 1u64..6,
    ) {
        if v_set_contains(&i, k + 1, &j).unwrap() {
            prop_assert!(v_set_contains(&i, k, &j).unwrap());
        }
        prop_assert!(!v_set_contains(&i, 1, &i).unwrap());
        if v_set_contains(&i, k, &j).unwrap() {
            prop_assert_eq!(lex_compare(&j, &i).unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn psi_is_convex_and_increasing(beta in 0.3f64..3.0, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let psi = YoungFunctionBeta::new(beta).unwrap();
        let pa = psi_eval(&psi, a).unwrap();
        let pb = psi_eval(&psi, b).unwrap();
        let mid = psi_eval(&psi, 0.5 * (a + b)).unwrap();
        prop_assert!(mid <= 0.5 * (pa + pb) + 1e-9 * (1.0 + pa + pb));
        if a < b {
            prop_assert!(pa <= pb);
        }
        prop_assert_eq!(psi_eval(&psi, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_norm_is_homogeneous_and_monotone(z in marginal(), beta in prop::sample::select(vec![0.5, 1.0, 2.0]), lambda in 0.2f64..5.0) {
        let base = luxemburg_norm(&z, beta, 1e-12).unwrap();
        let scaled = luxemburg_norm(&z.scaled(lambda), beta, 1e-12).unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-8 * (1.0 + lambda * base));
        if lambda > 1.0 {
            prop_assert!(scaled >= base);
        }
    }

    #[test]
    fn quantile_is_nonincreasing(z in marginal(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        prop_assert!(quantile_q(&z, lo) >= quantile_q(&z, hi));
        prop_assert!(quantile_q(&z, hi) >= 0.0);
    }

    #[test]
    fn coefficients_grow_with_alpha(z in marginal(), a1 in 0.0f64..0.25, a2 in 0.0f64..0.25) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let c_lo = c_k_coefficient(&z, lo, 2.0, 1e-12).unwrap();
        let c_hi = c_k_coefficient(&z, hi, 2.0, 1e-12).unwrap();
        prop_assert!(c_lo <= c_hi * (1.0 + 1e-9) + 1e-12);
        let d_lo = d_k_coefficient(&z, lo, 4.0).unwrap();
        let d_hi = d_k_coefficient(&z, hi, 4.0).unwrap();
        prop_assert!(d_lo <= d_hi * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn slope_fit_recovers_symmetric_perturbations(s in -3.0f64..3.0, c in -5.0f64..5.0, delta in 0.0f64..0.5) {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let signs = [1.0, -1.0, -1.0, 1.0];
        let pts: Vec<(f64, f64)> = xs.iter().zip(signs).map(|(x, e)| (*x, s * x + c + e * delta)).collect();
        let fit = fit_slope(&pts).unwrap();
        prop_assert!((fit.slope - s).abs() <= 1e-12 * (1.0 + s.abs()));
        let exact = fit_slope(&xs.iter().map(|x| (*x, s * x + c)).collect::<Vec<_>>()).unwrap();
        prop_assert!((exact.slope - s).abs() <= 1e-12 * (1.0 + s.abs()));
        prop_assert!(exact.stderr <= 1e-10);
    }
}
