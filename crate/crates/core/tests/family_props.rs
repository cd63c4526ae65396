use hyperladder::exactpoly::{int, rat, to_f64};
use hyperladder::{Endpoint, Error, Family, Interval, Polynomial, Rational};
use proptest::prelude::*;

/// Jacobi(α, β), Laguerre(α) or a Hermite-like `σ = c, τ = τ₀ − ks`, with
/// parameters on a grid of quarters.
fn admissible_family() -> impl Strategy<Value = Family> {
    let quarter = (-3i64..=12).prop_map(|p| rat(p, 4));
    prop_oneof![
        (quarter.clone(), quarter.clone()).prop_map(|(a, b)| Family::jacobi(a, b).unwrap()),
        quarter.prop_map(|a| Family::laguerre(a).unwrap()),
        (1i64..=3, -3i64..=3, 1i64..=4).prop_map(|(c, t0, k)| {
            Family::new(
                Polynomial::from_ints(&[c]),
                Polynomial::from_ints(&[t0, -k]),
                Interval::new(Endpoint::NegInf, Endpoint::PosInf),
            )
            .unwrap()
        }),
    ]
}

fn interior_points(f: &Family, n: usize) -> Vec<f64> {
    let rule = f.gauss_rule(12).unwrap();
    let lo = match &f.interval().a {
        Endpoint::Finite(r) => to_f64(r),
        _ => rule.nodes[0],
    };
    let hi = match &f.interval().b {
        Endpoint::Finite(r) => to_f64(r),
        _ => *rule.nodes.last().unwrap(),
    };
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classical_polynomials_are_orthogonal(f in admissible_family()) {
        let phis: Vec<_> = (0..=10).map(|l| f.hp(f.classical_polynomial(l), 0)).collect();
        let norms: Vec<f64> = phis.iter().map(|p| f.inner_product(p, p).unwrap()).collect();
        for l in 0..=10 {
            prop_assert!(norms[l] > 0.0);
            for k in 0..l {
                let ip = f.inner_product(&phis[l], &phis[k]).unwrap();
                prop_assert!(ip.abs() <= 1e-12 * (norms[l] * norms[k]).sqrt(), "{} l={l} k={k}: {ip:e}", f.label());
            }
        }
    }

    #[test]
    fn weight_solves_pearson_equation(f in admissible_family()) {
        // (σρ)′ = τρ  ⇔  σ′ + σ·ρ′/ρ = τ
        let sigma = f.sigma();
        let dsigma = sigma.derivative();
        for s in interior_points(&f, 100) {
            let lhs = dsigma.eval_f64(s) + sigma.eval_f64(s) * f.weight().log_derivative(s);
            let rhs = f.tau().eval_f64(s);
            let scale = 1.0 + rhs.abs() + dsigma.eval_f64(s).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{} s={s}", f.label());
        }
    }

    #[test]
    fn gauss_rule_integrates_polynomials_exactly(
        f in admissible_family(),
        n in 1usize..12,
        coeffs in prop::collection::vec(-9i64..=9, 24),
    ) {
        let p = Polynomial::from_ints(&coeffs[..2 * n]);
        let rule = f.gauss_rule(n).unwrap();
        let m0 = f.zeroth_moment();
        let ratios = f.moment_ratios(2 * n);
        let exact: Rational = p.coeffs().iter().zip(&ratios).map(|(c, r)| c * r).sum();
        let scale: f64 = p.coeffs().iter().zip(&ratios).map(|(c, r)| to_f64(c).abs() * to_f64(r).abs()).sum();
        let got = rule.integrate(|s| p.eval_f64(s)) / m0;
        prop_assert!((got - to_f64(&exact)).abs() <= 1e-12 * (1.0 + scale), "{} n={n}", f.label());
        prop_assert_eq!(rule.exact_degree, 2 * n - 1);
        prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
        prop_assert!(rule.nodes.iter().all(|x| f.interval().contains(*x)));
    }

    #[test]
    fn eigenvalues_increase(f in admissible_family()) {
        for l in 0..50 {
            prop_assert!(f.eigenvalue(l + 1) > f.eigenvalue(l));
        }
        prop_assert_eq!(f.eigenvalue(0), int(0));
    }

    #[test]
    fn rising_tau_is_rejected(t0 in -5i64..=5, t1 in 0i64..=4, c in 1i64..=3) {
        let res = Family::new(
            Polynomial::from_ints(&[c]),
            Polynomial::from_ints(&[t0, t1]),
            Interval::new(Endpoint::NegInf, Endpoint::PosInf),
        );
        prop_assert!(matches!(res, Err(Error::Admissibility(v)) if v.name() == "tau_slope_non_negative"));
    }

    #[test]
    fn convex_sigma_is_rejected(c0 in -3i64..=3, c1 in -3i64..=3, c2 in 1i64..=3, k in 1i64..=3) {
        let res = Family::new(
            Polynomial::from_ints(&[c0, c1, c2]),
            Polynomial::from_ints(&[0, -k]),
            Interval::finite(int(-1), int(1)),
        );
        prop_assert!(matches!(res, Err(Error::Admissibility(v)) if v.name() == "sigma_curvature_positive"));
    }

    #[test]
    fn sigma_negative_inside_is_rejected(shift in 1i64..=4, k in 1i64..=3) {
        // 1 − s² is negative on (1, 1 + shift)
        let res = Family::new(
            Polynomial::from_ints(&[1, 0, -1]),
            Polynomial::from_ints(&[0, -k]),
            Interval::finite(int(1), int(1 + shift)),
        );
        prop_assert!(matches!(res, Err(Error::Admissibility(v)) if v.name() == "sigma_non_positive"));
    }
}
