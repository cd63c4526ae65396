use hyperladder::exactpoly::{int, rat, to_f64};
use hyperladder::fockalg::{
    a_lower, a_raise, coherent_profile_norm_squared, coherent_state, EnergyLadder, FockVector,
};
use hyperladder::ladder::norm_squared_direct;
use hyperladder::Family;
use num_complex::Complex64;

fn presets() -> Vec<Family> {
    vec![
        Family::legendre(),
        Family::hermite(),
        Family::laguerre(rat(1, 2)).unwrap(),
        Family::jacobi(rat(-1, 2), rat(3, 2)).unwrap(),
    ]
}

#[test]
fn energy_gaps_are_norm_ratios() {
    // ‖Φ_{m+n,m+1}‖² / ‖Φ_{m+n,m}‖² = λ_{m+n} − λ_m, both sides by quadrature
    for f in presets() {
        for m in 0..3 {
            let ladder = EnergyLadder::new(&f, m);
            for n in 1..8 {
                let ratio = norm_squared_direct(&f, m + n, m + 1).unwrap()
                    / norm_squared_direct(&f, m + n, m).unwrap();
                let e = to_f64(&ladder.e(n));
                assert!((ratio - e).abs() <= 1e-11 * e, "{} m={m} n={n}: {ratio} vs {e}", f.label());
            }
        }
    }
}

#[test]
fn number_operator_and_commutator_on_basis() {
    for f in presets() {
        let ladder = EnergyLadder::new(&f, 1);
        for n in 0..15 {
            let v = FockVector::basis(1, n);
            let number = a_raise(&f, &a_lower(&f, &v));
            let expected = to_f64(&ladder.e(n));
            assert!((number.get(n).re - expected).abs() <= 1e-12 * (1.0 + expected));
            let comm = a_lower(&f, &a_raise(&f, &v)).sub(&number).unwrap();
            let gap = to_f64(&(ladder.e(n + 1) - if n == 0 { int(0) } else { ladder.e(n) }));
            assert!((comm.get(n).re - gap).abs() <= 1e-10 * (1.0 + gap.abs()));
            assert_eq!(comm.coeffs.len(), 1);
        }
    }
}

#[test]
fn coherent_state_profile_is_normalized_in_function_space() {
    for f in presets() {
        for z in [Complex64::new(0.5, 0.0), Complex64::new(0.3, -0.8)] {
            let cs = coherent_state(&f, 1, z, 30).unwrap();
            let norm = coherent_profile_norm_squared(&cs, &f).unwrap();
            assert!((norm - 1.0).abs() <= 1e-10, "{}: {norm}", f.label());
            let eigen = a_lower(&f, &cs.to_fock()).sub(&cs.to_fock().scale(z)).unwrap();
            assert!(eigen.norm() <= 1e-8);
        }
    }
}

#[test]
fn oscillator_coherent_normalizer_is_gaussian() {
    let f = Family::hermite();
    let e1 = to_f64(&EnergyLadder::new(&f, 0).e(1));
    for r in [0.25, 1.0, 2.0] {
        let cs = coherent_state(&f, 0, Complex64::new(r, 0.0), 80).unwrap();
        let expected = (r * r / e1).exp();
        assert!((cs.normalizer_squared - expected).abs() <= 1e-12 * expected);
    }
}
