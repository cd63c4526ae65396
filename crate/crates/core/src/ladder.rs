//! Associated special functions `Φ_{l,m} = κ^m Φ_l^{(m)}` and the first-order
//! operators that move along a fixed `l`:
//!
//! ```text
//! A_m  = κ d/ds − mκ′                      A_m Φ_{l,m}     = Φ_{l,m+1}
//! A_m⁺ = −κ d/ds − τ/κ − (m−1)κ′            A_m⁺ Φ_{l,m+1}  = (λ_l − λ_m) Φ_{l,m}
//! H_m  = A_m⁺ A_m + λ_m                    H_m Φ_{l,m}     = λ_l Φ_{l,m}
//! ```
//!
//! On `P·σ^{k/2}` both operators reduce to polynomial formulas, so every
//! identity here is checked as an exact polynomial equality.

use num_traits::One;

use crate::error::{Error, Result};
use crate::exactpoly::{int, to_f64, HalfPowerFunction, Polynomial, Rational};
use crate::family::Family;

/// `Φ_{l,m}` together with its indices.
#[derive(Clone, Debug)]
pub struct AssociatedFunction {
    pub l: usize,
    pub m: usize,
    pub value: HalfPowerFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Raise,
    Lower,
}

/// `A_m` (raise) or `A_m⁺` (lower) bound to a family.
#[derive(Clone, Copy, Debug)]
pub struct LadderOperator<'a> {
    pub family: &'a Family,
    pub m: usize,
    pub direction: Direction,
}

impl LadderOperator<'_> {
    pub fn apply(&self, u: &HalfPowerFunction) -> Result<HalfPowerFunction> {
        match self.direction {
            Direction::Raise => apply_a(self.family, self.m, u),
            Direction::Lower => apply_a_plus(self.family, self.m, u),
        }
    }
}

fn check_triangle(l: usize, m: usize) -> Result<()> {
    if m > l {
        return Err(Error::IndexRange(format!("m = {m} exceeds l = {l}")));
    }
    Ok(())
}

fn expect_halfpower(u: &HalfPowerFunction, k: usize) -> Result<()> {
    if u.halfpower as usize != k {
        return Err(Error::HalfPowerMismatch {
            expected: k as u32,
            found: u.halfpower,
        });
    }
    Ok(())
}

fn check_family(f: &Family, u: &HalfPowerFunction) -> Result<()> {
    if &u.sigma != f.sigma() {
        return Err(Error::SigmaMismatch);
    }
    Ok(())
}

pub fn associated_function(f: &Family, l: usize, m: usize) -> Result<AssociatedFunction> {
    check_triangle(l, m)?;
    let poly = f.classical_polynomial(l).nth_derivative(m);
    Ok(AssociatedFunction {
        l,
        m,
        value: f.hp(poly, m as u32),
    })
}

/// `A_m(P·σ^{m/2}) = P′·σ^{(m+1)/2}`.
pub fn apply_a(f: &Family, m: usize, u: &HalfPowerFunction) -> Result<HalfPowerFunction> {
    check_family(f, u)?;
    if u.is_zero() {
        return Ok(f.hp(Polynomial::zero(), m as u32 + 1));
    }
    expect_halfpower(u, m)?;
    Ok(f.hp(u.poly.derivative(), m as u32 + 1))
}

/// `A_m⁺(Q·σ^{(m+1)/2}) = (−σQ′ − τQ − mσ′Q)·σ^{m/2}`.
pub fn apply_a_plus(f: &Family, m: usize, u: &HalfPowerFunction) -> Result<HalfPowerFunction> {
    check_family(f, u)?;
    if u.is_zero() {
        return Ok(f.hp(Polynomial::zero(), m as u32));
    }
    expect_halfpower(u, m + 1)?;
    let q = &u.poly;
    let sigma = f.sigma();
    let dsigma = sigma.derivative().scale(&int(m as i64));
    let poly = -(&(&(sigma * &q.derivative()) + &(f.tau() * q)) + &(&dsigma * q));
    Ok(f.hp(poly, m as u32))
}

/// `H_m u = A_m⁺ A_m u + λ_m u`.
pub fn apply_h(f: &Family, m: usize, u: &HalfPowerFunction) -> Result<HalfPowerFunction> {
    check_family(f, u)?;
    if u.is_zero() {
        return Ok(f.hp(Polynomial::zero(), m as u32));
    }
    expect_halfpower(u, m)?;
    let down = apply_a_plus(f, m, &apply_a(f, m, u)?)?;
    down.add(&u.scale(&f.eigenvalue(m)))
}

/// Value of the explicit second-order `H_m u` at `s`, together with the sum of
/// the magnitudes of its terms (a natural scale for relative comparisons).
pub fn explicit_h(f: &Family, m: usize, u: &HalfPowerFunction, s: f64) -> (f64, f64) {
    let sigma = f.sigma();
    let sg = sigma.eval_f64(s);
    let dsg = sigma.derivative().eval_f64(s);
    let ddsg = to_f64(&f.sigma_second());
    let tau = f.tau().eval_f64(s);
    let dtau = to_f64(&f.tau_prime());

    let k = f64::from(u.halfpower) / 2.0;
    let g = sg.powf(k);
    let dg = k * dsg * sg.powf(k - 1.0);
    let ddg = k * (k - 1.0) * dsg * dsg * sg.powf(k - 2.0) + k * ddsg * sg.powf(k - 1.0);
    let p = u.poly.to_float().eval(s);
    let dp = u.poly.derivative().to_float().eval(s);
    let ddp = u.poly.nth_derivative(2).to_float().eval(s);
    let val = p * g;
    let d1 = dp * g + p * dg;
    let d2 = ddp * g + 2.0 * dp * dg + p * ddg;

    let mf = m as f64;
    let potential = mf * (mf - 2.0) / 4.0 * dsg * dsg / sg + mf * tau * dsg / (2.0 * sg)
        - 0.5 * mf * (mf - 2.0) * ddsg
        - mf * dtau;
    let terms = [-sg * d2, -tau * d1, potential * val];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Largest relative discrepancy between the factorized `apply_h` and the
/// explicit differential expression, over interior nodes of a Gauss rule.
pub fn h_cross_check(f: &Family, m: usize, u: &HalfPowerFunction) -> Result<f64> {
    let hu = apply_h(f, m, u)?;
    let rule = f.gauss_rule(8)?;
    let mut worst: f64 = 0.0;
    for &s in &rule.nodes {
        let (explicit, scale) = explicit_h(f, m, u, s);
        let factorized = hu.eval_f64(s);
        let denom = scale.max(factorized.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((explicit - factorized).abs() / denom);
    }
    Ok(worst)
}

/// Left-hand side of the three-term relation
/// `Φ_{l,m+1} + (τ/κ + 2(m−1)κ′)Φ_{l,m} + (λ_l − λ_{m−1})Φ_{l,m−1}`, which must be
/// the zero function. For `m = l` the first term is absent.
pub fn three_term_check(f: &Family, l: usize, m: usize) -> Result<HalfPowerFunction> {
    if m == 0 || m > l {
        return Err(Error::IndexRange(format!(
            "three-term relation needs 1 <= m <= l, got l = {l}, m = {m}"
        )));
    }
    let phi = f.classical_polynomial(l);
    let upper = f.hp(phi.nth_derivative(m + 1), m as u32 + 1);
    let p = phi.nth_derivative(m);
    let middle_poly = &(f.tau() * &p) + &(&f.sigma().derivative().scale(&int(m as i64 - 1)) * &p);
    let middle = f.hp(middle_poly, m as u32 - 1);
    let gap = f.eigenvalue(l) - f.eigenvalue(m - 1);
    let lower = f.hp(phi.nth_derivative(m - 1).scale(&gap), m as u32 - 1);
    upper.add(&middle)?.add(&lower)
}

/// `Π_{j<m}(λ_l − λ_j)`.
pub fn norm_factor(f: &Family, l: usize, m: usize) -> Rational {
    let ll = f.eigenvalue(l);
    (0..m).fold(Rational::one(), |acc, j| acc * (&ll - f.eigenvalue(j)))
}

/// `‖Φ_{l,m}‖² = Π_{j<m}(λ_l − λ_j)·‖Φ_{l,0}‖²`, base norm by quadrature.
pub fn norm_squared(f: &Family, l: usize, m: usize) -> Result<f64> {
    check_triangle(l, m)?;
    let base = associated_function(f, l, 0)?.value;
    let base_norm = f.inner_product(&base, &base)?;
    Ok(to_f64(&norm_factor(f, l, m)) * base_norm)
}

/// `⟨Φ_{l,m}, Φ_{l,m}⟩` by direct quadrature.
pub fn norm_squared_direct(f: &Family, l: usize, m: usize) -> Result<f64> {
    let u = associated_function(f, l, m)?.value;
    f.inner_product(&u, &u)
}

/// `(A_mΦ_{l,m} = Φ_{l,m+1}, A_m⁺Φ_{l,m+1} = (λ_l − λ_m)Φ_{l,m})`.
pub fn ladder_check(f: &Family, l: usize, m: usize) -> Result<(bool, bool)> {
    if m >= l {
        return Err(Error::IndexRange(format!("ladder step needs m < l, got l = {l}, m = {m}")));
    }
    let lower = associated_function(f, l, m)?.value;
    let upper = associated_function(f, l, m + 1)?.value;
    let gap = f.eigenvalue(l) - f.eigenvalue(m);
    let raise_ok = apply_a(f, m, &lower)?.hp_equal(&upper)?;
    let lower_ok = apply_a_plus(f, m, &upper)?.hp_equal(&lower.scale(&gap))?;
    Ok((raise_ok, lower_ok))
}

/// `(A_m⁺A_mΦ_{l,m} = (λ_l−λ_m)Φ_{l,m}, A_mA_m⁺Φ_{l,m+1} = (λ_l−λ_m)Φ_{l,m+1})`.
pub fn factorization_check(f: &Family, l: usize, m: usize) -> Result<(bool, bool)> {
    if m >= l {
        return Err(Error::IndexRange(format!("factorization needs m < l, got l = {l}, m = {m}")));
    }
    let lower = associated_function(f, l, m)?.value;
    let upper = associated_function(f, l, m + 1)?.value;
    let gap = f.eigenvalue(l) - f.eigenvalue(m);
    let first = apply_a_plus(f, m, &apply_a(f, m, &lower)?)?.hp_equal(&lower.scale(&gap))?;
    let second = apply_a(f, m, &apply_a_plus(f, m, &upper)?)?.hp_equal(&upper.scale(&gap))?;
    Ok((first, second))
}

/// `(H_mA_m⁺ = A_m⁺H_{m+1}` on Φ_{l,m+1}, `A_mH_m = H_{m+1}A_m` on Φ_{l,m})`.
pub fn intertwining_check(f: &Family, l: usize, m: usize) -> Result<(bool, bool)> {
    if m >= l {
        return Err(Error::IndexRange(format!("intertwining needs m < l, got l = {l}, m = {m}")));
    }
    let lower = associated_function(f, l, m)?.value;
    let upper = associated_function(f, l, m + 1)?.value;
    let lhs1 = apply_h(f, m, &apply_a_plus(f, m, &upper)?)?;
    let rhs1 = apply_a_plus(f, m, &apply_h(f, m + 1, &upper)?)?;
    let lhs2 = apply_a(f, m, &apply_h(f, m, &lower)?)?;
    let rhs2 = apply_h(f, m + 1, &apply_a(f, m, &lower)?)?;
    Ok((lhs1.hp_equal(&rhs1)?, lhs2.hp_equal(&rhs2)?))
}

/// `H_mΦ_{l,m} = λ_lΦ_{l,m}`.
pub fn eigen_check(f: &Family, l: usize, m: usize) -> Result<bool> {
    let u = associated_function(f, l, m)?.value;
    apply_h(f, m, &u)?.hp_equal(&u.scale(&f.eigenvalue(l)))
}

/// `|⟨A_m u, v⟩ − ⟨u, A_m⁺ v⟩|` and the tolerance scale `‖u‖‖v‖ + 1`.
pub fn adjointness_gap(
    f: &Family,
    m: usize,
    u: &HalfPowerFunction,
    v: &HalfPowerFunction,
) -> Result<(f64, f64)> {
    let left = f.inner_product(&apply_a(f, m, u)?, v)?;
    let right = f.inner_product(u, &apply_a_plus(f, m, v)?)?;
    let scale = (f.inner_product(u, u)? * f.inner_product(v, v)?).sqrt() + 1.0;
    Ok(((left - right).abs(), scale))
}

/// `l!`, the constant polynomial part of `Φ_{l,l}`.
pub fn factorial(l: usize) -> Rational {
    (1..=l).fold(Rational::one(), |acc, k| acc * int(k as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rat;

    fn presets() -> Vec<Family> {
        vec![
            Family::legendre(),
            Family::jacobi(rat(1, 2), rat(1, 2)).unwrap(),
            Family::jacobi(rat(3, 2), rat(3, 2)).unwrap(),
            Family::laguerre(int(0)).unwrap(),
            Family::hermite(),
        ]
    }

    #[test]
    fn associated_function_examples() {
        let leg = Family::legendre();
        let f21 = associated_function(&leg, 2, 1).unwrap().value;
        assert_eq!(f21.poly, Polynomial::from_ints(&[0, 2]));
        assert_eq!(f21.halfpower, 1);
        for f in presets() {
            for l in 0..6 {
                let top = associated_function(&f, l, l).unwrap().value;
                assert_eq!(top.poly, Polynomial::constant(factorial(l)));
                let bottom = associated_function(&f, l, 0).unwrap().value;
                assert_eq!(bottom.poly, f.classical_polynomial(l));
            }
        }
        assert!(matches!(associated_function(&leg, 2, 3), Err(Error::IndexRange(_))));
    }

    #[test]
    fn raising_examples() {
        let leg = Family::legendre();
        let phi20 = associated_function(&leg, 2, 0).unwrap().value;
        let out = apply_a(&leg, 0, &phi20).unwrap();
        assert!(out.hp_equal(&associated_function(&leg, 2, 1).unwrap().value).unwrap());
        let phi33 = associated_function(&leg, 3, 3).unwrap().value;
        assert!(apply_a(&leg, 3, &phi33).unwrap().is_zero());
        let phi10 = associated_function(&leg, 1, 0).unwrap().value;
        let kappa = apply_a(&leg, 0, &phi10).unwrap();
        assert_eq!((kappa.poly.clone(), kappa.halfpower), (Polynomial::one(), 1));
        assert!(matches!(
            apply_a(&leg, 1, &phi10),
            Err(Error::HalfPowerMismatch { expected: 1, found: 0 })
        ));
    }

    #[test]
    fn lowering_examples() {
        let leg = Family::legendre();
        let kappa = leg.hp(Polynomial::one(), 1);
        let out = apply_a_plus(&leg, 0, &kappa).unwrap();
        assert_eq!(out.poly, Polynomial::from_ints(&[0, 2]));
        let phi22 = associated_function(&leg, 2, 2).unwrap().value;
        let phi21 = associated_function(&leg, 2, 1).unwrap().value;
        let gap = leg.eigenvalue(2) - leg.eigenvalue(1);
        assert!(apply_a_plus(&leg, 1, &phi22).unwrap().hp_equal(&phi21.scale(&gap)).unwrap());
        assert!(apply_a_plus(&leg, 4, &leg.hp(Polynomial::zero(), 5)).unwrap().is_zero());
    }

    #[test]
    fn hamiltonian_examples() {
        for f in presets() {
            for l in 0..=10 {
                for m in 0..=l {
                    assert!(eigen_check(&f, l, m).unwrap(), "{} l={l} m={m}", f.label());
                }
            }
        }
        let leg = Family::legendre();
        let phi2 = associated_function(&leg, 2, 0).unwrap().value;
        assert!(apply_h(&leg, 0, &phi2).unwrap().hp_equal(&phi2.scale(&int(6))).unwrap());
    }

    #[test]
    fn explicit_h_agrees_with_factorized_form() {
        for f in presets() {
            for l in 0..=6 {
                for m in 0..=l {
                    let u = associated_function(&f, l, m).unwrap().value;
                    let gap = h_cross_check(&f, m, &u).unwrap();
                    assert!(gap <= 1e-10, "{} l={l} m={m} gap={gap:e}", f.label());
                }
            }
            // and on a function that is not an eigenfunction
            let u = f.hp(Polynomial::from_ints(&[1, -2, 3]), 1);
            assert!(h_cross_check(&f, 1, &u).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn three_term_examples() {
        let leg = Family::legendre();
        assert!(three_term_check(&leg, 3, 1).unwrap().is_zero());
        assert!(three_term_check(&leg, 1, 1).unwrap().is_zero());
        let jac = Family::jacobi(rat(1, 2), rat(1, 2)).unwrap();
        assert!(three_term_check(&jac, 4, 2).unwrap().is_zero());
        assert!(three_term_check(&leg, 3, 0).is_err());
        assert!(three_term_check(&leg, 3, 4).is_err());
    }

    #[test]
    fn norm_examples() {
        let leg = Family::legendre();
        assert!((norm_squared(&leg, 1, 0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((norm_squared(&leg, 1, 1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((norm_squared(&leg, 0, 0).unwrap() - leg.zeroth_moment()).abs() < 1e-15);
        let ratio = norm_squared(&leg, 2, 1).unwrap() / norm_squared(&leg, 2, 0).unwrap();
        assert!((ratio - 6.0).abs() < 1e-13);
    }

    #[test]
    fn intertwining_examples() {
        let leg = Family::legendre();
        assert_eq!(intertwining_check(&leg, 3, 1).unwrap(), (true, true));
        assert_eq!(intertwining_check(&leg, 2, 1).unwrap(), (true, true));
        let lag = Family::laguerre(int(0)).unwrap();
        assert_eq!(intertwining_check(&lag, 4, 2).unwrap(), (true, true));
    }

    #[test]
    fn ladder_operator_dispatch() {
        let leg = Family::legendre();
        let phi = associated_function(&leg, 3, 1).unwrap().value;
        let up = LadderOperator { family: &leg, m: 1, direction: Direction::Raise };
        let down = LadderOperator { family: &leg, m: 1, direction: Direction::Lower };
        let round = down.apply(&up.apply(&phi).unwrap()).unwrap();
        let gap = leg.eigenvalue(3) - leg.eigenvalue(1);
        assert!(round.hp_equal(&phi.scale(&gap)).unwrap());
    }

    #[test]
    fn operators_reject_foreign_sigma() {
        let leg = Family::legendre();
        let her = Family::hermite();
        let u = her.hp(Polynomial::one(), 0);
        assert!(matches!(apply_a(&leg, 0, &u), Err(Error::SigmaMismatch)));
    }
}
