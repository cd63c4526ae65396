//! Normalized states `|n⟩ = |m+n, m⟩`, the creation/annihilation pair
//! `a_m`, `a_m⁺`, the unitary shift `U_m`, and coherent states.
//!
//! With `e_n = λ_{m+n} − λ_m` and `ε_n = e₁⋯e_n`:
//!
//! ```text
//! a_m |n⟩ = √e_n |n−1⟩      a_m⁺ |n⟩ = √e_{n+1} |n+1⟩      a_m⁺a_m |n⟩ = e_n |n⟩
//! |z⟩ = N(|z|²)⁻¹ Σ zⁿ/√ε_n |n⟩,   N(|z|²)² = Σ |z|²ⁿ/ε_n
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactpoly::{int, to_f64, Rational};
use crate::family::{Endpoint, Family};
use crate::ladder::{associated_function, norm_squared};

/// `|l, m⟩` inside the triangle `0 ≤ m ≤ l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateLabel {
    pub l: usize,
    pub m: usize,
}

impl StateLabel {
    pub fn new(l: usize, m: usize) -> Result<Self> {
        if m > l {
            return Err(Error::IndexRange(format!("|{l},{m}> lies outside l >= m")));
        }
        Ok(Self { l, m })
    }
}

/// Finite combination `Σ c_n |m+n, m⟩` at a fixed `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub m: usize,
    pub coeffs: BTreeMap<usize, Complex64>,
}

impl FockVector {
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            coeffs: BTreeMap::new(),
        }
    }

    /// `|n⟩ = |m+n, m⟩`.
    pub fn basis(m: usize, n: usize) -> Self {
        let mut v = Self::zero(m);
        v.coeffs.insert(n, Complex64::one());
        v
    }

    pub fn from_label(label: StateLabel) -> Self {
        Self::basis(label.m, label.l - label.m)
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `⟨self, other⟩`, antilinear in the first slot.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_m(other)?;
        Ok(self
            .coeffs
            .iter()
            .map(|(n, c)| c.conj() * other.get(*n))
            .sum())
    }

    fn same_m(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::Domain(format!(
                "vectors live in different ladders (m = {} vs {})",
                self.m, other.m
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            m: self.m,
            coeffs: self.coeffs.iter().map(|(n, v)| (*n, v * c)).collect(),
        }
    }

    /// `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_m(other)?;
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            *out.coeffs.entry(*n).or_default() -= c;
        }
        Ok(out)
    }

    /// JSON map `n → [re, im]`.
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(n, c)| (n.to_string(), json!([c.re, c.im])))
            .collect();
        json!({"m": self.m, "coeffs": map})
    }
}

/// Exact ladder energies `e_n` and products `ε_n` at a fixed `m`.
#[derive(Clone, Debug)]
pub struct EnergyLadder {
    pub m: usize,
    lambda_m: Rational,
    sigma2: Rational,
    tau1: Rational,
}

impl EnergyLadder {
    pub fn new(f: &Family, m: usize) -> Self {
        Self {
            m,
            lambda_m: f.eigenvalue(m),
            sigma2: f.sigma().coeff(2),
            tau1: f.tau().coeff(1),
        }
    }

    fn lambda(&self, j: usize) -> Rational {
        let j = int(j as i64);
        -(&j * (&j - int(1)) * &self.sigma2) - &j * &self.tau1
    }

    /// `e_n = λ_{m+n} − λ_m`.
    pub fn e(&self, n: usize) -> Rational {
        self.lambda(self.m + n) - &self.lambda_m
    }

    /// `ε_n = e₁⋯e_n`, `ε₀ = 1`.
    pub fn eps(&self, n: usize) -> Rational {
        (1..=n).fold(Rational::one(), |acc, k| acc * self.e(k))
    }

    fn sqrt_e(&self, n: usize) -> f64 {
        to_f64(&self.e(n)).sqrt()
    }
}

/// Exact action of a ladder word on a basis vector: the target index (or
/// annihilation) and the squared amplitude.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAction {
    pub target: Option<usize>,
    pub amplitude_sq: Rational,
}

impl ExactAction {
    pub fn identity(n: usize) -> Self {
        Self {
            target: Some(n),
            amplitude_sq: Rational::one(),
        }
    }

    pub fn lower(self, ladder: &EnergyLadder) -> Self {
        match self.target {
            Some(n) if n > 0 => Self {
                target: Some(n - 1),
                amplitude_sq: self.amplitude_sq * ladder.e(n),
            },
            _ => Self {
                target: None,
                amplitude_sq: Rational::zero(),
            },
        }
    }

    pub fn raise(self, ladder: &EnergyLadder) -> Self {
        match self.target {
            Some(n) => Self {
                target: Some(n + 1),
                amplitude_sq: self.amplitude_sq * ladder.e(n + 1),
            },
            None => self,
        }
    }
}

/// `a_m`: `c_n |n⟩ ↦ √e_n c_n |n−1⟩`.
pub fn a_lower(f: &Family, v: &FockVector) -> FockVector {
    let ladder = EnergyLadder::new(f, v.m);
    let mut out = FockVector::zero(v.m);
    for (&n, c) in &v.coeffs {
        if n > 0 {
            out.coeffs.insert(n - 1, c * ladder.sqrt_e(n));
        }
    }
    out
}

/// `a_m⁺`: `c_n |n⟩ ↦ √e_{n+1} c_n |n+1⟩`.
pub fn a_raise(f: &Family, v: &FockVector) -> FockVector {
    let ladder = EnergyLadder::new(f, v.m);
    v.coeffs
        .iter()
        .fold(FockVector::zero(v.m), |mut out, (&n, c)| {
            out.coeffs.insert(n + 1, c * ladder.sqrt_e(n + 1));
            out
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shift {
    Up,
    Down,
}

/// `U_m |l,m⟩ = |l+1,m+1⟩` (up) and its inverse (down). In the `|n⟩` labels
/// the coefficients are unchanged and only `m` moves.
pub fn shift_u(v: &FockVector, direction: Shift) -> Result<FockVector> {
    let m = match direction {
        Shift::Up => v.m + 1,
        Shift::Down => v
            .m
            .checked_sub(1)
            .ok_or_else(|| Error::IndexRange("U⁺ would leave the triangle (m = 0)".into()))?,
    };
    Ok(FockVector {
        m,
        coeffs: v.coeffs.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    Su11,
    HeisenbergWeyl,
}

impl std::fmt::Display for Algebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algebra::Su11 => "su(1,1)",
            Algebra::HeisenbergWeyl => "h(2)",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub algebra: Algebra,
    /// `e_{n+1} − e_n` for n = 0..=20, i.e. the spectrum of `[a_m, a_m⁺]`.
    pub first_differences: Vec<Rational>,
    /// The commutator signature (constant vs. affine with nonzero slope)
    /// agrees with the σ″ sign test.
    pub signature_consistent: bool,
}

pub fn classify_algebra(f: &Family) -> Classification {
    classify_algebra_at(f, 0)
}

pub fn classify_algebra_at(f: &Family, m: usize) -> Classification {
    let algebra = if f.sigma_second().is_negative() {
        Algebra::Su11
    } else {
        Algebra::HeisenbergWeyl
    };
    let ladder = EnergyLadder::new(f, m);
    let first: Vec<Rational> = (0..=20).map(|n| ladder.e(n + 1) - ladder.e(n)).collect();
    let second: Vec<Rational> = first.windows(2).map(|w| &w[1] - &w[0]).collect();
    let constant = second.iter().all(Zero::is_zero);
    let affine = second.windows(2).all(|w| w[0] == w[1]) && !second[0].is_zero();
    let signature_consistent = match algebra {
        Algebra::HeisenbergWeyl => constant,
        Algebra::Su11 => affine,
    };
    Classification {
        algebra,
        first_differences: first,
        signature_consistent,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    Infinite,
    Estimate(f64),
}

#[derive(Clone, Debug)]
pub struct RadiusReport {
    pub radius: Radius,
    /// `ε_n^{1/n}` for n = 1..=n_max.
    pub diagnostics: Vec<f64>,
}

/// `R = limsup ε_n^{1/n}`. Reported as infinite whenever `e_n` grows without
/// bound, which the linear lower bound `e_n ≥ −nτ′` guarantees for admissible
/// families.
pub fn convergence_radius(f: &Family, m: usize, n_max: usize) -> Result<RadiusReport> {
    if n_max < 2 {
        return Err(Error::Domain("convergence diagnostics need n_max >= 2".into()));
    }
    let ladder = EnergyLadder::new(f, m);
    let mut log_eps = 0.0;
    let mut diagnostics = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        log_eps += to_f64(&ladder.e(n)).ln();
        diagnostics.push((log_eps / n as f64).exp());
    }
    let radius = if f.tau_prime().is_negative() && !f.sigma_second().is_positive() {
        Radius::Infinite
    } else {
        Radius::Estimate(*diagnostics.last().unwrap())
    };
    Ok(RadiusReport {
        radius,
        diagnostics,
    })
}

/// Truncated, self-normalized coherent state.
#[derive(Clone, Debug)]
pub struct CoherentState {
    pub m: usize,
    pub z: Complex64,
    pub truncation: usize,
    /// `c_n` for n = 0..=truncation.
    pub coeffs: Vec<Complex64>,
    /// `N(|z|²)` from the truncated series.
    pub normalizer: f64,
    pub normalizer_squared: f64,
    /// `‖a_m|z⟩ − z|z⟩‖`, equal to `|z|·|c_N|` up to rounding.
    pub residual: f64,
}

impl CoherentState {
    pub fn to_fock(&self) -> FockVector {
        FockVector {
            m: self.m,
            coeffs: self.coeffs.iter().copied().enumerate().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "z": [self.z.re, self.z.im],
            "truncation": self.truncation,
            "normalizer": self.normalizer,
            "normalizer_squared": self.normalizer_squared,
            "residual": self.residual,
            "state": self.to_fock().to_json(),
        })
    }
}

pub fn coherent_state(f: &Family, m: usize, z: Complex64, truncation: usize) -> Result<CoherentState> {
    if truncation < 1 {
        return Err(Error::Domain("coherent-state truncation must be >= 1".into()));
    }
    let ladder = EnergyLadder::new(f, m);
    // zⁿ/√ε_n by ratios, never forming ε_n itself
    let mut terms = Vec::with_capacity(truncation + 1);
    let mut t = Complex64::one();
    terms.push(t);
    for n in 1..=truncation {
        t = t * z / ladder.sqrt_e(n);
        terms.push(t);
    }
    let normalizer_squared: f64 = terms.iter().map(|c| c.norm_sqr()).sum();
    let normalizer = normalizer_squared.sqrt();
    let coeffs: Vec<Complex64> = terms.iter().map(|c| c / normalizer).collect();
    let mut cs = CoherentState {
        m,
        z,
        truncation,
        coeffs,
        normalizer,
        normalizer_squared,
        residual: 0.0,
    };
    let v = cs.to_fock();
    cs.residual = a_lower(f, &v).sub(&v.scale(z))?.norm();
    Ok(cs)
}

/// Interior sample grid of `n` points: midpoints for finite intervals, and the
/// span of a 40-point Gauss rule on infinite sides.
pub fn sample_grid(f: &Family, n: usize) -> Result<Vec<f64>> {
    let rule = f.gauss_rule(40)?;
    let lo = match &f.interval().a {
        Endpoint::Finite(r) => to_f64(r),
        _ => rule.nodes[0],
    };
    let hi = match &f.interval().b {
        Endpoint::Finite(r) => to_f64(r),
        _ => *rule.nodes.last().unwrap(),
    };
    Ok((0..n)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
        .collect())
}

/// `Σ c_n Φ_{m+n,m}(s)/‖Φ_{m+n,m}‖` at each point of `grid`.
pub fn coherent_profile(cs: &CoherentState, f: &Family, grid: &[f64]) -> Result<Vec<Complex64>> {
    let basis = normalized_basis(f, cs.m, cs.truncation)?;
    Ok(grid
        .iter()
        .map(|&s| {
            cs.coeffs
                .iter()
                .zip(&basis)
                .map(|(c, (poly, inv_norm))| c * (poly.eval(s) * inv_norm))
                .sum::<Complex64>()
                * f.sigma().eval_f64(s).powf(cs.m as f64 / 2.0)
        })
        .collect())
}

/// `∫ |profile|² ρ ds` by a Gauss rule exact for the truncated expansion.
pub fn coherent_profile_norm_squared(cs: &CoherentState, f: &Family) -> Result<f64> {
    let basis = normalized_basis(f, cs.m, cs.truncation)?;
    let ds = f.sigma().degree().unwrap_or(0);
    let degree = 2 * cs.truncation + ds * cs.m;
    let rule = f.gauss_rule(degree / 2 + 1)?;
    let sp = f.sigma().to_float();
    Ok(rule.integrate(|s| {
        let v: Complex64 = cs
            .coeffs
            .iter()
            .zip(&basis)
            .map(|(c, (poly, inv_norm))| c * (poly.eval(s) * inv_norm))
            .sum();
        v.norm_sqr() * sp.eval(s).powi(cs.m as i32)
    }))
}

fn normalized_basis(
    f: &Family,
    m: usize,
    truncation: usize,
) -> Result<Vec<(crate::exactpoly::FloatPoly, f64)>> {
    (0..=truncation)
        .map(|n| {
            let phi = associated_function(f, m + n, m)?.value;
            let norm = norm_squared(f, m + n, m)?.sqrt();
            Ok((phi.poly.to_float(), 1.0 / norm))
        })
        .collect()
}
