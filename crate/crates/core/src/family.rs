//! Hypergeometric-type families `σy″ + τy′ + λy = 0` on an interval `(a, b)`.
//!
//! A [`Family`] is only constructed through [`Family::new`], which enforces
//! admissibility (deg σ ≤ 2, deg τ ≤ 1, τ′ < 0, σ″ ≤ 0, σ > 0 inside, and the
//! vanishing of `σρsᵏ` at both ends). The weight is obtained in closed form by
//! partial fractions of `(τ − σ′)/σ`, so only σ with rational roots is supported.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::Value;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result, Violation};
use crate::exactpoly::{
    format_rational, int, parse_rational, rat, rational_from_json, to_f64, HalfPowerFunction,
    Polynomial, Rational,
};
use crate::output::format_float;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Endpoint {
    pub fn parse(field: &str, text: &str) -> Result<Self> {
        match text.trim() {
            "-inf" | "-infinity" | "-∞" => Ok(Endpoint::NegInf),
            "inf" | "+inf" | "infinity" | "∞" => Ok(Endpoint::PosInf),
            t => parse_rational(t)
                .map(Endpoint::Finite)
                .map_err(|e| Error::parse(field, e.to_string())),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::PosInf => f64::INFINITY,
            Endpoint::Finite(r) => to_f64(r),
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Endpoint::Finite(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "inf"),
            Endpoint::Finite(r) => write!(f, "{}", format_rational(r)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub a: Endpoint,
    pub b: Endpoint,
}

impl Interval {
    pub fn new(a: Endpoint, b: Endpoint) -> Self {
        Self { a, b }
    }

    pub fn finite(a: Rational, b: Rational) -> Self {
        Self::new(Endpoint::Finite(a), Endpoint::Finite(b))
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.a.to_f64() && s < self.b.to_f64()
    }

    fn is_nonempty(&self) -> bool {
        match (&self.a, &self.b) {
            (Endpoint::PosInf, _) | (_, Endpoint::NegInf) => false,
            (Endpoint::Finite(a), Endpoint::Finite(b)) => a < b,
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    JacobiLike,
    LaguerreLike,
    HermiteLike,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassTag::JacobiLike => "jacobi_like",
            ClassTag::LaguerreLike => "laguerre_like",
            ClassTag::HermiteLike => "hermite_like",
        })
    }
}

/// `ρ(s) = normalization · e^{q(s)} · Π |s − r|^γ`.
#[derive(Clone, Debug)]
pub struct WeightDescriptor {
    pub exp_poly: Polynomial,
    pub root_factors: Vec<(Rational, Rational)>,
    pub normalization: f64,
}

impl WeightDescriptor {
    pub fn ln_eval(&self, s: f64) -> f64 {
        let mut acc = self.exp_poly.eval_f64(s) + self.normalization.ln();
        for (r, g) in &self.root_factors {
            acc += to_f64(g) * (s - to_f64(r)).abs().ln();
        }
        acc
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.ln_eval(s).exp()
    }

    /// `ρ′/ρ`.
    pub fn log_derivative(&self, s: f64) -> f64 {
        let mut acc = self.exp_poly.derivative().eval_f64(s);
        for (r, g) in &self.root_factors {
            acc += to_f64(g) / (s - to_f64(r));
        }
        acc
    }

    pub fn closed_form(&self) -> String {
        let mut parts = Vec::new();
        for (r, g) in &self.root_factors {
            if g.is_zero() {
                continue;
            }
            let base = if r.is_zero() {
                "|s|".to_string()
            } else if r.is_negative() {
                format!("|s + {}|", format_rational(&-r))
            } else {
                format!("|s - {}|", format_rational(r))
            };
            if g.is_one() {
                parts.push(base);
            } else {
                parts.push(format!("{base}^({})", format_rational(g)));
            }
        }
        if !self.exp_poly.is_zero() {
            parts.push(format!("exp({})", self.exp_poly));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" * ")
        }
    }
}

/// Gauss rule for `∫ f ρ ds` over the family interval.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.push_str(&format!("{},{}\n", format_float(*x), format_float(*w)));
        }
        out
    }
}

/// Named families used throughout the examples and the CLI.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    Legendre,
    Jacobi { alpha: Rational, beta: Rational },
    Laguerre { alpha: Rational },
    Hermite,
    /// Jacobi with `α = μ − 1/2`, `β = η − 1/2`.
    PoschlTeller { mu: Rational, eta: Rational },
}

impl Preset {
    pub fn from_name(name: &str, params: &BTreeMap<String, Rational>) -> Result<Self> {
        let get = |key: &str| -> Result<Rational> {
            params
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(format!("params.{key}"), format!("preset `{name}` requires `{key}`")))
        };
        let allowed: &[&str] = match name {
            "legendre" | "hermite" => &[],
            "jacobi" => &["alpha", "beta"],
            "laguerre" => &["alpha"],
            "poschl-teller" | "poschl_teller" | "poeschl-teller" => &["mu", "eta"],
            other => return Err(Error::parse("preset", format!("unknown preset `{other}`"))),
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::parse(
                format!("params.{extra}"),
                format!("preset `{name}` takes no parameter `{extra}`"),
            ));
        }
        Ok(match name {
            "legendre" => Preset::Legendre,
            "hermite" => Preset::Hermite,
            "jacobi" => Preset::Jacobi {
                alpha: get("alpha")?,
                beta: get("beta")?,
            },
            "laguerre" => Preset::Laguerre {
                alpha: params.get("alpha").cloned().unwrap_or_else(Rational::zero),
            },
            _ => Preset::PoschlTeller {
                mu: get("mu")?,
                eta: get("eta")?,
            },
        })
    }

    pub fn label(&self) -> String {
        match self {
            Preset::Legendre => "legendre".into(),
            Preset::Hermite => "hermite".into(),
            Preset::Jacobi { alpha, beta } => {
                format!("jacobi({},{})", format_rational(alpha), format_rational(beta))
            }
            Preset::Laguerre { alpha } => format!("laguerre({})", format_rational(alpha)),
            Preset::PoschlTeller { mu, eta } => {
                format!("poschl-teller({},{})", format_rational(mu), format_rational(eta))
            }
        }
    }

    pub fn build(&self) -> Result<Family> {
        let one = Rational::one();
        let (sigma, tau, interval) = match self {
            Preset::Legendre => (
                Polynomial::from_ints(&[1, 0, -1]),
                Polynomial::from_ints(&[0, -2]),
                Interval::finite(int(-1), int(1)),
            ),
            Preset::Jacobi { alpha, beta } => jacobi_coefficients(alpha, beta),
            Preset::PoschlTeller { mu, eta } => {
                if !mu.is_positive() || !eta.is_positive() {
                    return Err(Error::Domain(
                        "Pöschl-Teller parameters must be positive".into(),
                    ));
                }
                let half = rat(1, 2);
                jacobi_coefficients(&(mu - &half), &(eta - &half))
            }
            Preset::Laguerre { alpha } => (
                Polynomial::s(),
                Polynomial::new(vec![alpha + &one, -one.clone()]),
                Interval::new(Endpoint::Finite(Rational::zero()), Endpoint::PosInf),
            ),
            Preset::Hermite => (
                Polynomial::one(),
                Polynomial::from_ints(&[0, -2]),
                Interval::new(Endpoint::NegInf, Endpoint::PosInf),
            ),
        };
        let mut family = Family::new(sigma, tau, interval)?;
        family.label = self.label();
        Ok(family)
    }
}

fn jacobi_coefficients(alpha: &Rational, beta: &Rational) -> (Polynomial, Polynomial, Interval) {
    // τ = β − α − (α + β + 2)s
    let tau = Polynomial::new(vec![beta - alpha, -(alpha + beta + int(2))]);
    (
        Polynomial::from_ints(&[1, 0, -1]),
        tau,
        Interval::finite(int(-1), int(1)),
    )
}

/// Validated hypergeometric-type family.
#[derive(Clone, Debug)]
pub struct Family {
    sigma: Polynomial,
    tau: Polynomial,
    interval: Interval,
    weight: WeightDescriptor,
    class_tag: ClassTag,
    label: String,
}

impl Family {
    /// Validate `(σ, τ, (a, b))` and derive the weight.
    pub fn new(sigma: Polynomial, tau: Polynomial, interval: Interval) -> Result<Self> {
        let ds = sigma.degree();
        if let Some(d) = ds.filter(|&d| d > 2) {
            return Err(Violation::SigmaDegree(d).into());
        }
        if let Some(d) = tau.degree().filter(|&d| d > 1) {
            return Err(Violation::TauDegree(d).into());
        }
        if !tau.coeff(1).is_negative() {
            return Err(Violation::TauSlopeNonNegative.into());
        }
        if sigma.coeff(2).is_positive() {
            return Err(Violation::SigmaCurvaturePositive.into());
        }
        if !interval.is_nonempty() {
            return Err(Violation::EmptyInterval.into());
        }
        if !sigma_positive_on(&sigma, &interval) {
            return Err(Violation::SigmaNonPositive.into());
        }
        let weight = derive_weight(&sigma, &tau)?;
        check_boundary(&weight, &interval)?;
        let class_tag = match ds {
            Some(2) => ClassTag::JacobiLike,
            Some(1) => ClassTag::LaguerreLike,
            _ => ClassTag::HermiteLike,
        };
        let label = format!("sigma={sigma}; tau={tau}; ({}, {})", interval.a, interval.b);
        Ok(Self {
            sigma,
            tau,
            interval,
            weight,
            class_tag,
            label,
        })
    }

    pub fn legendre() -> Self {
        Preset::Legendre.build().expect("legendre preset is admissible")
    }

    pub fn hermite() -> Self {
        Preset::Hermite.build().expect("hermite preset is admissible")
    }

    pub fn jacobi(alpha: Rational, beta: Rational) -> Result<Self> {
        Preset::Jacobi { alpha, beta }.build()
    }

    pub fn laguerre(alpha: Rational) -> Result<Self> {
        Preset::Laguerre { alpha }.build()
    }

    pub fn sigma(&self) -> &Polynomial {
        &self.sigma
    }

    pub fn tau(&self) -> &Polynomial {
        &self.tau
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn weight(&self) -> &WeightDescriptor {
        &self.weight
    }

    pub fn class_tag(&self) -> ClassTag {
        self.class_tag
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// σ″ as an exact constant.
    pub fn sigma_second(&self) -> Rational {
        self.sigma.coeff(2) * int(2)
    }

    /// τ′ as an exact constant.
    pub fn tau_prime(&self) -> Rational {
        self.tau.coeff(1)
    }

    /// `(α, β)` when σ = 1 − s² on (−1, 1), i.e. the family is a Jacobi family.
    pub fn jacobi_parameters(&self) -> Option<(Rational, Rational)> {
        if self.sigma != Polynomial::from_ints(&[1, 0, -1]) {
            return None;
        }
        // α + β = −τ₁ − 2,  β − α = τ₀
        let sum = -self.tau.coeff(1) - int(2);
        let diff = self.tau.coeff(0);
        let half = rat(1, 2);
        Some(((&sum - &diff) * &half, (&sum + &diff) * &half))
    }

    /// `λ_l = −½ l(l−1)σ″ − lτ′`.
    pub fn eigenvalue(&self, l: usize) -> Rational {
        let l = int(l as i64);
        -(&l * (&l - int(1)) * self.sigma.coeff(2)) - &l * self.tau.coeff(1)
    }

    /// Leading sub-coefficients `(c_{l−1}, c_{l−2})` of the monic Φ_l.
    fn subleading(&self, l: usize) -> (Rational, Rational) {
        let s0 = self.sigma.coeff(0);
        let s1 = self.sigma.coeff(1);
        let t0 = self.tau.coeff(0);
        let ll = self.eigenvalue(l);
        let mut c1 = Rational::zero();
        let mut c2 = Rational::zero();
        if l >= 1 {
            let j = int(l as i64 - 1);
            let num = -((&s1 * (&j + int(1)) * &j) + &t0 * (&j + int(1)));
            c1 = num / (&ll - self.eigenvalue(l - 1));
        }
        if l >= 2 {
            let j = int(l as i64 - 2);
            let num = -((&s1 * (&j + int(1)) * &j + &t0 * (&j + int(1))) * &c1)
                - &s0 * (&j + int(2)) * (&j + int(1));
            c2 = num / (&ll - self.eigenvalue(l - 2));
        }
        (c1, c2)
    }

    /// Monic degree-`l` polynomial solution of `σΦ″ + τΦ′ + λ_lΦ = 0`, from the
    /// downward coefficient recurrence.
    pub fn classical_polynomial(&self, l: usize) -> Polynomial {
        let s0 = self.sigma.coeff(0);
        let s1 = self.sigma.coeff(1);
        let t0 = self.tau.coeff(0);
        let ll = self.eigenvalue(l);
        let mut c = vec![Rational::zero(); l + 3];
        c[l] = Rational::one();
        for j in (0..l).rev() {
            let jr = int(j as i64);
            let num = -((&s1 * (&jr + int(1)) * &jr + &t0 * (&jr + int(1))) * &c[j + 1])
                - &s0 * (&jr + int(2)) * (&jr + int(1)) * &c[j + 2];
            let gap = &ll - self.eigenvalue(j);
            // admissibility makes λ strictly increasing, so gap > 0
            assert!(!gap.is_zero(), "eigenvalue collision λ_{l} = λ_{j}");
            c[j] = num / gap;
        }
        c.truncate(l + 1);
        Polynomial::new(c)
    }

    /// Monic three-term recurrence `Φ_{k+1} = (s − α_k)Φ_k − β_kΦ_{k−1}`.
    /// Returns `(α_k, β_k)`; `β_0` is reported as zero.
    pub fn recurrence(&self, k: usize) -> (Rational, Rational) {
        let (p_k, q_k) = self.subleading(k);
        let (p_next, q_next) = self.subleading(k + 1);
        let alpha = &p_k - &p_next;
        let beta = if k == 0 {
            Rational::zero()
        } else {
            &q_k - &q_next - &alpha * &p_k
        };
        (alpha, beta)
    }

    /// `∫_a^b ρ ds` from the closed-form Beta / Gamma / Gaussian integral.
    pub fn zeroth_moment(&self) -> f64 {
        let w = &self.weight;
        let norm = w.normalization;
        match self.class_tag {
            ClassTag::HermiteLike => {
                // q = q2 s² + q1 s + q0, q2 < 0
                let q0 = to_f64(&w.exp_poly.coeff(0));
                let q1 = to_f64(&w.exp_poly.coeff(1));
                let c = -to_f64(&w.exp_poly.coeff(2));
                let shift = q1 / (2.0 * c);
                norm * (q0 + c * shift * shift).exp() * (std::f64::consts::PI / c).sqrt()
            }
            ClassTag::LaguerreLike => {
                let q0 = to_f64(&w.exp_poly.coeff(0));
                let beta = to_f64(&w.exp_poly.coeff(1));
                let (r, g) = &w.root_factors[0];
                let (r, g) = (to_f64(r), to_f64(g));
                norm * (q0 + beta * r).exp() * gamma(g + 1.0) / beta.abs().powf(g + 1.0)
            }
            ClassTag::JacobiLike => {
                let (r1, a) = &w.root_factors[0];
                let (r2, b) = &w.root_factors[1];
                let len = to_f64(&(r2 - r1));
                let (a, b) = (to_f64(a), to_f64(b));
                let q0 = to_f64(&w.exp_poly.coeff(0));
                norm * q0.exp() * len.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0)
                    / gamma(a + b + 2.0)
            }
        }
    }

    /// Exact ratios `m_k / m_0` for k = 0..count, from integrating `sᵏ(σρ)′ = sᵏτρ`
    /// by parts (boundary terms vanish by admissibility):
    /// `(τ₁ + kσ₂) m_{k+1} = −(τ₀ + kσ₁) m_k − kσ₀ m_{k−1}`.
    pub fn moment_ratios(&self, count: usize) -> Vec<Rational> {
        let (s0, s1, s2) = (self.sigma.coeff(0), self.sigma.coeff(1), self.sigma.coeff(2));
        let (t0, t1) = (self.tau.coeff(0), self.tau.coeff(1));
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(Rational::one());
        for k in 0..count.saturating_sub(1) {
            let kr = int(k as i64);
            let prev = if k == 0 {
                Rational::zero()
            } else {
                out[k - 1].clone()
            };
            let rhs = -((&t0 + &kr * &s1) * &out[k]) - &kr * &s0 * prev;
            out.push(rhs / (&t1 + &kr * &s2));
        }
        out
    }

    pub fn moments(&self, count: usize) -> Vec<f64> {
        let m0 = self.zeroth_moment();
        self.moment_ratios(count).iter().map(|r| m0 * to_f64(r)).collect()
    }

    /// n-point Gauss rule whose nodes are the roots of Φ_n.
    pub fn gauss_rule(&self, n: usize) -> Result<QuadratureRule> {
        if n == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        let rec: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let (a, b) = self.recurrence(k);
                (to_f64(&a), to_f64(&b))
            })
            .collect();
        let m0 = self.zeroth_moment();

        // Gershgorin bounds of the Jacobi matrix, clipped to the interval.
        let sqrt_b = |k: usize| if k < n && k > 0 { rec[k].1.sqrt() } else { 0.0 };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, &(a, _)) in rec.iter().enumerate().take(n) {
            let r = sqrt_b(k) + sqrt_b(k + 1);
            lo = lo.min(a - r);
            hi = hi.max(a + r);
        }
        lo = lo.max(self.interval.a.to_f64()) - 1e-12 * (1.0 + lo.abs());
        hi = hi.min(self.interval.b.to_f64()) + 1e-12 * (1.0 + hi.abs());

        // Number of roots of Φ_n below x (Sturm count via LDLᵀ of J − xI).
        let count_below = |x: f64| -> usize {
            let mut count = 0;
            let mut d = rec[0].0 - x;
            for (k, &(a, b)) in rec.iter().enumerate().take(n) {
                if k > 0 {
                    let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
                    d = (a - x) - b / prev;
                }
                if d < 0.0 {
                    count += 1;
                }
            }
            count
        };

        let phi = self.classical_polynomial(n);
        let phi_f = phi.to_float();
        let dphi_f = phi.derivative().to_float();
        let mut nodes = Vec::with_capacity(n);
        let mut left = lo;
        for i in 0..n {
            let (mut a, mut b) = (left, hi);
            let mut iterations = 0;
            while b - a > 1e-15 * (1.0 + a.abs().max(b.abs())) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if count_below(mid) > i {
                    b = mid;
                } else {
                    a = mid;
                }
                iterations += 1;
                if iterations > 400 {
                    return Err(Error::NonConvergence(format!("root {i} of Phi_{n}")));
                }
            }
            let mut x = 0.5 * (a + b);
            // one guarded Newton polish against the exact polynomial
            let d = dphi_f.eval(x);
            if d != 0.0 {
                let step = phi_f.eval(x) / d;
                if step.is_finite() && step.abs() <= 1e-12 * (1.0 + x.abs()) {
                    x -= step;
                }
            }
            nodes.push(x);
            left = a;
        }

        let weights = nodes
            .iter()
            .map(|&x| {
                // Christoffel function: 1 / Σ_k p̃_k(x)² with orthonormal p̃_k.
                let mut prev = 0.0;
                let mut cur = 1.0 / m0.sqrt();
                let mut sum = cur * cur;
                for k in 0..n.saturating_sub(1) {
                    let next_b = rec[k + 1].1.sqrt();
                    let this_b = if k == 0 { 0.0 } else { rec[k].1.sqrt() };
                    let next = ((x - rec[k].0) * cur - this_b * prev) / next_b;
                    prev = cur;
                    cur = next;
                    sum += cur * cur;
                }
                1.0 / sum
            })
            .collect();

        Ok(QuadratureRule {
            nodes,
            weights,
            exact_degree: 2 * n - 1,
        })
    }

    /// Total polynomial degree of the integrand `u·v/ρ`.
    fn integrand_degree(&self, u: &HalfPowerFunction, v: &HalfPowerFunction) -> usize {
        let du = u.poly.degree().unwrap_or(0);
        let dv = v.poly.degree().unwrap_or(0);
        let ds = self.sigma.degree().unwrap_or(0);
        du + dv + ds * ((u.halfpower + v.halfpower) / 2) as usize
    }

    /// `⟨u, v⟩ = ∫ u v ρ ds`, exact up to rounding for polynomial integrands.
    pub fn inner_product(&self, u: &HalfPowerFunction, v: &HalfPowerFunction) -> Result<f64> {
        if u.sigma != self.sigma || v.sigma != self.sigma {
            return Err(Error::SigmaMismatch);
        }
        if !(u.halfpower + v.halfpower).is_multiple_of(2) {
            return Err(Error::UnsupportedIntegrand);
        }
        if u.is_zero() || v.is_zero() {
            return Ok(0.0);
        }
        let degree = self.integrand_degree(u, v);
        let rule = self.gauss_rule(degree / 2 + 1)?;
        let pu = u.poly.to_float();
        let pv = v.poly.to_float();
        let sp = self.sigma.to_float();
        let j = ((u.halfpower + v.halfpower) / 2) as i32;
        Ok(rule.integrate(|x| pu.eval(x) * pv.eval(x) * sp.eval(x).powi(j)))
    }

    /// Wrap a polynomial as a half-power function with k = 0.
    pub fn hp(&self, poly: Polynomial, halfpower: u32) -> HalfPowerFunction {
        HalfPowerFunction::new(poly, halfpower, self.sigma.clone())
    }

    /// JSON descriptor in the explicit `{sigma, tau, interval}` form.
    pub fn descriptor(&self) -> Value {
        serde_json::json!({
            "label": self.label,
            "sigma": self.sigma,
            "tau": self.tau,
            "interval": {"a": self.interval.a.to_string(), "b": self.interval.b.to_string()},
        })
    }
}

fn sigma_positive_on(sigma: &Polynomial, interval: &Interval) -> bool {
    match sigma.degree() {
        None => false,
        Some(0) => sigma.coeff(0).is_positive(),
        Some(_) => {
            // Linear or concave quadratic: positive inside iff nonnegative at both
            // ends, with infinite ends requiring growth in that direction.
            let end_ok = |e: &Endpoint, dir: i32| match e {
                Endpoint::Finite(r) => !sigma.eval(r).is_negative(),
                _ => {
                    sigma.degree() == Some(1)
                        && if dir > 0 {
                            sigma.coeff(1).is_positive()
                        } else {
                            sigma.coeff(1).is_negative()
                        }
                }
            };
            end_ok(&interval.a, -1) && end_ok(&interval.b, 1)
        }
    }
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

fn derive_weight(sigma: &Polynomial, tau: &Polynomial) -> Result<WeightDescriptor> {
    let (t0, t1) = (tau.coeff(0), tau.coeff(1));
    let (exp_poly, root_factors) = match sigma.degree() {
        Some(0) => {
            let c = sigma.coeff(0);
            (
                Polynomial::new(vec![Rational::zero(), &t0 / &c, &t1 / (&c * int(2))]),
                Vec::new(),
            )
        }
        Some(1) => {
            let s1 = sigma.coeff(1);
            let r = -sigma.coeff(0) / &s1;
            let gamma = (tau.eval(&r) - &s1) / &s1;
            (
                Polynomial::new(vec![Rational::zero(), &t1 / &s1]),
                vec![(r, gamma)],
            )
        }
        Some(2) => {
            let (s0, s1, s2) = (sigma.coeff(0), sigma.coeff(1), sigma.coeff(2));
            let disc = &s1 * &s1 - int(4) * &s2 * &s0;
            let root = rational_sqrt(&disc).ok_or(Violation::IrrationalRoots)?;
            if root.is_zero() {
                // double root: σ ≤ 0 everywhere, already rejected by positivity
                return Err(Violation::SigmaNonPositive.into());
            }
            let two_a = &s2 * int(2);
            let mut r1 = (-&s1 - &root) / &two_a;
            let mut r2 = (-&s1 + &root) / &two_a;
            if r1 > r2 {
                std::mem::swap(&mut r1, &mut r2);
            }
            let ds = sigma.derivative();
            let a = (tau.eval(&r1) - ds.eval(&r1)) / (&s2 * (&r1 - &r2));
            let b = (tau.eval(&r2) - ds.eval(&r2)) / (&s2 * (&r2 - &r1));
            (Polynomial::zero(), vec![(r1, a), (r2, b)])
        }
        _ => return Err(Violation::SigmaNonPositive.into()),
    };
    Ok(WeightDescriptor {
        exp_poly,
        root_factors,
        normalization: 1.0,
    })
}

fn check_boundary(weight: &WeightDescriptor, interval: &Interval) -> Result<()> {
    let check = |e: &Endpoint, name: &'static str| -> Result<()> {
        match e {
            Endpoint::Finite(r) => {
                // σρ ~ |s − r|^{1 + γ}; must vanish.
                let gamma = weight
                    .root_factors
                    .iter()
                    .find(|(root, _)| root == r)
                    .map(|(_, g)| g.clone())
                    .ok_or(Violation::BoundaryCondition(name))?;
                if !(gamma + int(1)).is_positive() {
                    return Err(Violation::BoundaryCondition(name).into());
                }
                Ok(())
            }
            inf => {
                // e^{q(s)} must beat every power of s.
                let q = &weight.exp_poly;
                let Some(d) = q.degree().filter(|&d| d >= 1) else {
                    return Err(Violation::BoundaryCondition(name).into());
                };
                let lead = q.leading();
                let towards_neg = matches!(inf, Endpoint::NegInf) && d % 2 == 1;
                let decays = if towards_neg {
                    lead.is_positive()
                } else {
                    lead.is_negative()
                };
                if decays {
                    Ok(())
                } else {
                    Err(Violation::BoundaryCondition(name).into())
                }
            }
        }
    };
    check(&interval.a, "a")?;
    check(&interval.b, "b")
}

/// Parse a family from its JSON description: either `{"preset": ..., "params": {...}}`
/// or `{"sigma": [...], "tau": [...], "interval": {"a": ..., "b": ...}}`.
pub fn family_from_json(value: &Value) -> Result<Family> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("family", "expected a JSON object"))?;
    if let Some(name) = obj.get("preset") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::parse("preset", "expected a string"))?;
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p
                .as_object()
                .ok_or_else(|| Error::parse("params", "expected an object"))?;
            for (k, v) in p {
                let r = rational_from_json(v).map_err(|e| Error::parse(format!("params.{k}"), e.to_string()))?;
                params.insert(k.clone(), r);
            }
        }
        return Preset::from_name(name, &params)?.build();
    }
    let poly_field = |key: &str| -> Result<Polynomial> {
        let v = obj
            .get(key)
            .ok_or_else(|| Error::parse(key, "missing field"))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::parse(key, e.to_string()))
    };
    let sigma = poly_field("sigma")?;
    let tau = poly_field("tau")?;
    let iv = obj
        .get("interval")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::parse("interval", "expected {\"a\": ..., \"b\": ...}"))?;
    let end = |key: &str| -> Result<Endpoint> {
        let field = format!("interval.{key}");
        match iv.get(key) {
            Some(Value::String(s)) => Endpoint::parse(&field, s),
            Some(Value::Number(n)) => Endpoint::parse(&field, &n.to_string()),
            _ => Err(Error::parse(field, "expected a string or number")),
        }
    };
    Family::new(sigma, tau, Interval::new(end("a")?, end("b")?))
}
