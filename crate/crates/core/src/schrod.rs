//! Change of variable `ds/dx = ±κ(s(x))`, wavefunctions
//! `Ψ_{l,m}(x) = √(κρ)·Φ_{l,m}` at `s = s(x)`, superpotentials and partner
//! potentials.
//!
//! Writing ς for the map sign and `N_m = 2τ + (2m−1)σ′`, everything reduces to
//! functions of `s`:
//!
//! ```text
//! W_m = −N_m/(4κ)                       𝒜_m = ς d/dx + W_m,  𝒜_m⁺ = −ς d/dx + W_m
//! V_m − λ_m = W_m² − ςẆ_m               V_{m+1} − λ_m = W_m² + ςẆ_m
//! ςẆ_m = −(2σN_m′ − N_mσ′)/(8σ)         W_m = −ςΨ̇_{m,m}/Ψ_{m,m}
//! ```
//!
//! For ς = +1 these are the familiar SUSY relations; ς = −1 is their mirror
//! image under `x → −x`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactpoly::{to_f64, FloatPoly, Rational};
use crate::family::{Endpoint, Family, Preset};
use crate::output::csv_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapSign {
    Plus,
    Minus,
}

impl MapSign {
    pub fn value(self) -> f64 {
        match self {
            MapSign::Plus => 1.0,
            MapSign::Minus => -1.0,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "+1" | "1" | "+" | "plus" => Ok(MapSign::Plus),
            "-1" | "-" | "minus" => Ok(MapSign::Minus),
            other => Err(Error::parse("sign", format!("expected +1 or -1, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
enum MapForm {
    /// σ = 1 − s²: s = −ς cos x on (0, π).
    Cosine,
    /// σ = s: s = x²/4 on (0, ∞) for ς = +1, (−∞, 0) for ς = −1.
    Parabolic,
    /// σ = 1: s = ςx.
    Linear,
    Numeric(NumericTable),
}

/// Accepted RK4 nodes of `ds/dx = ςκ(s)`, sorted by x.
#[derive(Clone, Debug)]
struct NumericTable {
    xs: Vec<f64>,
    ss: Vec<f64>,
}

const STEP_TOL: f64 = 1e-14;

/// `s(x)` together with its sign convention and x-domain.
#[derive(Clone, Debug)]
pub struct CoordinateMap {
    sigma: FloatPoly,
    sigma_prime: FloatPoly,
    sign: MapSign,
    x_domain: (f64, f64),
    form: MapForm,
}

impl CoordinateMap {
    /// Closed form for σ ∈ {1 − s², s, 1}, adaptive RK4 from the anchor
    /// otherwise. The anchor defaults to `x₀ = 0` at the weighted mean of `s`.
    pub fn new(f: &Family, sign: MapSign, anchor: Option<(f64, f64)>) -> Result<Self> {
        if let Some((_, s0)) = anchor {
            if !f.interval().contains(s0) {
                return Err(Error::Domain(format!("anchor s0 = {s0} lies outside (a, b)")));
            }
        }
        let sigma = f.sigma().to_float();
        let sigma_prime = f.sigma().derivative().to_float();
        let sg = sign.value();
        let coeffs: Vec<f64> = f.sigma().coeffs().iter().map(to_f64).collect();
        let (form, x_domain) = match coeffs.as_slice() {
            [a, b, c] if *a == 1.0 && *b == 0.0 && *c == -1.0 => {
                (MapForm::Cosine, (0.0, std::f64::consts::PI))
            }
            [a, b] if *a == 0.0 && *b == 1.0 => {
                let dom = if sg > 0.0 { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) };
                (MapForm::Parabolic, dom)
            }
            [a] if *a == 1.0 => (MapForm::Linear, (f64::NEG_INFINITY, f64::INFINITY)),
            _ => {
                let (x0, s0) = match anchor {
                    Some(a) => a,
                    None => (0.0, f.gauss_rule(1)?.nodes[0]),
                };
                numeric_map(f, &sigma, sign, x0, s0)?
            }
        };
        Ok(Self {
            sigma,
            sigma_prime,
            sign,
            x_domain,
            form,
        })
    }

    pub fn sign(&self) -> MapSign {
        self.sign
    }

    pub fn x_domain(&self) -> (f64, f64) {
        self.x_domain
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.form, MapForm::Numeric(_))
    }

    pub fn form_name(&self) -> &'static str {
        match self.form {
            MapForm::Cosine => "cosine",
            MapForm::Parabolic => "parabolic",
            MapForm::Linear => "linear",
            MapForm::Numeric(_) => "numeric",
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.x_domain.0 && x < self.x_domain.1
    }

    pub fn s_of_x(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} lies outside the x-domain ({}, {})",
                self.x_domain.0, self.x_domain.1
            )));
        }
        let sg = self.sign.value();
        Ok(match &self.form {
            MapForm::Cosine => -sg * x.cos(),
            MapForm::Parabolic => x * x / 4.0,
            MapForm::Linear => sg * x,
            MapForm::Numeric(t) => t.eval(&self.sigma, sg, x)?,
        })
    }

    /// Inverse map, by bisection for numeric tables.
    pub fn x_of_s(&self, s: f64) -> Result<f64> {
        let sg = self.sign.value();
        match &self.form {
            MapForm::Cosine => Ok((-sg * s).acos()),
            MapForm::Parabolic => Ok(sg * 2.0 * s.sqrt()),
            MapForm::Linear => Ok(sg * s),
            MapForm::Numeric(t) => {
                let (mut lo, mut hi) = (t.xs[0], *t.xs.last().unwrap());
                let inside = |x: f64| t.eval(&self.sigma, sg, x);
                if (inside(lo)? - s) * (inside(hi)? - s) > 0.0 {
                    return Err(Error::Domain(format!("s = {s} beyond the integrated range")));
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (inside(mid)? - s) * sg < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    pub fn kappa(&self, s: f64) -> f64 {
        self.sigma.eval(s).max(0.0).sqrt()
    }

    /// `σ(s(x))`, in closed form where `1 − s²` would cancel near the ends.
    pub fn sigma_at(&self, x: f64, s: f64) -> f64 {
        match self.form {
            MapForm::Cosine => x.sin().powi(2),
            _ => self.sigma.eval(s),
        }
    }

    /// `|s(x) − r|` for a root `r` of σ, again avoiding cancellation.
    fn root_distance(&self, x: f64, s: f64, r: f64) -> f64 {
        match self.form {
            MapForm::Cosine if r.abs() == 1.0 => {
                // 1 ∓ cos x
                let near_zero = (r > 0.0) == (self.sign == MapSign::Minus);
                let half = if near_zero { (x / 2.0).sin() } else { (x / 2.0).cos() };
                2.0 * half * half
            }
            _ => (s - r).abs(),
        }
    }

    /// `ds/dx = ςκ(s(x))`.
    pub fn ds_dx(&self, x: f64) -> Result<f64> {
        let s = self.s_of_x(x)?;
        Ok(self.sign.value() * self.kappa(s))
    }

    /// `dκ/dx = ςσ′(s)/2`.
    pub fn dkappa_dx(&self, x: f64) -> Result<f64> {
        let s = self.s_of_x(x)?;
        Ok(self.sign.value() * self.sigma_prime.eval(s) / 2.0)
    }
}

fn rk4(sigma: &FloatPoly, sg: f64, s: f64, h: f64) -> f64 {
    let f = |s: f64| sg * sigma.eval(s).max(0.0).sqrt();
    let k1 = f(s);
    let k2 = f(s + 0.5 * h * k1);
    let k3 = f(s + 0.5 * h * k2);
    let k4 = f(s + h * k3);
    s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

impl NumericTable {
    fn eval(&self, sigma: &FloatPoly, sg: f64, x: f64) -> Result<f64> {
        let last = self.xs.len() - 1;
        if x < self.xs[0] || x > self.xs[last] {
            return Err(Error::Domain(format!(
                "x = {x} lies beyond the numerically integrated range [{}, {}]",
                self.xs[0], self.xs[last]
            )));
        }
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            p => (p - 1).min(last.saturating_sub(1)),
        };
        let span = x - self.xs[i];
        if span == 0.0 || last == 0 {
            return Ok(self.ss[i]);
        }
        // two half-steps, never longer than those accepted during integration,
        // so s(x) is smooth inside each table interval
        let h = 0.5 * span;
        Ok(rk4(sigma, sg, rk4(sigma, sg, self.ss[i], h), h))
    }
}

/// Integrate outward from `(x0, s0)` in both directions.
fn numeric_map(
    f: &Family,
    sigma: &FloatPoly,
    sign: MapSign,
    x0: f64,
    s0: f64,
) -> Result<(MapForm, (f64, f64))> {
    let sg = sign.value();
    let rule = f.gauss_rule(40)?;
    let (lo_node, hi_node) = (rule.nodes[0], *rule.nodes.last().unwrap());
    let reach = hi_node - lo_node;
    let a = f.interval().a.to_f64();
    let b = f.interval().b.to_f64();
    let far_lo = if a.is_finite() { a } else { lo_node - 0.5 * reach };
    let far_hi = if b.is_finite() { b } else { hi_node + 0.5 * reach };
    let scale = if a.is_finite() && b.is_finite() { b - a } else { reach };

    let mut forward = march(sigma, sg, x0, s0, 1.0, far_lo, far_hi, scale)?;
    let backward = march(sigma, sg, x0, s0, -1.0, far_lo, far_hi, scale)?;

    // Finite ends are reached in finite x. From a node at s = r + u the rest
    // of the way is ∫ ds/κ; with s = r + u·w² and σ = (s − r)·q(s) this becomes
    // ∫₀¹ 2√(u/q) dw, free of the square-root singularity.
    let unit = Family::legendre().gauss_rule(20)?;
    let sigma_coeffs: Vec<f64> = f.sigma().coeffs().iter().map(to_f64).collect();
    let end_x = |pts: &[(f64, f64)], dir: f64| -> f64 {
        // moving in +x moves s in the ς direction
        let end = if dir * sg > 0.0 { b } else { a };
        if !end.is_finite() {
            return dir * f64::INFINITY;
        }
        let &(x, s) = pts
            .iter()
            .rev()
            .find(|(_, s)| (s - end).abs() >= 1e-3 * scale)
            .unwrap_or(&pts[0]);
        let u = s - end;
        let q = |t: f64| match sigma_coeffs.as_slice() {
            [_, c1, c2] => c2 * t + c1 + c2 * end,
            [_, c1] => *c1,
            _ => f64::NAN,
        };
        let dist = unit.integrate(|v| {
            let w = 0.5 * (v + 1.0);
            (u / q(end + u * w * w)).sqrt()
        }) / unit.integrate(|_| 1.0);
        x + dir * 2.0 * dist
    };
    let x_hi = end_x(&forward, 1.0);
    let x_lo = end_x(&backward, -1.0);

    let mut pts: Vec<(f64, f64)> = backward.into_iter().rev().collect();
    pts.pop();
    pts.append(&mut forward);
    let (xs, ss) = pts.into_iter().unzip();
    Ok((MapForm::Numeric(NumericTable { xs, ss }), (x_lo, x_hi)))
}

#[allow(clippy::too_many_arguments)]
fn march(
    sigma: &FloatPoly,
    sg: f64,
    x0: f64,
    s0: f64,
    dir: f64,
    far_lo: f64,
    far_hi: f64,
    scale: f64,
) -> Result<Vec<(f64, f64)>> {
    let inside = |s: f64| s > far_lo && s < far_hi && sigma.eval(s) > 0.0;
    let mut pts = vec![(x0, s0)];
    let (mut x, mut s) = (x0, s0);
    let mut h = 1e-3 * scale;
    let h_min = 1e-13 * scale;
    for _ in 0..1_000_000 {
        if h < h_min {
            return Ok(pts);
        }
        let step = dir * h;
        let full = rk4(sigma, sg, s, step);
        let mid = rk4(sigma, sg, s, 0.5 * step);
        let half = rk4(sigma, sg, mid, 0.5 * step);
        if ![full, mid, half].iter().all(|&t| inside(t)) {
            // an infinite side ends once the far window is crossed
            let beyond = (half >= far_hi && far_hi.is_finite() && sigma.eval(far_hi) > 0.0)
                || (half <= far_lo && far_lo.is_finite() && sigma.eval(far_lo) > 0.0);
            if beyond {
                return Ok(pts);
            }
            h *= 0.5;
            continue;
        }
        let err = (full - half).abs() / 15.0;
        let tol = STEP_TOL * s.abs().max(1.0);
        if err > tol {
            h *= 0.5;
            continue;
        }
        x += step;
        s = half;
        pts.push((x, s));
        if (s - far_lo).min(far_hi - s) < 1e-13 * scale {
            return Ok(pts);
        }
        let grow = if err == 0.0 { 2.0 } else { (0.9 * (tol / err).powf(0.2)).min(2.0) };
        h *= grow.max(0.5);
    }
    Err(Error::NonConvergence("coordinate map integration exceeded its step budget".into()))
}

/// Values and analytic x-derivatives of a wavefunction on a grid.
#[derive(Clone, Debug, Default)]
pub struct WaveSamples {
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub ddpsi: Vec<f64>,
}

/// Largest residual of `−Ψ″ + V_mΨ − λ_lΨ` with a central-difference `Ψ″`.
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub max_psi: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalDirection {
    /// `𝒜_m`: Ψ_{l,m} → Ψ_{l,m+1}.
    Lower,
    /// `𝒜_m⁺`: Ψ_{l,m+1} → (λ_l − λ_m) Ψ_{l,m}.
    Raise,
}

/// `Φ_l^{(m)}` with its first two derivatives, ready for float evaluation.
struct Mode {
    p: FloatPoly,
    dp: FloatPoly,
    ddp: FloatPoly,
}

struct Local {
    s: f64,
    sigma: f64,
    ln_rho: f64,
}

/// A family, a coordinate map and a default `m`.
#[derive(Clone, Debug)]
pub struct SchrodingerSystem {
    family: Family,
    map: CoordinateMap,
    pub m: usize,
    sigma_pp: f64,
    tau: FloatPoly,
    tau_p: f64,
    ln_weight: (FloatPoly, Vec<(f64, f64)>),
    /// Outermost nodes of the 40- and 60-point Gauss rules.
    window_nodes: [(f64, f64); 2],
}

impl SchrodingerSystem {
    pub fn new(family: Family, sign: MapSign, m: usize) -> Result<Self> {
        let map = CoordinateMap::new(&family, sign, None)?;
        Self::with_map(family, map, m)
    }

    pub fn with_map(family: Family, map: CoordinateMap, m: usize) -> Result<Self> {
        let extremes = |n: usize| -> Result<(f64, f64)> {
            let rule = family.gauss_rule(n)?;
            Ok((rule.nodes[0], *rule.nodes.last().unwrap()))
        };
        let window_nodes = [extremes(40)?, extremes(60)?];
        let sigma_pp = to_f64(&family.sigma_second());
        let tau = family.tau().to_float();
        let tau_p = to_f64(&family.tau_prime());
        let w = family.weight();
        let ln_weight = (
            w.exp_poly.to_float(),
            w.root_factors.iter().map(|(r, g)| (to_f64(r), to_f64(g))).collect(),
        );
        Ok(Self {
            family,
            map,
            m,
            sigma_pp,
            tau,
            tau_p,
            ln_weight,
            window_nodes,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn map(&self) -> &CoordinateMap {
        &self.map
    }

    fn sign(&self) -> f64 {
        self.map.sign.value()
    }

    pub fn lambda(&self, l: usize) -> f64 {
        to_f64(&self.family.eigenvalue(l))
    }

    fn mode(&self, l: usize, m: usize) -> Result<Mode> {
        if m > l {
            return Err(Error::IndexRange(format!("m = {m} exceeds l = {l}")));
        }
        let p = self.family.classical_polynomial(l).nth_derivative(m);
        Ok(Mode {
            dp: p.derivative().to_float(),
            ddp: p.nth_derivative(2).to_float(),
            p: p.to_float(),
        })
    }

    /// `N_m(s) = 2τ + (2m−1)σ′` and its constant derivative.
    fn n_poly(&self, m: usize, s: f64) -> (f64, f64) {
        let k = 2.0 * m as f64 - 1.0;
        (
            2.0 * self.tau.eval(s) + k * self.map.sigma_prime.eval(s),
            2.0 * self.tau_p + k * self.sigma_pp,
        )
    }

    /// `s(x)`, `σ(s(x))` and `ln ρ(s(x))`.
    fn local(&self, x: f64) -> Result<Local> {
        let s = self.map.s_of_x(x)?;
        let (exp, roots) = &self.ln_weight;
        let ln_rho = roots.iter().fold(exp.eval(s), |acc, (r, g)| {
            acc + g * self.map.root_distance(x, s, *r).ln()
        }) + self.family.weight().normalization.ln();
        Ok(Local {
            s,
            sigma: self.map.sigma_at(x, s),
            ln_rho,
        })
    }

    /// `(Ψ, Ψ̇, Ψ̈)` at `x`.
    fn psi_point(&self, mode: &Mode, m: usize, x: f64) -> Result<(f64, f64, f64)> {
        let Local { s, sigma, ln_rho } = self.local(x)?;
        let dsigma = self.map.sigma_prime.eval(s);
        let kappa = sigma.sqrt();
        let g = ((2.0 * m as f64 + 1.0) / 4.0 * sigma.ln() + 0.5 * ln_rho).exp();
        let (n, dn) = self.n_poly(m, s);
        let log_d = n / (4.0 * sigma);
        let log_dd = (dn * sigma - n * dsigma) / (4.0 * sigma * sigma);
        let (p, dp, ddp) = (mode.p.eval(s), mode.dp.eval(s), mode.ddp.eval(s));
        let f1 = g * (log_d * p + dp);
        let f2 = g * ((log_dd + log_d * log_d) * p + 2.0 * log_d * dp + ddp);
        Ok((
            g * p,
            self.sign() * kappa * f1,
            dsigma * f1 / 2.0 + sigma * f2,
        ))
    }

    /// `Ψ_{l,m}` with analytic first and second x-derivatives.
    pub fn wave_samples(&self, l: usize, m: usize, grid: &[f64]) -> Result<WaveSamples> {
        let mode = self.mode(l, m)?;
        let mut out = WaveSamples::default();
        for &x in grid {
            let (v, d, dd) = self.psi_point(&mode, m, x)?;
            out.x.push(x);
            out.psi.push(v);
            out.dpsi.push(d);
            out.ddpsi.push(dd);
        }
        Ok(out)
    }

    pub fn wavefunction(&self, l: usize, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        let mode = self.mode(l, m)?;
        grid.iter().map(|&x| self.psi_value(&mode, m, x)).collect()
    }

    fn psi_value(&self, mode: &Mode, m: usize, x: f64) -> Result<f64> {
        let Local { s, sigma, ln_rho } = self.local(x)?;
        let ln_g = (2.0 * m as f64 + 1.0) / 4.0 * sigma.ln() + 0.5 * ln_rho;
        Ok(ln_g.exp() * mode.p.eval(s))
    }

    /// `W_m = −N_m/(4κ)`.
    pub fn superpotential(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter()
            .map(|&x| {
                let loc = self.local(x)?;
                Ok(self.w_at(m, &loc))
            })
            .collect()
    }

    /// `Ẇ_m`, by the chain rule through `s(x)`.
    pub fn superpotential_derivative(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter()
            .map(|&x| Ok(self.sign() * self.signed_w_dot(m, &self.local(x)?)))
            .collect()
    }

    /// `ςẆ_m = −(2σN′ − Nσ′)/(8σ)`.
    fn signed_w_dot(&self, m: usize, loc: &Local) -> f64 {
        let (n, dn) = self.n_poly(m, loc.s);
        -(2.0 * loc.sigma * dn - n * self.map.sigma_prime.eval(loc.s)) / (8.0 * loc.sigma)
    }

    fn w_at(&self, m: usize, loc: &Local) -> f64 {
        -self.n_poly(m, loc.s).0 / (4.0 * loc.sigma.sqrt())
    }

    /// `V_m = λ_m + W_m² − ςẆ_m`.
    pub fn potential(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        let lm = self.lambda(m);
        grid.iter()
            .map(|&x| {
                let loc = self.local(x)?;
                Ok(lm + self.w_at(m, &loc).powi(2) - self.signed_w_dot(m, &loc))
            })
            .collect()
    }

    /// `V_{m+1}` reached from below: `λ_m + W_m² + ςẆ_m`.
    pub fn partner_potential(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        let lm = self.lambda(m);
        grid.iter()
            .map(|&x| {
                let loc = self.local(x)?;
                Ok(lm + self.w_at(m, &loc).powi(2) + self.signed_w_dot(m, &loc))
            })
            .collect()
    }

    /// `−ςΨ̇_{m,m}/Ψ_{m,m}`.
    pub fn superpotential_from_ground_state(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        let w = self.wave_samples(m, m, grid)?;
        Ok(w.psi.iter().zip(&w.dpsi).map(|(p, d)| -self.sign() * d / p).collect())
    }

    /// `Ψ̈_{m,m}/Ψ_{m,m} + λ_m`.
    pub fn potential_from_ground_state(&self, m: usize, grid: &[f64]) -> Result<Vec<f64>> {
        let w = self.wave_samples(m, m, grid)?;
        let lm = self.lambda(m);
        Ok(w.psi.iter().zip(&w.ddpsi).map(|(p, dd)| dd / p + lm).collect())
    }

    /// `𝒜_m Ψ = ςΨ̇ + W_mΨ` or `𝒜_m⁺ Ψ = −ςΨ̇ + W_mΨ` on analytic samples.
    pub fn apply_cal_a(&self, m: usize, dir: CalDirection, input: &WaveSamples) -> Result<Vec<f64>> {
        let w = self.superpotential(m, &input.x)?;
        let d = match dir {
            CalDirection::Lower => self.sign(),
            CalDirection::Raise => -self.sign(),
        };
        Ok(input
            .psi
            .iter()
            .zip(&input.dpsi)
            .zip(&w)
            .map(|((p, dp), w)| d * dp + w * p)
            .collect())
    }

    /// A fixed interior x-window: finite ends trimmed by 5% of the window,
    /// infinite ends cut at the outermost node of a 40-point Gauss rule.
    pub fn interior_window(&self) -> Result<(f64, f64)> {
        let (x1, x2) = self.map.x_domain;
        let (s_lo, s_hi) = self.window_nodes[0];
        let far: Vec<f64> = [s_lo, s_hi]
            .iter()
            .map(|&s| self.map.x_of_s(s))
            .collect::<Result<_>>()?;
        let far_lo = far.iter().copied().fold(f64::INFINITY, f64::min);
        let far_hi = far.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = if x1.is_finite() { x1 } else { far_lo };
        let hi = if x2.is_finite() { x2 } else { far_hi };
        let trim = 0.05 * (hi - lo);
        Ok((
            if x1.is_finite() { lo + trim } else { lo },
            if x2.is_finite() { hi - trim } else { hi },
        ))
    }

    /// `n` evenly spaced points spanning [`Self::interior_window`].
    pub fn x_grid(&self, n: usize) -> Result<Vec<f64>> {
        let (lo, hi) = self.interior_window()?;
        Ok(match n {
            0 => vec![],
            1 => vec![0.5 * (lo + hi)],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        })
    }

    /// Points `x_lo + kh` of the interior window.
    pub fn residual_grid(&self, h: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.interior_window()?;
        let (x1, x2) = self.map.x_domain;
        if lo - x1 < 2.0 * h || x2 - hi < 2.0 * h {
            return Err(Error::Domain(format!(
                "grid spacing h = {h} puts the stencil within 2h of an endpoint"
            )));
        }
        let n = ((hi - lo) / h).floor() as usize;
        Ok((0..=n).map(|k| lo + k as f64 * h).collect())
    }

    pub fn schrodinger_residual(&self, l: usize, m: usize, h: f64) -> Result<ResidualReport> {
        let grid = self.residual_grid(h)?;
        let mode = self.mode(l, m)?;
        let v = self.potential(m, &grid)?;
        let ll = self.lambda(l);
        let mut report = ResidualReport {
            max_residual: 0.0,
            max_psi: 0.0,
            points: grid.len(),
        };
        for (&x, vx) in grid.iter().zip(&v) {
            let psi = |t: f64| self.psi_value(&mode, m, t);
            let (left, mid, right) = (psi(x - h)?, psi(x)?, psi(x + h)?);
            let second = (left - 2.0 * mid + right) / (h * h);
            let r = (-second + (vx - ll) * mid).abs();
            report.max_residual = report.max_residual.max(r);
            report.max_psi = report.max_psi.max(mid.abs());
        }
        Ok(report)
    }

    /// `residual(h)/residual(h/2)`, close to 4 for a second-order stencil.
    pub fn residual_convergence_ratio(&self, l: usize, m: usize, h: f64) -> Result<f64> {
        let coarse = self.schrodinger_residual(l, m, h)?;
        let fine = self.schrodinger_residual(l, m, h / 2.0)?;
        Ok(coarse.max_residual / fine.max_residual)
    }

    /// `∫ Ψ_{l,m} Ψ_{k,m} dx` by the trapezoidal rule on `n` panels. Finite
    /// ends contribute zero; infinite ends are cut where the 60-point Gauss
    /// rule ends.
    pub fn transfer_inner_product(&self, l: usize, k: usize, m: usize, n: usize) -> Result<f64> {
        let (x1, x2) = self.map.x_domain;
        for end in [&self.family.interval().a, &self.family.interval().b] {
            if let Endpoint::Finite(r) = end {
                let exponent = 0.5 + m as f64 + self.endpoint_exponent(r);
                if exponent <= 0.0 {
                    return Err(Error::Domain(
                        "Ψ² does not vanish at a finite endpoint".into(),
                    ));
                }
            }
        }
        let (s_lo, s_hi) = self.window_nodes[1];
        let far: Vec<f64> = [s_lo, s_hi]
            .iter()
            .map(|&s| self.map.x_of_s(s))
            .collect::<Result<_>>()?;
        let lo = if x1.is_finite() { x1 } else { far[0].min(far[1]) };
        let hi = if x2.is_finite() { x2 } else { far[0].max(far[1]) };
        let h = (hi - lo) / n as f64;
        let grid: Vec<f64> = (1..n).map(|i| lo + i as f64 * h).collect();
        let a = self.wavefunction(l, m, &grid)?;
        let b = self.wavefunction(k, m, &grid)?;
        let interior: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
        let mut ends = 0.0;
        if !x1.is_finite() {
            ends += 0.5 * self.wavefunction(l, m, &[lo])?[0] * self.wavefunction(k, m, &[lo])?[0];
        }
        if !x2.is_finite() {
            ends += 0.5 * self.wavefunction(l, m, &[hi])?[0] * self.wavefunction(k, m, &[hi])?[0];
        }
        Ok(h * (interior + ends))
    }

    fn endpoint_exponent(&self, r: &Rational) -> f64 {
        self.family
            .weight()
            .root_factors
            .iter()
            .find(|(root, _)| root == r)
            .map_or(0.0, |(_, g)| to_f64(g))
    }

    pub fn descriptor(&self) -> Value {
        let end = |x: f64| {
            if x.is_finite() {
                json!(x)
            } else if x > 0.0 {
                json!("inf")
            } else {
                json!("-inf")
            }
        };
        json!({
            "family": self.family.descriptor(),
            "sign": self.sign() as i64,
            "map": self.map.form_name(),
            "x_domain": [end(self.map.x_domain.0), end(self.map.x_domain.1)],
            "m": self.m,
        })
    }
}

/// Jacobi family with `α = μ − ½`, `β = η − ½`, map `s = cos x`, sign −1.
pub fn poschl_teller_preset(mu: Rational, eta: Rational) -> Result<SchrodingerSystem> {
    let family = Preset::PoschlTeller { mu, eta }.build()?;
    SchrodingerSystem::new(family, MapSign::Minus, 0)
}

/// `½[μ cot(x/2) − η tan(x/2)]`.
pub fn poschl_teller_superpotential(mu: f64, eta: f64, x: f64) -> f64 {
    let t = (x / 2.0).tan();
    0.5 * (mu / t - eta * t)
}

/// The ground potential with μ(μ−1) over cos²(x/2) and η(η−1) over sin²(x/2).
/// The construction yields this under `x → π − x`.
pub fn poschl_teller_potential(mu: f64, eta: f64, x: f64) -> f64 {
    let c = (x / 2.0).cos().powi(2);
    let s = (x / 2.0).sin().powi(2);
    0.25 * (mu * (mu - 1.0) / c + eta * (eta - 1.0) / s) - (mu + eta).powi(2) / 4.0
}

/// Two-column CSV `x,<name>`.
pub fn samples_csv(name: &str, xs: &[f64], ys: &[f64]) -> String {
    csv_table(&["x", name], xs.iter().zip(ys).map(|(x, y)| vec![*x, *y]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{int, rat, Polynomial};
    use crate::family::Interval;
    use std::f64::consts::PI;

    fn presets() -> Vec<SchrodingerSystem> {
        let mut out: Vec<SchrodingerSystem> = [
            Family::legendre(),
            Family::jacobi(rat(1, 2), rat(1, 2)).unwrap(),
            Family::jacobi(rat(3, 2), rat(3, 2)).unwrap(),
            Family::laguerre(int(0)).unwrap(),
            Family::hermite(),
        ]
        .into_iter()
        .map(|f| {
            let sign = if f.sigma().degree() == Some(2) { MapSign::Minus } else { MapSign::Plus };
            SchrodingerSystem::new(f, sign, 0).unwrap()
        })
        .collect();
        out.push(poschl_teller_preset(int(2), int(3)).unwrap());
        out
    }

    fn five_point(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            let scale = 1.0 + x.abs().max(y.abs());
            assert!((x - y).abs() <= tol * scale, "{what}[{i}]: {x} vs {y}");
        }
    }

    #[test]
    fn canonical_maps() {
        let jac = SchrodingerSystem::new(Family::legendre(), MapSign::Minus, 0).unwrap();
        assert_eq!(jac.map().x_domain(), (0.0, PI));
        assert!((jac.map().s_of_x(1.0).unwrap() - 1f64.cos()).abs() < 1e-16);
        let lag = SchrodingerSystem::new(Family::laguerre(int(0)).unwrap(), MapSign::Plus, 0).unwrap();
        assert_eq!(lag.map().s_of_x(3.0).unwrap(), 2.25);
        let her = SchrodingerSystem::new(Family::hermite(), MapSign::Plus, 0).unwrap();
        assert_eq!(her.map().s_of_x(-0.3).unwrap(), -0.3);
        assert!(jac.map().s_of_x(-0.1).is_err());
        for sys in [&jac, &lag, &her] {
            let (lo, hi) = sys.interior_window().unwrap();
            for i in 1..20 {
                let x = lo + (hi - lo) * i as f64 / 20.0;
                let fd = five_point(|t| sys.map().s_of_x(t).unwrap(), x, 1e-3);
                assert!((fd - sys.map().ds_dx(x).unwrap()).abs() <= 1e-10);
                let s = sys.map().s_of_x(x).unwrap();
                assert!((sys.map().x_of_s(s).unwrap() - x).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn numeric_map_matches_scaled_cosine() {
        let f = Family::new(
            Polynomial::from_ints(&[4, 0, -1]),
            Polynomial::from_ints(&[0, -2]),
            Interval::finite(int(-2), int(2)),
        )
        .unwrap();
        let anchor = (0.0, 0.5);
        let map = CoordinateMap::new(&f, MapSign::Minus, Some(anchor)).unwrap();
        assert!(!map.is_closed_form());
        // exact: s = 2 cos(x + φ), 2 cos φ = s0
        let phi = (0.25f64).acos();
        let (x1, x2) = map.x_domain();
        assert!((x1 + phi).abs() < 1e-6 && (x2 - (PI - phi)).abs() < 1e-6, "{x1} {x2}");
        for i in 1..50 {
            let x = -phi + 0.01 + (PI - 0.02) * i as f64 / 50.0;
            let s = map.s_of_x(x).unwrap();
            assert!((s - 2.0 * (x + phi).cos()).abs() < 1e-10, "x={x}");
            let fd = five_point(|t| map.s_of_x(t).unwrap(), x, 1e-3);
            assert!((fd - map.ds_dx(x).unwrap()).abs() <= 1e-10, "x={x}");
        }
        assert!(CoordinateMap::new(&f, MapSign::Minus, Some((0.0, 3.0))).is_err());
    }

    #[test]
    fn numeric_map_matches_shifted_parabola() {
        let f = Family::new(
            Polynomial::from_ints(&[0, 2]),
            Polynomial::from_ints(&[3, -1]),
            Interval::new(Endpoint::Finite(int(0)), Endpoint::PosInf),
        )
        .unwrap();
        let map = CoordinateMap::new(&f, MapSign::Plus, Some((1.0, 2.0))).unwrap();
        // exact: s = (x + c)²/2 with c = 2 − 1
        let (x1, x2) = map.x_domain();
        assert!((x1 + 1.0).abs() < 1e-6 && x2 == f64::INFINITY);
        for x in [-0.5, 0.0, 1.0, 3.0, 8.0] {
            let s = map.s_of_x(x).unwrap();
            assert!((s - (x + 1.0).powi(2) / 2.0).abs() < 1e-9 * (1.0 + s), "x={x}");
        }
    }

    #[test]
    fn wavefunction_examples() {
        let pt = poschl_teller_preset(int(1), int(1)).unwrap();
        let grid = pt.x_grid(41).unwrap();
        for l in 0..=5 {
            let psi = pt.wavefunction(l, 0, &grid).unwrap();
            let target: Vec<f64> = grid.iter().map(|x| ((l + 1) as f64 * x).sin()).collect();
            let ratio = psi[20] / target[20];
            let scaled: Vec<f64> = target.iter().map(|t| t * ratio).collect();
            assert_close(&psi, &scaled, 1e-12, "sin((l+1)x)");
        }
        let her = SchrodingerSystem::new(Family::hermite(), MapSign::Plus, 0).unwrap();
        let grid = her.x_grid(21).unwrap();
        let psi = her.wavefunction(0, 0, &grid).unwrap();
        let exact: Vec<f64> = grid.iter().map(|x| (-x * x / 2.0).exp()).collect();
        assert_close(&psi, &exact, 1e-14, "gaussian");
        assert!(matches!(her.wavefunction(1, 2, &grid), Err(Error::IndexRange(_))));
    }

    #[test]
    fn superpotential_examples() {
        for (mu, eta) in [(1, 1), (2, 2), (2, 3), (1, 4)] {
            let pt = poschl_teller_preset(int(mu), int(eta)).unwrap();
            let grid = pt.x_grid(101).unwrap();
            let w = pt.superpotential(0, &grid).unwrap();
            let exact: Vec<f64> = grid
                .iter()
                .map(|&x| poschl_teller_superpotential(mu as f64, eta as f64, x))
                .collect();
            assert_close(&w, &exact, 1e-12, "W0");
        }
        let pt = poschl_teller_preset(int(1), int(1)).unwrap();
        let grid = pt.x_grid(11).unwrap();
        let w = pt.superpotential(0, &grid).unwrap();
        let cot: Vec<f64> = grid.iter().map(|x| 1.0 / x.tan()).collect();
        assert_close(&w, &cot, 1e-13, "cot");
    }

    #[test]
    fn potential_examples() {
        let pt = poschl_teller_preset(int(1), int(1)).unwrap();
        let grid = pt.x_grid(101).unwrap();
        assert!(pt.potential(0, &grid).unwrap().iter().all(|v| (v + 1.0).abs() < 1e-12));
        for (mu, eta) in [(2.0, 3.0), (1.5, 1.5)] {
            let pt = poschl_teller_preset(Rational::from_float(mu).unwrap(), Rational::from_float(eta).unwrap()).unwrap();
            let grid = pt.x_grid(101).unwrap();
            let v = pt.potential(0, &grid).unwrap();
            let reflected: Vec<f64> = grid.iter().map(|&x| poschl_teller_potential(mu, eta, PI - x)).collect();
            assert_close(&v, &reflected, 1e-10, "V0 reflected");
        }
    }

    #[test]
    fn riccati_and_ground_state_routes_agree() {
        for sys in presets() {
            let grid = sys.x_grid(60).unwrap();
            for m in 0..=3 {
                let w = sys.superpotential(m, &grid).unwrap();
                let w_ground = sys.superpotential_from_ground_state(m, &grid).unwrap();
                assert_close(&w, &w_ground, 1e-8, "W ground");
                let v = sys.potential(m, &grid).unwrap();
                let v_ground = sys.potential_from_ground_state(m, &grid).unwrap();
                assert_close(&v, &v_ground, 1e-8, "V ground");
                let partner = sys.partner_potential(m, &grid).unwrap();
                let next = sys.potential(m + 1, &grid).unwrap();
                assert_close(&partner, &next, 1e-8, "partner");
            }
        }
    }

    #[test]
    fn calligraphic_operators() {
        for sys in presets() {
            let grid = sys.x_grid(40).unwrap();
            for l in 0..=4 {
                for m in 0..l {
                    let lower = sys.wave_samples(l, m, &grid).unwrap();
                    let upper = sys.wave_samples(l, m + 1, &grid).unwrap();
                    let raised = sys.apply_cal_a(m, CalDirection::Lower, &lower).unwrap();
                    assert_close(&raised, &upper.psi, 1e-8, "𝒜 Ψ");
                    let gap = sys.lambda(l) - sys.lambda(m);
                    let back = sys.apply_cal_a(m, CalDirection::Raise, &upper).unwrap();
                    let scaled: Vec<f64> = lower.psi.iter().map(|p| gap * p).collect();
                    assert_close(&back, &scaled, 1e-8, "𝒜⁺ Ψ");
                }
                let top = sys.wave_samples(l, l, &grid).unwrap();
                let killed = sys.apply_cal_a(l, CalDirection::Lower, &top).unwrap();
                assert!(killed.iter().all(|v| v.abs() < 1e-8));
            }
        }
    }

    #[test]
    fn residual_examples() {
        let pt = poschl_teller_preset(int(1), int(1)).unwrap();
        let r = pt.schrodinger_residual(2, 0, 1e-3).unwrap();
        assert!(r.max_residual <= 1e-4 * r.max_psi);
        let her = SchrodingerSystem::new(Family::hermite(), MapSign::Plus, 0).unwrap();
        let r = her.schrodinger_residual(1, 0, 1e-3).unwrap();
        assert!(r.max_residual <= 1e-4 * r.max_psi);
        let ratio = pt.residual_convergence_ratio(2, 0, 1e-2).unwrap();
        assert!((3.6..=4.4).contains(&ratio), "{ratio}");
        assert!(pt.schrodinger_residual(2, 0, 0.2).is_err());
    }

    #[test]
    fn orthonormality_transfers() {
        for sys in presets() {
            for m in 0..=1 {
                for l in m..=m + 3 {
                    for k in m..=m + 3 {
                        let u = crate::ladder::associated_function(sys.family(), l, m).unwrap().value;
                        let v = crate::ladder::associated_function(sys.family(), k, m).unwrap().value;
                        let exact = sys.family().inner_product(&u, &v).unwrap();
                        let diag = sys.family().inner_product(&u, &u).unwrap();
                        let x = sys.transfer_inner_product(l, k, m, 20_000).unwrap();
                        assert!(
                            (x - exact).abs() <= 1e-6 * diag,
                            "{} l={l} k={k} m={m}: {x} vs {exact}",
                            sys.family().label()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_potential_is_reflection_invariant() {
        let pt = poschl_teller_preset(int(2), int(2)).unwrap();
        let grid = pt.x_grid(31).unwrap();
        let mirrored: Vec<f64> = grid.iter().rev().map(|x| PI - x).collect();
        let v = pt.potential(0, &grid).unwrap();
        let vr: Vec<f64> = pt.potential(0, &mirrored).unwrap().into_iter().rev().collect();
        assert_close(&v, &vr, 1e-12, "mirror");
    }

    #[test]
    fn descriptor_and_csv() {
        let pt = poschl_teller_preset(int(1), int(1)).unwrap();
        let d = pt.descriptor();
        assert_eq!(d["sign"], json!(-1));
        assert_eq!(d["map"], json!("cosine"));
        let csv = samples_csv("V", &[1.0], &[-1.0]);
        assert_eq!(csv, "x,V\n1.0000000000000000e0,-1.0000000000000000e0\n");
        assert!(poschl_teller_preset(int(0), int(1)).is_err());
    }
}
