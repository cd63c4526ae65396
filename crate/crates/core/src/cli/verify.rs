//! Identity suites behind `verify`.

use std::collections::BTreeMap;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::error::{Error, Result};
use crate::exactpoly::{int, to_f64, Polynomial};
use crate::family::Family;
use crate::fockalg::{classify_algebra_at, coherent_state, convergence_radius, EnergyLadder, ExactAction, Radius};
use crate::ladder::{
    adjointness_gap, associated_function, eigen_check, factorization_check, h_cross_check,
    intertwining_check, ladder_check, norm_squared, norm_squared_direct, three_term_check,
};
use crate::output::json_float;
use crate::schrod::{
    poschl_teller_potential, poschl_teller_superpotential, CalDirection, MapSign, SchrodingerSystem,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Ladder,
    Fock,
    Schrod,
    All,
}

/// Named numeric tolerances. Overrides may only tighten.
#[derive(Clone, Debug)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

const DEFAULT_TOLERANCES: [(&str, f64); 13] = [
    ("adjointness", 1e-12),
    ("norm", 1e-12),
    ("explicit_h", 1e-10),
    ("coherent_norm", 1e-12),
    ("coherent_residual", 1e-8),
    ("normalizer_closed_form", 1e-12),
    ("riccati", 1e-8),
    ("ground_state", 1e-8),
    ("partner", 1e-8),
    ("calligraphic", 1e-8),
    ("closed_form", 1e-10),
    ("residual_ratio", 0.4),
    ("transfer", 1e-6),
];

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULT_TOLERANCES.into_iter().collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn tighten(&mut self, name: &str, value: f64) -> Result<()> {
        let (key, default) = DEFAULT_TOLERANCES
            .into_iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::parse("tol", format!("unknown tolerance `{name}`")))?;
        if !(value >= 0.0 && value <= default) {
            return Err(Error::parse(
                "tol",
                format!("`{name}` may only be tightened (default {default:e}, got {value:e})"),
            ));
        }
        self.0.insert(key, value);
        Ok(())
    }
}

/// One identity check. Exact checks report residual 0 or 1 with tolerance 0.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub suite: &'static str,
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub name: String,
    pub k: Option<usize>,
    #[serde(serialize_with = "json_float")]
    pub residual: f64,
    #[serde(serialize_with = "json_float")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub family: String,
    pub suite: Suite,
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckRecord>,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<CheckRecord>,
}

impl Recorder {
    fn exact(&mut self, name: &str, l: Option<usize>, m: Option<usize>, k: Option<usize>, ok: bool) {
        self.checks.push(CheckRecord {
            suite: self.suite,
            l,
            m,
            name: name.into(),
            k,
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: ok,
        });
    }

    fn numeric(&mut self, name: &str, l: Option<usize>, m: Option<usize>, k: Option<usize>, residual: f64, tol: f64) {
        self.checks.push(CheckRecord {
            suite: self.suite,
            l,
            m,
            name: name.into(),
            k,
            residual,
            tolerance: tol,
            pass: residual <= tol,
        });
    }
}

pub fn seed_from_env() -> u64 {
    std::env::var("SPECFACTORY_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

const LADDER_MAX_L: usize = 10;
const QUADRATURE_MAX_L: usize = 8;

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<VerifyReport> {
    let seed = seed_from_env();
    let mut checks = Vec::new();
    if matches!(suite, Suite::Ladder | Suite::All) {
        checks.extend(ladder_suite(&cfg.family, cfg, seed)?);
    }
    if matches!(suite, Suite::Fock | Suite::All) {
        checks.extend(fock_suite(&cfg.family, cfg)?);
    }
    if matches!(suite, Suite::Schrod | Suite::All) {
        checks.extend(schrod_suite(&cfg.family, cfg)?);
    }
    checks.sort_by(|a, b| {
        (a.suite, a.l, a.m, &a.name, a.k).cmp(&(b.suite, b.l, b.m, &b.name, b.k))
    });
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(VerifyReport {
        family: cfg.family.label().to_string(),
        suite,
        seed,
        total: checks.len(),
        passed,
        failed: checks.len() - passed,
        checks,
    })
}

fn ladder_suite(f: &Family, cfg: &RunConfig, seed: u64) -> Result<Vec<CheckRecord>> {
    let tol = &cfg.tolerances;
    let mut rec = Recorder { suite: "ladder", checks: Vec::new() };
    for l in 0..=LADDER_MAX_L {
        for m in 0..=l {
            let (sl, sm) = (Some(l), Some(m));
            rec.exact("eigen", sl, sm, None, eigen_check(f, l, m)?);
            let u = associated_function(f, l, m)?.value;
            rec.numeric("explicit_h", sl, sm, None, h_cross_check(f, m, &u)?, tol.get("explicit_h"));
            if m >= 1 {
                rec.exact("three_term", sl, sm, None, three_term_check(f, l, m)?.is_zero());
            }
            if m < l {
                let (raise, lower) = ladder_check(f, l, m)?;
                rec.exact("raise", sl, sm, None, raise);
                rec.exact("lower", sl, sm, None, lower);
                let (f1, f2) = factorization_check(f, l, m)?;
                rec.exact("factorization_down_up", sl, sm, None, f1);
                rec.exact("factorization_up_down", sl, sm, None, f2);
                let (i1, i2) = intertwining_check(f, l, m)?;
                rec.exact("intertwining_lower", sl, sm, None, i1);
                rec.exact("intertwining_raise", sl, sm, None, i2);
            }
            if l <= QUADRATURE_MAX_L {
                let direct = norm_squared_direct(f, l, m)?;
                let rel = (norm_squared(f, l, m)? - direct).abs() / direct;
                rec.numeric("norm_recursion", sl, sm, None, rel, tol.get("norm"));
            }
        }
    }
    // ⟨A_m Φ_{l,m}, Φ_{k,m+1}⟩ = ⟨Φ_{l,m}, A_m⁺ Φ_{k,m+1}⟩
    for m in 0..QUADRATURE_MAX_L {
        for l in m..=QUADRATURE_MAX_L {
            for k in m + 1..=QUADRATURE_MAX_L {
                let u = associated_function(f, l, m)?.value;
                let v = associated_function(f, k, m + 1)?.value;
                let (gap, scale) = adjointness_gap(f, m, &u, &v)?;
                rec.numeric("adjointness", Some(l), Some(m), Some(k), gap / scale, tol.get("adjointness"));
            }
        }
    }
    // and on seeded random test functions
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..8 {
        let m = rng.gen_range(0..4usize);
        let mut random_poly = |deg: usize| {
            Polynomial::from_ints(&(0..=deg).map(|_| rng.gen_range(-5i64..=5)).collect::<Vec<_>>())
        };
        let u = f.hp(random_poly(5), m as u32);
        let v = f.hp(random_poly(5), m as u32 + 1);
        let (gap, scale) = adjointness_gap(f, m, &u, &v)?;
        rec.numeric("adjointness_random", None, Some(m), Some(trial), gap / scale, tol.get("adjointness"));
    }
    Ok(rec.checks)
}

fn fock_suite(f: &Family, cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let tol = &cfg.tolerances;
    let mut rec = Recorder { suite: "fock", checks: Vec::new() };
    let zs = [
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    for m in 0..=2 {
        let ladder = EnergyLadder::new(f, m);
        for n in 0..=20 {
            let act = ExactAction::identity(n).lower(&ladder).raise(&ladder);
            let e = ladder.e(n);
            let ok = if n == 0 {
                act.target.is_none()
            } else {
                act.target == Some(n) && act.amplitude_sq == &e * &e
            };
            rec.exact("number_operator", None, Some(m), Some(n), ok);
        }
        rec.exact("commutator_signature", None, Some(m), None, classify_algebra_at(f, m).signature_consistent);
        let radius = convergence_radius(f, m, 30)?;
        let increasing = radius.diagnostics.windows(2).all(|w| w[1] > w[0]);
        rec.exact("radius_infinite", None, Some(m), None, radius.radius == Radius::Infinite && increasing);
        for (i, z) in zs.iter().enumerate() {
            let cs = coherent_state(f, m, *z, cfg.trunc)?;
            let norm_gap = (cs.to_fock().norm_squared() - 1.0).abs();
            rec.numeric("coherent_norm", None, Some(m), Some(i), norm_gap, tol.get("coherent_norm"));
            rec.numeric("coherent_residual", None, Some(m), Some(i), cs.residual, tol.get("coherent_residual"));
        }
        // e_n = n·e₁ whenever σ″ = 0, so N² = exp(|z|²/e₁)
        if f.sigma_second() == int(0) {
            let cs = coherent_state(f, m, Complex64::new(1.0, 0.0), cfg.trunc)?;
            let expected = (1.0 / to_f64(&ladder.e(1))).exp();
            let rel = (cs.normalizer_squared - expected).abs() / expected;
            rec.numeric("normalizer_closed_form", None, Some(m), None, rel, tol.get("normalizer_closed_form"));
        }
    }
    Ok(rec.checks)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
        .fold(0.0, f64::max)
}

fn schrod_suite(f: &Family, cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let tol = &cfg.tolerances;
    let mut rec = Recorder { suite: "schrod", checks: Vec::new() };
    let sys = SchrodingerSystem::new(f.clone(), cfg.sign, 0)?;
    let grid = sys.x_grid(60)?;
    for m in 0..=3 {
        let sm = Some(m);
        let w = sys.superpotential(m, &grid)?;
        let w_ground = sys.superpotential_from_ground_state(m, &grid)?;
        rec.numeric("ground_state_superpotential", None, sm, None, max_gap(&w_ground, &w), tol.get("ground_state"));
        let v = sys.potential(m, &grid)?;
        let v_ground = sys.potential_from_ground_state(m, &grid)?;
        rec.numeric("riccati", None, sm, None, max_gap(&v_ground, &v), tol.get("riccati"));
        if m <= 2 {
            let partner = sys.partner_potential(m, &grid)?;
            let next = sys.potential(m + 1, &grid)?;
            rec.numeric("partner", None, sm, None, max_gap(&partner, &next), tol.get("partner"));
        }
    }
    for l in 0..=4 {
        for m in 0..=l {
            let (sl, sm) = (Some(l), Some(m));
            if m < l {
                let lower = sys.wave_samples(l, m, &grid)?;
                let upper = sys.wave_samples(l, m + 1, &grid)?;
                let up = sys.apply_cal_a(m, CalDirection::Lower, &lower)?;
                rec.numeric("calligraphic_lower", sl, sm, None, max_gap(&up, &upper.psi), tol.get("calligraphic"));
                let gap = sys.lambda(l) - sys.lambda(m);
                let down = sys.apply_cal_a(m, CalDirection::Raise, &upper)?;
                let target: Vec<f64> = lower.psi.iter().map(|p| gap * p).collect();
                rec.numeric("calligraphic_raise", sl, sm, None, max_gap(&down, &target), tol.get("calligraphic"));
            }
            if m <= 2 {
                let ratio = sys.residual_convergence_ratio(l, m, 1e-2)?;
                rec.numeric("residual_order", sl, sm, None, (ratio - 4.0).abs(), tol.get("residual_ratio"));
            }
        }
    }
    for l in 0..=3 {
        for k in l..=3 {
            let u = associated_function(f, l, 0)?.value;
            let v = associated_function(f, k, 0)?.value;
            let exact = f.inner_product(&u, &v)?;
            let scale = (f.inner_product(&u, &u)? * f.inner_product(&v, &v)?).sqrt();
            let transferred = sys.transfer_inner_product(l, k, 0, 20_000)?;
            rec.numeric("orthonormality_transfer", Some(l), Some(0), Some(k), (transferred - exact).abs() / scale, tol.get("transfer"));
        }
    }
    if let Some((mu, eta)) = poschl_teller_parameters(f, cfg.sign) {
        let dense = sys.x_grid(500)?;
        let w = sys.superpotential(0, &dense)?;
        let closed: Vec<f64> = dense.iter().map(|&x| poschl_teller_superpotential(mu, eta, x)).collect();
        rec.numeric("poschl_teller_superpotential", None, Some(0), None, max_gap(&w, &closed), tol.get("closed_form"));
        let v = sys.potential(0, &dense)?;
        let closed: Vec<f64> = dense
            .iter()
            .map(|&x| poschl_teller_potential(mu, eta, std::f64::consts::PI - x))
            .collect();
        rec.numeric("poschl_teller_potential", None, Some(0), None, max_gap(&v, &closed), tol.get("closed_form"));
    }
    Ok(rec.checks)
}

/// `(μ, η) = (α + ½, β + ½)` for Jacobi families under `s = cos x`.
fn poschl_teller_parameters(f: &Family, sign: MapSign) -> Option<(f64, f64)> {
    let (alpha, beta) = f.jacobi_parameters()?;
    let (mu, eta) = (to_f64(&alpha) + 0.5, to_f64(&beta) + 0.5);
    (sign == MapSign::Minus && mu > 0.0 && eta > 0.0).then_some((mu, eta))
}
