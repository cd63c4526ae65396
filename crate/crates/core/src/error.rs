use std::fmt;

use thiserror::Error;

/// Reasons a (σ, τ, interval) triple is rejected as a hypergeometric-type family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SigmaDegree(usize),
    TauDegree(usize),
    /// τ′ ≥ 0 (includes constant τ).
    TauSlopeNonNegative,
    /// σ″ > 0.
    SigmaCurvaturePositive,
    /// a ≥ b or an endpoint given as the wrong infinity.
    EmptyInterval,
    /// σ(s) ≤ 0 somewhere in (a, b).
    SigmaNonPositive,
    /// σ has real roots that are not rational.
    IrrationalRoots,
    /// σρsᵏ does not vanish at the named endpoint.
    BoundaryCondition(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SigmaDegree(d) => write!(f, "sigma has degree {d}, at most 2 allowed"),
            Violation::TauDegree(d) => write!(f, "tau has degree {d}, at most 1 allowed"),
            Violation::TauSlopeNonNegative => write!(f, "tau' must be negative"),
            Violation::SigmaCurvaturePositive => write!(f, "sigma'' must be non-positive"),
            Violation::EmptyInterval => write!(f, "interval (a, b) is empty"),
            Violation::SigmaNonPositive => write!(f, "sigma is not positive on (a, b)"),
            Violation::IrrationalRoots => write!(f, "sigma has irrational roots (unsupported)"),
            Violation::BoundaryCondition(end) => write!(
                f,
                "boundary condition fails at endpoint {end}: sigma*rho*s^k does not vanish"
            ),
        }
    }
}

impl Violation {
    /// Stable machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::SigmaDegree(_) => "sigma_degree",
            Violation::TauDegree(_) => "tau_degree",
            Violation::TauSlopeNonNegative => "tau_slope_non_negative",
            Violation::SigmaCurvaturePositive => "sigma_curvature_positive",
            Violation::EmptyInterval => "empty_interval",
            Violation::SigmaNonPositive => "sigma_non_positive",
            Violation::IrrationalRoots => "irrational_roots",
            Violation::BoundaryCondition(_) => "boundary_condition",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible family: {0}")]
    Admissibility(Violation),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("half-power mismatch: operator expects k = {expected}, got k = {found}")]
    HalfPowerMismatch { expected: u32, found: u32 },

    #[error("half-power functions refer to different sigma polynomials")]
    SigmaMismatch,

    #[error("index out of range: {0}")]
    IndexRange(String),

    #[error("integrand has odd total half power; not a polynomial times the weight")]
    UnsupportedIntegrand,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical method failed to converge: {0}")]
    NonConvergence(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Admissibility(v)
    }
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
