pub mod cli;
pub mod error;
pub mod exactpoly;
pub mod family;
pub mod fockalg;
pub mod ladder;
pub mod output;
pub mod schrod;

pub use error::{Error, Result, Violation};
pub use exactpoly::{HalfPowerFunction, Polynomial, Rational};
pub use family::{ClassTag, Endpoint, Family, Interval, Preset, QuadratureRule, WeightDescriptor};
