use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A kernel width given either directly or as a multiple of a
/// density-derived length measured on the current cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusMode {
    Fixed(f64),
    Auto(f64),
}

impl RadiusMode {
    /// The fixed width or the multiplier.
    pub fn value(self) -> f64 {
        match self {
            RadiusMode::Fixed(v) | RadiusMode::Auto(v) => v,
        }
    }

    /// Resolve against the density-derived `base` length.
    pub fn resolve(self, base: f64) -> Result<f64> {
        let value = match self {
            RadiusMode::Fixed(v) => v,
            RadiusMode::Auto(mult) => mult * base,
        };
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::InvalidParameter(format!(
                "radius {self} resolved to non-positive value {value}"
            )))
        }
    }
}

impl fmt::Display for RadiusMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusMode::Fixed(v) => write!(f, "{v}"),
            RadiusMode::Auto(m) => write!(f, "auto:{m}"),
        }
    }
}

/// Accepts `"0.05"` or `"auto:4"`; a bare `"auto"` means multiplier 1.
impl FromStr for RadiusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse radius '{s}'"));
        let s = s.trim();
        let mode = if let Some(rest) = s.strip_prefix("auto") {
            let mult = match rest.strip_prefix(':') {
                Some(m) => m.parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            RadiusMode::Auto(mult)
        } else {
            RadiusMode::Fixed(s.parse::<f64>().map_err(|_| bad())?)
        };
        match mode {
            RadiusMode::Fixed(v) | RadiusMode::Auto(v) if v > 0.0 && v.is_finite() => Ok(mode),
            _ => Err(bad()),
        }
    }
}
