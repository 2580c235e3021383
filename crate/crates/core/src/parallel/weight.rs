use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-increasing, non-negative weight `f` applied to the boundary distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightProfile {
    /// `f ≡ c`.
    Constant { c: f64 },
    /// `f(s) = max(c - β s, 0)`.
    TruncatedLinear { c: f64, slope: f64 },
    /// `f(s) = c e^{-λ s}`.
    Exponential { c: f64, rate: f64 },
}

impl WeightProfile {
    pub const UNIT: WeightProfile = WeightProfile::Constant { c: 1.0 };

    pub fn constant(c: f64) -> Result<Self> {
        Self::Constant { c }.validated()
    }

    pub fn truncated_linear(c: f64, slope: f64) -> Result<Self> {
        Self::TruncatedLinear { c, slope }.validated()
    }

    pub fn exponential(c: f64, rate: f64) -> Result<Self> {
        Self::Exponential { c, rate }.validated()
    }

    fn validated(self) -> Result<Self> {
        let (c, k) = match self {
            WeightProfile::Constant { c } => (c, 0.0),
            WeightProfile::TruncatedLinear { c, slope } => (c, slope),
            WeightProfile::Exponential { c, rate } => (c, rate),
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::ZeroWeightAtOrigin(c));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::BadParameter(format!("weight decay parameter must be >= 0, got {k}")));
        }
        Ok(self)
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            WeightProfile::Constant { c } => c,
            WeightProfile::TruncatedLinear { c, slope } => (c - slope * s).max(0.0),
            WeightProfile::Exponential { c, rate } => c * (-rate * s).exp(),
        }
    }

    /// Derivative; at the truncation point of the linear kind the right derivative (0) is used.
    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            WeightProfile::Constant { .. } => 0.0,
            WeightProfile::TruncatedLinear { c, slope } => {
                if c - slope * s > 0.0 {
                    -slope
                } else {
                    0.0
                }
            }
            WeightProfile::Exponential { c, rate } => -rate * c * (-rate * s).exp(),
        }
    }

    /// Points where `f` fails to be differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            WeightProfile::TruncatedLinear { c, slope } if slope > 0.0 => vec![c / slope],
            _ => Vec::new(),
        }
    }

    /// `f(0)`.
    pub fn at_origin(&self) -> f64 {
        self.value(0.0)
    }

    /// `inf f` on `[0, r]`, attained at `r` since `f` is non-increasing.
    pub fn infimum(&self, r: f64) -> f64 {
        self.value(r)
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            WeightProfile::Constant { .. } => true,
            WeightProfile::TruncatedLinear { slope, .. } => slope == 0.0,
            WeightProfile::Exponential { rate, .. } => rate == 0.0,
        }
    }

    /// The same profile multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            WeightProfile::Constant { c } => WeightProfile::Constant { c: c * k },
            WeightProfile::TruncatedLinear { c, slope } => WeightProfile::TruncatedLinear { c: c * k, slope: slope * k },
            WeightProfile::Exponential { c, rate } => WeightProfile::Exponential { c: c * k, rate },
        }
    }

    /// The profile `s ↦ f(s / t)` that goes with the dilated body `tΩ`.
    pub fn dilated(&self, t: f64) -> Self {
        match *self {
            WeightProfile::Constant { c } => WeightProfile::Constant { c },
            WeightProfile::TruncatedLinear { c, slope } => WeightProfile::TruncatedLinear { c, slope: slope / t },
            WeightProfile::Exponential { c, rate } => WeightProfile::Exponential { c, rate: rate / t },
        }
    }

    /// Short name used in tables: `const`, `linear`, `exp`.
    pub fn kind_name(&self) -> &'static str {
        match self {
            WeightProfile::Constant { .. } => "const",
            WeightProfile::TruncatedLinear { .. } => "linear",
            WeightProfile::Exponential { .. } => "exp",
        }
    }
}

/// Parses the command-line forms `const`, `const:c`, `linear:β`, `exp:λ` (unit height).
impl FromStr for WeightProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>, default: f64| -> Result<f64> {
            match a {
                None => Ok(default),
                Some(a) => a
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::BadParameter(format!("bad weight parameter `{a}`"))),
            }
        };
        match kind.trim() {
            "const" | "constant" => WeightProfile::constant(num(arg, 1.0)?),
            "linear" => WeightProfile::truncated_linear(1.0, num(arg, 1.0)?),
            "exp" => WeightProfile::exponential(1.0, num(arg, 1.0)?),
            other => Err(Error::BadParameter(format!("unknown weight kind `{other}`"))),
        }
    }
}

impl fmt::Display for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightProfile::Constant { c } if c == 1.0 => write!(f, "const"),
            WeightProfile::Constant { c } => write!(f, "const:{c}"),
            WeightProfile::TruncatedLinear { c, slope } if c == 1.0 => write!(f, "linear:{slope}"),
            WeightProfile::TruncatedLinear { c, slope } => write!(f, "linear:{slope}@{c}"),
            WeightProfile::Exponential { c, rate } if c == 1.0 => write!(f, "exp:{rate}"),
            WeightProfile::Exponential { c, rate } => write!(f, "exp:{rate}@{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_and_dilation() {
        let f = WeightProfile::truncated_linear(2.0, 3.0).unwrap();
        assert_eq!(f.scaled(4.0).value(0.1), 4.0 * f.value(0.1));
        let g = WeightProfile::exponential(2.0, 3.0).unwrap();
        assert!((g.dilated(5.0).value(0.5) - g.value(0.1)).abs() < 1e-15);
        assert!((f.dilated(5.0).value(0.5) - f.value(0.1)).abs() < 1e-15);
    }

    #[test]
    fn parse_cli_forms() {
        assert_eq!("const".parse::<WeightProfile>().unwrap(), WeightProfile::UNIT);
        assert_eq!(
            "linear:4".parse::<WeightProfile>().unwrap(),
            WeightProfile::TruncatedLinear { c: 1.0, slope: 4.0 }
        );
        assert_eq!(
            "exp:0.5".parse::<WeightProfile>().unwrap(),
            WeightProfile::Exponential { c: 1.0, rate: 0.5 }
        );
        assert!("cubic".parse::<WeightProfile>().is_err());
        assert!("linear:-1".parse::<WeightProfile>().is_err());
        assert!(WeightProfile::constant(0.0).is_err());
    }

    #[test]
    fn values_and_derivatives() {
        let f = WeightProfile::truncated_linear(1.0, 4.0).unwrap();
        assert_eq!(f.value(0.5), 0.0);
        assert_eq!(f.value(0.125), 0.5);
        assert_eq!(f.derivative(0.1), -4.0);
        assert_eq!(f.derivative(0.3), 0.0);
        assert_eq!(f.kinks(), vec![0.25]);
        assert_eq!(f.infimum(0.5), 0.0);

        let e = WeightProfile::exponential(2.0, 1.0).unwrap();
        assert!((e.value(1.0) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        let h = 1e-6;
        let fd = (e.value(0.3 + h) - e.value(0.3 - h)) / (2.0 * h);
        assert!((fd - e.derivative(0.3)).abs() < 1e-9);
    }

    #[test]
    fn display_round_trips() {
        for s in ["const", "linear:2", "exp:0.5"] {
            let w: WeightProfile = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
    }
}
