use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};

/// Error and contamination distributions used by the simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Noise {
    Zero,
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64 },
    Cauchy { scale: f64 },
    /// Equal mixture of N(-2, 1) and N(2, 1).
    MixedNormal,
}

impl Noise {
    pub const CAUCHY: Noise = Noise::Cauchy { scale: 1.0 };
    pub const CAUCHY_THIRD: Noise = Noise::Cauchy { scale: 1.0 / 3.0 };
    pub const T3: Noise = Noise::StudentT { df: 3.0 };

    /// `sqrt(1.74) N(0, 1)`.
    pub fn scaled_normal() -> Noise {
        Noise::Normal { mean: 0.0, sd: 1.74f64.sqrt() }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Noise::Zero => 0.0,
            Noise::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Noise::StudentT { df } => StudentT::new(df).expect("positive degrees of freedom").sample(rng),
            Noise::Cauchy { scale } => {
                let u: f64 = rng.random();
                scale * (std::f64::consts::PI * (u - 0.5)).tan()
            }
            Noise::MixedNormal => {
                let z: f64 = StandardNormal.sample(rng);
                let centre = if rng.random::<bool>() { 2.0 } else { -2.0 };
                centre + z
            }
        }
    }

    /// Population variance, `None` when it does not exist.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            Noise::Zero => Some(0.0),
            Noise::Normal { sd, .. } => Some(sd * sd),
            Noise::StudentT { df } if df > 2.0 => Some(df / (df - 2.0)),
            Noise::StudentT { .. } | Noise::Cauchy { .. } => None,
            Noise::MixedNormal => Some(5.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Noise::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            Noise::StudentT { df } => df.is_finite() && df > 0.0,
            Noise::Cauchy { scale } => scale.is_finite() && scale > 0.0,
            Noise::Zero | Noise::MixedNormal => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ScreenError::invalid(format!("invalid noise parameters: {self}")))
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Noise::Zero => write!(f, "none"),
            Noise::Cauchy { scale } if scale == 1.0 => write!(f, "cauchy"),
            Noise::Cauchy { scale } if scale == 1.0 / 3.0 => write!(f, "cauchy/3"),
            Noise::Cauchy { scale } => write!(f, "cauchy:{scale}"),
            Noise::StudentT { df } if df == 3.0 => write!(f, "t3"),
            Noise::StudentT { df } => write!(f, "t:{df}"),
            Noise::Normal { mean, sd } if mean == 0.0 && sd == 1.74f64.sqrt() => write!(f, "normal"),
            Noise::Normal { mean, sd } => write!(f, "normal:{mean}:{sd}"),
            Noise::MixedNormal => write!(f, "mixnormal"),
        }
    }
}

impl FromStr for Noise {
    type Err = ScreenError;

    /// Accepts `none`, `cauchy`, `cauchy/3`, `t3`, `normal` (sqrt(1.74) N(0,1)),
    /// `mixnormal`, and the parametric forms `cauchy:SCALE`, `t:DF`,
    /// `normal:MEAN:SD`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| ScreenError::invalid(format!("bad number '{v}' in noise spec '{s}'")))
        };
        let parts: Vec<&str> = lower.split(':').collect();
        let noise = match parts.as_slice() {
            ["none"] | ["zero"] => Noise::Zero,
            ["cauchy"] => Noise::CAUCHY,
            ["cauchy/3"] => Noise::CAUCHY_THIRD,
            ["t3"] => Noise::T3,
            ["normal"] => Noise::scaled_normal(),
            ["mixnormal"] => Noise::MixedNormal,
            ["cauchy", scale] => Noise::Cauchy { scale: num(scale)? },
            ["t", df] => Noise::StudentT { df: num(df)? },
            ["normal", mean, sd] => Noise::Normal { mean: num(mean)?, sd: num(sd)? },
            _ => {
                return Err(ScreenError::invalid(format!(
                    "unknown noise '{s}' (expected none, cauchy, cauchy/3, t3, normal, mixnormal, cauchy:S, t:DF, normal:M:S)"
                )))
            }
        };
        noise.validate()?;
        Ok(noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_text() {
        for s in ["none", "cauchy", "cauchy/3", "t3", "normal", "mixnormal", "cauchy:2.5", "t:5", "normal:5:1"] {
            let n: Noise = s.parse().unwrap();
            assert_eq!(n.to_string().parse::<Noise>().unwrap(), n);
        }
        assert!("gamma".parse::<Noise>().is_err());
        assert!("cauchy:-1".parse::<Noise>().is_err());
    }

    #[test]
    fn variances() {
        assert_eq!(Noise::T3.variance(), Some(3.0));
        assert_eq!(Noise::CAUCHY.variance(), None);
        assert!((Noise::scaled_normal().variance().unwrap() - 1.74).abs() < 1e-12);
    }
}
