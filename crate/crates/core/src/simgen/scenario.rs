use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::noise::Noise;
use crate::error::{Result, ScreenError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Linear model on AR(1) Gaussian latents with Cauchy contamination.
    E1,
    /// Models (b1)-(b4) on contaminated AR(1) latents.
    E2b1,
    E2b2,
    E2b3,
    E2b4,
    /// Additive nonparametric model on equicorrelated uniforms.
    E3,
    /// Varying-coefficient model with a uniform exposure and calibrated signal.
    E4,
    /// Models (d1)-(d3) with a uniform exposure.
    E5d1,
    E5d2,
    E5d3,
    /// Exposure correlated with the latent covariates.
    E6,
    /// Linear logistic.
    S1,
    /// Nonlinear logistic.
    S2,
    /// Linear Poisson.
    S3,
    /// Nonlinear Poisson on equicorrelated uniforms.
    S4,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 15] = [
        ScenarioId::E1,
        ScenarioId::E2b1,
        ScenarioId::E2b2,
        ScenarioId::E2b3,
        ScenarioId::E2b4,
        ScenarioId::E3,
        ScenarioId::E4,
        ScenarioId::E5d1,
        ScenarioId::E5d2,
        ScenarioId::E5d3,
        ScenarioId::E6,
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::E1 => "E1",
            ScenarioId::E2b1 => "E2b1",
            ScenarioId::E2b2 => "E2b2",
            ScenarioId::E2b3 => "E2b3",
            ScenarioId::E2b4 => "E2b4",
            ScenarioId::E3 => "E3",
            ScenarioId::E4 => "E4",
            ScenarioId::E5d1 => "E5d1",
            ScenarioId::E5d2 => "E5d2",
            ScenarioId::E5d3 => "E5d3",
            ScenarioId::E6 => "E6",
            ScenarioId::S1 => "S1",
            ScenarioId::S2 => "S2",
            ScenarioId::S3 => "S3",
            ScenarioId::S4 => "S4",
        }
    }

    pub fn valid_ids() -> String {
        Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }

    /// Truly active covariates, 1-based as in the model formulas.
    pub fn active_one_based(self) -> &'static [usize] {
        match self {
            ScenarioId::E1 => &[1, 2, 3, 4, 5],
            ScenarioId::E2b1 => &[1, 2, 10],
            ScenarioId::E2b2 | ScenarioId::E2b3 | ScenarioId::E2b4 => &[1, 2, 3, 4],
            ScenarioId::E3 | ScenarioId::E6 => &[1, 2, 3, 4],
            ScenarioId::E4 | ScenarioId::E5d1 | ScenarioId::E5d2 => &[1, 2, 3],
            ScenarioId::E5d3 => &[2, 100, 400, 600],
            ScenarioId::S1 | ScenarioId::S2 | ScenarioId::S3 | ScenarioId::S4 => &[1, 2, 100, 400],
        }
    }

    pub fn has_exposure(self) -> bool {
        matches!(self, ScenarioId::E4 | ScenarioId::E5d1 | ScenarioId::E5d2 | ScenarioId::E5d3 | ScenarioId::E6)
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, ScenarioId::S1 | ScenarioId::S2 | ScenarioId::S3 | ScenarioId::S4)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = ScreenError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| ScreenError::invalid(format!("unknown scenario '{s}'; valid ids: {}", Self::valid_ids())))
    }
}

/// One simulation design with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub id: ScenarioId,
    pub n: usize,
    pub p: usize,
    pub rho0: f64,
    /// Weight on the latent covariates in `w0 X0 + (1 - w0) E`.
    pub w0: f64,
    /// Target signal share `var(mu)/var(Y)` (E4 only).
    pub r2: f64,
    /// Model error.
    pub error: Noise,
    /// Covariate case 1-4 of the discrete-response designs.
    pub case: u8,
    /// Coefficients of models (b2)-(b4).
    pub beta: [f64; 4],
    pub seed: u64,
}

impl SimScenario {
    /// The design with its default parameters.
    pub fn new(id: ScenarioId) -> Self {
        let (n, rho0, w0, error) = match id {
            ScenarioId::E1 => (100, 0.8, 0.8, Noise::CAUCHY),
            ScenarioId::E2b1 => (100, 0.5, 0.8, Noise::CAUCHY),
            ScenarioId::E2b2 | ScenarioId::E2b3 => (200, 0.8, 0.8, Noise::CAUCHY),
            ScenarioId::E2b4 => (200, 0.5, 0.8, Noise::CAUCHY),
            ScenarioId::E3 => (200, 0.4, 1.0, Noise::CAUCHY_THIRD),
            ScenarioId::E4 => (200, 0.8, 1.0, Noise::CAUCHY_THIRD),
            ScenarioId::E5d1 | ScenarioId::E5d2 | ScenarioId::E5d3 => (200, 0.8, 0.8, Noise::CAUCHY_THIRD),
            ScenarioId::E6 => (200, 0.4, 0.8, Noise::CAUCHY_THIRD),
            ScenarioId::S1 | ScenarioId::S2 | ScenarioId::S3 | ScenarioId::S4 => (200, 0.4, 1.0, Noise::Zero),
        };
        SimScenario { id, n, p: 1000, rho0, w0, r2: 0.3, error, case: 1, beta: [1.0; 4], seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Active covariates as 0-based column indices.
    pub fn active_set(&self) -> Vec<usize> {
        self.id.active_one_based().iter().map(|j| j - 1).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let max_active = *self.id.active_one_based().iter().max().expect("nonempty active set");
        if self.p < max_active {
            return Err(ScreenError::invalid(format!(
                "scenario {} needs p >= {max_active}, got {}",
                self.id, self.p
            )));
        }
        if self.n < 2 {
            return Err(ScreenError::invalid(format!("scenario needs n >= 2, got {}", self.n)));
        }
        if !(self.rho0.abs() < 1.0) {
            return Err(ScreenError::invalid(format!("rho0 must satisfy |rho0| < 1, got {}", self.rho0)));
        }
        if !(self.w0 > 0.0 && self.w0 <= 1.0) {
            return Err(ScreenError::invalid(format!("w0 must lie in (0, 1], got {}", self.w0)));
        }
        if self.id == ScenarioId::E4 && !(self.r2 > 0.0 && self.r2 < 1.0) {
            return Err(ScreenError::invalid(format!("R^2 target must lie in (0, 1), got {}", self.r2)));
        }
        if self.id.is_discrete() && !(1..=4).contains(&self.case) {
            return Err(ScreenError::invalid(format!("case must be 1-4, got {}", self.case)));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. `scenario` must come
    /// first among the keys since it sets the defaults the others override.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut scenario: Option<SimScenario> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ScreenError::invalid(format!("config line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "scenario" {
                if scenario.is_some() {
                    return Err(ScreenError::invalid(format!("config line {}: scenario given twice", lineno + 1)));
                }
                scenario = Some(SimScenario::new(value.parse()?));
                continue;
            }
            let sc = scenario.as_mut().ok_or_else(|| {
                ScreenError::invalid(format!("config line {}: 'scenario' must precede '{key}'", lineno + 1))
            })?;
            sc.set(key, value).map_err(|e| ScreenError::invalid(format!("config line {}: {e}", lineno + 1)))?;
        }
        let sc = scenario.ok_or_else(|| ScreenError::invalid("config has no 'scenario' key"))?;
        sc.validate()?;
        Ok(sc)
    }

    /// Overrides one parameter from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| ScreenError::invalid(format!("bad value '{value}' for '{key}'")))
        }
        match key {
            "n" => self.n = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "rho0" => self.rho0 = parse(key, value)?,
            "w0" => self.w0 = parse(key, value)?,
            "r2" => self.r2 = parse(key, value)?,
            "case" => self.case = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "error" => self.error = value.parse()?,
            "beta" => {
                let vals: Vec<f64> = value.split(',').map(|v| parse(key, v.trim())).collect::<Result<_>>()?;
                self.beta = vals
                    .try_into()
                    .map_err(|_| ScreenError::invalid("beta needs exactly 4 comma-separated values"))?;
            }
            other => return Err(ScreenError::invalid(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "scenario = {}\nn = {}\np = {}\nrho0 = {}\nw0 = {}\nr2 = {}\nerror = {}\ncase = {}\nbeta = {}\nseed = {}\n",
            self.id,
            self.n,
            self.p,
            self.rho0,
            self.w0,
            self.r2,
            self.error,
            self.case,
            self.beta.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
            self.seed
        )
    }
}
