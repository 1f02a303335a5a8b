use crate::error::{Result, ScreenError};

/// Response, covariates and optional exposure for one screening problem.
///
/// Covariates are stored column-major: `covariates[j][i]` is observation `i`
/// of predictor `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub response: Vec<f64>,
    pub covariates: Vec<Vec<f64>>,
    pub exposure: Option<Vec<f64>>,
    pub names: Vec<String>,
    pub response_name: String,
    pub exposure_name: Option<String>,
}

impl Dataset {
    /// Builds a dataset with generated covariate names `X1..Xp`.
    pub fn new(response: Vec<f64>, covariates: Vec<Vec<f64>>, exposure: Option<Vec<f64>>) -> Result<Self> {
        let names = (1..=covariates.len()).map(|j| format!("X{j}")).collect();
        Self::with_names(response, covariates, exposure, names)
    }

    pub fn with_names(
        response: Vec<f64>,
        covariates: Vec<Vec<f64>>,
        exposure: Option<Vec<f64>>,
        names: Vec<String>,
    ) -> Result<Self> {
        let ds = Dataset {
            response,
            covariates,
            exposure,
            names,
            response_name: "y".to_string(),
            exposure_name: None,
        };
        ds.check_shape()?;
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.covariates[j]
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.response.len();
        if self.names.len() != self.covariates.len() {
            return Err(ScreenError::invalid(format!(
                "{} names supplied for {} covariates",
                self.names.len(),
                self.covariates.len()
            )));
        }
        for (j, col) in self.covariates.iter().enumerate() {
            if col.len() != n {
                return Err(ScreenError::invalid(format!(
                    "covariate '{}' has {} rows, response has {n}",
                    self.names[j],
                    col.len()
                )));
            }
        }
        if let Some(z) = &self.exposure {
            if z.len() != n {
                return Err(ScreenError::invalid(format!("exposure has {} rows, response has {n}", z.len())));
            }
        }
        Ok(())
    }

    /// Rejects empty designs and non-finite values, naming the offending column.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if self.p() == 0 {
            return Err(ScreenError::invalid("dataset has no covariates (p = 0)"));
        }
        if self.n() < 2 {
            return Err(ScreenError::invalid(format!("need at least 2 observations, got {}", self.n())));
        }
        if let Some(i) = self.response.iter().position(|v| !v.is_finite()) {
            return Err(ScreenError::invalid(format!(
                "response '{}' has a non-finite value at row {}",
                self.response_name,
                i + 1
            )));
        }
        for (j, col) in self.covariates.iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(ScreenError::invalid(format!(
                    "column '{}' has a non-finite value at row {}",
                    self.names[j],
                    i + 1
                )));
            }
        }
        if let Some(z) = &self.exposure {
            if let Some(i) = z.iter().position(|v| !v.is_finite()) {
                return Err(ScreenError::invalid(format!("exposure has a non-finite value at row {}", i + 1)));
            }
        }
        Ok(())
    }
}
