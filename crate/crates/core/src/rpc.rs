//! Robust partial correlation screening: remove the exposure effect from the
//! response and every covariate with a spline regression, then screen the
//! residuals with the robust correlation utility.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::empirical::JointCounts;
use crate::error::{Result, ScreenError};
use crate::rc::{rc_utility, rho_hat, RankedResponse};
use crate::screening::{Method, ScreeningReport, ThresholdMode};
use crate::spline::{Design, IrlsConfig, Loss, SplineBasis, SplineFit};
use crate::stats::{mean, median};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub degree: usize,
    /// Number of basis functions.
    pub dim: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { degree: 3, dim: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub jitter_applied: bool,
}

impl From<&SplineFit> for FitDiagnostics {
    fn from(fit: &SplineFit) -> Self {
        FitDiagnostics { iterations: fit.iterations, converged: fit.converged, jitter_applied: fit.jitter_applied }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMatrix {
    pub eps_y: Vec<f64>,
    /// Column-major, one residual vector per covariate.
    pub eps_x: Vec<Vec<f64>>,
    pub loss: Loss,
    pub response_fit: FitDiagnostics,
    pub covariate_fits: Vec<FitDiagnostics>,
}

fn centre(w: &[f64], loss: Loss) -> Vec<f64> {
    let c = match loss {
        Loss::L2 => mean(w),
        Loss::L1 => median(w),
    };
    w.iter().map(|v| v - c).collect()
}

/// Residuals of the response and every covariate after a spline regression on
/// the exposure, all sharing one basis built from the exposure sample.
///
/// A constant exposure falls back to mean (L2) or median (L1) centring.
pub fn residualize(dataset: &Dataset, basis_config: &BasisConfig, loss: Loss, irls: &IrlsConfig) -> Result<ResidualMatrix> {
    dataset.validate()?;
    let z = dataset
        .exposure
        .as_deref()
        .ok_or_else(|| ScreenError::invalid("robust partial correlation screening needs an exposure column"))?;
    let n = dataset.n();

    if z.iter().all(|&v| v == z[0]) {
        log::warn!("exposure is constant; residualizing by {} centring", if loss == Loss::L2 { "mean" } else { "median" });
        let trivial = FitDiagnostics { iterations: 0, converged: true, jitter_applied: false };
        return Ok(ResidualMatrix {
            eps_y: centre(&dataset.response, loss),
            eps_x: dataset.covariates.iter().map(|c| centre(c, loss)).collect(),
            loss,
            response_fit: trivial,
            covariate_fits: vec![trivial; dataset.p()],
        });
    }

    if n < basis_config.dim + 2 {
        return Err(ScreenError::invalid(format!(
            "n = {n} is too small for a spline basis of dimension {} (need n >= dim + 2)",
            basis_config.dim
        )));
    }
    let basis = SplineBasis::build(z, basis_config.degree, basis_config.dim)?;
    let design = Design::new(&basis, z)?;

    let residual = |w: &[f64], name: &str| -> Result<(Vec<f64>, FitDiagnostics)> {
        let fit = match loss {
            Loss::L2 => design.fit_l2(w),
            Loss::L1 => design.fit_l1(w, irls, name).map_err(|e| match e {
                ScreenError::SingularDesign { detail, .. } => {
                    ScreenError::SingularDesign { target: name.to_string(), detail }
                }
                other => other,
            })?,
        };
        let fitted = design.fitted(&fit.gamma);
        Ok((w.iter().zip(&fitted).map(|(w, f)| w - f).collect(), FitDiagnostics::from(&fit)))
    };

    let (eps_y, response_fit) = residual(&dataset.response, &dataset.response_name)?;
    let fitted: Vec<(Vec<f64>, FitDiagnostics)> = dataset
        .covariates
        .par_iter()
        .zip(dataset.names.par_iter())
        .map(|(col, name)| residual(col, name))
        .collect::<Result<_>>()?;
    let (eps_x, covariate_fits) = fitted.into_iter().unzip();
    Ok(ResidualMatrix { eps_y, eps_x, loss, response_fit, covariate_fits })
}

/// Robust partial correlation at residual point `(u, v)`.
pub fn rpc_estimate(u: f64, v: f64, eps_y: &[f64], eps_x: &[f64]) -> Result<f64> {
    rho_hat(u, v, &JointCounts::build(eps_y, eps_x)?)
}

/// `(1/n) sum_i rho_hat^2` over the residual pairs.
pub fn rpc_utility(eps_y: &[f64], eps_x: &[f64]) -> Result<f64> {
    rc_utility(eps_y, eps_x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcUtilityVector {
    pub utilities: Vec<f64>,
    pub loss: Loss,
}

pub fn rpc_utilities(residuals: &ResidualMatrix) -> Result<RpcUtilityVector> {
    let ranked = RankedResponse::new(&residuals.eps_y)?;
    let utilities = residuals.eps_x.par_iter().map(|col| ranked.utility(col)).collect();
    Ok(RpcUtilityVector { utilities, loss: residuals.loss })
}

pub fn rpc_screen(
    dataset: &Dataset,
    loss: Loss,
    basis_config: &BasisConfig,
    irls: &IrlsConfig,
    mode: ThresholdMode,
) -> Result<ScreeningReport> {
    let residuals = residualize(dataset, basis_config, loss, irls)?;
    let u = rpc_utilities(&residuals)?;
    let method = match loss {
        Loss::L2 => Method::RpcL2,
        Loss::L1 => Method::RpcL1,
    };
    Ok(ScreeningReport::from_utilities(method, dataset.n(), u.utilities, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rc::rc_screen;

    fn toy(n: usize) -> Dataset {
        let z: Vec<f64> = (0..n).map(|i| ((i * 31) % n) as f64 / n as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 17) % 23) as f64 + z[i]).collect();
        let x1: Vec<f64> = z.iter().map(|v| v * v - 2.0 * v).collect();
        let x2: Vec<f64> = (0..n).map(|i| ((i * 13) % 29) as f64).collect();
        Dataset::new(y, vec![x1, x2], Some(z)).unwrap()
    }

    #[test]
    fn in_space_covariate_has_zero_residual() {
        let ds = toy(80);
        let r = residualize(&ds, &BasisConfig::default(), Loss::L2, &IrlsConfig::default()).unwrap();
        assert!(r.eps_x[0].iter().all(|v| v.abs() <= 1e-6));
        // Constants are in the spline space, so L2 residuals are mean-zero.
        for col in r.eps_x.iter().chain(std::iter::once(&r.eps_y)) {
            let scale = col.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(mean(col).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn missing_exposure_is_an_error() {
        let mut ds = toy(30);
        ds.exposure = None;
        assert!(rpc_screen(&ds, Loss::L1, &BasisConfig::default(), &IrlsConfig::default(), ThresholdMode::TopD(1)).is_err());
    }

    #[test]
    fn constant_exposure_reduces_to_centred_rc() {
        let mut ds = toy(50);
        ds.exposure = Some(vec![0.5; 50]);
        let rpc = rpc_screen(&ds, Loss::L2, &BasisConfig::default(), &IrlsConfig::default(), ThresholdMode::TopD(1)).unwrap();
        let centred = Dataset::new(
            centre(&ds.response, Loss::L2),
            ds.covariates.iter().map(|c| centre(c, Loss::L2)).collect(),
            None,
        )
        .unwrap();
        let rc = rc_screen(&centred, ThresholdMode::TopD(1)).unwrap();
        assert_eq!(rpc.utilities, rc.utilities);
        assert_eq!(rpc.method, Method::RpcL2);
    }

    #[test]
    fn residual_copy_of_response_ranks_first() {
        let ds = toy(60);
        let r = residualize(&ds, &BasisConfig::default(), Loss::L2, &IrlsConfig::default()).unwrap();
        assert_eq!(rpc_utility(&r.eps_y, &r.eps_y).unwrap(), 1.0);
        let med = median(&r.eps_y);
        let joint_median = r.eps_y.iter().copied().filter(|v| *v <= med).fold(f64::MIN, f64::max);
        assert_eq!(rpc_estimate(joint_median, joint_median, &r.eps_y, &r.eps_y).unwrap(), 1.0);
    }
}
