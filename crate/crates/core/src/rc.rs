//! Robust correlation screening.
//!
//! The robust correlation at `(y, x)` is the Pearson correlation of the
//! indicators `I(Y <= y)` and `I(X <= x)`. Its estimate plugs rescaled
//! empirical CDFs into that correlation; the screening utility averages its
//! square over the sample points. Everything depends on the data through
//! ranks only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::empirical::{dominance_counts, marginal_counts, JointCounts, SortedOrder};
use crate::error::{Result, ScreenError};
use crate::rng::stream_rng;
use crate::screening::{Method, ScreeningReport, ThresholdMode};
use crate::stats::{mean, normal_quantile, quantile};

/// Robust correlation from integer counts.
///
/// `joint`, `cy` and `cx` count sample points dominated jointly, in `y` and in
/// `x`. With `m = n + 1` the rescaled estimate reduces to
/// `(m joint - cy cx) / sqrt(cy (m - cy) cx (m - cx))`. Returns 0 when a
/// marginal count is zero.
pub fn rho_from_counts(joint: u64, cy: u64, cx: u64, n: u64) -> f64 {
    if cy == 0 || cx == 0 {
        return 0.0;
    }
    let m = (n + 1) as i128;
    let (j, cy, cx) = (joint as i128, cy as i128, cx as i128);
    let num = m * j - cy * cx;
    let den = (cy * (m - cy)) * (cx * (m - cx));
    num as f64 / (den as f64).sqrt()
}

/// Robust correlation estimate at the query point `(y, x)`.
pub fn rho_hat(y: f64, x: f64, sample: &JointCounts) -> Result<f64> {
    let n = sample.n();
    if n < 2 {
        return Err(ScreenError::invalid(format!("rho_hat needs n >= 2, got {n}")));
    }
    let cy = sample.y().iter().filter(|&&v| v <= y).count() as u64;
    let cx = sample.x().iter().filter(|&&v| v <= x).count() as u64;
    let joint = sample.count_le(y, x) as u64;
    Ok(rho_from_counts(joint, cy, cx, n as u64))
}

/// Response-side ranks, computed once and reused for every covariate.
#[derive(Debug, Clone)]
pub struct RankedResponse {
    order: SortedOrder,
}

impl RankedResponse {
    pub fn new(y: &[f64]) -> Result<Self> {
        if y.len() < 2 {
            return Err(ScreenError::invalid(format!("need n >= 2, got {}", y.len())));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(ScreenError::invalid(format!("response has a non-finite value at index {i}")));
        }
        Ok(RankedResponse { order: SortedOrder::new(y) })
    }

    pub fn n(&self) -> usize {
        self.order.counts.len()
    }

    /// `(1/n) sum_i rho_hat^2(Y_i, X_i)`; `x` must be finite with length `n`.
    pub fn utility(&self, x: &[f64]) -> f64 {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        let cx = marginal_counts(x);
        let joint = dominance_counts(&self.order, &cx);
        let cy = &self.order.counts;
        let mut sum = 0.0;
        for i in 0..n {
            let r = rho_from_counts(joint[i] as u64, cy[i] as u64, cx[i] as u64, n as u64);
            sum += r * r;
        }
        sum / n as f64
    }
}

fn check_column(x: &[f64], n: usize, name: &str) -> Result<()> {
    if x.len() != n {
        return Err(ScreenError::invalid(format!("column '{name}' has length {}, expected {n}", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(ScreenError::invalid(format!("column '{name}' has a non-finite value at index {i}")));
    }
    Ok(())
}

/// Robust correlation screening utility of one covariate.
pub fn rc_utility(y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(ScreenError::invalid(format!("length mismatch: y has {}, x has {}", y.len(), x.len())));
    }
    let ranked = RankedResponse::new(y)?;
    check_column(x, y.len(), "x")?;
    Ok(ranked.utility(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcUtilityVector {
    pub utilities: Vec<f64>,
    pub n: usize,
    pub p: usize,
}

/// Utilities of every covariate, computed in parallel (order-preserving).
pub fn rc_utilities(dataset: &Dataset) -> Result<RcUtilityVector> {
    dataset.validate()?;
    let ranked = RankedResponse::new(&dataset.response)?;
    let utilities = dataset.covariates.par_iter().map(|col| ranked.utility(col)).collect();
    Ok(RcUtilityVector { utilities, n: dataset.n(), p: dataset.p() })
}

pub fn rc_screen(dataset: &Dataset, mode: ThresholdMode) -> Result<ScreeningReport> {
    let u = rc_utilities(dataset)?;
    Ok(ScreeningReport::from_utilities(Method::Rc, u.n, u.utilities, mode))
}

/// Plug-in confidence interval for the robust correlation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCi {
    pub rho_hat: f64,
    pub variance_hat: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Asymptotic `level` confidence interval for the correlation at `(y, x)`.
///
/// The variance is the delta-method variance of
/// `theta1 / sqrt(theta2 theta3)` with
/// `theta1 = F_YX - F_Y F_X`, `theta2 = F_X (1 - F_X)`, `theta3 = F_Y (1 - F_Y)`,
/// assembled from sample moments of the centred influence terms
/// `xi1 = (I_X - F_X)(I_Y - F_Y) - theta1`, `xi2 = (I_X - F_X)^2 - theta2`,
/// `xi3 = (I_Y - F_Y)^2 - theta3`.
pub fn rho_ci(y: f64, x: f64, sample: &JointCounts, level: f64) -> Result<PointwiseCi> {
    if !(level > 0.0 && level < 1.0) {
        return Err(ScreenError::invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let n = sample.n();
    if n < 2 {
        return Err(ScreenError::invalid(format!("rho_ci needs n >= 2, got {n}")));
    }
    let m = (n + 1) as f64;
    let ix: Vec<f64> = sample.x().iter().map(|&v| if v <= x { 1.0 } else { 0.0 }).collect();
    let iy: Vec<f64> = sample.y().iter().map(|&v| if v <= y { 1.0 } else { 0.0 }).collect();
    let cx = ix.iter().sum::<f64>();
    let cy = iy.iter().sum::<f64>();
    let cj = sample.count_le(y, x) as f64;
    let (fx, fy, fj) = (cx / m, cy / m, cj / m);
    let theta1 = fj - fy * fx;
    let theta2 = fx - fx * fx;
    let theta3 = fy - fy * fy;
    if theta2 <= 0.0 || theta3 <= 0.0 {
        return Err(ScreenError::DegenerateEvaluation(format!(
            "marginal variance vanishes at ({y}, {x}): theta2 = {theta2}, theta3 = {theta3}"
        )));
    }

    let (mut e11, mut e22, mut e33, mut e12, mut e13, mut e23) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = ix[i] - fx;
        let dy = iy[i] - fy;
        let xi1 = dx * dy - theta1;
        let xi2 = dx * dx - theta2;
        let xi3 = dy * dy - theta3;
        e11 += xi1 * xi1;
        e22 += xi2 * xi2;
        e33 += xi3 * xi3;
        e12 += xi1 * xi2;
        e13 += xi1 * xi3;
        e23 += xi2 * xi3;
    }
    let nf = n as f64;
    let (e11, e22, e33, e12, e13, e23) = (e11 / nf, e22 / nf, e33 / nf, e12 / nf, e13 / nf, e23 / nf);

    let t1 = theta1;
    let bracket = e11
        + t1 * t1 * e22 / (4.0 * theta2 * theta2)
        + t1 * t1 * e33 / (4.0 * theta3 * theta3)
        - t1 * e12 / (2.0 * theta2)
        - t1 * e13 / (2.0 * theta3)
        - t1 * e12 / (2.0 * theta2)
        + t1 * t1 * e23 / (4.0 * theta2 * theta3)
        - t1 * e13 / (2.0 * theta3)
        + t1 * t1 * e23 / (4.0 * theta3 * theta2);
    let variance_hat = (bracket / (theta2 * theta3)).max(0.0);

    let rho = rho_from_counts(cj as u64, cy as u64, cx as u64, n as u64);
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    let half = z * (variance_hat / nf).sqrt();
    Ok(PointwiseCi { rho_hat: rho, variance_hat, level, lower: rho - half, upper: rho + half })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Wild bootstrap test of independence between `y` and `x`.
///
/// Replicate `d` flips the sign of every centred covariate value with
/// probability 1/2, `X*_i = mean(X) + s_i (X_i - mean(X))`, and recomputes the
/// utility on `(Y, X*)`. Signs for replicate `d` come from stream `d` of
/// `seed`, so the result does not depend on the thread count.
pub fn wild_bootstrap_test(y: &[f64], x: &[f64], replicates: usize, alpha: f64, seed: u64) -> Result<BootstrapTestResult> {
    if replicates < 2 {
        return Err(ScreenError::invalid(format!("need at least 2 bootstrap replicates, got {replicates}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ScreenError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if y.len() != x.len() {
        return Err(ScreenError::invalid(format!("length mismatch: y has {}, x has {}", y.len(), x.len())));
    }
    let ranked = RankedResponse::new(y)?;
    check_column(x, y.len(), "x")?;
    let statistic = ranked.utility(x);

    let xbar = mean(x);
    let centred: Vec<f64> = x.iter().map(|&v| v - xbar).collect();
    let boot: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|d| {
            use rand::Rng;
            let mut rng = stream_rng(seed, d as u64);
            let star: Vec<f64> = centred
                .iter()
                .map(|&e| if rng.random::<bool>() { xbar + e } else { xbar - e })
                .collect();
            ranked.utility(&star)
        })
        .collect();

    let critical_value = quantile(&boot, 1.0 - alpha);
    let exceed = boot.iter().filter(|&&u| u >= statistic).count();
    Ok(BootstrapTestResult {
        statistic,
        critical_value,
        p_value: (1 + exceed) as f64 / (replicates + 1) as f64,
        reject: statistic > critical_value,
        alpha,
        replicates,
        seed,
    })
}
