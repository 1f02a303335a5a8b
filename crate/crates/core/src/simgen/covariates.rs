//! Covariate processes. All matrices are column-major (`x[j][i]`).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::noise::Noise;
use crate::error::{Result, ScreenError};

pub type Columns = Vec<Vec<f64>>;

/// Rows i.i.d. `N(0, Sigma)` with `Sigma_jk = rho0^|j-k|`, drawn by the AR(1)
/// recursion `X_j = rho0 X_{j-1} + sqrt(1 - rho0^2) xi_j` along each row.
pub fn gen_ar1_gaussian<R: Rng + ?Sized>(n: usize, p: usize, rho0: f64, rng: &mut R) -> Result<Columns> {
    if !(rho0.abs() < 1.0) {
        return Err(ScreenError::invalid(format!("AR(1) correlation must satisfy |rho0| < 1, got {rho0}")));
    }
    let innov = (1.0 - rho0 * rho0).sqrt();
    let mut x = vec![vec![0.0; n]; p];
    for i in 0..n {
        let mut prev = 0.0;
        for (j, col) in x.iter_mut().enumerate() {
            let xi: f64 = StandardNormal.sample(rng);
            prev = if j == 0 { xi } else { rho0 * prev + innov * xi };
            col[i] = prev;
        }
    }
    Ok(x)
}

/// `w0 X0 + (1 - w0) E`, with `E` i.i.d. from `noise`; `w0 = 1` returns `X0`.
pub fn gen_contaminated<R: Rng + ?Sized>(x0: &[Vec<f64>], w0: f64, noise: &Noise, rng: &mut R) -> Columns {
    if w0 == 1.0 {
        return x0.to_vec();
    }
    x0.iter()
        .map(|col| col.iter().map(|&v| w0 * v + (1.0 - w0) * noise.sample(rng)).collect())
        .collect()
}

/// `X_j = (T_j + t U) / (1 + t)` with `T_j, U ~ U(0, 1)` and
/// `t = sqrt(rho0 / (1 - rho0))`, giving `corr(X_j, X_k) = rho0`.
pub fn gen_equicorrelated_uniform<R: Rng + ?Sized>(n: usize, p: usize, rho0: f64, rng: &mut R) -> Result<Columns> {
    if !(0.0..1.0).contains(&rho0) {
        return Err(ScreenError::invalid(format!("equicorrelation must lie in [0, 1), got {rho0}")));
    }
    let t = (rho0 / (1.0 - rho0)).sqrt();
    let mut x = vec![vec![0.0; n]; p];
    for i in 0..n {
        let u: f64 = rng.random();
        for col in x.iter_mut() {
            let tj: f64 = rng.random();
            col[i] = (tj + t * u) / (1.0 + t);
        }
    }
    Ok(x)
}

/// `corr(X0_j, X0_k)` for `X0_j = (T_j + t1 U1)/(1 + t1)`, `T_j ~ N(0, 1)`, `U1 ~ U(0, 1)`.
pub fn latent_correlation(t1: f64) -> f64 {
    let shared = t1 * t1 / 12.0;
    shared / (1.0 + shared)
}

/// `corr(X0_j, Z)` for `Z = (U2 + t2 U1)/(1 + t2)`.
pub fn exposure_correlation(t1: f64, t2: f64) -> f64 {
    let cov = t1 * t2 / 12.0;
    let var_x = 1.0 + t1 * t1 / 12.0;
    let var_z = (1.0 + t2 * t2) / 12.0;
    cov / (var_x * var_z).sqrt()
}

// Bisection for an increasing `f` on [0, inf) with f(0) = 0 and sup f > target >= 0.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    if target == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves for `(t1, t2)` reaching the latent equicorrelation `rho0` and the
/// latent-exposure correlation `target`.
pub fn exposure_mixing(rho0: f64, target: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&rho0) {
        return Err(ScreenError::invalid(format!("latent correlation must lie in [0, 1), got {rho0}")));
    }
    let t1 = bisect_increasing(latent_correlation, rho0);
    // corr(X0_j, Z) is bounded by sqrt(rho0) as t2 grows.
    let bound = rho0.sqrt();
    if !(target.abs() < bound || target == 0.0) {
        return Err(ScreenError::invalid(format!(
            "corr(X0, Z) = {target} is infeasible with rho0 = {rho0} (need |target| < {bound:.6})"
        )));
    }
    let t2 = bisect_increasing(|t| exposure_correlation(t1, t), target.abs()).copysign(target);
    Ok((t1, t2))
}

/// Latent covariates and an exposure sharing the uniform factor `U1`.
pub fn gen_exposure_correlated<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rho0: f64,
    target_corr_xz: f64,
    rng: &mut R,
) -> Result<(Columns, Vec<f64>)> {
    let (t1, t2) = exposure_mixing(rho0, target_corr_xz)?;
    let mut x = vec![vec![0.0; n]; p];
    let mut z = vec![0.0; n];
    for i in 0..n {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        z[i] = (u2 + t2 * u1) / (1.0 + t2);
        for col in x.iter_mut() {
            let tj: f64 = StandardNormal.sample(rng);
            col[i] = (tj + t1 * u1) / (1.0 + t1);
        }
    }
    Ok((x, z))
}
