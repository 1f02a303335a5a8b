//! Brute-force reference implementations and random instance builders.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;

/// Robust correlation at sample point `i` by direct counting, using the
/// integer form of the rescaled estimate.
pub fn naive_rho(y: &[f64], x: &[f64], i: usize) -> f64 {
    let n = y.len();
    let (mut cy, mut cx, mut cj) = (0i128, 0i128, 0i128);
    for k in 0..n {
        let by = y[k] <= y[i];
        let bx = x[k] <= x[i];
        cy += by as i128;
        cx += bx as i128;
        cj += (by && bx) as i128;
    }
    if cy == 0 || cx == 0 {
        return 0.0;
    }
    let m = n as i128 + 1;
    let num = m * cj - cy * cx;
    let den = cy * (m - cy) * cx * (m - cx);
    num as f64 / (den as f64).sqrt()
}

/// The same estimate from its definition with floating-point CDF values.
pub fn definitional_rho(y: &[f64], x: &[f64], u: f64, v: f64) -> f64 {
    let m = y.len() as f64 + 1.0;
    let fy = y.iter().filter(|&&a| a <= u).count() as f64 / m;
    let fx = x.iter().filter(|&&a| a <= v).count() as f64 / m;
    let fj = y.iter().zip(x).filter(|(&a, &b)| a <= u && b <= v).count() as f64 / m;
    if fy == 0.0 || fx == 0.0 {
        return 0.0;
    }
    (fj - fy * fx) / (fy * (1.0 - fy) * fx * (1.0 - fx)).sqrt()
}

/// Triple-loop utility `(1/n) sum_i rho^2(Y_i, X_i)`.
pub fn naive_rc_utility(y: &[f64], x: &[f64]) -> f64 {
    let n = y.len();
    let mut sum = 0.0;
    for i in 0..n {
        let r = naive_rho(y, x, i);
        sum += r * r;
    }
    sum / n as f64
}

/// Kendall's tau-b by visiting every pair.
pub fn naive_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut s, mut ux, mut uy) = (0i64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = (x[i] - x[j]).partial_cmp(&0.0).unwrap() as i64;
            let dy = (y[i] - y[j]).partial_cmp(&0.0).unwrap() as i64;
            s += dx * dy;
            ux += (dx != 0) as u64;
            uy += (dy != 0) as u64;
        }
    }
    if ux == 0 || uy == 0 {
        return None;
    }
    Some(s as f64 / ((ux as f64) * (uy as f64)).sqrt())
}

/// Column mixing continuous values and heavy ties.
pub fn random_column<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        1 => {
            let levels = rng.random_range(1..6);
            (0..n).map(|_| rng.random_range(0..levels) as f64).collect()
        }
        _ => (0..n).map(|_| (rng.random_range(-20..20) as f64) / 4.0).collect(),
    }
}

/// A covariate partly driven by `y`, so utilities range over [0, 1].
pub fn related_column<R: Rng>(rng: &mut R, y: &[f64]) -> Vec<f64> {
    let w: f64 = rng.random();
    let mut x = random_column(rng, y.len());
    for (xi, yi) in x.iter_mut().zip(y) {
        *xi = (w * yi + (1.0 - w) * *xi) * 4.0;
        *xi = xi.round() / 4.0;
    }
    x
}

pub fn bivariate_normal<R: Rng>(rng: &mut R, n: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        y.push(a);
        x.push(rho * a + (1.0 - rho * rho).sqrt() * b);
    }
    (y, x)
}
