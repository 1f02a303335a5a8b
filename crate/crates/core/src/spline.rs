//! Clamped B-spline bases and least-squares / least-absolute-deviation fits.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Loss {
    L2,
    L1,
}

/// Normalized B-spline basis on `[lower, upper]` with clamped boundary knots.
///
/// The basis is a partition of unity: every function lies in `[0, 1]` and the
/// functions sum to one everywhere on the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    degree: usize,
    interior_knots: Vec<f64>,
    lower: f64,
    upper: f64,
    knots: Vec<f64>,
}

impl SplineBasis {
    /// Basis of dimension `dim = degree + 1 + #interior knots` on the range of
    /// `z_sample`, interior knots at equally spaced sample quantiles.
    pub fn build(z_sample: &[f64], degree: usize, dim: usize) -> Result<Self> {
        if degree < 1 {
            return Err(ScreenError::invalid("spline degree must be at least 1"));
        }
        if dim < degree + 1 {
            return Err(ScreenError::invalid(format!(
                "basis dimension {dim} is below degree + 1 = {}",
                degree + 1
            )));
        }
        if z_sample.len() < dim {
            return Err(ScreenError::invalid(format!(
                "{} exposure values cannot support a basis of dimension {dim}",
                z_sample.len()
            )));
        }
        if let Some(i) = z_sample.iter().position(|v| !v.is_finite()) {
            return Err(ScreenError::invalid(format!("exposure has a non-finite value at index {i}")));
        }
        let mut sorted = z_sample.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let (lower, upper) = (sorted[0], sorted[sorted.len() - 1]);
        if lower >= upper {
            return Err(ScreenError::invalid("exposure is constant; cannot place spline knots"));
        }
        let n_interior = dim - degree - 1;
        let interior_knots: Vec<f64> = (1..=n_interior)
            .map(|k| quantile_sorted(&sorted, k as f64 / (n_interior + 1) as f64))
            .collect();
        let mut prev = lower;
        for &k in &interior_knots {
            if k <= prev || k >= upper {
                return Err(ScreenError::invalid(format!(
                    "too few distinct exposure values to place {n_interior} interior knots"
                )));
            }
            prev = k;
        }
        Ok(Self::with_knots(degree, lower, upper, interior_knots))
    }

    fn with_knots(degree: usize, lower: f64, upper: f64, interior_knots: Vec<f64>) -> Self {
        let mut knots = vec![lower; degree + 1];
        knots.extend_from_slice(&interior_knots);
        knots.extend(std::iter::repeat_n(upper, degree + 1));
        SplineBasis { degree, interior_knots, lower, upper, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1 + self.interior_knots.len()
    }

    pub fn interior_knots(&self) -> &[f64] {
        &self.interior_knots
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn clamp_to_support(&self, z: f64) -> Result<f64> {
        let tol = 1e-9 * (self.upper - self.lower);
        if !(z >= self.lower - tol && z <= self.upper + tol) {
            return Err(ScreenError::OutOfSupport { z, lower: self.lower, upper: self.upper });
        }
        Ok(z.clamp(self.lower, self.upper))
    }

    /// `(B_1(z), ..., B_L(z))`.
    pub fn eval(&self, z: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(z, &mut out)?;
        Ok(out)
    }

    pub(crate) fn eval_into(&self, z: f64, out: &mut [f64]) -> Result<()> {
        let z = self.clamp_to_support(z)?;
        let p = self.degree;
        let dim = self.dim();
        let t = &self.knots;
        // Knot span s with t[s] <= z < t[s + 1]; the right endpoint uses the last span.
        let span = if z >= self.upper {
            dim - 1
        } else {
            let s = t.partition_point(|&k| k <= z) - 1;
            s.clamp(p, dim - 1)
        };

        let mut local = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        local[0] = 1.0;
        for j in 1..=p {
            left[j] = z - t[span + 1 - j];
            right[j] = t[span + j] - z;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = local[r] / (right[r + 1] + left[j - r]);
                local[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            local[j] = saved;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        out[span - p..=span].copy_from_slice(&local);
        Ok(())
    }
}

/// Iteratively reweighted least squares settings for the L1 fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrlsConfig {
    /// Smoothing in `|r| ~ sqrt(r^2 + epsilon^2)`.
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        IrlsConfig { epsilon: 1e-6, tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFit {
    pub basis: SplineBasis,
    pub gamma: Vec<f64>,
    pub loss: Loss,
    pub iterations: usize,
    pub converged: bool,
    /// A ridge term was needed to factor the normal equations.
    pub jitter_applied: bool,
    /// Smoothed L1 objective at the start and after every IRLS update.
    pub objective_trace: Vec<f64>,
}

impl SplineFit {
    pub fn predict_one(&self, z: f64) -> Result<f64> {
        let b = self.basis.eval(z)?;
        Ok(b.iter().zip(&self.gamma).map(|(b, g)| b * g).sum())
    }

    pub fn predict(&self, z: &[f64]) -> Result<Vec<f64>> {
        z.iter().map(|&v| self.predict_one(v)).collect()
    }
}

/// Basis evaluated at a fixed set of exposures with the Gram matrix factored,
/// shared by every target regressed on the same exposure.
pub(crate) struct Design {
    basis: SplineBasis,
    rows: Vec<f64>,
    n: usize,
    chol: Cholesky<f64, Dyn>,
    jitter_applied: bool,
}

impl Design {
    pub fn new(basis: &SplineBasis, z: &[f64]) -> Result<Self> {
        let dim = basis.dim();
        let n = z.len();
        if n < dim {
            return Err(ScreenError::invalid(format!("{n} observations cannot identify {dim} spline coefficients")));
        }
        let mut rows = vec![0.0; n * dim];
        for (i, &zi) in z.iter().enumerate() {
            basis.eval_into(zi, &mut rows[i * dim..(i + 1) * dim])?;
        }
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        for row in rows.chunks_exact(dim) {
            for a in 0..dim {
                if row[a] == 0.0 {
                    continue;
                }
                for b in 0..dim {
                    gram[(a, b)] += row[a] * row[b];
                }
            }
        }
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let max = eig.max();
        let min = eig.min();
        if !(max > 0.0) || min <= 1e-12 * max {
            return Err(ScreenError::SingularDesign {
                target: "basis".into(),
                detail: format!("Gram matrix eigenvalue ratio {:.3e}", min / max),
            });
        }
        let (chol, jitter_applied) = factor(gram).ok_or_else(|| ScreenError::SingularDesign {
            target: "basis".into(),
            detail: "Cholesky factorization failed even with ridge jitter".into(),
        })?;
        Ok(Design { basis: basis.clone(), rows, n, chol, jitter_applied })
    }

    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.rows[i * d..(i + 1) * d]
    }

    pub fn fitted(&self, gamma: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), gamma)).collect()
    }

    fn cross(&self, w: &[f64], weights: Option<&[f64]>) -> DVector<f64> {
        let mut rhs = DVector::<f64>::zeros(self.dim());
        for i in 0..self.n {
            let wi = match weights {
                Some(v) => v[i] * w[i],
                None => w[i],
            };
            for (a, &b) in self.row(i).iter().enumerate() {
                rhs[a] += b * wi;
            }
        }
        rhs
    }

    fn solve_l2(&self, w: &[f64]) -> Vec<f64> {
        let mut gamma = self.chol.solve(&self.cross(w, None));
        // One step of iterative refinement on the normal equations.
        let resid: Vec<f64> = self.fitted(gamma.as_slice()).iter().zip(w).map(|(f, w)| w - f).collect();
        gamma += self.chol.solve(&self.cross(&resid, None));
        gamma.as_slice().to_vec()
    }

    pub fn fit_l2(&self, w: &[f64]) -> SplineFit {
        SplineFit {
            basis: self.basis.clone(),
            gamma: self.solve_l2(w),
            loss: Loss::L2,
            iterations: 0,
            converged: true,
            jitter_applied: self.jitter_applied,
            objective_trace: Vec::new(),
        }
    }

    /// Indices of `dim` points with the smallest absolute residuals under
    /// `gamma` whose basis rows are linearly independent.
    fn independent_points(&self, w: &[f64], gamma: &[f64]) -> Option<Vec<usize>> {
        let dim = self.dim();
        let fitted = self.fitted(gamma);
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| (w[a] - fitted[a]).abs().total_cmp(&(w[b] - fitted[b]).abs()));
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut chosen = Vec::with_capacity(dim);
        for i in order {
            let row = self.row(i);
            let mut v = row.to_vec();
            for q in &ortho {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-8 * dot(row, row).sqrt() {
                v.iter_mut().for_each(|a| *a /= norm);
                ortho.push(v);
                chosen.push(i);
                if chosen.len() == dim {
                    return Some(chosen);
                }
            }
        }
        None
    }

    /// Exact L1 minimisation by edge descent over interpolating vertices,
    /// started at the vertex nearest `start`. Each step frees one
    /// interpolated point and moves to the weighted-median breakpoint along
    /// that edge. Returns the final coefficients and whether no edge improves.
    fn vertex_descent(&self, w: &[f64], start: &[f64]) -> Option<(Vec<f64>, bool)> {
        let dim = self.dim();
        let mut active = self.independent_points(w, start)?;
        let solve_at = |active: &[usize]| {
            let a = DMatrix::from_fn(dim, dim, |r, c| self.row(active[r])[c]);
            let lu = a.lu();
            let gamma = lu.solve(&DVector::from_iterator(dim, active.iter().map(|&i| w[i])))?;
            Some((lu, gamma.as_slice().to_vec()))
        };
        let (mut lu, mut gamma) = solve_at(&active)?;
        let mut breaks: Vec<(f64, f64, usize)> = Vec::with_capacity(self.n);
        for _ in 0..(10 * self.n + 50) {
            let fitted = self.fitted(&gamma);
            let r: Vec<f64> = w.iter().zip(&fitted).map(|(w, f)| w - f).collect();
            let f0: f64 = r.iter().map(|v| v.abs()).sum();
            let mut step: Option<(usize, usize, f64, Vec<f64>, f64)> = None;
            for k in 0..dim {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                let d = lu.solve(&e)?;
                let d = d.as_slice();
                breaks.clear();
                let mut total = 0.0;
                for i in 0..self.n {
                    if active.iter().enumerate().any(|(a, &j)| j == i && a != k) {
                        continue;
                    }
                    let g = dot(self.row(i), d);
                    if g.abs() > 1e-14 {
                        breaks.push((r[i] / g, g.abs(), i));
                        total += g.abs();
                    }
                }
                if breaks.is_empty() {
                    continue;
                }
                breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                let &(t, _, entering) = breaks
                    .iter()
                    .find(|b| {
                        acc += b.1;
                        acc >= 0.5 * total
                    })
                    .unwrap_or(&breaks[breaks.len() - 1]);
                let cand: Vec<f64> = gamma.iter().zip(d).map(|(g, d)| g + t * d).collect();
                let f: f64 = w.iter().zip(self.fitted(&cand)).map(|(w, f)| (w - f).abs()).sum();
                if f < f0 - 1e-12 * (1.0 + f0) && step.as_ref().is_none_or(|s| f < s.4) {
                    step = Some((k, entering, t, cand, f));
                }
            }
            let Some((k, entering, _, cand, _)) = step else {
                return Some((gamma, true));
            };
            let mut next = active.clone();
            next[k] = entering;
            match solve_at(&next) {
                Some((l, g)) => {
                    active = next;
                    lu = l;
                    gamma = g;
                }
                None => return Some((cand, false)),
            }
        }
        Some((gamma, false))
    }

    pub fn fit_l1(&self, w: &[f64], cfg: &IrlsConfig, target: &str) -> Result<SplineFit> {
        if !(cfg.epsilon > 0.0) || cfg.max_iter == 0 {
            return Err(ScreenError::invalid("IRLS needs epsilon > 0 and max_iter >= 1"));
        }
        let dim = self.dim();
        let nf = self.n as f64;
        let l1 = |gamma: &[f64]| -> f64 {
            self.fitted(gamma).iter().zip(w).map(|(f, w)| (w - f).abs()).sum::<f64>() / nf
        };
        let smoothed = |gamma: &[f64]| -> f64 {
            let e2 = cfg.epsilon * cfg.epsilon;
            self.fitted(gamma).iter().zip(w).map(|(f, w)| ((w - f).powi(2) + e2).sqrt()).sum::<f64>() / nf
        };

        let mut gamma = self.solve_l2(w);
        let mut best = (l1(&gamma), gamma.clone());
        let mut trace = vec![smoothed(&gamma)];
        let mut jitter_applied = self.jitter_applied;
        let mut converged = false;
        let mut iterations = 0;
        let mut weights = vec![0.0; self.n];

        while iterations < cfg.max_iter {
            iterations += 1;
            let fitted = self.fitted(&gamma);
            for i in 0..self.n {
                let r = w[i] - fitted[i];
                weights[i] = 1.0 / (r * r + cfg.epsilon * cfg.epsilon).sqrt();
            }
            let mut gram = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..self.n {
                let row = self.row(i);
                for a in 0..dim {
                    if row[a] == 0.0 {
                        continue;
                    }
                    let wa = weights[i] * row[a];
                    for b in a..dim {
                        gram[(a, b)] += wa * row[b];
                    }
                }
            }
            for a in 0..dim {
                for b in 0..a {
                    gram[(a, b)] = gram[(b, a)];
                }
            }
            let (chol, jittered) = factor(gram).ok_or_else(|| ScreenError::SingularDesign {
                target: target.to_string(),
                detail: "weighted normal equations are singular".into(),
            })?;
            jitter_applied |= jittered;
            let next = chol.solve(&self.cross(w, Some(&weights)));
            let next = next.as_slice().to_vec();

            let scale = 1.0 + gamma.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let change = next.iter().zip(&gamma).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            gamma = next;
            trace.push(smoothed(&gamma));
            let obj = l1(&gamma);
            if obj < best.0 {
                best = (obj, gamma.clone());
            }
            if change <= cfg.tol * scale {
                converged = true;
                break;
            }
        }

        if let Some((vertex, optimal)) = self.vertex_descent(w, &best.1) {
            let obj = l1(&vertex);
            if obj <= best.0 {
                best = (obj, vertex);
                converged |= optimal;
            }
        }

        Ok(SplineFit {
            basis: self.basis.clone(),
            gamma: best.1,
            loss: Loss::L1,
            iterations,
            converged,
            jitter_applied,
            objective_trace: trace,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factor, retrying once with a `1e-10 trace / L` ridge.
fn factor(gram: DMatrix<f64>) -> Option<(Cholesky<f64, Dyn>, bool)> {
    if let Some(c) = Cholesky::new(gram.clone()) {
        return Some((c, false));
    }
    let dim = gram.nrows();
    let jitter = 1e-10 * gram.trace() / dim as f64;
    let ridged = gram + DMatrix::<f64>::identity(dim, dim) * jitter;
    Cholesky::new(ridged).map(|c| (c, true))
}

fn check_targets(z: &[f64], w: &[f64]) -> Result<()> {
    if z.len() != w.len() {
        return Err(ScreenError::invalid(format!("exposure has {} values, target has {}", z.len(), w.len())));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite()) {
        return Err(ScreenError::invalid(format!("target has a non-finite value at index {i}")));
    }
    Ok(())
}

/// Least-squares spline fit of `w` on `z`.
pub fn fit_l2(basis: &SplineBasis, z: &[f64], w: &[f64]) -> Result<SplineFit> {
    check_targets(z, w)?;
    Ok(Design::new(basis, z)?.fit_l2(w))
}

/// Least-absolute-deviation spline fit of `w` on `z` by smoothed IRLS,
/// started from the least-squares solution. Non-convergence is reported in
/// the fit, not as an error.
pub fn fit_l1(basis: &SplineBasis, z: &[f64], w: &[f64], cfg: &IrlsConfig) -> Result<SplineFit> {
    check_targets(z, w)?;
    Design::new(basis, z)?.fit_l1(w, cfg, "target")
}
