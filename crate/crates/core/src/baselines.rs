//! Comparator screeners: Pearson-correlation SIS and Kendall's tau SIS.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::screening::{Method, ScreeningReport, ThresholdMode};
use crate::stats::pearson;

pub fn pearson_sis(dataset: &Dataset, mode: ThresholdMode) -> Result<ScreeningReport> {
    dataset.validate()?;
    if dataset.n() < 3 {
        return Err(ScreenError::invalid(format!("Pearson screening needs n >= 3, got {}", dataset.n())));
    }
    let y = &dataset.response;
    let utilities = dataset
        .covariates
        .par_iter()
        .zip(dataset.names.par_iter())
        .map(|(col, name)| match pearson(y, col) {
            Some(r) => r.abs(),
            None => {
                log::warn!("column '{name}' (or the response) has zero variance; utility set to 0");
                0.0
            }
        })
        .collect();
    Ok(ScreeningReport::from_utilities(Method::Pearson, dataset.n(), utilities, mode))
}

/// Pair counts behind Kendall's tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KendallCounts {
    /// Concordant minus discordant pairs.
    pub s: i64,
    /// Pairs not tied in `x`.
    pub untied_x: u64,
    /// Pairs not tied in `y`.
    pub untied_y: u64,
}

impl KendallCounts {
    /// `S / sqrt(untied_x untied_y)`; `None` when either variable is constant.
    pub fn tau_b(&self) -> Option<f64> {
        if self.untied_x == 0 || self.untied_y == 0 {
            return None;
        }
        Some(self.s as f64 / ((self.untied_x as f64) * (self.untied_y as f64)).sqrt())
    }
}

fn tie_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run.saturating_sub(1)) / 2;
            run = 1;
        }
        prev = Some(v);
    }
    total + run * (run.saturating_sub(1)) / 2
}

/// Kendall pair counts in `O(n log n)` (Knight's merge-sort algorithm).
pub fn kendall_counts(x: &[f64], y: &[f64]) -> KendallCounts {
    let n = x.len();
    let n0 = (n * n.saturating_sub(1) / 2) as u64;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap().then(y[a].partial_cmp(&y[b]).unwrap()));

    let ties_x = tie_pairs(idx.iter().map(|&i| x[i]));
    let ties_xy = tie_pairs(idx.iter().map(|&i| (x[i], y[i])));

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let ties_y = tie_pairs(ys.iter().copied());

    let s = n0 as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * swaps as i64;
    KendallCounts { s, untied_x: n0 - ties_x, untied_y: n0 - ties_y }
}

// Sorts `v` ascending, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Sample Kendall tau-b; `None` if either argument is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(ScreenError::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(ScreenError::invalid("Kendall's tau needs n >= 2"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(ScreenError::invalid("Kendall's tau needs finite values"));
    }
    Ok(kendall_counts(x, y).tau_b())
}

pub fn kendall_sis(dataset: &Dataset, mode: ThresholdMode) -> Result<ScreeningReport> {
    dataset.validate()?;
    let y = &dataset.response;
    let utilities = dataset
        .covariates
        .par_iter()
        .zip(dataset.names.par_iter())
        .map(|(col, name)| match kendall_counts(col, y).tau_b() {
            Some(t) => t.abs(),
            None => {
                log::warn!("column '{name}' (or the response) is constant; utility set to 0");
                0.0
            }
        })
        .collect();
    Ok(ScreeningReport::from_utilities(Method::Kendall, dataset.n(), utilities, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_relationships() {
        let x: Vec<f64> = (0..25).map(f64::from).collect();
        let up: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let down: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        assert_eq!(kendall_tau_b(&x, &up).unwrap(), Some(1.0));
        assert_eq!(kendall_tau_b(&x, &down).unwrap(), Some(-1.0));
        assert_eq!(kendall_tau_b(&x, &[3.0; 25]).unwrap(), None);
    }

    #[test]
    fn known_tau_b_with_ties() {
        // scipy.stats.kendalltau([1,2,2,3,4],[1,3,2,2,5]) = 0.6666666666666666
        let t = kendall_tau_b(&[1.0, 2.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 2.0, 5.0]).unwrap().unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-12, "{t}");
    }

    #[test]
    fn pearson_linear_and_orthogonal() {
        let y = vec![1.0, 2.0, 4.0, 3.0, 7.0, 5.0];
        let lin: Vec<f64> = y.iter().map(|v| 2.0 * v + 1.0).collect();
        // Orthogonalize a vector against the centred response.
        let ybar = y.iter().sum::<f64>() / 6.0;
        let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
        let raw = [1.0, -1.0, 2.0, 0.0, 1.0, -3.0];
        let rbar = raw.iter().sum::<f64>() / 6.0;
        let rc: Vec<f64> = raw.iter().map(|v| v - rbar).collect();
        let proj = rc.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>() / yc.iter().map(|v| v * v).sum::<f64>();
        let orth: Vec<f64> = rc.iter().zip(&yc).map(|(a, b)| a - proj * b).collect();
        let ds = Dataset::new(y, vec![lin, orth, vec![1.0; 6]], None).unwrap();
        let r = pearson_sis(&ds, ThresholdMode::TopD(1)).unwrap();
        assert!((r.utilities[0] - 1.0).abs() < 1e-12);
        assert!(r.utilities[1].abs() < 1e-12);
        assert_eq!(r.utilities[2], 0.0);
    }
}
