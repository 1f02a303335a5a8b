//! Marginal and joint empirical distribution functions.
//!
//! Every evaluation used inside a correlation formula is rescaled by
//! `n / (n + 1)`, so a CDF value at a sample point lies in `(0, 1)` and the
//! Bernoulli variance `F (1 - F)` never vanishes. Raw evaluation is kept for
//! diagnostics.

use crate::error::{Result, ScreenError};

fn check_sample(sample: &[f64], what: &str) -> Result<()> {
    if sample.is_empty() {
        return Err(ScreenError::invalid(format!("{what}: empty sample")));
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(ScreenError::invalid(format!("{what}: non-finite value at index {i}")));
    }
    Ok(())
}

/// Sorted copy of a sample with rank-based evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn build(sample: &[f64]) -> Result<Self> {
        check_sample(sample, "ecdf")?;
        let mut values = sample.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(EmpiricalCdf { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of sample values `<= t`.
    pub fn count_le(&self, t: f64) -> usize {
        self.values.partition_point(|&v| v <= t)
    }

    /// `(1/n) #{i : Y_i <= t}`.
    pub fn eval(&self, t: f64) -> f64 {
        self.count_le(t) as f64 / self.n() as f64
    }

    /// `n/(n+1)` times [`eval`](Self::eval).
    pub fn eval_rescaled(&self, t: f64) -> f64 {
        self.count_le(t) as f64 / (self.n() + 1) as f64
    }
}

/// Paired sample `(y_i, x_i)` supporting joint CDF queries.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCounts {
    y: Vec<f64>,
    x: Vec<f64>,
}

impl JointCounts {
    pub fn build(y: &[f64], x: &[f64]) -> Result<Self> {
        if y.len() != x.len() {
            return Err(ScreenError::invalid(format!(
                "paired sample length mismatch: {} vs {}",
                y.len(),
                x.len()
            )));
        }
        check_sample(y, "joint sample (y)")?;
        check_sample(x, "joint sample (x)")?;
        Ok(JointCounts { y: y.to_vec(), x: x.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Number of pairs with `y_i <= y` and `x_i <= x`.
    pub fn count_le(&self, y: f64, x: f64) -> usize {
        self.y.iter().zip(&self.x).filter(|&(&yi, &xi)| yi <= y && xi <= x).count()
    }

    pub fn joint_eval_raw(&self, y: f64, x: f64) -> f64 {
        self.count_le(y, x) as f64 / self.n() as f64
    }

    /// Joint CDF at `(y, x)`, rescaled by `n/(n+1)` like the marginals.
    pub fn joint_eval(&self, y: f64, x: f64) -> f64 {
        self.count_le(y, x) as f64 / (self.n() + 1) as f64
    }

    /// Dominance counts `#{k : y_k <= y_i, x_k <= x_i}` for every sample point.
    pub fn joint_counts_all(&self) -> Vec<usize> {
        let order = SortedOrder::new(&self.y);
        let cx = marginal_counts(&self.x);
        dominance_counts(&order, &cx).into_iter().map(|c| c as usize).collect()
    }

    /// Element `i` equals `joint_eval(y_i, x_i)`.
    pub fn joint_eval_all(&self) -> Vec<f64> {
        let denom = (self.n() + 1) as f64;
        self.joint_counts_all().into_iter().map(|c| c as f64 / denom).collect()
    }
}

/// Sample indices sorted ascending, split into runs of equal value.
#[derive(Debug, Clone)]
pub(crate) struct SortedOrder {
    pub order: Vec<usize>,
    /// `groups[g]..groups[g + 1]` indexes a run of tied values in `order`.
    pub groups: Vec<usize>,
    /// `counts[i] = #{k : v_k <= v_i}`.
    pub counts: Vec<u32>,
}

impl SortedOrder {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
        let mut groups = Vec::with_capacity(n + 1);
        let mut counts = vec![0u32; n];
        let mut start = 0;
        while start < n {
            let v = values[order[start]];
            let mut end = start + 1;
            while end < n && values[order[end]] == v {
                end += 1;
            }
            groups.push(start);
            for &i in &order[start..end] {
                counts[i] = end as u32;
            }
            start = end;
        }
        groups.push(n);
        SortedOrder { order, groups, counts }
    }
}

/// `#{k : v_k <= v_i}` for each `i`.
pub(crate) fn marginal_counts(values: &[f64]) -> Vec<u32> {
    SortedOrder::new(values).counts
}

/// Joint dominance counts from the response order and covariate marginal
/// counts, in `O(n log n)` with a Fenwick tree indexed by `cx`.
pub(crate) fn dominance_counts(y_order: &SortedOrder, cx: &[u32]) -> Vec<u32> {
    let n = cx.len();
    let mut tree = Fenwick::new(n);
    let mut out = vec![0u32; n];
    for g in y_order.groups.windows(2) {
        let run = &y_order.order[g[0]..g[1]];
        for &i in run {
            tree.add(cx[i] as usize);
        }
        for &i in run {
            out[i] = tree.prefix(cx[i] as usize);
        }
    }
    out
}

struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    // 1-based position.
    fn add(&mut self, mut pos: usize) {
        while pos < self.tree.len() {
            self.tree[pos] += 1;
            pos += pos & pos.wrapping_neg();
        }
    }

    fn prefix(&self, mut pos: usize) -> u32 {
        let mut sum = 0;
        while pos > 0 {
            sum += self.tree[pos];
            pos &= pos - 1;
        }
        sum
    }
}
