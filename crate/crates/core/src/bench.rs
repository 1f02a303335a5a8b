//! Monte-Carlo replication harness and the evaluation metrics reported in
//! the comparison tables.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};
use crate::rng::derive_seed;
use crate::screening::{default_top_d, screen, Method, ScreenOptions, ThresholdMode};
use crate::simgen::{generate, SimScenario};
use crate::stats::{median, quantile};

/// Largest share of failed replications tolerated before the run aborts.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

/// Smallest ranking prefix containing every active column: the largest
/// 1-based position of an active index. Indices are 0-based.
pub fn mms(ranking: &[usize], active: &[usize]) -> Result<usize> {
    let p = ranking.len();
    let mut pos = vec![usize::MAX; p];
    for (k, &j) in ranking.iter().enumerate() {
        if j >= p || pos[j] != usize::MAX {
            return Err(ScreenError::invalid("ranking is not a permutation"));
        }
        pos[j] = k + 1;
    }
    if active.is_empty() {
        return Err(ScreenError::invalid("active set is empty"));
    }
    active.iter().try_fold(0, |acc, &j| {
        if j >= p {
            Err(ScreenError::invalid(format!("active index {} out of range 1..={p}", j + 1)))
        } else {
            Ok(acc.max(pos[j]))
        }
    })
}

/// Robust spread `IQR / 1.349` with type-7 quantiles; 0 for one value.
pub fn rsd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (quantile(values, 0.75) - quantile(values, 0.25)) / 1.349
}

/// Aggregates of one method over the successful replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    /// Median rank of each active covariate, in active-set order.
    pub median_ranks: Vec<f64>,
    pub median_mms: f64,
    pub rsd_mms: f64,
    /// Share of replications with every active rank at most `d_n`.
    pub proportion: f64,
    pub successes: usize,
    pub failures: usize,
    /// Per-replication active ranks, in replication order.
    #[serde(skip)]
    pub active_ranks: Vec<Vec<usize>>,
}

impl MethodMetrics {
    fn aggregate(method: Method, active_ranks: Vec<Vec<usize>>, failures: usize, d_n: usize) -> Self {
        let k = active_ranks.first().map_or(0, Vec::len);
        let column = |a: usize| active_ranks.iter().map(|r| r[a] as f64).collect::<Vec<_>>();
        let median_ranks = (0..k).map(|a| median(&column(a))).collect();
        let mms_values: Vec<f64> =
            active_ranks.iter().map(|r| r.iter().copied().max().unwrap_or(0) as f64).collect();
        let (median_mms, rsd_mms) =
            if mms_values.is_empty() { (f64::NAN, f64::NAN) } else { (median(&mms_values), rsd(&mms_values)) };
        let mut m = MethodMetrics {
            method,
            median_ranks,
            median_mms,
            rsd_mms,
            proportion: 0.0,
            successes: active_ranks.len(),
            failures,
            active_ranks,
        };
        m.proportion = m.proportion_with_budget(d_n);
        m
    }

    /// Per-replication minimum model sizes.
    pub fn mms_values(&self) -> Vec<usize> {
        self.active_ranks.iter().map(|r| r.iter().copied().max().unwrap_or(0)).collect()
    }

    /// Selection proportion under budget `d`.
    pub fn proportion_with_budget(&self, d: usize) -> f64 {
        if self.active_ranks.is_empty() {
            return f64::NAN;
        }
        let hits = self.active_ranks.iter().filter(|r| r.iter().all(|&rank| rank <= d)).count();
        hits as f64 / self.active_ranks.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: u32,
    pub scenario: SimScenario,
    pub n: usize,
    pub p: usize,
    /// 1-based active indices, matching the `R_j` columns.
    pub active_set: Vec<usize>,
    pub d_n: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<MethodMetrics>,
}

enum Outcome {
    Ranks(Vec<usize>),
    Failed,
}

/// Runs `reps` replications of `scenario`, replication `r` seeded with
/// `derive_seed(base_seed, r)`, and aggregates each method's metrics.
/// `d_override` replaces the default budget `floor(n / ln n)`.
pub fn run_replications(
    scenario: &SimScenario,
    methods: &[Method],
    reps: usize,
    base_seed: u64,
    d_override: Option<usize>,
    opts: &ScreenOptions,
) -> Result<MetricsReport> {
    if reps == 0 {
        return Err(ScreenError::invalid("replication count must be at least 1"));
    }
    if methods.is_empty() {
        return Err(ScreenError::invalid("at least one method is required"));
    }
    scenario.validate()?;
    if let Some(m) = methods.iter().find(|m| m.needs_exposure() && !scenario.id.has_exposure()) {
        return Err(ScreenError::invalid(format!("{m} needs an exposure, which scenario {} lacks", scenario.id)));
    }
    let active = scenario.active_set();
    let d_n = d_override.unwrap_or_else(|| default_top_d(scenario.n));

    let outcomes: Vec<Vec<Outcome>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let rep = scenario.clone().with_seed(derive_seed(base_seed, r as u64));
            let sim = match generate(&rep) {
                Ok(sim) => sim,
                Err(e) => {
                    log::warn!("replication {r}: generation failed: {e}");
                    return methods.iter().map(|_| Outcome::Failed).collect();
                }
            };
            methods
                .iter()
                .map(|&m| match screen(m, &sim.dataset, ThresholdMode::TopD(d_n), opts) {
                    Ok(report) => {
                        let ranks = report.ranks();
                        Outcome::Ranks(active.iter().map(|&j| ranks[j]).collect())
                    }
                    Err(e) => {
                        log::warn!("replication {r}: {m} failed: {e}");
                        Outcome::Failed
                    }
                })
                .collect()
        })
        .collect();

    let mut metrics = Vec::with_capacity(methods.len());
    for (k, &m) in methods.iter().enumerate() {
        let mut ranks = Vec::with_capacity(reps);
        let mut failures = 0;
        for rep in &outcomes {
            match &rep[k] {
                Outcome::Ranks(r) => ranks.push(r.clone()),
                Outcome::Failed => failures += 1,
            }
        }
        if failures as f64 > MAX_FAILURE_SHARE * reps as f64 {
            return Err(ScreenError::Harness(format!("{m}: {failures} of {reps} replications failed")));
        }
        metrics.push(MethodMetrics::aggregate(m, ranks, failures, d_n));
    }

    Ok(MetricsReport {
        schema: 1,
        scenario: scenario.clone(),
        n: scenario.n,
        p: scenario.p,
        active_set: active.iter().map(|j| j + 1).collect(),
        d_n,
        replications: reps,
        base_seed,
        methods: metrics,
    })
}

fn fmt_number(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

impl MetricsReport {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["method".to_string()];
        h.extend(self.active_set.iter().map(|j| format!("R_{j}")));
        h.extend(["MMS", "RSD", "P"].map(String::from));
        h
    }

    /// Table rows matching [`MetricsReport::header`].
    pub fn rows(&self) -> Vec<Vec<String>> {
        self.methods
            .iter()
            .map(|m| {
                let mut row = vec![m.method.tag().to_string()];
                row.extend(m.median_ranks.iter().map(|&r| fmt_number(r)));
                row.push(fmt_number(m.median_mms));
                row.push(format!("{:.2}", m.rsd_mms));
                row.push(format!("{:.2}", m.proportion));
                row
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in self.rows() {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned plain-text rendering of the table.
    pub fn to_text(&self) -> String {
        let header = self.header();
        let rows = self.rows();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
        };
        let mut text = format!(
            "scenario {} n={} p={} d_n={} N={}\n",
            self.scenario.id, self.n, self.p, self.d_n, self.replications
        );
        text.push_str(&line(&header));
        text.push('\n');
        for r in &rows {
            text.push_str(&line(r));
            text.push('\n');
        }
        text
    }
}
