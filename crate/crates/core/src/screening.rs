//! Screening reports shared by every screener: ranking, thresholding and the
//! method dispatch used by the CLI and the replication harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{kendall_sis, pearson_sis};
use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::rc::rc_screen;
use crate::rpc::{rpc_screen, BasisConfig};
use crate::spline::{IrlsConfig, Loss};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RC-SIS")]
    Rc,
    #[serde(rename = "RPC-SIS(L2)")]
    RpcL2,
    #[serde(rename = "RPC-SIS(L1)")]
    RpcL1,
    #[serde(rename = "SIS")]
    Pearson,
    #[serde(rename = "Kendall-SIS")]
    Kendall,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Rc, Method::RpcL2, Method::RpcL1, Method::Pearson, Method::Kendall];

    /// Table label.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Rc => "RC-SIS",
            Method::RpcL2 => "RPC-SIS(L2)",
            Method::RpcL1 => "RPC-SIS(L1)",
            Method::Pearson => "SIS",
            Method::Kendall => "Kendall-SIS",
        }
    }

    /// Command-line spelling.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Rc => "rc",
            Method::RpcL2 => "rpc-l2",
            Method::RpcL1 => "rpc-l1",
            Method::Pearson => "pearson",
            Method::Kendall => "kendall",
        }
    }

    pub fn needs_exposure(self) -> bool {
        matches!(self, Method::RpcL2 | Method::RpcL1)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = ScreenError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.cli_name() == lower || m.tag().to_ascii_lowercase() == lower)
            .ok_or_else(|| {
                ScreenError::invalid(format!("unknown method '{s}' (expected rc, rpc-l2, rpc-l1, pearson, kendall)"))
            })
    }
}

/// How many predictors a report retains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Keep the first `d` predictors of the ranking.
    TopD(usize),
    /// Keep every predictor whose utility strictly exceeds the value.
    Value(f64),
}

impl ThresholdMode {
    /// Top-`d_n` selection with `d_n = floor(n / ln n)`.
    pub fn default_for(n: usize) -> Self {
        ThresholdMode::TopD(default_top_d(n))
    }
}

/// `floor(n / ln n)` (natural log); 1 for `n < 3`.
pub fn default_top_d(n: usize) -> usize {
    if n < 3 {
        return 1;
    }
    let nf = n as f64;
    (nf / nf.ln()).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub utilities: Vec<f64>,
    /// Column indices (0-based) by descending utility, ties by ascending index.
    pub ranking: Vec<usize>,
    /// Retained column indices, in ranking order.
    pub selected: Vec<usize>,
    pub threshold_mode: ThresholdMode,
}

impl ScreeningReport {
    pub fn from_utilities(method: Method, n: usize, utilities: Vec<f64>, threshold_mode: ThresholdMode) -> Self {
        let p = utilities.len();
        let ranking = rank_descending(&utilities);
        let selected = match threshold_mode {
            ThresholdMode::TopD(d) => ranking.iter().copied().take(d.min(p)).collect(),
            ThresholdMode::Value(cut) => ranking.iter().copied().filter(|&j| utilities[j] > cut).collect(),
        };
        ScreeningReport { method, n, p, utilities, ranking, selected, threshold_mode }
    }

    /// 1-based rank of every column.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.p];
        for (pos, &j) in self.ranking.iter().enumerate() {
            ranks[j] = pos + 1;
        }
        ranks
    }

    /// 1-based rank of column `j`.
    pub fn rank_of(&self, j: usize) -> Option<usize> {
        self.ranking.iter().position(|&k| k == j).map(|pos| pos + 1)
    }
}

pub fn rank_descending(utilities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..utilities.len()).collect();
    order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]).then(a.cmp(&b)));
    order
}

/// Tuning shared by every method; fields irrelevant to a method are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScreenOptions {
    pub basis: BasisConfig,
    pub irls: IrlsConfig,
}

/// Runs `method` on `dataset`.
pub fn screen(method: Method, dataset: &Dataset, mode: ThresholdMode, opts: &ScreenOptions) -> Result<ScreeningReport> {
    match method {
        Method::Rc => rc_screen(dataset, mode),
        Method::RpcL2 => rpc_screen(dataset, Loss::L2, &opts.basis, &opts.irls, mode),
        Method::RpcL1 => rpc_screen(dataset, Loss::L1, &opts.basis, &opts.irls, mode),
        Method::Pearson => pearson_sis(dataset, mode),
        Method::Kendall => kendall_sis(dataset, mode),
    }
}
