//! Robust correlation screening for ultrahigh-dimensional data.
//!
//! Each covariate is scored by a distribution-based correlation utility
//! computed from empirical CDFs, so rankings depend only on ranks and are
//! insensitive to heavy tails and outliers. The exposure-adjusted variant
//! removes a confounder's effect with spline regressions before scoring.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod dataset;
pub mod empirical;
pub mod error;
pub mod rc;
pub mod rng;
pub mod rpc;
pub mod screening;
pub mod simgen;
pub mod spline;
pub mod stats;

pub use baselines::{kendall_sis, kendall_tau_b, pearson_sis};
pub use bench::{mms, rsd, run_replications, MethodMetrics, MetricsReport};
pub use dataset::Dataset;
pub use empirical::{EmpiricalCdf, JointCounts};
pub use error::{Result, ScreenError};
pub use rc::{
    rc_screen, rc_utilities, rc_utility, rho_ci, rho_hat, wild_bootstrap_test, BootstrapTestResult, PointwiseCi,
    RcUtilityVector,
};
pub use rpc::{residualize, rpc_estimate, rpc_screen, rpc_utilities, rpc_utility, BasisConfig, ResidualMatrix, RpcUtilityVector};
pub use screening::{default_top_d, screen, Method, ScreenOptions, ScreeningReport, ThresholdMode};
pub use simgen::{generate, Noise, ScenarioId, SimDataset, SimScenario};
pub use spline::{fit_l1, fit_l2, IrlsConfig, Loss, SplineBasis, SplineFit};
