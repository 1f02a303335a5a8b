mod common;

use common::*;
use rand::Rng;
use rand_distr::StandardNormal;
use robscreen::rng::stream_rng;
use robscreen::*;

#[test]
fn ci_under_independence_covers_zero() {
    let mut rng = stream_rng(401, 0);
    let reps = 400;
    let mut covered = 0;
    let mut mean_abs = 0.0;
    for _ in 0..reps {
        let (y, x) = bivariate_normal(&mut rng, 300, 0.0);
        let ci = rho_ci(0.0, 0.0, &JointCounts::build(&y, &x).unwrap(), 0.95).unwrap();
        assert!(ci.variance_hat >= 0.0);
        covered += (ci.lower <= 0.0 && 0.0 <= ci.upper) as usize;
        mean_abs += ci.rho_hat.abs() / reps as f64;
    }
    let rate = covered as f64 / reps as f64;
    assert!((0.92..=0.98).contains(&rate), "coverage {rate}");
    assert!(mean_abs < 0.1, "{mean_abs}");
}

#[test]
fn variance_estimate_is_nonnegative() {
    let mut rng = stream_rng(402, 0);
    for _ in 0..200 {
        let n = rng.random_range(30..80);
        let y = random_column(&mut rng, n);
        let x = related_column(&mut rng, &y);
        let jc = JointCounts::build(&y, &x).unwrap();
        let i = rng.random_range(0..n);
        match rho_ci(y[i], x[i], &jc, 0.9) {
            Ok(ci) => assert!(ci.variance_hat >= 0.0 && ci.lower <= ci.upper),
            Err(ScreenError::DegenerateEvaluation(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn bootstrap_has_power_against_strong_dependence() {
    let mut rng = stream_rng(403, 0);
    let reps = 40;
    let mut rejections = 0;
    for r in 0..reps {
        let y: Vec<f64> = (0..100).map(|_| rng.sample(StandardNormal)).collect();
        let x: Vec<f64> = y.iter().map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        rejections += wild_bootstrap_test(&y, &x, 200, 0.05, r).unwrap().reject as usize;
    }
    assert!(rejections as f64 >= 0.95 * reps as f64, "{rejections} of {reps}");
}

#[test]
fn permuted_covariate_falls_below_critical_value() {
    let mut rng = stream_rng(404, 0);
    let reps = 100;
    let mut below = 0;
    for r in 0..reps {
        let (y, x) = bivariate_normal(&mut rng, 100, 0.8);
        let mut perm = x.clone();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let test = wild_bootstrap_test(&y, &perm, 200, 0.05, r).unwrap();
        below += (test.statistic <= test.critical_value) as usize;
    }
    // 1 - alpha less a Monte-Carlo allowance of three binomial standard errors.
    let floor = 0.95 - 3.0 * (0.05f64 * 0.95 / reps as f64).sqrt();
    assert!(below as f64 / reps as f64 >= floor, "{below} of {reps}");
}

#[test]
fn hand_evaluated_residual_correlation() {
    // Residual pairs (1, 2), (2, 1), (3, 4), (4, 3) at (u, v) = (2, 2):
    // F_Y = F_X = 2/5, F_YX = 2/5, so rho = (2/5 - 4/25) / (6/25) = 1.
    let ey = [1.0, 2.0, 3.0, 4.0];
    let ex = [2.0, 1.0, 4.0, 3.0];
    assert!((rpc_estimate(2.0, 2.0, &ey, &ex).unwrap() - 1.0).abs() < 1e-15);
    // At (1, 1): F_Y = F_X = 1/5, F_YX = 0, rho = -(1/25) / (4/25) = -1/4.
    assert!((rpc_estimate(1.0, 1.0, &ey, &ex).unwrap() + 0.25).abs() < 1e-15);
    assert_eq!(rpc_estimate(2.5, 2.5, &ey, &ey).unwrap(), 1.0);
}

#[test]
fn independent_residuals_have_small_correlation() {
    let mut rng = stream_rng(405, 0);
    let mut total = 0.0;
    for _ in 0..50 {
        let (ey, ex) = bivariate_normal(&mut rng, 200, 0.0);
        total += (0..200).map(|i| rpc_estimate(ey[i], ex[i], &ey, &ex).unwrap().abs()).sum::<f64>() / 200.0;
    }
    assert!(total / 50.0 < 0.1);
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    robscreen::stats::pearson(&rank(a), &rank(b)).unwrap()
}

#[test]
fn rpc_with_irrelevant_exposure_agrees_with_rc() {
    let mut rng = stream_rng(406, 0);
    let n = 400;
    let p = 60;
    let x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| (0..p).map(|j| x[j][i] * 2.0 / (1.0 + j as f64)).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let ds = Dataset::new(y, x, Some(z)).unwrap();
    let rc = rc_screen(&ds, ThresholdMode::TopD(10)).unwrap();
    for loss in [Loss::L2, Loss::L1] {
        let rpc = rpc_screen(&ds, loss, &BasisConfig::default(), &IrlsConfig::default(), ThresholdMode::TopD(10)).unwrap();
        let rho = spearman(&rc.utilities, &rpc.utilities);
        assert!(rho >= 0.9, "{loss:?}: {rho}");
    }
}

#[test]
fn rpc_report_is_deterministic_and_column_names_surface() {
    let mut rng = stream_rng(407, 0);
    let n = 80;
    let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let x: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let y: Vec<f64> = (0..n).map(|i| x[3][i] + z[i]).collect();
    let ds = Dataset::new(y, x, Some(z)).unwrap();
    let a = rpc_screen(&ds, Loss::L1, &BasisConfig::default(), &IrlsConfig::default(), ThresholdMode::TopD(1)).unwrap();
    let b = rpc_screen(&ds, Loss::L1, &BasisConfig::default(), &IrlsConfig::default(), ThresholdMode::TopD(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.selected, vec![3]);
    assert_eq!(a.method.tag(), "RPC-SIS(L1)");
    assert!(a.utilities.iter().all(|u| (0.0..=1.0).contains(u)));
}
