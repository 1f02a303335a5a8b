mod common;

use common::*;
use rand::Rng;
use robscreen::rng::stream_rng;
use robscreen::*;

#[test]
fn rc_utility_matches_triple_loop_exactly() {
    let mut rng = stream_rng(101, 0);
    for _ in 0..300 {
        let n = rng.random_range(2..=60);
        let y = random_column(&mut rng, n);
        let x = if rng.random_bool(0.5) { related_column(&mut rng, &y) } else { random_column(&mut rng, n) };
        assert_eq!(rc_utility(&y, &x).unwrap(), naive_rc_utility(&y, &x));
    }
}

#[test]
fn integer_form_agrees_with_definition() {
    let mut rng = stream_rng(102, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=40);
        let y = random_column(&mut rng, n);
        let x = related_column(&mut rng, &y);
        let jc = JointCounts::build(&y, &x).unwrap();
        for i in 0..n {
            let fast = rho_hat(y[i], x[i], &jc).unwrap();
            assert_eq!(fast, naive_rho(&y, &x, i));
            assert!((fast - definitional_rho(&y, &x, y[i], x[i])).abs() < 1e-12);
        }
        // Off-sample query points as well.
        let (u, v) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        assert!((rho_hat(u, v, &jc).unwrap() - definitional_rho(&y, &x, u, v)).abs() < 1e-12);
    }
}

#[test]
fn joint_ecdf_matches_direct_count() {
    let mut rng = stream_rng(103, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let y = random_column(&mut rng, n);
        let x = random_column(&mut rng, n);
        let jc = JointCounts::build(&y, &x).unwrap();
        let all = jc.joint_counts_all();
        for i in 0..n {
            let direct = (0..n).filter(|&k| y[k] <= y[i] && x[k] <= x[i]).count();
            assert_eq!(all[i], direct);
            assert_eq!(jc.joint_eval(y[i], x[i]), direct as f64 / (n as f64 + 1.0));
        }
    }
}

#[test]
fn rpc_utility_matches_triple_loop_on_residuals() {
    let mut rng = stream_rng(104, 0);
    for _ in 0..60 {
        let n = rng.random_range(12..=50);
        let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let y: Vec<f64> = z.iter().map(|z| (6.0 * z).sin() + rng.random::<f64>()).collect();
        let x: Vec<Vec<f64>> = (0..3).map(|_| z.iter().map(|z| z * z + rng.random::<f64>()).collect()).collect();
        let ds = Dataset::new(y, x, Some(z)).unwrap();
        for loss in [Loss::L2, Loss::L1] {
            let res = residualize(&ds, &BasisConfig::default(), loss, &IrlsConfig::default()).unwrap();
            let u = rpc_utilities(&res).unwrap();
            for (j, col) in res.eps_x.iter().enumerate() {
                assert_eq!(u.utilities[j], naive_rc_utility(&res.eps_y, col));
                assert_eq!(rpc_utility(&res.eps_y, col).unwrap(), u.utilities[j]);
            }
        }
    }
}

#[test]
fn kendall_matches_pair_count_exactly() {
    let mut rng = stream_rng(105, 0);
    for _ in 0..300 {
        let n = rng.random_range(2..=200);
        let y = random_column(&mut rng, n);
        let x = if rng.random_bool(0.5) { related_column(&mut rng, &y) } else { random_column(&mut rng, n) };
        assert_eq!(kendall_tau_b(&x, &y).unwrap(), naive_tau_b(&x, &y));
    }
}

#[test]
fn pearson_matches_textbook_formula() {
    let mut rng = stream_rng(106, 0);
    for _ in 0..50 {
        let y = random_column(&mut rng, 10);
        let x = related_column(&mut rng, &y);
        let n = 10.0;
        let (my, mx) = (y.iter().sum::<f64>() / n, x.iter().sum::<f64>() / n);
        let sxy: f64 = y.iter().zip(&x).map(|(a, b)| (a - my) * (b - mx)).sum();
        let sxx: f64 = x.iter().map(|b| (b - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|a| (a - my).powi(2)).sum();
        let ds = Dataset::new(y.clone(), vec![x.clone()], None).unwrap();
        let got = pearson_sis(&ds, ThresholdMode::TopD(1)).unwrap().utilities[0];
        let want = if sxx == 0.0 || syy == 0.0 { 0.0 } else { (sxy / (sxx * syy).sqrt()).abs() };
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn fit_l2_matches_dense_normal_equations() {
    let mut rng = stream_rng(107, 0);
    for _ in 0..20 {
        let n = rng.random_range(20..=80);
        let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let basis = SplineBasis::build(&z, 3, 6).unwrap();
        let fit = fit_l2(&basis, &z, &w).unwrap();
        let rows: Vec<Vec<f64>> = z.iter().map(|&v| basis.eval(v).unwrap()).collect();
        let b = nalgebra::DMatrix::from_fn(n, 6, |i, k| rows[i][k]);
        let gamma = (b.transpose() * &b).lu().solve(&(b.transpose() * nalgebra::DVector::from_vec(w))).unwrap();
        for k in 0..6 {
            assert!((fit.gamma[k] - gamma[k]).abs() < 1e-9 * (1.0 + gamma[k].abs()));
        }
    }
}

/// Smallest L1 objective over all coefficient vectors interpolating `dim`
/// of the points, which contains an exact minimiser.
fn exhaustive_lad(rows: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = rows.len();
    let obj = |g: &[f64]| {
        rows.iter().zip(w).map(|(r, w)| (w - r.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()).abs()).sum::<f64>()
            / n as f64
    };
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let idx = [a, b, c, d];
                    let m = nalgebra::DMatrix::from_fn(4, 4, |i, k| rows[idx[i]][k]);
                    let rhs = nalgebra::DVector::from_iterator(4, idx.iter().map(|&i| w[i]));
                    if let Some(s) = m.lu().solve(&rhs) {
                        let o = obj(s.as_slice());
                        if o.is_finite() {
                            best = best.min(o);
                        }
                    }
                }
            }
        }
    }
    best
}

#[test]
fn fit_l1_reaches_the_exact_lad_optimum() {
    let mut rng = stream_rng(108, 0);
    for _ in 0..60 {
        let n = rng.random_range(10..=22);
        let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let w: Vec<f64> = z.iter().map(|&v| (3.0 * v).cos() + rng.random_range(-1.0..1.0)).collect();
        let basis = SplineBasis::build(&z, 3, 4).unwrap();
        let rows: Vec<Vec<f64>> = z.iter().map(|&v| basis.eval(v).unwrap()).collect();
        let fit = fit_l1(&basis, &z, &w, &IrlsConfig::default()).unwrap();
        let pred = fit.predict(&z).unwrap();
        let got = w.iter().zip(&pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        let want = exhaustive_lad(&rows, &w);
        assert!(got <= want + 1e-12 * (1.0 + want), "{got} vs {want}");
        assert!(fit.converged);
    }
}
