mod common;

use proptest::prelude::*;
use robscreen::*;

/// Values on a coarse grid so strictly increasing maps keep them distinct
/// in floating point.
fn grid_column(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-40i32..40).prop_map(|k| k as f64 / 8.0), n)
}

fn dataset(n: usize, p: usize) -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (grid_column(n), prop::collection::vec(grid_column(n), p))
}

fn sized_dataset() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (3usize..40, 1usize..6).prop_flat_map(|(n, p)| dataset(n, p))
}

fn exposure_sample() -> impl Strategy<Value = Vec<f64>> {
    (12usize..60).prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rc_report_is_invariant_under_increasing_maps((y, x) in sized_dataset(), which in 0usize..3) {
        let f = |v: f64| match which {
            0 => v.exp(),
            1 => v * v * v,
            _ => v.atan() * 3.0 + 1.0,
        };
        let base = rc_screen(&Dataset::new(y.clone(), x.clone(), None).unwrap(), ThresholdMode::TopD(2)).unwrap();
        let ty: Vec<f64> = y.iter().map(|&v| f(v)).collect();
        let tx: Vec<Vec<f64>> = x.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect();
        let moved = rc_screen(&Dataset::new(ty, tx, None).unwrap(), ThresholdMode::TopD(2)).unwrap();
        prop_assert_eq!(&base, &moved);
        let kb = kendall_sis(&Dataset::new(y.clone(), x.clone(), None).unwrap(), ThresholdMode::TopD(2)).unwrap();
        let ky: Vec<f64> = y.iter().map(|&v| f(v)).collect();
        let kx: Vec<Vec<f64>> = x.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect();
        let km = kendall_sis(&Dataset::new(ky, kx, None).unwrap(), ThresholdMode::TopD(2)).unwrap();
        prop_assert_eq!(kb, km);
    }

    #[test]
    fn utilities_lie_in_unit_interval((y, x) in sized_dataset()) {
        for col in &x {
            let u = rc_utility(&y, col).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&u), "{}", u);
        }
        prop_assert_eq!(rc_utility(&y, &y).unwrap() <= 1.0, true);
    }

    #[test]
    fn joint_counts_are_bounded_by_marginals((y, x) in (3usize..50).prop_flat_map(|n| (grid_column(n), grid_column(n)))) {
        let jc = JointCounts::build(&y, &x).unwrap();
        let fy = EmpiricalCdf::build(&y).unwrap();
        let fx = EmpiricalCdf::build(&x).unwrap();
        for i in 0..y.len() {
            let j = jc.joint_eval(y[i], x[i]);
            prop_assert!(j <= fy.eval_rescaled(y[i]) && j <= fx.eval_rescaled(x[i]));
            prop_assert!(j >= fy.eval_rescaled(y[i]) + fx.eval_rescaled(x[i]) - 1.0 - 1e-15);
        }
    }

    #[test]
    fn pearson_is_affine_equivariant((y, x) in sized_dataset(), a in 0.1f64..10.0, b in -5.0f64..5.0, flip in any::<bool>()) {
        let a = if flip { -a } else { a };
        let base = pearson_sis(&Dataset::new(y.clone(), x.clone(), None).unwrap(), ThresholdMode::TopD(1)).unwrap();
        let tx: Vec<Vec<f64>> = x.iter().map(|c| c.iter().map(|&v| a * v + b).collect()).collect();
        let moved = pearson_sis(&Dataset::new(y, tx, None).unwrap(), ThresholdMode::TopD(1)).unwrap();
        for (u, v) in base.utilities.iter().zip(&moved.utilities) {
            prop_assert!((u - v).abs() < 1e-9, "{} vs {}", u, v);
        }
    }

    #[test]
    fn basis_is_a_partition_of_unity(z in exposure_sample(), degree in 1usize..4, extra in 0usize..4, probes in prop::collection::vec(0.0f64..1.0, 20)) {
        let dim = degree + 1 + extra;
        let basis = SplineBasis::build(&z, degree, dim).unwrap();
        let (a, b) = basis.support();
        for t in probes {
            let v = basis.eval(a + t * (b - a)).unwrap();
            prop_assert_eq!(v.len(), dim);
            prop_assert!(v.iter().all(|&e| (0.0..=1.0).contains(&e)));
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_fit_satisfies_normal_equations(z in exposure_sample(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = robscreen::rng::stream_rng(seed, 0);
        let w: Vec<f64> = z.iter().map(|&v| 10.0 * (5.0 * v).sin() + rng.random_range(-3.0..3.0)).collect();
        let basis = SplineBasis::build(&z, 3, 5).unwrap();
        let fit = fit_l2(&basis, &z, &w).unwrap();
        let pred = fit.predict(&z).unwrap();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rows: Vec<Vec<f64>> = z.iter().map(|&v| basis.eval(v).unwrap()).collect();
        for k in 0..basis.dim() {
            let btr: f64 = rows.iter().zip(w.iter().zip(&pred)).map(|(r, (w, f))| r[k] * (w - f)).sum();
            prop_assert!(btr.abs() <= 1e-8 * norm, "column {}: {}", k, btr);
        }
    }

    #[test]
    fn l1_objective_never_exceeds_l2_objective(z in exposure_sample(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = robscreen::rng::stream_rng(seed, 1);
        let w: Vec<f64> = z.iter().map(|&v| v + (std::f64::consts::PI * (rng.random::<f64>() - 0.5)).tan()).collect();
        let basis = SplineBasis::build(&z, 3, 4).unwrap();
        let l1obj = |f: &SplineFit| {
            let p = f.predict(&z).unwrap();
            w.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>() / w.len() as f64
        };
        let l2 = fit_l2(&basis, &z, &w).unwrap();
        let l1 = fit_l1(&basis, &z, &w, &IrlsConfig::default()).unwrap();
        prop_assert!(l1obj(&l1) <= l1obj(&l2) + 1e-6);
    }

    #[test]
    fn fits_are_affine_equivariant(z in exposure_sample(), seed in any::<u64>(), c in 0.5f64..4.0, d in -10.0f64..10.0) {
        use rand::Rng;
        let mut rng = robscreen::rng::stream_rng(seed, 2);
        let w: Vec<f64> = z.iter().map(|&v| (3.0 * v).cos() + rng.random_range(-1.0..1.0)).collect();
        let moved: Vec<f64> = w.iter().map(|v| c * v + d).collect();
        let basis = SplineBasis::build(&z, 3, 4).unwrap();
        let a = fit_l2(&basis, &z, &w).unwrap().predict(&z).unwrap();
        let b = fit_l2(&basis, &z, &moved).unwrap().predict(&z).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((c * p + d - q).abs() < 1e-9 * (1.0 + q.abs()));
        }
        // L1 minimisers need not be unique: compare objectives.
        let cfg = IrlsConfig::default();
        let obj = |pred: &[f64], target: &[f64]| pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / z.len() as f64;
        let a = fit_l1(&basis, &z, &w, &cfg).unwrap().predict(&z).unwrap();
        let b = fit_l1(&basis, &z, &moved, &cfg).unwrap().predict(&z).unwrap();
        let mapped: Vec<f64> = a.iter().map(|p| c * p + d).collect();
        let (oa, ob) = (obj(&mapped, &moved), obj(&b, &moved));
        prop_assert!((oa - ob).abs() <= 1e-9 * (1.0 + ob), "{} vs {}", oa, ob);
    }

    #[test]
    fn ranks_only_worsen_when_noise_columns_are_added((y, x) in sized_dataset(), (extra, pick) in (1usize..4, any::<u64>())) {
        let n = y.len();
        let base = rc_screen(&Dataset::new(y.clone(), x.clone(), None).unwrap(), ThresholdMode::TopD(1)).unwrap();
        let mut more = x.clone();
        let mut rng = robscreen::rng::stream_rng(pick, 0);
        for _ in 0..extra {
            more.push(common::random_column(&mut rng, n));
        }
        let wide = rc_screen(&Dataset::new(y, more, None).unwrap(), ThresholdMode::TopD(1)).unwrap();
        prop_assert_eq!(&wide.utilities[..x.len()], &base.utilities[..]);
        let (rb, rw) = (base.ranks(), wide.ranks());
        for j in 0..x.len() {
            prop_assert!(rw[j] >= rb[j]);
        }
    }

    #[test]
    fn mms_matches_prefix_scan(perm in Just((0..30usize).collect::<Vec<_>>()).prop_shuffle(), active in prop::collection::btree_set(0usize..30, 1..6)) {
        let active: Vec<usize> = active.into_iter().collect();
        let got = mms(&perm, &active).unwrap();
        let mut want = 0;
        for k in 1..=perm.len() {
            if active.iter().all(|a| perm[..k].contains(a)) {
                want = k;
                break;
            }
        }
        prop_assert_eq!(got, want);
        prop_assert!(got >= active.len());
    }

    #[test]
    fn rsd_is_order_free_and_scale_equivariant(mut v in prop::collection::vec(-100.0f64..100.0, 1..50), s in 0.1f64..10.0) {
        let r = rsd(&v);
        prop_assert!(r >= 0.0);
        let scaled: Vec<f64> = v.iter().map(|x| s * x + 3.0).collect();
        prop_assert!((rsd(&scaled) - s * r).abs() < 1e-9 * (1.0 + s * r));
        v.reverse();
        prop_assert_eq!(rsd(&v), r);
    }
}
