use proptest::prelude::*;
use rand::Rng;

use semidp::local::select_privunit_params;
use semidp::optim::{
    clip, dp_sgd_baseline, ldp_sgd_baseline, noise_floor, project, semi_dp_sgd, semi_ldp_sgd, throwaway_erm, LossModel, SgdConfig,
    StepSchedule,
};
use semidp::{zcdp_to_approx_dp, RngStream, SplitDataset, ZcdpBudget};

fn regression(n_priv: usize, n_pub: usize, d: usize, seed: u64) -> SplitDataset {
    let mut rng = RngStream::new(seed, 0).rng();
    let w: Vec<f64> = (0..d).map(|j| 1.0 / (j + 1) as f64).collect();
    let n = n_priv + n_pub;
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.1 * (rng.random::<f64>() - 0.5)).collect();
    SplitDataset::new(x, (0..n).map(|i| i < n_priv).collect(), Some(y)).unwrap()
}

fn rho(r: f64) -> ZcdpBudget {
    ZcdpBudget::new(r).unwrap()
}

#[test]
fn alpha_zero_is_public_only_sgd() {
    let data = regression(60, 40, 3, 1);
    let cfg = SgdConfig {
        iterations: 30,
        epochs: 2,
        k_priv: 2,
        k_pub: 4,
        alpha: 0.0,
        step_sizes: StepSchedule::Constant(0.1),
        rescale_public: false,
        record_trace: true,
        ..SgdConfig::default()
    };
    let loss = LossModel::squared();
    let out = semi_dp_sgd(&data, &loss, &cfg, rho(1.0), &RngStream::new(3, 0)).unwrap();
    assert_eq!(out.rho, None);
    assert!(out.log.private_batches.iter().all(|b| b.is_empty()));

    // replay the logged public batches with a plain SGD loop
    let y = data.targets().unwrap();
    let mut w = vec![0.0; 3];
    for (t, batch) in out.log.public_batches.iter().enumerate() {
        assert_eq!(batch.len(), 4);
        assert!(batch.iter().all(|&i| !data.is_private(i)));
        let mut g = [0.0; 3];
        for &i in batch {
            let x = data.sample(i);
            let r = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - y[i];
            for j in 0..3 {
                g[j] += 2.0 * r * x[j] / 4.0;
            }
        }
        for j in 0..3 {
            w[j] -= 0.1 * g[j];
        }
        for j in 0..3 {
            assert!((w[j] - out.trace[t][j]).abs() < 1e-12);
        }
    }
    assert_eq!(out.weights, *out.trace.last().unwrap());
}

#[test]
fn dp_sgd_is_semi_dp_sgd_on_all_private_data() {
    let data = regression(70, 30, 4, 2);
    let cfg = SgdConfig {
        iterations: 10,
        epochs: 3,
        k_priv: 7,
        k_pub: 3,
        alpha: 0.6,
        ..SgdConfig::default()
    };
    let loss = LossModel::squared();
    let stream = RngStream::new(4, 9);
    let a = dp_sgd_baseline(&data, &loss, &cfg, rho(0.5), &stream).unwrap();
    let all = SgdConfig {
        k_priv: 10,
        k_pub: 0,
        alpha: 1.0,
        ..cfg
    };
    let b = semi_dp_sgd(&data.all_private(), &loss, &all, rho(0.5), &stream).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.noise_sigma2, noise_floor(1.0, 10, rho(0.5), 3));
    assert_eq!(a.log.max_private_uses_per_epoch(), 1);
    let eps = a.approx_dp(1e-5).unwrap().epsilon();
    assert_eq!(eps, zcdp_to_approx_dp(rho(0.5), 1e-5).unwrap().epsilon());
}

#[test]
fn local_sgd_without_private_data_is_averaged_sgd() {
    let data = regression(0, 50, 3, 5);
    let n = data.len();
    let cfg = SgdConfig {
        iterations: n,
        epochs: 1,
        step_sizes: StepSchedule::Constant(0.05),
        rescale_public: false,
        ..SgdConfig::default()
    };
    let pu = select_privunit_params(4.0, 3).unwrap();
    let out = semi_ldp_sgd(&data, &LossModel::squared(), &cfg, &pu, &RngStream::new(6, 0)).unwrap();
    assert_eq!(out.local_eps, None);
    let y = data.targets().unwrap();
    let (mut w, mut avg) = (vec![0.0; 3], vec![0.0; 3]);
    for batch in &out.log.public_batches {
        let i = batch[0];
        let x = data.sample(i);
        let r = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - y[i];
        for j in 0..3 {
            w[j] -= 0.05 * 2.0 * r * x[j];
            avg[j] += w[j] / n as f64;
        }
    }
    for j in 0..3 {
        assert!((avg[j] - out.weights[j]).abs() < 1e-12);
    }
    // every sample visited exactly once
    let mut seen: Vec<usize> = out.log.public_batches.iter().flatten().copied().collect();
    seen.sort();
    assert_eq!(seen, (0..n).collect::<Vec<_>>());
}

#[test]
fn local_methods_make_one_pass() {
    let data = regression(30, 10, 3, 7);
    let pu = select_privunit_params(2.0, 3).unwrap();
    let loss = LossModel::squared();
    let good = SgdConfig {
        iterations: 40,
        epochs: 1,
        step_sizes: StepSchedule::Constant(0.01),
        ..SgdConfig::default()
    };
    let out = ldp_sgd_baseline(&data, &loss, &good, &pu, &RngStream::new(1, 1)).unwrap();
    assert_eq!(out.local_eps, Some(pu.eps_certified()));
    assert_eq!(out.log.max_private_uses_per_epoch(), 1);
    let two = SgdConfig { epochs: 2, ..good.clone() };
    assert!(semi_ldp_sgd(&data, &loss, &two, &pu, &RngStream::new(1, 1)).is_err());
    let short = SgdConfig { iterations: 39, ..good };
    assert!(semi_ldp_sgd(&data, &loss, &short, &pu, &RngStream::new(1, 1)).is_err());
}

#[test]
fn throwaway_erm_solves_normal_equations() {
    let data = regression(20, 30, 2, 8);
    let w = throwaway_erm(&data, &LossModel::squared()).unwrap();
    let y = data.targets().unwrap();
    // 2x2 normal equations over the public rows
    let (mut a, mut b) = ([[0.0; 2]; 2], [0.0; 2]);
    for i in data.public_indices() {
        let x = data.sample(i);
        for r in 0..2 {
            for c in 0..2 {
                a[r][c] += x[r] * x[c];
            }
            b[r] += x[r] * y[i];
        }
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let want = [(b[0] * a[1][1] - b[1] * a[0][1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det];
    assert!((w[0] - want[0]).abs() < 1e-10 && (w[1] - want[1]).abs() < 1e-10);
}

proptest! {
    #[test]
    fn projection_and_clipping(v in prop::collection::vec(-100.0f64..100.0, 1..8), r in 0.01f64..50.0) {
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        for f in [project, clip] {
            let p = f(&v, r);
            prop_assert!(norm(&p) <= r * (1.0 + 1e-12));
            // idempotent, and the identity inside the ball
            let q = f(&p, r);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 1e-12 * r);
            }
            if norm(&v) <= r {
                prop_assert_eq!(&p, &v);
            } else {
                // same direction
                let cos = p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (norm(&p) * norm(&v));
                prop_assert!((cos - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn training_is_deterministic(seed in 0u64..10_000, alpha in 0.0f64..1.0) {
        let data = regression(40, 20, 3, 11);
        let cfg = SgdConfig { iterations: 8, epochs: 2, k_priv: 5, k_pub: 4, alpha, ..SgdConfig::default() };
        let loss = LossModel::squared();
        let a = semi_dp_sgd(&data, &loss, &cfg, rho(1.0), &RngStream::new(seed, 0)).unwrap();
        let b = semi_dp_sgd(&data, &loss, &cfg, rho(1.0), &RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(&a, &b);
        let c = semi_dp_sgd(&data, &loss, &cfg, rho(1.0), &RngStream::new(seed + 1, 0)).unwrap();
        prop_assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn calibration_floor_is_enforced(k in 1usize..20, epochs in 1usize..5, r in 0.01f64..10.0, below in 0.5f64..0.99) {
        let data = regression(40, 10, 2, 12);
        let floor = noise_floor(1.0, k, rho(r), epochs);
        prop_assert!((floor - 2.0 * epochs as f64 / (r * (k * k) as f64)).abs() <= 1e-12 * floor);
        let cfg = SgdConfig { iterations: 40 / k, epochs, k_priv: k, k_pub: 2, noise_sigma2: Some(floor * below), ..SgdConfig::default() };
        let low = semi_dp_sgd(&data, &LossModel::squared(), &cfg, rho(r), &RngStream::new(0, 0));
        prop_assert!(matches!(low, Err(semidp::Error::PrivacyCalibration(_))));
        let ok = SgdConfig { noise_sigma2: Some(floor), ..cfg.clone() };
        prop_assert!(semi_dp_sgd(&data, &LossModel::squared(), &ok, rho(r), &RngStream::new(0, 0)).is_ok());
        let long = SgdConfig { iterations: 40 / k + 1, noise_sigma2: None, ..cfg };
        let rejected = semi_dp_sgd(&data, &LossModel::squared(), &long, rho(r), &RngStream::new(0, 0));
        prop_assert!(matches!(rejected, Err(semidp::Error::PrivacyCalibration(_))));
    }
}
