use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use robreg::certificate::build_truncation_set;
use robreg::lowdeg::{advantage_bound, hermite_cross_coeff, hermite_poly};
use robreg::oracles::{gauss_hermite_2d, integrate_with_breaks};
use robreg::regress::{fit_ols, fit_robust, fit_robust_traced, RegressorConfig};
use robreg::sampling::{contaminate_tracked, sample_clean, Adversary, ContaminationSpec};
use robreg::sq::chi2_gaussians;
use robreg::suite::sweep_model;
use robreg::{mahalanobis_error, random_unit_vector, Covariance, Dataset, LinearModelSpec, Seed, SpikedCovariance};

fn orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = Seed(seed).rng();
    let cols: Vec<DVector<f64>> = (0..d).map(|_| random_unit_vector(d, &mut rng).unwrap()).collect();
    DMatrix::from_columns(&cols).qr().q()
}

fn attacked(d: usize, n: usize, kappa: f64, eps: f64, seed: u64) -> (LinearModelSpec, Dataset) {
    let model = sweep_model(d, kappa, Seed(seed)).unwrap();
    let clean = sample_clean(&model, n, Seed(seed).derive("clean", 0)).unwrap();
    let spec = ContaminationSpec::new(eps, Adversary::TargetedLabels { scale: None, noise_sd: 1.0 }).unwrap();
    let data = contaminate_tracked(&clean, &spec, Seed(seed).derive("adv", 0)).unwrap().data;
    (model, data)
}

/// Log density of `N(mean, var)`; ratios of densities underflow in the tails.
fn log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (x - mean).powi(2) / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spike_acts_as_specified(d in 2usize..12, kappa in 1.0f64..1e4, seed in any::<u64>()) {
        let mut rng = Seed(seed).rng();
        let v = random_unit_vector(d, &mut rng).unwrap();
        let cov = SpikedCovariance::new(v.clone(), kappa).unwrap();
        let sv = DVector::from_vec(cov.apply(v.as_slice()));
        prop_assert!((sv - &v / kappa).norm() <= 1e-12);
        let g = random_unit_vector(d, &mut rng).unwrap();
        let w = &g - &v * g.dot(&v);
        let sw = DVector::from_vec(cov.apply(w.as_slice()));
        prop_assert!((sw - &w).norm() <= 1e-12);
    }

    #[test]
    fn mahalanobis_is_rotation_invariant(d in 2usize..8, kappa in 1.0f64..100.0, seed in any::<u64>()) {
        let mut rng = Seed(seed).rng();
        let v = random_unit_vector(d, &mut rng).unwrap();
        let sigma = SpikedCovariance::new(v, kappa).unwrap().to_dense();
        let b = random_unit_vector(d, &mut rng).unwrap();
        let bh = random_unit_vector(d, &mut rng).unwrap() * 0.3;
        let q = orthogonal(d, seed ^ 1);
        let base = mahalanobis_error(&bh, &b, &Covariance::dense(sigma.clone()).unwrap()).unwrap();
        let rot_sigma = &q * sigma * q.transpose();
        let rot = mahalanobis_error(&(&q * bh), &(&q * b), &Covariance::dense(rot_sigma).unwrap()).unwrap();
        prop_assert!((base - rot).abs() <= 1e-10 * base.max(1.0));
    }

    #[test]
    fn sampling_is_seed_deterministic(d in 1usize..6, n in 1usize..200, seed in any::<u64>()) {
        let model = sweep_model(d, 3.0, Seed(seed)).unwrap();
        let a = sample_clean(&model, n, Seed(seed).derive("x", 0)).unwrap();
        let b = sample_clean(&model, n, Seed(seed).derive("x", 0)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn contamination_respects_budget(n in 20usize..400, eps in 0.0f64..0.45, huber in any::<bool>(), seed in any::<u64>()) {
        let model = sweep_model(3, 2.0, Seed(seed)).unwrap();
        let clean = sample_clean(&model, n, Seed(seed).derive("c", 0)).unwrap();
        let adv = if huber {
            Adversary::HuberMixture { covariance: Covariance::identity(3), label: 1.0 }
        } else {
            Adversary::TargetedLabels { scale: Some(20.0), noise_sd: 1.0 }
        };
        let out = contaminate_tracked(&clean, &ContaminationSpec::new(eps, adv).unwrap(), Seed(seed).derive("a", 0)).unwrap();
        if !huber {
            prop_assert_eq!(out.corrupted.len(), (eps * n as f64).floor() as usize);
        }
        let mut flagged = vec![false; n];
        for &i in &out.corrupted {
            flagged[i] = true;
        }
        for i in 0..n {
            if !flagged[i] {
                prop_assert_eq!(out.data.row(i), clean.row(i));
            }
        }
    }

    #[test]
    fn zero_eps_pipeline_equals_clean_sample(n in 10usize..200, seed in any::<u64>()) {
        let model = sweep_model(4, 5.0, Seed(seed)).unwrap();
        let clean = sample_clean(&model, n, Seed(seed)).unwrap();
        let spec = ContaminationSpec::new(0.0, Adversary::TargetedLabels { scale: None, noise_sd: 1.0 }).unwrap();
        let out = contaminate_tracked(&clean, &spec, Seed(seed ^ 7)).unwrap();
        prop_assert_eq!(out.data, clean);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn filter_weights_never_increase(seed in any::<u64>(), eps in 0.05f64..0.2) {
        let (_, data) = attacked(6, 1500, 4.0, eps, seed);
        let cfg = RegressorConfig::new(eps).unwrap();
        if let Ok((report, trace)) = fit_robust_traced(&data, &cfg) {
            for pair in trace.windows(2) {
                prop_assert!(pair[1].iter().zip(&pair[0]).all(|(b, a)| b <= a));
            }
            // Every round that did not stop strictly lowered some weight.
            for pair in trace.windows(2).take(report.rounds_used) {
                prop_assert!(pair[1].iter().zip(&pair[0]).any(|(b, a)| b < a));
            }
        }
    }

    #[test]
    fn robust_fit_is_rotation_equivariant(seed in any::<u64>()) {
        let d = 6;
        let (_, data) = attacked(d, 1500, 4.0, 0.1, seed);
        let q = orthogonal(d, seed ^ 3);
        let cfg = RegressorConfig::new(0.1).unwrap();
        let base = fit_robust(&data, &cfg);
        let rot = fit_robust(&data.map_covariates(&q).unwrap(), &cfg);
        match (base, rot) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.rounds_used, b.rounds_used);
                let want = &q * a.beta_hat;
                prop_assert!(rel(&b.beta_hat, &want) <= 1e-8, "rel {}", rel(&b.beta_hat, &want));
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn fits_scale_with_labels(seed in any::<u64>(), c in 0.01f64..100.0) {
        let (_, data) = attacked(5, 1200, 2.0, 0.1, seed);
        let scaled = data.scale_labels(c);
        let a = fit_ols(&data).unwrap().beta_hat;
        let b = fit_ols(&scaled).unwrap().beta_hat;
        prop_assert!(rel(&b, &(&a * c)) <= 1e-8);
        let cfg = RegressorConfig::new(0.1).unwrap();
        if let (Ok(a), Ok(b)) = (fit_robust(&data, &cfg), fit_robust(&scaled, &cfg)) {
            prop_assert!(rel(&b.beta_hat, &(&a.beta_hat * c)) <= 1e-8);
        }
    }

    #[test]
    fn truncation_set_follows_row_permutation(seed in any::<u64>(), n in 10usize..300) {
        let d = 4;
        let m = LinearModelSpec::new(Covariance::identity(d), DVector::zeros(d), 1.0).unwrap();
        let mut data = sample_clean(&m, n, Seed(seed)).unwrap();
        // Inflate every seventh row so the thresholds bind.
        for i in (0..n).step_by(7) {
            data.row_mut(i).iter_mut().for_each(|x| *x *= 30.0);
        }
        let u = random_unit_vector(d, &mut Seed(seed ^ 5).rng()).unwrap();
        let eps = 0.3;
        let keep = build_truncation_set(&data, &u, eps, 1.0).unwrap();
        prop_assert!(keep.len() < n);
        let perm: Vec<usize> = (0..n).rev().collect();
        let rows: Vec<f64> = perm.iter().flat_map(|&i| data.row(i).to_vec()).collect();
        let shuffled = Dataset::new(d, rows, 0).unwrap();
        let mut mapped: Vec<usize> = build_truncation_set(&shuffled, &u, eps, 1.0).unwrap().iter().map(|&j| perm[j]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, keep);
    }

    #[test]
    fn hermite_closed_form_matches_quadrature(
        sxx in 0.2f64..3.0, syy in 0.3f64..3.0, rho in -0.95f64..0.95, k in 0usize..=10, l in 0usize..=10,
    ) {
        let sxy = rho * (sxx * syy).sqrt();
        let sy = syy.sqrt();
        let closed = hermite_cross_coeff(k, l, sxx, sxy, syy);
        let gh = gauss_hermite_2d(|x, y| hermite_poly(k, x).unwrap() * hermite_poly(l, y / sy).unwrap(), sxx, sxy, syy, 16).unwrap();
        prop_assert!((closed - gh).abs() <= 1e-8 * closed.abs().max(1.0), "{closed} vs {gh}");
    }

    #[test]
    fn chi2_closed_forms_match_quadrature(mu1 in -2.0f64..2.0, v1 in 0.3f64..1.7, mu2 in -2.0f64..2.0, v2 in 0.3f64..1.7) {
        // Both integrands are Gaussian shapes; place breaks around their centers.
        let breaks = |prec: f64, center: f64| {
            let sd = prec.recip().sqrt();
            let mut b = vec![-40.0, 40.0, center - 60.0 * sd, center, center + 60.0 * sd];
            b.sort_by(f64::total_cmp);
            b
        };
        let pair = robreg::sq::chi2_pair_corr(mu1, v1, mu2, v2).unwrap();
        let prec = 1.0 / v1 + 1.0 / v2 - 1.0;
        let f = |x: f64| (log_pdf(x, mu1, v1) + log_pdf(x, mu2, v2) - log_pdf(x, 0.0, 1.0)).exp();
        let quad = integrate_with_breaks(f, &breaks(prec, (mu1 / v1 + mu2 / v2) / prec), 1e-12 * (1.0 + pair.abs())).unwrap() - 1.0;
        prop_assert!((pair - quad).abs() <= 1e-6 * pair.abs().max(1e-3), "pair {pair} vs {quad}");

        prop_assume!(2.0 * v2 - v1 >= 0.5);
        let div = chi2_gaussians(mu1, v1, mu2, v2).unwrap();
        let prec = 2.0 / v1 - 1.0 / v2;
        let g = |x: f64| (2.0 * log_pdf(x, mu1, v1) - log_pdf(x, mu2, v2)).exp();
        let quad = integrate_with_breaks(g, &breaks(prec, (2.0 * mu1 / v1 - mu2 / v2) / prec), 1e-12 * (1.0 + div.abs())).unwrap() - 1.0;
        prop_assert!((div - quad).abs() <= 1e-6 * div.abs().max(1e-3), "chi2 {div} vs {quad}");
    }

    #[test]
    fn advantage_monotone(n in 1.0f64..1e6, d in 1e4f64..1e7, eps in 0.05f64..0.45, kappa in 20.0f64..1e4) {
        let base = advantage_bound(n, d, eps, kappa, 8).unwrap();
        prop_assert!(advantage_bound(2.0 * n, d, eps, kappa, 8).unwrap() >= base);
        prop_assert!(advantage_bound(n, 2.0 * d, eps, kappa, 8).unwrap() <= base);
        prop_assert!(advantage_bound(n, d, eps, 2.0 * kappa, 8).unwrap() <= base);
    }
}
