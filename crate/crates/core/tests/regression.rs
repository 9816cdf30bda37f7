use nalgebra::DMatrix;
use robreg::linalg::{condition_number, inv_sqrt_spd};
use robreg::regress::{fit_ols, fit_preconditioned, fit_robust, RegressorConfig};
use robreg::sampling::{contaminate, sample_clean, Adversary, ContaminationSpec};
use robreg::suite::sweep_model;
use robreg::{mahalanobis_error, Covariance, LinearModelSpec, Seed};

fn targeted(eps: f64, scale: Option<f64>) -> ContaminationSpec {
    ContaminationSpec::new(eps, Adversary::TargetedLabels { scale, noise_sd: 1.0 }).unwrap()
}

#[test]
fn ols_risk_matches_classical_rate() {
    let (d, n, trials) = (20, 100_000, 50);
    let model = sweep_model(d, 1.0, Seed(1)).unwrap();
    let mut total = 0.0;
    for t in 0..trials {
        let data = sample_clean(&model, n, Seed(1).derive("ols", t)).unwrap();
        let fit = fit_ols(&data).unwrap();
        total += mahalanobis_error(&fit.beta_hat, &model.beta, &model.covariance).unwrap();
    }
    let mean = total / trials as f64;
    let bound = 2.0 * (d as f64 / n as f64).sqrt();
    assert!(mean <= bound, "mean OLS error {mean} > {bound}");
}

#[test]
fn targeted_attack_breaks_ols() {
    let model = sweep_model(20, 1.0, Seed(2)).unwrap();
    let clean = sample_clean(&model, 5000, Seed(3)).unwrap();
    let dirty = contaminate(&clean, &targeted(0.1, Some(50.0)), Seed(4)).unwrap();
    let err = |data| {
        let fit = fit_ols(data).unwrap();
        mahalanobis_error(&fit.beta_hat, &model.beta, &model.covariance).unwrap()
    };
    let (e_clean, e_dirty) = (err(&clean), err(&dirty));
    assert!(e_dirty > 10.0 * e_clean, "clean {e_clean}, attacked {e_dirty}");
}

#[test]
fn robust_error_within_bound_in_most_trials() {
    let (d, n, eps, kappa) = (50, 20_000, 0.05, 4.0);
    let bound = 5.0 * (eps * kappa as f64).sqrt();
    let cfg = RegressorConfig::new(eps).unwrap();
    let mut ok = 0;
    for t in 0..20 {
        let s = Seed(5).derive("trial", t);
        let model = sweep_model(d, kappa, s).unwrap();
        let clean = sample_clean(&model, n, s.derive("clean", 0)).unwrap();
        let data = contaminate(&clean, &targeted(eps, None), s.derive("adv", 0)).unwrap();
        let fit = fit_robust(&data, &cfg).unwrap();
        let err = mahalanobis_error(&fit.beta_hat, &model.beta, &model.covariance).unwrap();
        ok += (err <= bound) as usize;
    }
    assert!(ok >= 18, "{ok}/20 within {bound}");
}

#[test]
fn benign_huber_noise_does_not_hurt_robust_more_than_ols() {
    let model = sweep_model(20, 2.0, Seed(6)).unwrap();
    let clean = sample_clean(&model, 20_000, Seed(7)).unwrap();
    let spec = ContaminationSpec::new(0.1, Adversary::HuberMixture { covariance: Covariance::identity(20), label: 0.0 })
        .unwrap();
    let data = contaminate(&clean, &spec, Seed(8)).unwrap();
    let cfg = RegressorConfig::new(0.1).unwrap();
    let e_rob = mahalanobis_error(&fit_robust(&data, &cfg).unwrap().beta_hat, &model.beta, &model.covariance).unwrap();
    let e_ols = mahalanobis_error(&fit_ols(&data).unwrap().beta_hat, &model.beta, &model.covariance).unwrap();
    assert!(e_rob <= e_ols, "robust {e_rob} vs ols {e_ols}");
}

#[test]
fn whitening_with_true_covariance_is_well_conditioned() {
    let (d, n) = (20, 100_000);
    let model = sweep_model(d, 100.0, Seed(9)).unwrap();
    let clean = sample_clean(&model, n, Seed(10)).unwrap();
    let data = contaminate(&clean, &targeted(0.05, None), Seed(11)).unwrap();
    let white = data.map_covariates(&inv_sqrt_spd(&model.covariance.to_dense()).unwrap()).unwrap();
    let emp = white.covariate_second_moment();
    let cond = condition_number(&emp);
    assert!(cond <= 1.3, "whitened condition number {cond}");
    let raw = condition_number(&data.covariate_second_moment());
    assert!(raw > 50.0, "raw condition number {raw}");
}

#[test]
fn misspecified_preconditioner_costs_at_most_factor_two() {
    let (d, n, eps) = (20, 20_000, 0.05);
    let model = sweep_model(d, 100.0, Seed(12)).unwrap();
    let clean = sample_clean(&model, n, Seed(13)).unwrap();
    let data = contaminate(&clean, &targeted(eps, None), Seed(14)).unwrap();
    let cfg = RegressorConfig::new(eps).unwrap();
    let sigma = model.covariance.to_dense();
    let err = |m: &DMatrix<f64>| {
        let fit = fit_preconditioned(&data, m, &cfg).unwrap();
        mahalanobis_error(&fit.beta_hat, &model.beta, &model.covariance).unwrap()
    };
    let exact = err(&sigma);
    let off = err(&(&sigma * 1.1));
    assert!(off <= 2.0 * exact, "1.1 sigma: {off}, sigma: {exact}");
}

#[test]
fn identity_preconditioner_matches_plain_robust_fit() {
    let model = LinearModelSpec::new(Covariance::identity(8), sweep_model(8, 1.0, Seed(15)).unwrap().beta, 1.0).unwrap();
    let clean = sample_clean(&model, 4000, Seed(16)).unwrap();
    let data = contaminate(&clean, &targeted(0.1, None), Seed(17)).unwrap();
    let cfg = RegressorConfig::new(0.1).unwrap();
    let a = fit_robust(&data, &cfg).unwrap().beta_hat;
    let b = fit_preconditioned(&data, &DMatrix::identity(8, 8), &cfg).unwrap().beta_hat;
    assert!((&a - &b).norm() <= 1e-10 * a.norm());
}

#[test]
fn clean_data_loses_little_weight() {
    let cfg = RegressorConfig::new(0.05).unwrap();
    for t in 0..20 {
        let s = Seed(18).derive("clean", t);
        let model = sweep_model(20, 1.0, s).unwrap();
        let data = sample_clean(&model, 10_000, s.derive("data", 0)).unwrap();
        let fit = fit_robust(&data, &cfg).unwrap();
        assert!(fit.total_weight_removed <= 0.01, "trial {t}: removed {}", fit.total_weight_removed);
    }
}
