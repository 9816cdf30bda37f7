//! Fit least squares and the filtered estimator on data hit by the targeted
//! label attack, then compare prediction errors.
//!
//!     cargo run --release --example robust_regression

use robreg::regress::{fit_ols, fit_robust, RegressorConfig};
use robreg::sampling::{contaminate_tracked, sample_clean, Adversary, ContaminationSpec};
use robreg::suite::sweep_model;
use robreg::{mahalanobis_error, Seed};

fn main() -> robreg::Result<()> {
    let (d, n, eps, kappa) = (30, 10_000, 0.1, 4.0);
    let seed = Seed(7);
    let model = sweep_model(d, kappa, seed)?;
    let clean = sample_clean(&model, n, seed.derive("clean", 0))?;

    let spec = ContaminationSpec::new(eps, Adversary::TargetedLabels { scale: None, noise_sd: 1.0 })?;
    let attacked = contaminate_tracked(&clean, &spec, seed.derive("adversary", 0))?;
    println!("{} of {n} labels shifted", attacked.corrupted.len());

    let err = |b| mahalanobis_error(b, &model.beta, &model.covariance);
    let ols = fit_ols(&attacked.data)?;
    let robust = fit_robust(&attacked.data, &RegressorConfig::new(eps)?)?;
    println!("least squares  error {:.4}", err(&ols.beta_hat)?);
    println!(
        "filtered       error {:.4}  ({} rounds, {:.2}% weight removed)",
        err(&robust.beta_hat)?,
        robust.rounds_used,
        100.0 * robust.total_weight_removed
    );
    println!("sqrt(eps kappa)      {:.4}", (eps * kappa).sqrt());
    Ok(())
}
