//! Truncated fourth-moment certificate on clean Gaussian data.

use nalgebra::DVector;
use robreg::certificate::{certificate_sample_size, certify, CertificateConfig};
use robreg::sampling::sample_clean;
use robreg::suite::sweep_model;
use robreg::{LinearModelSpec, Seed};

fn main() -> robreg::Result<()> {
    let (d, eps) = (20, 0.2);
    let n = certificate_sample_size(d, eps);
    let base = sweep_model(d, 8.0, Seed(1))?;
    let model = LinearModelSpec::new(base.covariance, DVector::zeros(d), 1.0)?;
    let data = sample_clean(&model, n, Seed(2))?;

    let cfg = CertificateConfig::new(eps)?;
    let reports = certify(&data, &model, &cfg, 20, Seed(3))?;
    let worst = reports.iter().map(|r| r.spectral_value / r.bound_value).fold(0.0, f64::max);
    let kept = reports.iter().map(|r| r.g_u_size).min().unwrap_or(0);
    println!("n = {n}, {} of {} directions pass", reports.iter().filter(|r| r.pass).count(), reports.len());
    println!("smallest kept set {kept}, worst norm/bound {worst:.4}");
    Ok(())
}
