//! Empirical truncation certificate: for a direction `u` with unit
//! `Sigma`-norm, most rows have small projection and small norm, and the
//! fourth moment restricted to those rows is bounded by a constant times
//! the top covariance eigenvalue.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{validation, Result};
use crate::linalg::power_iteration;
use crate::model::{dot, random_unit_vector, Dataset, LinearModelSpec};
use crate::rng::Seed;

/// Projection threshold numerator: keep `<x, u>^2 <= PROJ_FACTOR / eps`.
pub const PROJ_FACTOR: f64 = 20.0;
/// Norm threshold numerator: keep `|x|^2 <= NORM_FACTOR * L d / eps^2`.
pub const NORM_FACTOR: f64 = 20.0;
/// Largest sample size used by [`certificate_sample_size`].
pub const MAX_CERT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateConfig {
    pub eps: f64,
    /// Multiplier on `L |u|_Sigma^2` in the spectral bound.
    pub c_est: f64,
    pub power_iter_tol: f64,
    pub power_iter_max: usize,
}

impl CertificateConfig {
    pub fn new(eps: f64) -> Result<Self> {
        let cfg = Self { eps, c_est: 50.0, power_iter_tol: 1e-9, power_iter_max: 1000 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(validation(format!("eps = {} outside (0, 0.5)", self.eps)));
        }
        if !(self.c_est > 0.0 && self.power_iter_tol > 0.0) || self.power_iter_max == 0 {
            return Err(validation("c_est, tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub u: DVector<f64>,
    pub n: usize,
    pub frac_big_norm: f64,
    pub frac_big_proj: f64,
    pub g_u_size: usize,
    pub spectral_value: f64,
    pub bound_value: f64,
    pub pass: bool,
}

/// `min(ceil(d ln d / eps^4), 10^6)`, at least `d`.
pub fn certificate_sample_size(d: usize, eps: f64) -> usize {
    let raw = (d as f64 * (d as f64).ln() / eps.powi(4)).ceil();
    if raw.is_finite() {
        (raw as usize).clamp(d.max(1), MAX_CERT_SAMPLES)
    } else {
        MAX_CERT_SAMPLES
    }
}

struct Truncation {
    keep: Vec<usize>,
    big_norm: usize,
    big_proj: usize,
}

fn truncate(data: &Dataset, u: &[f64], eps: f64, l: f64) -> Result<Truncation> {
    if !(eps > 0.0) {
        return Err(validation("eps must be positive"));
    }
    if u.len() != data.dim() {
        return Err(validation("direction dimension does not match data"));
    }
    let proj_max = PROJ_FACTOR / eps;
    let norm_max = NORM_FACTOR * l * data.dim() as f64 / (eps * eps);
    let mut out = Truncation { keep: Vec::with_capacity(data.n()), big_norm: 0, big_proj: 0 };
    for i in 0..data.n() {
        let x = data.x(i);
        let p = dot(x, u);
        let big_proj = p * p > proj_max;
        let big_norm = dot(x, x) > norm_max;
        out.big_proj += big_proj as usize;
        out.big_norm += big_norm as usize;
        if !(big_proj || big_norm) {
            out.keep.push(i);
        }
    }
    Ok(out)
}

/// Rows with `<x, u>^2 <= 20 / eps` and `|x|^2 <= 20 L d / eps^2`.
pub fn build_truncation_set(data: &Dataset, u: &DVector<f64>, eps: f64, l: f64) -> Result<Vec<usize>> {
    Ok(truncate(data, u.as_slice(), eps, l)?.keep)
}

/// Operator norm of `(1/|G|) sum_{i in G} <x_i, u>^2 x_i x_i^T`, using only
/// matrix-vector products.
pub fn truncated_fourth_moment_norm(
    data: &Dataset,
    u: &DVector<f64>,
    rows: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if rows.is_empty() {
        return Err(validation("truncation set is empty"));
    }
    if u.len() != data.dim() {
        return Err(validation("direction dimension does not match data"));
    }
    let d = data.dim();
    let inv = 1.0 / rows.len() as f64;
    let proj2: Vec<f64> = rows
        .iter()
        .map(|&i| {
            let p = dot(data.x(i), u.as_slice());
            p * p * inv
        })
        .collect();
    let apply = |v: &DVector<f64>| {
        let mut out = vec![0.0; d];
        for (&i, &c) in rows.iter().zip(&proj2) {
            let x = data.x(i);
            let s = c * dot(x, v.as_slice());
            for (o, xj) in out.iter_mut().zip(x) {
                *o += s * xj;
            }
        }
        DVector::from_vec(out)
    };
    // The top eigenvector sits close to Sigma u; u itself is a good start.
    Ok(power_iteration(apply, u.clone(), tol, max_iter).value)
}

/// Certificate for one fixed direction (rescaled to unit `Sigma`-norm).
pub fn certify_direction(
    data: &Dataset,
    model: &LinearModelSpec,
    cfg: &CertificateConfig,
    u: &DVector<f64>,
) -> Result<CertificateReport> {
    cfg.validate()?;
    let su = model.covariance.quad_form(u.as_slice());
    if !(su > 0.0) {
        return Err(validation("direction has zero Sigma-norm"));
    }
    let u = u / su.sqrt();
    let l = model.eig_hi;
    let n = data.n();
    let t = truncate(data, u.as_slice(), cfg.eps, l)?;
    let spectral_value = if t.keep.is_empty() {
        f64::INFINITY
    } else {
        truncated_fourth_moment_norm(data, &u, &t.keep, cfg.power_iter_tol, cfg.power_iter_max)?
    };
    let norm_sq = model.covariance.quad_form(u.as_slice());
    let bound_value = cfg.c_est * l * norm_sq;
    let g_u_size = t.keep.len();
    let pass = g_u_size as f64 >= (1.0 - cfg.eps * cfg.eps) * n as f64 && spectral_value <= bound_value;
    Ok(CertificateReport {
        u,
        n,
        frac_big_norm: t.big_norm as f64 / n as f64,
        frac_big_proj: t.big_proj as f64 / n as f64,
        g_u_size,
        spectral_value,
        bound_value,
        pass,
    })
}

/// One report per trial, each for a fresh uniformly random direction.
/// Trial `k` draws its direction from `seed.derive("certify", k)`.
pub fn certify(
    data: &Dataset,
    model: &LinearModelSpec,
    cfg: &CertificateConfig,
    trials: usize,
    seed: Seed,
) -> Result<Vec<CertificateReport>> {
    if trials == 0 {
        return Err(validation("trials must be >= 1"));
    }
    if model.dim() != data.dim() {
        return Err(validation("model dimension does not match data"));
    }
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream("certify", k as u64);
            let u = random_unit_vector(data.dim(), &mut rng)?;
            certify_direction(data, model, cfg, &u)
        })
        .collect()
}
