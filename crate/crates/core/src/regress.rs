//! Estimators: the zero baseline, weighted least squares, the gradient
//! filter, and the whitened (preconditioned) variant.

use nalgebra::{DMatrix, DVector};

use crate::error::{validation, Error, Result};
use crate::linalg::{inv_sqrt_spd, power_iteration, spd_solve};
use crate::model::{dot, Dataset};

/// Median of a chi-square variable with one degree of freedom.
pub const CHI2_1_MEDIAN: f64 = 0.454936;
/// On clean Gaussian data the stop score concentrates near 1.
pub const DEFAULT_STOP_MULT: f64 = 3.0;
/// Largest Gram condition estimate accepted by the least-squares solve.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorConfig {
    pub eps: f64,
    pub max_filter_rounds: usize,
    /// Stop once the top gradient eigenvalue is at most
    /// `stop_mult * sigma_hat^2 * L_hat`.
    pub stop_mult: f64,
    /// Relative residual accepted for the normal-equation solve.
    pub wls_tol: f64,
    pub power_iter_tol: f64,
    pub power_iter_max: usize,
}

impl RegressorConfig {
    /// Defaults: stop multiplier 3, `ceil(10 / eps)` rounds.
    pub fn new(eps: f64) -> Result<Self> {
        let rounds = if eps > 0.0 { (10.0 / eps).ceil() as usize } else { 1 };
        let cfg = Self {
            eps,
            max_filter_rounds: rounds,
            stop_mult: DEFAULT_STOP_MULT,
            wls_tol: 1e-8,
            power_iter_tol: 1e-10,
            power_iter_max: 2000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.eps) {
            return Err(validation(format!("eps = {} outside [0, 0.5)", self.eps)));
        }
        if self.max_filter_rounds < 1 || self.power_iter_max < 1 {
            return Err(validation("round and iteration limits must be >= 1"));
        }
        if !(self.stop_mult > 0.0 && self.wls_tol > 0.0 && self.power_iter_tol > 0.0) {
            return Err(validation("tolerances and the stop multiplier must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub beta_hat: DVector<f64>,
    pub rounds_used: usize,
    pub total_weight_removed: f64,
    /// Last top gradient eigenvalue divided by `sigma_hat^2 * L_hat`.
    pub final_spectral_score: f64,
    pub converged: bool,
}

impl RegressionReport {
    fn plain(beta_hat: DVector<f64>) -> Self {
        Self { beta_hat, rounds_used: 0, total_weight_removed: 0.0, final_spectral_score: 0.0, converged: true }
    }
}

pub fn fit_zero(data: &Dataset) -> RegressionReport {
    RegressionReport::plain(DVector::zeros(data.dim()))
}

/// `sum_i s_i x_i x_i^T` with per-row scales `s_i >= 0`.
fn scaled_gram(data: &Dataset, scales: &[f64]) -> DMatrix<f64> {
    let (n, d) = (data.n(), data.dim());
    let xs = DMatrix::from_fn(n, d, |i, j| scales[i].sqrt() * data.x(i)[j]);
    xs.transpose() * &xs
}

/// Weighted least squares with weights `w` (any positive total).
fn weighted_ls(data: &Dataset, w: &[f64], wls_tol: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(validation("all weights are zero"));
    }
    let wn: Vec<f64> = w.iter().map(|x| x / total).collect();
    let gram = scaled_gram(data, &wn);
    let mut rhs = DVector::zeros(data.dim());
    for i in 0..data.n() {
        if wn[i] != 0.0 {
            let c = wn[i] * data.y(i);
            for (r, xj) in rhs.iter_mut().zip(data.x(i)) {
                *r += c * xj;
            }
        }
    }
    let beta = spd_solve(&gram, &rhs, MAX_GRAM_CONDITION)?;
    let resid = (&gram * &beta - &rhs).norm();
    if resid > wls_tol * rhs.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::SingularGram { condition: f64::INFINITY });
    }
    Ok((beta, gram))
}

fn check_shape(data: &Dataset) -> Result<()> {
    if data.n() < data.dim() {
        return Err(validation(format!("need n >= d, got n = {}, d = {}", data.n(), data.dim())));
    }
    Ok(())
}

/// Least squares under the dataset's weights.
pub fn fit_ols(data: &Dataset) -> Result<RegressionReport> {
    check_shape(data)?;
    let (beta, _) = weighted_ls(data, data.weights(), 1e-8)?;
    Ok(RegressionReport::plain(beta))
}

/// Weighted median of `values`.
fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = idx.iter().map(|&i| weights[i]).sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        if acc >= 0.5 * total {
            return values[i];
        }
    }
    values[*idx.last().expect("some positive weight")]
}

/// Row with the largest weighted value; deterministic tie-break by index.
fn argmax_weighted(values: &[f64], weights: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, (v, w)) in values.iter().zip(weights).enumerate() {
        let s = v * w;
        if *w > 0.0 && s > best_val {
            best_val = s;
            best = i;
        }
    }
    best
}

/// Filtered robust regression. See [`fit_robust_traced`].
pub fn fit_robust(data: &Dataset, cfg: &RegressorConfig) -> Result<RegressionReport> {
    fit_robust_impl(data, cfg, None)
}

/// Like [`fit_robust`], also returning the (unnormalized) weight vector at
/// the start of every round.
pub fn fit_robust_traced(data: &Dataset, cfg: &RegressorConfig) -> Result<(RegressionReport, Vec<Vec<f64>>)> {
    let mut trace = Vec::new();
    let report = fit_robust_impl(data, cfg, Some(&mut trace))?;
    Ok((report, trace))
}

fn fit_robust_impl(data: &Dataset, cfg: &RegressorConfig, mut trace: Option<&mut Vec<Vec<f64>>>) -> Result<RegressionReport> {
    cfg.validate()?;
    check_shape(data)?;
    if cfg.eps == 0.0 {
        return fit_ols(data);
    }
    let (n, d) = (data.n(), data.dim());
    let mut w = data.weights().to_vec();
    let start_mass: f64 = w.iter().sum();
    let limit = 4.0 * cfg.eps;
    let mut score = 0.0;
    let mut g = vec![0.0; n * d];
    let mut r2 = vec![0.0; n];
    for round in 0..cfg.max_filter_rounds {
        if let Some(t) = trace.as_deref_mut() {
            t.push(w.clone());
        }
        let (beta, gram) = weighted_ls(data, &w, cfg.wls_tol)?;
        let mass: f64 = w.iter().sum();
        let wn: Vec<f64> = w.iter().map(|x| x / mass).collect();

        // Per-row gradients g_i = r_i x_i and their weighted mean.
        let mut gbar = DVector::zeros(d);
        for i in 0..n {
            let x = data.x(i);
            let r = data.y(i) - dot(x, beta.as_slice());
            r2[i] = r * r;
            let gi = &mut g[i * d..(i + 1) * d];
            for (gj, xj) in gi.iter_mut().zip(x) {
                *gj = r * xj;
            }
            for (b, gj) in gbar.iter_mut().zip(gi.iter()) {
                *b += wn[i] * gj;
            }
        }
        let scales: Vec<f64> = wn.iter().zip(&r2).map(|(a, b)| a * b).collect();
        let moment = scaled_gram(data, &scales) - &gbar * gbar.transpose();

        // Start both power iterations from data-derived vectors so the result
        // is equivariant under rotations of the covariates.
        let norms: Vec<f64> = (0..n).map(|i| r2[i] * dot(data.x(i), data.x(i))).collect();
        let i_top = argmax_weighted(&norms, &wn);
        let start = DVector::from_column_slice(&g[i_top * d..(i_top + 1) * d]) - &gbar;
        let top = power_iteration(|v| &moment * v, start, cfg.power_iter_tol, cfg.power_iter_max);

        let xnorms: Vec<f64> = (0..n).map(|i| dot(data.x(i), data.x(i))).collect();
        let i_x = argmax_weighted(&xnorms, &wn);
        let lhat = power_iteration(
            |v| &gram * v,
            DVector::from_column_slice(data.x(i_x)),
            cfg.power_iter_tol,
            cfg.power_iter_max,
        )
        .value;
        let sigma2 = weighted_median(&r2, &wn) / CHI2_1_MEDIAN;
        let scale = sigma2 * lhat;
        score = if scale > 0.0 { top.value / scale } else { f64::INFINITY };
        if top.value <= cfg.stop_mult * scale {
            return Ok(RegressionReport {
                beta_hat: beta,
                rounds_used: round,
                total_weight_removed: removed_fraction(start_mass, mass),
                final_spectral_score: score,
                converged: true,
            });
        }

        // Soft filter along the top direction.
        let u = &top.vector;
        let tau: Vec<f64> = (0..n)
            .map(|i| {
                let gi = &g[i * d..(i + 1) * d];
                let p: f64 = gi.iter().zip(u.iter()).zip(gbar.iter()).map(|((a, b), c)| (a - c) * b).sum();
                p * p
            })
            .collect();
        let tau_max = (0..n).filter(|&i| w[i] > 0.0).map(|i| tau[i]).fold(0.0, f64::max);
        if !(tau_max > 0.0) {
            break;
        }
        for i in 0..n {
            w[i] *= (1.0 - tau[i] / tau_max).max(0.0);
        }
        let removed = removed_fraction(start_mass, w.iter().sum());
        if removed > limit {
            return Err(Error::FilterDiverged { removed, limit });
        }
    }
    if let Some(t) = trace.as_deref_mut() {
        t.push(w.clone());
    }
    let (beta, _) = weighted_ls(data, &w, cfg.wls_tol)?;
    Ok(RegressionReport {
        beta_hat: beta,
        rounds_used: cfg.max_filter_rounds,
        total_weight_removed: removed_fraction(start_mass, w.iter().sum()),
        final_spectral_score: score,
        converged: false,
    })
}

fn removed_fraction(start: f64, now: f64) -> f64 {
    ((start - now) / start).clamp(0.0, 1.0)
}

/// Whiten covariates by `sigma_hat^{-1/2}`, fit robustly, and map back.
pub fn fit_preconditioned(data: &Dataset, sigma_hat: &DMatrix<f64>, cfg: &RegressorConfig) -> Result<RegressionReport> {
    if sigma_hat.nrows() != data.dim() {
        return Err(validation("sigma_hat dimension does not match covariates"));
    }
    let whiten = inv_sqrt_spd(sigma_hat)?;
    let white = data.map_covariates(&whiten)?;
    let mut report = fit_robust(&white, cfg)?;
    report.beta_hat = &whiten * &report.beta_hat;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mahalanobis_error, random_unit_vector, Covariance, LinearModelSpec, SpikedCovariance};
    use crate::rng::Seed;
    use crate::sampling::{contaminate, sample_clean, Adversary, ContaminationSpec};

    fn spiked_model(d: usize, kappa: f64, noise: f64, seed: u64) -> LinearModelSpec {
        let mut rng = Seed(seed).rng();
        let v = random_unit_vector(d, &mut rng).unwrap();
        let cov = Covariance::Spiked(SpikedCovariance::new(v, kappa).unwrap());
        let b = random_unit_vector(d, &mut rng).unwrap();
        let beta = &b / cov.quad_form(b.as_slice()).sqrt();
        LinearModelSpec::new(cov, beta, noise).unwrap()
    }

    #[test]
    fn zero_estimator_error_is_signal_strength() {
        let m = spiked_model(5, 4.0, 1.0, 1);
        let data = sample_clean(&m, 10, Seed(2)).unwrap();
        let fit = fit_zero(&data);
        assert_eq!(fit.beta_hat, DVector::zeros(5));
        let err = mahalanobis_error(&fit.beta_hat, &m.beta, &m.covariance).unwrap();
        assert!((err - m.signal_norm()).abs() < 1e-12);
    }

    #[test]
    fn ols_interpolates_noiseless_data() {
        let m = spiked_model(8, 10.0, 0.0, 3);
        let data = sample_clean(&m, 8, Seed(4)).unwrap();
        let fit = fit_ols(&data).unwrap();
        assert!((&fit.beta_hat - &m.beta).norm() <= 1e-8 * m.beta.norm());
    }

    #[test]
    fn ols_requires_enough_rows() {
        let m = spiked_model(8, 1.0, 1.0, 3);
        let data = sample_clean(&m, 5, Seed(4)).unwrap();
        assert!(fit_ols(&data).is_err());
        let zeros = Dataset::new(2, vec![0.0; 9], 0).unwrap();
        assert!(matches!(fit_ols(&zeros), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn weighted_median_examples() {
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[0.0, 0.2, 0.8]), 2.0);
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[0.9, 0.05, 0.05]), 3.0);
    }

    #[test]
    fn robust_matches_ols_on_clean_data() {
        let m = spiked_model(10, 2.0, 1.0, 5);
        let data = sample_clean(&m, 4000, Seed(6)).unwrap();
        let cfg = RegressorConfig::new(0.05).unwrap();
        let rob = fit_robust(&data, &cfg).unwrap();
        let ols = fit_ols(&data).unwrap();
        assert!(rob.converged);
        assert_eq!(rob.rounds_used, 0);
        assert!((&rob.beta_hat - &ols.beta_hat).norm() <= 1e-6 * ols.beta_hat.norm());
    }

    #[test]
    fn robust_resists_targeted_attack() {
        let m = spiked_model(10, 2.0, 1.0, 7);
        let data = sample_clean(&m, 5000, Seed(8)).unwrap();
        let spec = ContaminationSpec::new(0.05, Adversary::TargetedLabels { scale: Some(10.0), noise_sd: 1.0 }).unwrap();
        let bad = contaminate(&data, &spec, Seed(9)).unwrap();
        let cfg = RegressorConfig::new(0.05).unwrap();
        let (rob, trace) = fit_robust_traced(&bad, &cfg).unwrap();
        let ols = fit_ols(&bad).unwrap();
        let e_rob = mahalanobis_error(&rob.beta_hat, &m.beta, &m.covariance).unwrap();
        let e_ols = mahalanobis_error(&ols.beta_hat, &m.beta, &m.covariance).unwrap();
        assert!(rob.rounds_used > 0);
        assert!(e_rob * 5.0 < e_ols, "robust {e_rob}, ols {e_ols}");
        assert!(e_rob <= 5.0 * (0.05f64 * 2.0).sqrt());
        for pair in trace.windows(2) {
            assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| b <= a));
            assert!(pair[0].iter().zip(&pair[1]).any(|(a, b)| b < a));
        }
    }

    #[test]
    fn preconditioning_with_identity_is_a_no_op() {
        let m = LinearModelSpec::new(Covariance::identity(6), DVector::from_element(6, 0.5), 1.0).unwrap();
        let data = sample_clean(&m, 3000, Seed(11)).unwrap();
        let cfg = RegressorConfig::new(0.05).unwrap();
        let a = fit_robust(&data, &cfg).unwrap();
        let b = fit_preconditioned(&data, &DMatrix::identity(6, 6), &cfg).unwrap();
        assert!((&a.beta_hat - &b.beta_hat).norm() <= 1e-12 * a.beta_hat.norm());
        let not_pd = -DMatrix::<f64>::identity(6, 6);
        assert!(fit_preconditioned(&data, &not_pd, &cfg).is_err());
    }
}
