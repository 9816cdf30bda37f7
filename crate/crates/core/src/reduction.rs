//! Turning an estimator into a tester: estimate a direction on one half of
//! the sample, then threshold a moment statistic along it on the other half.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use nalgebra::DVector;

use crate::error::{validation, Result};
use crate::lowdeg::{sample_lowdeg, Hypothesis, LowDegInstance};
use crate::model::{basis_vector, dot, Dataset};
use crate::regress::{fit_ols, fit_robust, RegressionReport, RegressorConfig};
use crate::rng::Seed;

/// Default constant in the large-condition-number threshold `c n / eps`.
pub const DEFAULT_LARGE_KAPPA_CONST: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionRegime {
    /// Second-moment statistic weighted by label energy; used when `kappa <= sqrt(d)`.
    SmallKappa,
    /// Excess fourth moment along the direction; used when `kappa > sqrt(d)`.
    LargeKappa,
}

impl ReductionRegime {
    pub fn for_instance(d: usize, kappa: f64) -> Self {
        if kappa <= (d as f64).sqrt() {
            ReductionRegime::SmallKappa
        } else {
            ReductionRegime::LargeKappa
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionRegime::SmallKappa => "small_kappa",
            ReductionRegime::LargeKappa => "large_kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestVerdict {
    pub statistic: f64,
    pub threshold: f64,
    pub regime: ReductionRegime,
    pub decide_alternative: bool,
    pub v_hat: DVector<f64>,
}

/// Source of the direction estimate used on the first half.
#[derive(Debug, Clone)]
pub enum DirectionEstimator {
    /// Use the planted direction itself.
    Oracle,
    Ols,
    Robust(RegressorConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    pub large_kappa_const: f64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self { large_kappa_const: DEFAULT_LARGE_KAPPA_CONST }
    }
}

/// `beta_hat / |beta_hat|`, or `e_1` when `beta_hat` is zero.
pub fn extract_direction(report: &RegressionReport) -> DVector<f64> {
    let b = &report.beta_hat;
    let norm = b.norm();
    if norm > 0.0 && norm.is_finite() {
        b / norm
    } else {
        basis_vector(b.len(), 0)
    }
}

fn row_checksum(row: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in row {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Two halves of a sample that provably share no row.
#[derive(Debug, Clone)]
pub struct SplitSample {
    first: Dataset,
    second: Dataset,
}

impl SplitSample {
    /// Rejects the pair if any row of `second` also appears in `first`.
    pub fn new(first: Dataset, second: Dataset) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(validation("halves have different dimensions"));
        }
        let seen: HashSet<u64> = (0..first.n()).map(|i| row_checksum(first.row(i))).collect();
        for i in 0..second.n() {
            if seen.contains(&row_checksum(second.row(i))) && (0..first.n()).any(|j| first.row(j) == second.row(i)) {
                return Err(validation(format!("row {i} of the second half also occurs in the first")));
            }
        }
        Ok(Self { first, second })
    }

    /// Split rows `[0, n)` and `[n, 2n)`.
    pub fn halves(data: &Dataset) -> Result<Self> {
        let n = data.n() / 2;
        if n == 0 || data.n() != 2 * n {
            return Err(validation("need an even, nonzero number of rows"));
        }
        Self::new(data.slice(0, n)?, data.slice(n, 2 * n)?)
    }

    pub fn first(&self) -> &Dataset {
        &self.first
    }

    pub fn second(&self) -> &Dataset {
        &self.second
    }
}

/// The regime's statistic over `data` along `v_hat`.
///
/// Small regime: `(1 / (alpha^2 s)) sum <x, v_hat>^2 (y^2 - s)` with `s` the
/// label variance. Large regime: `sum (<x, v_hat>^4 - 3)`.
pub fn test_statistic(data: &Dataset, v_hat: &DVector<f64>, regime: ReductionRegime, alpha: f64, label_var: f64) -> Result<f64> {
    if v_hat.len() != data.dim() {
        return Err(validation("direction dimension does not match data"));
    }
    let proj = |i: usize| dot(data.x(i), v_hat.as_slice());
    match regime {
        ReductionRegime::SmallKappa => {
            if !(alpha > 0.0 && label_var > 0.0) {
                return Err(validation("alpha and label variance must be positive"));
            }
            let sum: f64 = (0..data.n())
                .map(|i| {
                    let p = proj(i);
                    let y = data.y(i);
                    p * p * (y * y - label_var)
                })
                .sum();
            Ok(sum / (alpha * alpha * label_var))
        }
        ReductionRegime::LargeKappa => Ok((0..data.n()).map(|i| proj(i).powi(4) - 3.0).sum()),
    }
}

/// Decision threshold for `n` second-half rows.
pub fn threshold(regime: ReductionRegime, n: usize, eps: f64, kappa: f64, label_var: f64, cfg: &ReductionConfig) -> f64 {
    let n = n as f64;
    match regime {
        ReductionRegime::SmallKappa => n / (8.0 * eps * kappa * label_var),
        ReductionRegime::LargeKappa => cfg.large_kappa_const * n / eps,
    }
}

/// Mean of the statistic under the alternative with `t = <v_hat, v>`.
pub fn alternative_mean(regime: ReductionRegime, n: usize, eps: f64, kappa: f64, label_var: f64, t: f64) -> f64 {
    let n = n as f64;
    match regime {
        ReductionRegime::SmallKappa => 2.0 * n * (1.0 - eps) * t * t / (eps * kappa * label_var),
        ReductionRegime::LargeKappa => 3.0 * n * (1.0 - eps) / eps * (1.0 - 1.0 / kappa).powi(2) * t.powi(4),
    }
}

/// Variance of the statistic under the null.
pub fn null_variance(regime: ReductionRegime, n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    match regime {
        ReductionRegime::SmallKappa => 6.0 * n / alpha.powi(4),
        ReductionRegime::LargeKappa => 96.0 * n,
    }
}

/// Estimate the direction on the first half and test on the second.
pub fn test_split(
    inst: &LowDegInstance,
    split: &SplitSample,
    estimator: &DirectionEstimator,
    cfg: &ReductionConfig,
) -> Result<TestVerdict> {
    if split.first.dim() != inst.d {
        return Err(validation("sample dimension does not match instance"));
    }
    let v_hat = match estimator {
        DirectionEstimator::Oracle => inst.v.clone(),
        DirectionEstimator::Ols => extract_direction(&fit_ols(&split.first)?),
        DirectionEstimator::Robust(rc) => extract_direction(&fit_robust(&split.first, rc)?),
    };
    let regime = ReductionRegime::for_instance(inst.d, inst.kappa);
    let statistic = test_statistic(&split.second, &v_hat, regime, inst.alpha, inst.label_var)?;
    let threshold = threshold(regime, split.second.n(), inst.eps, inst.kappa, inst.label_var, cfg);
    Ok(TestVerdict { statistic, threshold, regime, decide_alternative: statistic >= threshold, v_hat })
}

/// Draw `2n` rows from `which`, then run [`test_split`].
pub fn run_reduction(
    inst: &LowDegInstance,
    n: usize,
    which: Hypothesis,
    estimator: &DirectionEstimator,
    cfg: &ReductionConfig,
    seed: Seed,
) -> Result<TestVerdict> {
    if n == 0 {
        return Err(validation("n must be >= 1"));
    }
    if !matches!(estimator, DirectionEstimator::Oracle) && n < inst.d {
        return Err(validation(format!("estimator needs n >= d, got n = {n}, d = {}", inst.d)));
    }
    let data = sample_lowdeg(inst, 2 * n, which, seed)?;
    test_split(inst, &SplitSample::halves(&data)?, estimator, cfg)
}

/// `|<beta_hat, v>| >= 0.9 delta` and `|beta_hat| <= 1.1 delta`.
pub fn correlation_check(beta_hat: &DVector<f64>, v: &DVector<f64>, delta: f64) -> bool {
    beta_hat.dot(v).abs() >= 0.9 * delta && beta_hat.norm() <= 1.1 * delta
}
