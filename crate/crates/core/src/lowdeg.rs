//! Two-component Gaussian corruption of a spiked regression model, its
//! Hermite coefficients, and the low-degree advantage bound.
//!
//! Inliers follow `x ~ N(0, Sigma_v)`, `y = <x, delta v> + eta`. The
//! corrupting Gaussian is chosen so that the mixture has the same covariance
//! as the null `N(0, diag(I_d, s))`, `s = delta^2 / kappa + sigma^2`. All the
//! structure lives in the 2x2 block spanned by `v` and the label.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{validation, Error, Result};
use crate::model::{Covariance, Dataset, LinearModelSpec, SpikedCovariance};
use crate::oracles::{factorial, Rational};
use crate::rng::Seed;

/// Relative slack on the PSD condition `eps * kappa >= 1 - eps`, so that
/// parameters sitting exactly on the boundary are not rejected by rounding.
const PSD_SLACK: f64 = 1e-12;

/// Covariance of `(<v, x>, y)` for one mixture component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveBlock {
    pub var_x: f64,
    pub cov_xy: f64,
    pub var_y: f64,
}

impl ActiveBlock {
    pub fn min_eigenvalue(&self) -> f64 {
        let tr = self.var_x + self.var_y;
        let det = self.var_x * self.var_y - self.cov_xy * self.cov_xy;
        let disc = ((self.var_x - self.var_y).powi(2) + 4.0 * self.cov_xy * self.cov_xy).sqrt();
        // Use the product form for the small root to avoid cancellation.
        let big = 0.5 * (tr + disc);
        if big > 0.0 {
            det / big
        } else {
            0.5 * (tr - disc)
        }
    }

    /// Draw `(<v, x>, y)`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let sy = self.var_y.sqrt();
        let a = self.cov_xy / sy;
        let c = (self.var_x - a * a).max(0.0).sqrt();
        (a * z1 + c * z2, sy * z1)
    }
}

#[derive(Debug, Clone)]
pub struct LowDegInstance {
    pub d: usize,
    pub kappa: f64,
    pub eps: f64,
    pub delta: f64,
    pub noise_var: f64,
    /// Signal strength `delta / sqrt(kappa)`.
    pub alpha: f64,
    /// Label variance `delta^2 / kappa + sigma^2`.
    pub label_var: f64,
    pub v: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Null,
    Alternative,
}

pub fn build_lowdeg_instance(
    d: usize,
    kappa: f64,
    eps: f64,
    delta: f64,
    noise_var: f64,
    v: DVector<f64>,
) -> Result<LowDegInstance> {
    if v.len() != d {
        return Err(validation(format!("direction has length {}, expected {d}", v.len())));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(validation(format!("eps = {eps} outside (0, 0.5)")));
    }
    SpikedCovariance::new(v.clone(), kappa)?;
    if !(delta >= 0.0 && delta.is_finite()) || !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(validation("delta and sigma^2 must be finite and nonnegative"));
    }
    let label_var = delta * delta / kappa + noise_var;
    if !(label_var > 0.0) {
        return Err(validation("label variance delta^2/kappa + sigma^2 must be positive"));
    }
    let ek = eps * kappa;
    if ek < (1.0 - eps) * (1.0 - PSD_SLACK) {
        return Err(Error::NotPsd { eps_kappa: ek, bound: 1.0 - eps });
    }
    let inst = LowDegInstance {
        d,
        kappa,
        eps,
        delta,
        noise_var,
        alpha: delta / kappa.sqrt(),
        label_var,
        v,
    };
    let scale = inst.corrupt_block().var_x.max(label_var);
    if inst.corrupt_block().min_eigenvalue() < -1e-10 * scale {
        return Err(Error::NotPsd { eps_kappa: ek, bound: 1.0 - eps });
    }
    Ok(inst)
}

impl LowDegInstance {
    pub fn inlier_block(&self) -> ActiveBlock {
        ActiveBlock {
            var_x: 1.0 / self.kappa,
            cov_xy: self.delta / self.kappa,
            var_y: self.label_var,
        }
    }

    pub fn corrupt_block(&self) -> ActiveBlock {
        let r = (1.0 - self.eps) / self.eps;
        ActiveBlock {
            var_x: (1.0 - (1.0 - self.eps) / self.kappa) / self.eps,
            cov_xy: -r * self.delta / self.kappa,
            var_y: self.label_var,
        }
    }

    /// The inlier regression model `(Sigma_v, delta v, sigma^2)`.
    pub fn inlier_model(&self) -> Result<LinearModelSpec> {
        let cov = SpikedCovariance::new(self.v.clone(), self.kappa)?;
        LinearModelSpec::new(Covariance::Spiked(cov), &self.v * self.delta, self.noise_var)
    }

    fn dense_joint(&self, block: ActiveBlock) -> DMatrix<f64> {
        let d = self.d;
        let mut m = DMatrix::zeros(d + 1, d + 1);
        // Covariate block: identity off v, var_x along v.
        for i in 0..d {
            for j in 0..d {
                let id = if i == j { 1.0 } else { 0.0 };
                m[(i, j)] = id + (block.var_x - 1.0) * self.v[i] * self.v[j];
            }
            m[(i, d)] = block.cov_xy * self.v[i];
            m[(d, i)] = block.cov_xy * self.v[i];
        }
        m[(d, d)] = block.var_y;
        m
    }

    /// Joint covariance of `(x, y)` for the inlier component.
    pub fn inlier_cov(&self) -> DMatrix<f64> {
        self.dense_joint(self.inlier_block())
    }

    /// Joint covariance of `(x, y)` for the corrupting component.
    pub fn corrupt_cov(&self) -> DMatrix<f64> {
        self.dense_joint(self.corrupt_block())
    }

    fn fill_row<R: Rng + ?Sized>(&self, rng: &mut R, block: ActiveBlock, out: &mut [f64]) {
        let d = self.d;
        let (xv, y) = block.sample(rng);
        for o in out[..d].iter_mut() {
            *o = rng.sample(StandardNormal);
        }
        let proj: f64 = out[..d].iter().zip(self.v.iter()).map(|(a, b)| a * b).sum();
        let shift = xv - proj;
        for (o, vi) in out[..d].iter_mut().zip(self.v.iter()) {
            *o += shift * vi;
        }
        out[d] = y;
    }

    /// One row from the corrupting Gaussian.
    pub fn sample_corrupt_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.fill_row(rng, self.corrupt_block(), out);
    }

    /// One row from the inlier Gaussian.
    pub fn sample_inlier_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.fill_row(rng, self.inlier_block(), out);
    }

    /// One row from the null `N(0, diag(I_d, s))`.
    pub fn sample_null_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.d;
        for o in out[..d].iter_mut() {
            *o = rng.sample(StandardNormal);
        }
        let z: f64 = rng.sample(StandardNormal);
        out[d] = self.label_var.sqrt() * z;
    }
}

/// `n` rows under the null or the alternative. Alternative rows are
/// independently inliers with probability `1 - eps`, else corrupted.
pub fn sample_lowdeg(inst: &LowDegInstance, n: usize, which: Hypothesis, seed: Seed) -> Result<Dataset> {
    Ok(sample_lowdeg_tracked(inst, n, which, seed)?.0)
}

/// Like [`sample_lowdeg`], also returning which rows came from the
/// corrupting component.
pub fn sample_lowdeg_tracked(
    inst: &LowDegInstance,
    n: usize,
    which: Hypothesis,
    seed: Seed,
) -> Result<(Dataset, Vec<bool>)> {
    if n == 0 {
        return Err(validation("n must be >= 1"));
    }
    let mut rng = seed.rng();
    let width = inst.d + 1;
    let mut rows = vec![0.0; n * width];
    let mut corrupted = vec![false; n];
    for (row, flag) in rows.chunks_mut(width).zip(corrupted.iter_mut()) {
        match which {
            Hypothesis::Null => inst.sample_null_row(&mut rng, row),
            Hypothesis::Alternative => {
                if rng.random::<f64>() < inst.eps {
                    *flag = true;
                    inst.sample_corrupt_row(&mut rng, row);
                } else {
                    inst.sample_inlier_row(&mut rng, row);
                }
            }
        }
    }
    Ok((Dataset::new(inst.d, rows, seed.0)?, corrupted))
}

/// Check `(1 - eps) Sigma_1 + eps Sigma_E = diag(I_d, s)` entry by entry in
/// exact rational arithmetic. `v` must have unit rational norm.
pub fn moment_matching_exact(
    v: &[Rational],
    kappa: Rational,
    eps: Rational,
    delta: Rational,
    noise_var: Rational,
) -> Result<bool> {
    let one = Rational::one();
    let norm2: Rational = v.iter().map(|x| x * x).sum();
    if norm2 != one {
        return Err(validation("direction must have unit norm"));
    }
    if !(eps > Rational::zero() && eps < one) || kappa < one {
        return Err(validation("need 0 < eps < 1 and kappa >= 1"));
    }
    let d = v.len();
    let s = delta * delta / kappa + noise_var;
    let shrink = one - one / kappa;
    let r = (one - eps) / eps;
    let w_in = one - eps;
    for i in 0..=d {
        for j in 0..=d {
            let id = if i == j { one } else { Rational::zero() };
            let (inlier, corrupt, target) = if i < d && j < d {
                let vv = v[i] * v[j];
                (id - shrink * vv, id + r * shrink * vv, id)
            } else if i < d || j < d {
                let vi = if i < d { v[i] } else { v[j] };
                (delta / kappa * vi, -(r * delta / kappa) * vi, Rational::zero())
            } else {
                (s, s, s)
            };
            if w_in * inlier + eps * corrupt != target {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest supported Hermite degree.
pub const MAX_HERMITE_DEGREE: usize = 60;

/// Normalized probabilists' Hermite polynomial `He_k(x) / sqrt(k!)`.
pub fn hermite_poly(k: usize, x: f64) -> Result<f64> {
    if k > MAX_HERMITE_DEGREE {
        return Err(validation(format!("Hermite degree {k} exceeds {MAX_HERMITE_DEGREE}")));
    }
    // Recurrence on the normalized family:
    // h_{j+1} = (x h_j - sqrt(j) h_{j-1}) / sqrt(j + 1).
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `E[h_k(x) h_l(y / sqrt(var_y))]` for a centered bivariate Gaussian.
pub fn hermite_cross_coeff(k: usize, l: usize, var_x: f64, cov_xy: f64, var_y: f64) -> f64 {
    if k < l || (k - l) % 2 == 1 {
        return 0.0;
    }
    let i = (k - l) / 2;
    let lead = (factorial(k as u32) / factorial(l as u32)).sqrt();
    let denom = factorial(i as u32) * 2f64.powi(i as i32);
    lead / denom * (var_x - 1.0).powi(i as i32) * (cov_xy / var_y.sqrt()).powi(l as i32)
}

fn block_coeff(b: ActiveBlock, k: usize, l: usize) -> f64 {
    hermite_cross_coeff(k, l, b.var_x, b.cov_xy, b.var_y)
}

/// Cross coefficient of the alternative mixture along `(<v, x>, y / sqrt(s))`.
pub fn mixture_cross_coeff(inst: &LowDegInstance, k: usize, l: usize) -> f64 {
    (1.0 - inst.eps) * block_coeff(inst.inlier_block(), k, l) + inst.eps * block_coeff(inst.corrupt_block(), k, l)
}

/// Cross coefficients up to a maximum degree, per component and combined.
#[derive(Debug, Clone)]
pub struct HermiteCoeffTable {
    pub max_degree: usize,
    inlier: Vec<f64>,
    corrupt: Vec<f64>,
    mixture: Vec<f64>,
}

impl HermiteCoeffTable {
    pub fn for_instance(inst: &LowDegInstance, max_degree: usize) -> Result<Self> {
        if max_degree > MAX_HERMITE_DEGREE {
            return Err(validation(format!("degree {max_degree} exceeds {MAX_HERMITE_DEGREE}")));
        }
        let side = max_degree + 1;
        let mut inlier = vec![0.0; side * side];
        let mut corrupt = vec![0.0; side * side];
        let mut mixture = vec![0.0; side * side];
        for k in 0..side {
            for l in 0..side {
                let a = block_coeff(inst.inlier_block(), k, l);
                let b = block_coeff(inst.corrupt_block(), k, l);
                inlier[k * side + l] = a;
                corrupt[k * side + l] = b;
                mixture[k * side + l] = (1.0 - inst.eps) * a + inst.eps * b;
            }
        }
        Ok(Self { max_degree, inlier, corrupt, mixture })
    }

    fn idx(&self, k: usize, l: usize) -> usize {
        assert!(k <= self.max_degree && l <= self.max_degree, "degree out of table range");
        k * (self.max_degree + 1) + l
    }

    pub fn inlier(&self, k: usize, l: usize) -> f64 {
        self.inlier[self.idx(k, l)]
    }

    pub fn corrupt(&self, k: usize, l: usize) -> f64 {
        self.corrupt[self.idx(k, l)]
    }

    pub fn mixture(&self, k: usize, l: usize) -> f64 {
        self.mixture[self.idx(k, l)]
    }
}

/// `ln` of the degree-`p` contribution to the advantage bound.
fn log_term(n: f64, d: f64, eps: f64, kappa: f64, p: usize) -> f64 {
    let pf = p as f64;
    let ratio = d.sqrt() / kappa;
    // ln sum_{L=0}^{p/2} ratio^L
    let resp_terms: Vec<f64> = (0..=p / 2).map(|l| l as f64 * ratio.ln()).collect();
    let log_resp = log_sum_exp(&resp_terms);
    let per_m: Vec<f64> = (1..=p / 4)
        .map(|m| {
            let mf = m as f64;
            mf * n.ln()
                + pf * pf.ln()
                + 0.5 * pf * (4.0 * pf / d).ln()
                + (2.0 * mf - pf) * eps.ln()
                + log_resp
        })
        .collect();
    log_sum_exp(&per_m)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Per-degree contributions `(p, term)` to the advantage bound, for even
/// `p` from 4 to `max_degree`.
pub fn advantage_bound_terms(n: f64, d: f64, eps: f64, kappa: f64, max_degree: usize) -> Result<Vec<(usize, f64)>> {
    if !(n >= 1.0 && d >= 1.0 && eps > 0.0 && kappa >= 1.0) {
        return Err(validation("need n >= 1, d >= 1, eps > 0, kappa >= 1"));
    }
    Ok((4..=max_degree)
        .step_by(2)
        .map(|p| (p, log_term(n, d, eps, kappa, p).exp()))
        .collect())
}

/// Upper bound on the squared degree-`max_degree` advantage minus one.
/// Zero when `max_degree < 4`.
pub fn advantage_bound(n: f64, d: f64, eps: f64, kappa: f64, max_degree: usize) -> Result<f64> {
    let logs: Vec<f64> = advantage_bound_terms(n, d, eps, kappa, max_degree)?
        .iter()
        .map(|&(p, _)| log_term(n, d, eps, kappa, p))
        .collect();
    if logs.is_empty() {
        return Ok(0.0);
    }
    Ok(log_sum_exp(&logs).exp())
}

/// `(q / d)^{q/2}` for even `q`, zero for odd `q`.
pub fn sphere_moment_bound(q: u32, d: usize) -> f64 {
    if q % 2 == 1 {
        0.0
    } else {
        (q as f64 / d as f64).powf(q as f64 / 2.0)
    }
}

pub const MAX_COMBINATORIAL_DEGREE: usize = 40;

/// Exact `C_{k,l}^2 = (k! / l!) / (((k-l)/2)!^2 4^{(k-l)/2})`.
pub fn combinatorial_coeff_sq(k: usize, l: usize) -> BigRational {
    assert!(k >= l && (k - l) % 2 == 0);
    let fact = |m: usize| (1..=m).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
    let i = (k - l) / 2;
    let num = fact(k);
    let den = fact(l) * fact(i) * fact(i) * BigInt::from(4).pow(i as u32);
    BigRational::new(num, den)
}

/// Outcome of the exhaustive combinatorial check at total degree `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialSummary {
    pub p: usize,
    /// Number of (degree split, k/l split) configurations examined.
    pub configurations: u64,
    /// Largest product of squared coefficients found.
    pub max_product: BigRational,
    pub holds: bool,
}

/// Enumerate every split of total degree `p` into per-sample degrees in
/// `{4, 6, 8, ...}` and every choice of `k_i >= l_i` with `k_i + l_i = d_i`,
/// `k_i - l_i` even, checking `prod C_{k_i, l_i}^2 <= 2^p` exactly.
pub fn combinatorial_coeff_summary(p: usize) -> Result<CombinatorialSummary> {
    if p > MAX_COMBINATORIAL_DEGREE {
        return Err(validation(format!("p = {p} exceeds {MAX_COMBINATORIAL_DEGREE}")));
    }
    // Best (largest) C^2 per sample degree, plus the number of splits.
    let per_degree: Vec<Vec<BigRational>> = (0..=p)
        .map(|di| {
            if di < 4 || di % 2 == 1 {
                return Vec::new();
            }
            (0..=di / 2)
                .filter(|l| (di - 2 * l) % 2 == 0)
                .map(|l| combinatorial_coeff_sq(di - l, l))
                .collect()
        })
        .collect();
    let mut configurations = 0u64;
    let mut max_product = BigRational::zero();
    let mut parts = Vec::new();
    enumerate_parts(p, 4, &mut parts, &mut |parts: &[usize]| {
        // Walk every combination of splits for these parts.
        let mut stack: Vec<(usize, BigRational)> = vec![(0, BigRational::one())];
        while let Some((idx, prod)) = stack.pop() {
            if idx == parts.len() {
                configurations += 1;
                if prod > max_product {
                    max_product = prod;
                }
                continue;
            }
            for c in &per_degree[parts[idx]] {
                stack.push((idx + 1, &prod * c));
            }
        }
    });
    let bound = BigRational::from_integer(BigInt::from(2).pow(p as u32));
    let holds = configurations == 0 || max_product <= bound;
    Ok(CombinatorialSummary { p, configurations, max_product, holds })
}

pub fn combinatorial_coeff_check(p: usize) -> Result<bool> {
    Ok(combinatorial_coeff_summary(p)?.holds)
}

/// Nondecreasing even parts `>= min_part` summing to `remaining`.
fn enumerate_parts<F: FnMut(&[usize])>(remaining: usize, min_part: usize, parts: &mut Vec<usize>, visit: &mut F) {
    if remaining == 0 {
        if !parts.is_empty() {
            visit(parts);
        }
        return;
    }
    let mut part = min_part;
    while part <= remaining {
        parts.push(part);
        enumerate_parts(remaining - part, part, parts, visit);
        parts.pop();
        part += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::basis_vector;
    use crate::oracles::dense_symmetric_eigen;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn psd_condition() {
        let v = basis_vector(3, 0);
        assert!(build_lowdeg_instance(3, 10.0, 0.1, 1.0, 1.0, v.clone()).is_ok());
        assert!(matches!(
            build_lowdeg_instance(3, 5.0, 0.1, 1.0, 1.0, v),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn moment_matching_and_psd_example() {
        let v = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let inst = build_lowdeg_instance(4, 20.0, 0.1, 1.0, 1.0, v).unwrap();
        let mix = inst.inlier_cov() * 0.9 + inst.corrupt_cov() * 0.1;
        let mut target = DMatrix::identity(5, 5);
        target[(4, 4)] = inst.label_var;
        assert!((mix - target).amax() < 1e-12);
        let (vals, _) = dense_symmetric_eigen(&inst.corrupt_cov()).unwrap();
        assert!(vals[0] >= -1e-12);
    }

    #[test]
    fn exact_rational_moment_matching() {
        let v = [r(3, 5), r(4, 5), r(0, 1)];
        assert!(moment_matching_exact(&v, r(10, 1), r(1, 10), r(1, 1), r(1, 1)).unwrap());
        assert!(moment_matching_exact(&v, r(7, 2), r(2, 7), r(3, 2), r(0, 1)).unwrap());
    }

    #[test]
    fn boundary_block_is_singular() {
        let v = basis_vector(2, 1);
        let inst = build_lowdeg_instance(2, 3.0, 0.25, 1.3, 0.0, v).unwrap();
        assert!(inst.corrupt_block().min_eigenvalue().abs() <= 1e-9);
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_poly(0, 1.7).unwrap(), 1.0);
        assert_eq!(hermite_poly(1, 1.7).unwrap(), 1.7);
        assert!((hermite_poly(2, 2.0).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        // He_4(x) = x^4 - 6x^2 + 3
        let x: f64 = 0.7;
        let he4 = x.powi(4) - 6.0 * x * x + 3.0;
        assert!((hermite_poly(4, x).unwrap() - he4 / 24f64.sqrt()).abs() < 1e-14);
        assert!(hermite_poly(61, 0.0).is_err());
    }

    #[test]
    fn cross_coeff_examples() {
        assert!((hermite_cross_coeff(1, 1, 0.5, 0.3, 2.0) - 0.3 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(hermite_cross_coeff(1, 2, 0.5, 0.3, 2.0), 0.0);
        assert_eq!(hermite_cross_coeff(3, 2, 0.5, 0.3, 2.0), 0.0);
        let c = hermite_cross_coeff(3, 1, 0.5, 0.2, 1.0);
        assert!((c - 6f64.sqrt() * 0.5 * -0.5 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn mixture_coefficients() {
        let inst = build_lowdeg_instance(5, 20.0, 0.1, 1.0, 1.0, basis_vector(5, 0)).unwrap();
        assert_eq!(mixture_cross_coeff(&inst, 1, 0), 0.0);
        // Second moments match the null, so the (2, 0) and (1, 1) terms vanish.
        assert!(mixture_cross_coeff(&inst, 2, 0).abs() < 1e-15);
        assert!(mixture_cross_coeff(&inst, 1, 1).abs() < 1e-15);
        let sy = inst.label_var.sqrt();
        let (a, b) = (inst.inlier_block(), inst.corrupt_block());
        let expect = 0.9 * (a.cov_xy / sy).powi(3) + 0.1 * (b.cov_xy / sy).powi(3);
        assert!((mixture_cross_coeff(&inst, 3, 3) - expect).abs() < 1e-15);
        let table = HermiteCoeffTable::for_instance(&inst, 8).unwrap();
        assert_eq!(table.mixture(3, 3), mixture_cross_coeff(&inst, 3, 3));
        assert_eq!(table.inlier(2, 4), 0.0);
    }

    /// Plain double-precision sum of the bound, term by term.
    fn direct_bound(n: f64, d: f64, eps: f64, kappa: f64, max_degree: usize) -> f64 {
        let mut total = 0.0;
        for p in (4..=max_degree).step_by(2) {
            let pf = p as f64;
            let resp: f64 = (0..=p / 2).map(|l| (d.sqrt() / kappa).powi(l as i32)).sum();
            for m in 1..=p / 4 {
                total += n.powi(m as i32)
                    * pf.powf(pf / 2.0)
                    * (4.0 * pf / d).powf(pf / 2.0)
                    * eps.powi(2 * m as i32 - p as i32)
                    * pf.powf(pf / 2.0)
                    * resp;
            }
        }
        total
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(advantage_bound(1e3, 1e6, 0.1, 1e3, 2).unwrap(), 0.0);
        for (n, deg) in [(1e3, 4), (1e3, 8), (1e8, 8), (37.0, 12)] {
            let got = advantage_bound(n, 1e6, 0.1, 1e3, deg).unwrap();
            let want = direct_bound(n, 1e6, 0.1, 1e3, deg);
            assert!((got / want - 1.0).abs() < 1e-12, "n={n} D={deg}: {got} vs {want}");
        }
        assert!(advantage_bound(1e3, 1e6, 0.1, 1e3, 4).unwrap() < 1.0);
        // At degree 8 the two-sample p = 8 term (about 0.88) pushes the
        // bound just past one.
        let at8 = advantage_bound(1e3, 1e6, 0.1, 1e3, 8).unwrap();
        assert!((at8 - 1.013_029_934_202_874).abs() < 1e-12, "{at8}");
        assert!(advantage_bound(1e8, 1e6, 0.1, 1e3, 8).unwrap() > 1.0);
        let terms = advantage_bound_terms(1e3, 1e6, 0.1, 1e3, 8).unwrap();
        assert_eq!(terms.iter().map(|t| t.0).collect::<Vec<_>>(), vec![4, 6, 8]);
        let total: f64 = terms.iter().map(|t| t.1).sum();
        assert!((total / at8 - 1.0).abs() < 1e-12);
        // Large exponents stay finite in log space.
        assert!(advantage_bound(1e12, 1e4, 0.01, 1.0, 40).unwrap().is_finite());
    }

    #[test]
    fn sphere_bound_examples() {
        assert_eq!(sphere_moment_bound(1, 100), 0.0);
        assert!((sphere_moment_bound(2, 100) - 0.02).abs() < 1e-16);
    }

    #[test]
    fn combinatorial_examples() {
        assert_eq!(combinatorial_coeff_sq(4, 0), BigRational::new(BigInt::from(3), BigInt::from(8)));
        assert_eq!(combinatorial_coeff_sq(2, 2), BigRational::one());
        let s = combinatorial_coeff_summary(4).unwrap();
        // Degree 4 on one sample: (4,0), (3,1), (2,2).
        assert_eq!(s.configurations, 3);
        assert!(s.holds);
        assert!(combinatorial_coeff_check(12).unwrap());
        assert!(combinatorial_coeff_check(41).is_err());
    }
}
