//! Domain types for the Gaussian linear model: covariance structures,
//! the ground-truth regression instance, and weighted datasets.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{validation, Result};
use crate::linalg::check_symmetric;

/// Identity minus a rank-one spike: `I - (1 - 1/kappa) v v^T`.
///
/// Kept symbolically so that samplers and the certificate only ever need
/// matrix-vector products.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedCovariance {
    v: DVector<f64>,
    kappa: f64,
}

impl SpikedCovariance {
    pub fn new(v: DVector<f64>, kappa: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(validation("spike direction must have dimension >= 1"));
        }
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(validation(format!("spike direction has norm {}, expected 1", v.norm())));
        }
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(validation(format!("kappa must be >= 1, got {kappa}")));
        }
        Ok(Self { v, kappa })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn shrink(&self) -> f64 {
        1.0 - 1.0 / self.kappa
    }

    /// `Sigma_v x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let c = self.shrink() * dot(self.v.as_slice(), x);
        x.iter().zip(self.v.iter()).map(|(xi, vi)| xi - c * vi).collect()
    }

    /// `Sigma_v^{1/2} x`.
    pub fn apply_sqrt(&self, x: &mut [f64]) {
        let c = (1.0 - 1.0 / self.kappa.sqrt()) * dot(self.v.as_slice(), x);
        for (xi, vi) in x.iter_mut().zip(self.v.iter()) {
            *xi -= c * vi;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let p = dot(self.v.as_slice(), x);
        dot(x, x) - self.shrink() * p * p
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let s = self.shrink();
        DMatrix::from_fn(d, d, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - s * self.v[i] * self.v[j]
        })
    }
}

/// Covariate covariance, either a dense SPD matrix or a symbolic spike.
#[derive(Debug, Clone)]
pub enum Covariance {
    Dense { matrix: DMatrix<f64>, sqrt: DMatrix<f64> },
    Spiked(SpikedCovariance),
}

impl Covariance {
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix, 1e-9)?;
        let sqrt = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| validation("covariance is not positive definite"))?
            .unpack();
        Ok(Covariance::Dense { matrix, sqrt })
    }

    pub fn identity(d: usize) -> Self {
        let m = DMatrix::identity(d, d);
        Covariance::Dense { matrix: m.clone(), sqrt: m }
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Dense { matrix, .. } => matrix.nrows(),
            Covariance::Spiked(s) => s.dim(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Covariance::Dense { matrix, .. } => {
                (matrix * DVector::from_column_slice(x)).as_slice().to_vec()
            }
            Covariance::Spiked(s) => s.apply(x),
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        match self {
            Covariance::Dense { matrix, .. } => {
                let xv = DVector::from_column_slice(x);
                xv.dot(&(matrix * &xv))
            }
            Covariance::Spiked(s) => s.quad_form(x),
        }
    }

    /// Overwrite `out` with a draw from `N(0, Sigma)`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Covariance::Dense { sqrt, .. } => {
                let d = sqrt.nrows();
                let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += sqrt[(i, j)] * z[j];
                    }
                    out[i] = acc;
                }
            }
            Covariance::Spiked(s) => {
                for o in out.iter_mut() {
                    *o = rng.sample(StandardNormal);
                }
                s.apply_sqrt(out);
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Covariance::Dense { matrix, .. } => matrix.clone(),
            Covariance::Spiked(s) => s.to_dense(),
        }
    }

    /// `(lambda_min, lambda_max)`.
    pub fn eigen_bounds(&self) -> (f64, f64) {
        match self {
            Covariance::Dense { matrix, .. } => {
                let eig = SymmetricEigen::new(matrix.clone());
                let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Covariance::Spiked(s) => {
                let lo = 1.0 / s.kappa();
                let hi = if s.dim() > 1 { 1.0 } else { lo };
                (lo, hi)
            }
        }
    }
}

impl From<SpikedCovariance> for Covariance {
    fn from(s: SpikedCovariance) -> Self {
        Covariance::Spiked(s)
    }
}

/// Ground-truth regression instance `y = <x, beta> + eta`, `x ~ N(0, Sigma)`,
/// `eta ~ N(0, noise_var)`.
#[derive(Debug, Clone)]
pub struct LinearModelSpec {
    pub covariance: Covariance,
    pub beta: DVector<f64>,
    pub noise_var: f64,
    pub eig_lo: f64,
    pub eig_hi: f64,
    pub cond: f64,
    pub label_var: f64,
}

impl LinearModelSpec {
    pub fn new(covariance: Covariance, beta: DVector<f64>, noise_var: f64) -> Result<Self> {
        if covariance.dim() == 0 {
            return Err(validation("dimension must be positive"));
        }
        if beta.len() != covariance.dim() {
            return Err(validation(format!(
                "beta has length {}, covariance has dimension {}",
                beta.len(),
                covariance.dim()
            )));
        }
        if !(noise_var >= 0.0) || !noise_var.is_finite() {
            return Err(validation("noise variance must be finite and nonnegative"));
        }
        let (eig_lo, eig_hi) = covariance.eigen_bounds();
        if !(eig_lo > 0.0) {
            return Err(validation("covariance is not positive definite"));
        }
        let label_var = covariance.quad_form(beta.as_slice()) + noise_var;
        Ok(Self { covariance, beta, noise_var, eig_lo, eig_hi, cond: eig_hi / eig_lo, label_var })
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// Signal strength `||beta||_Sigma`.
    pub fn signal_norm(&self) -> f64 {
        self.covariance.quad_form(self.beta.as_slice()).sqrt()
    }
}

/// `n` rows of `(x_1..x_d, y)` stored row-major, with nonnegative weights
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    rows: Vec<f64>,
    weights: Vec<f64>,
    pub seed: u64,
}

impl Dataset {
    /// Build from row-major data with `dim + 1` columns and uniform weights.
    pub fn new(dim: usize, rows: Vec<f64>, seed: u64) -> Result<Self> {
        let width = dim + 1;
        if rows.is_empty() || rows.len() % width != 0 {
            return Err(validation(format!(
                "row buffer of length {} is not a positive multiple of {width}",
                rows.len()
            )));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(validation("dataset contains non-finite entries"));
        }
        let n = rows.len() / width;
        Ok(Self { dim, rows, weights: vec![1.0 / n as f64; n], seed })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n() {
            return Err(validation("weight vector length does not match row count"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(validation("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(validation(format!("weights sum to {total}, expected 1")));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.dim + 1;
        &mut self.rows[i * w..(i + 1) * w]
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.row(i)[..self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.rows[i * (self.dim + 1) + self.dim]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.y(i)).collect()
    }

    /// Rows `[start, end)` as a new dataset with uniform weights.
    pub fn slice(&self, start: usize, end: usize) -> Result<Dataset> {
        if start >= end || end > self.n() {
            return Err(validation(format!("invalid row range {start}..{end}")));
        }
        let w = self.dim + 1;
        Dataset::new(self.dim, self.rows[start * w..end * w].to_vec(), self.seed)
    }

    /// Apply a linear map to every covariate vector; labels are untouched.
    pub fn map_covariates(&self, m: &DMatrix<f64>) -> Result<Dataset> {
        if m.ncols() != self.dim {
            return Err(validation("map dimension does not match covariates"));
        }
        let out_dim = m.nrows();
        let mut rows = Vec::with_capacity(self.n() * (out_dim + 1));
        for i in 0..self.n() {
            let x = self.x(i);
            for r in 0..out_dim {
                let mut acc = 0.0;
                for (c, xc) in x.iter().enumerate() {
                    acc += m[(r, c)] * xc;
                }
                rows.push(acc);
            }
            rows.push(self.y(i));
        }
        Ok(Dataset { dim: out_dim, rows, weights: self.weights.clone(), seed: self.seed })
    }

    /// Multiply every label by `c`.
    pub fn scale_labels(&self, c: f64) -> Dataset {
        let mut out = self.clone();
        for i in 0..out.n() {
            let d = out.dim;
            out.row_mut(i)[d] *= c;
        }
        out
    }

    /// Empirical (unweighted, uncentered) second moment of the covariates.
    pub fn covariate_second_moment(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..self.n() {
            let x = self.x(i);
            for a in 0..d {
                let xa = x[a];
                for b in 0..=a {
                    m[(a, b)] += xa * x[b];
                }
            }
        }
        let n = self.n() as f64;
        for a in 0..d {
            for b in 0..=a {
                let v = m[(a, b)] / n;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `||Sigma^{1/2}(beta_hat - beta)||_2`.
pub fn mahalanobis_error(beta_hat: &DVector<f64>, beta: &DVector<f64>, sigma: &Covariance) -> Result<f64> {
    if beta_hat.len() != beta.len() || beta.len() != sigma.dim() {
        return Err(validation(format!(
            "dimension mismatch: beta_hat {}, beta {}, Sigma {}",
            beta_hat.len(),
            beta.len(),
            sigma.dim()
        )));
    }
    let diff = beta_hat - beta;
    Ok(sigma.quad_form(diff.as_slice()).max(0.0).sqrt())
}

/// Uniform draw from the unit sphere in `R^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DVector<f64>> {
    if d == 0 {
        return Err(validation("dimension must be >= 1"));
    }
    loop {
        let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 0.0 {
            return Ok(g / n);
        }
    }
}

pub fn basis_vector(d: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(d);
    e[i] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn spike_with_unit_kappa_is_identity() {
        let s = SpikedCovariance::new(basis_vector(3, 0), 1.0).unwrap();
        assert_eq!(s.to_dense(), DMatrix::identity(3, 3));
    }

    #[test]
    fn spike_on_first_axis_is_diagonal() {
        let s = SpikedCovariance::new(basis_vector(2, 0), 4.0).unwrap();
        let m = s.to_dense();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn diagonal_spike_eigenvalues_from_dense_decomposition() {
        let v = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let s = SpikedCovariance::new(v.clone(), 2.0).unwrap();
        let sv = s.apply(v.as_slice());
        for (a, b) in sv.iter().zip(v.iter()) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
        let eig = SymmetricEigen::new(s.to_dense());
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((lo - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spike_rejects_bad_inputs() {
        assert!(SpikedCovariance::new(DVector::from_vec(vec![1.0, 1.0]), 2.0).is_err());
        assert!(SpikedCovariance::new(basis_vector(2, 0), 0.5).is_err());
    }

    #[test]
    fn mahalanobis_examples() {
        let id = Covariance::identity(3);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(mahalanobis_error(&b, &b, &id).unwrap(), 0.0);

        let diag = Covariance::dense(DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0])).unwrap();
        let e = mahalanobis_error(&basis_vector(2, 0), &DVector::zeros(2), &diag).unwrap();
        assert!((e - 0.5).abs() < 1e-15);

        let v = DVector::from_vec(vec![3.0, 4.0, 0.0]) / 5.0;
        let spiked: Covariance = SpikedCovariance::new(v.clone(), 9.0).unwrap().into();
        let e = mahalanobis_error(&v, &DVector::zeros(3), &spiked).unwrap();
        // Oracle: dense quadratic form.
        let dense = spiked.to_dense();
        let oracle = v.dot(&(&dense * &v)).sqrt();
        assert!((e - 1.0 / 3.0).abs() < 1e-14);
        assert!((e - oracle).abs() < 1e-14);

        assert!(mahalanobis_error(&basis_vector(2, 0), &DVector::zeros(3), &id).is_err());
    }

    #[test]
    fn unit_vectors() {
        let mut rng = Seed(1).rng();
        let v = random_unit_vector(1, &mut rng).unwrap();
        assert_eq!(v[0].abs(), 1.0);
        assert!(random_unit_vector(0, &mut rng).is_err());
        let a = random_unit_vector(3, &mut Seed(42).rng()).unwrap();
        let b = random_unit_vector(3, &mut Seed(42).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_derived_quantities() {
        let v = basis_vector(4, 2);
        let cov: Covariance = SpikedCovariance::new(v, 8.0).unwrap().into();
        let beta = DVector::from_vec(vec![1.0, 0.0, 2.0, 0.0]);
        let m = LinearModelSpec::new(cov, beta, 0.5).unwrap();
        assert_eq!(m.eig_lo, 0.125);
        assert_eq!(m.eig_hi, 1.0);
        assert_eq!(m.cond, 8.0);
        assert!((m.label_var - (1.0 + 4.0 / 8.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(2, vec![1.0, 2.0], 0).is_err());
        assert!(Dataset::new(1, vec![f64::NAN, 1.0], 0).is_err());
        let d = Dataset::new(1, vec![1.0, 2.0, 3.0, 4.0], 0).unwrap();
        assert_eq!(d.n(), 2);
        assert!(d.clone().with_weights(vec![0.7, 0.2]).is_err());
        assert!(d.with_weights(vec![0.75, 0.25]).is_ok());
    }
}
