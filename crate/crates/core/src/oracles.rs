//! Independent ground-truth computations.
//!
//! Everything here is deliberately generic (integrate a density, average a
//! statistic, diagonalize a matrix) so it can check the closed forms and
//! iterative routines elsewhere in the crate without sharing code paths
//! with them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_rational::Ratio;

use crate::error::{validation, Error, Result};
use crate::linalg::check_symmetric;

/// Exact rational arithmetic for small verification cases.
pub type Rational = Ratio<i128>;

/// Kronrod 15-point abscissae (non-negative half) and weights, with the
/// embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBDIVISIONS: usize = 20_000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integration of `f` over the union of the
/// intervals between consecutive `breaks`, to absolute tolerance `tol`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    if breaks.len() < 2 {
        return Err(validation("need at least two break points"));
    }
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&f, w[0], w[1]);
            pieces.push((w[0], w[1], v, e));
        }
    }
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        if pieces.len() >= MAX_SUBDIVISIONS {
            return Err(Error::Quadrature { error: total_err, intervals: pieces.len() });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = pieces.swap_remove(worst);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            // Interval cannot be split further in floating point.
            let total_err: f64 = pieces.iter().map(|p| p.3).sum();
            return Err(Error::Quadrature { error: total_err, intervals: pieces.len() });
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
    // Sum in a fixed order for reproducibility.
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pieces.iter().map(|p| p.2).sum())
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// `int x^p density(x) dx` over `[-30, 30]`.
pub fn quad_moment<F: Fn(f64) -> f64>(density: F, power: u32, tol: f64) -> Result<f64> {
    let breaks: Vec<f64> = (-6..=6).map(|k| 5.0 * k as f64).collect();
    integrate_with_breaks(|x| x.powi(power as i32) * density(x), &breaks, tol)
}

/// `int x^p density(x) dx` over the given sorted break points.
pub fn quad_moment_on<F: Fn(f64) -> f64>(density: F, power: u32, breaks: &[f64], tol: f64) -> Result<f64> {
    integrate_with_breaks(|x| x.powi(power as i32) * density(x), breaks, tol)
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    (-0.5 * z * z / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Gauss-Hermite rule for the standard normal weight (probabilists'
/// convention): `E[f(Z)] ~ sum w_i f(x_i)`. Golub-Welsch on the Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 / total).collect())
}

/// `E[f(x, y)]` for a centered bivariate Gaussian with covariance
/// `[[sxx, sxy], [sxy, syy]]`, by tensorized Gauss-Hermite quadrature with
/// `n` nodes per axis.
pub fn gauss_hermite_2d<F: Fn(f64, f64) -> f64>(f: F, sxx: f64, sxy: f64, syy: f64, n: usize) -> Result<f64> {
    if !(sxx >= 0.0 && syy > 0.0 && sxx * syy - sxy * sxy >= -1e-12 * sxx.max(syy).powi(2)) {
        return Err(validation("2x2 covariance is not PSD"));
    }
    // y = sqrt(syy) z1, x = (sxy/sqrt(syy)) z1 + sqrt(sxx - sxy^2/syy) z2
    let a = sxy / syy.sqrt();
    let c = (sxx - sxy * sxy / syy).max(0.0).sqrt();
    let sy = syy.sqrt();
    let (nodes, weights) = gauss_hermite(n);
    let mut acc = 0.0;
    for (z1, w1) in nodes.iter().zip(&weights) {
        for (z2, w2) in nodes.iter().zip(&weights) {
            acc += w1 * w2 * f(a * z1 + c * z2, sy * z1);
        }
    }
    Ok(acc)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

impl MomentEstimate {
    /// Whether `target` lies within `k` standard errors (plus a tiny
    /// absolute slack for exact-zero standard errors).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err + 1e-12 * (1.0 + target.abs())
    }

    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MomentEstimate { value: mean, std_err: (var / n as f64).sqrt(), n_samples: n }
    }
}

/// Sample mean and standard error of `statistic(sampler(rng))` over `n` draws.
pub fn mc_moment<T, R, S, G>(mut sampler: S, statistic: G, n: usize, rng: &mut R) -> Result<MomentEstimate>
where
    R: rand::Rng + ?Sized,
    S: FnMut(&mut R) -> T,
    G: Fn(&T) -> f64,
{
    if n < 100 {
        return Err(validation("mc_moment needs at least 100 draws"));
    }
    // Welford accumulation.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=n {
        let v = statistic(&sampler(rng));
        let delta = v - mean;
        mean += delta / k as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(MomentEstimate { value: mean, std_err: (var / n as f64).sqrt(), n_samples: n })
}

/// Full spectrum (ascending) and eigenvectors (columns) of a symmetric matrix.
pub fn dense_symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_symmetric(m, 1e-9)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(d, |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Exact `n!` for small `n` as a float (exact up to 22!).
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn gaussian_moments_by_quadrature() {
        let pdf = |x: f64| normal_pdf(x, 0.0, 1.0);
        let tol = 1e-12;
        assert!((quad_moment(pdf, 0, tol).unwrap() - 1.0).abs() < 1e-11);
        assert!((quad_moment(pdf, 2, tol).unwrap() - 1.0).abs() < 1e-11);
        assert!((quad_moment(pdf, 4, tol).unwrap() - 3.0).abs() < 1e-11);
        assert!(quad_moment(pdf, 3, tol).unwrap().abs() < 1e-11);
    }

    #[test]
    fn gauss_hermite_is_exact_for_polynomials() {
        let (x, w) = gauss_hermite(10);
        let m = |p: i32| x.iter().zip(&w).map(|(a, b)| b * a.powi(p)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-14);
        assert!((m(2) - 1.0).abs() < 1e-13);
        assert!((m(4) - 3.0).abs() < 1e-12);
        assert!((m(8) - 105.0).abs() < 1e-10);
        assert!((m(18) - 34_459_425.0).abs() / 34_459_425.0 < 1e-12);
    }

    #[test]
    fn bivariate_rule_reproduces_covariance() {
        let e = gauss_hermite_2d(|x, y| x * y, 0.5, 0.2, 1.3, 8).unwrap();
        assert!((e - 0.2).abs() < 1e-14);
        let e = gauss_hermite_2d(|x, y| x * x * y * y, 0.5, 0.2, 1.3, 8).unwrap();
        // Isserlis: sxx syy + 2 sxy^2
        assert!((e - (0.65 + 0.08)).abs() < 1e-13);
    }

    #[test]
    fn mc_moment_examples() {
        let mut rng = Seed(7).rng();
        let est = mc_moment(|r| r.sample::<f64, _>(StandardNormal), |x| x * x, 1_000_000, &mut rng).unwrap();
        assert!(est.within(1.0, 4.0));
        let est = mc_moment(|r: &mut crate::rng::StreamRng| r.random::<f64>(), |_| 2.5, 1000, &mut rng).unwrap();
        assert_eq!(est.value, 2.5);
        assert_eq!(est.std_err, 0.0);
        assert!(mc_moment(|_r: &mut crate::rng::StreamRng| 0.0, |x| *x, 10, &mut rng).is_err());
    }

    #[test]
    fn eigen_oracle_examples() {
        let (vals, _) = dense_symmetric_eigen(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(vals.as_slice(), &[1.0, 1.0, 1.0]);

        let spiked = crate::model::SpikedCovariance::new(crate::model::basis_vector(3, 1), 4.0).unwrap();
        let (vals, _) = dense_symmetric_eigen(&spiked.to_dense()).unwrap();
        assert!((vals[0] - 0.25).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);

        let mut rng = Seed(3).rng();
        let a = DMatrix::from_fn(6, 6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = &a + a.transpose();
        let (vals, vecs) = dense_symmetric_eigen(&m).unwrap();
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - &m).norm() <= 1e-8 * m.norm());
        assert!(vals.as_slice().windows(2).all(|w| w[0] <= w[1]));

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(dense_symmetric_eigen(&asym).is_err());
    }
}
