//! Small dense linear-algebra helpers shared by the estimators and the
//! certificate. Matrices are `nalgebra::DMatrix<f64>`; hot loops over sample
//! rows work on row-major slices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{validation, Error, Result};

/// Result of a power iteration.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Top eigenpair of a symmetric PSD operator given only its action.
///
/// Iterates until both the Rayleigh quotient and the direction change by less
/// than `tol` (relative), or `max_iter` is reached.
pub fn power_iteration<F>(mut apply: F, start: DVector<f64>, tol: f64, max_iter: usize) -> Eigenpair
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let d = start.len();
    let mut v = start;
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    } else {
        v /= norm;
    }
    let mut value = 0.0;
    for it in 1..=max_iter {
        let w = apply(&v);
        let next_value = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return Eigenpair { value: 0.0, vector: v, iterations: it, converged: true };
        }
        let next = w / wn;
        // Sign is irrelevant for an eigenvector.
        let step = (&next - &v).norm().min((&next + &v).norm());
        let rel = (next_value - value).abs() / next_value.abs().max(f64::MIN_POSITIVE);
        v = next;
        value = next_value;
        if step < tol && rel < tol {
            let value = v.dot(&apply(&v));
            return Eigenpair { value, vector: v, iterations: it, converged: true };
        }
    }
    Eigenpair { value, vector: v, iterations: max_iter, converged: false }
}

/// Power iteration on an explicit symmetric matrix, started from its
/// largest-norm column.
pub fn top_eigenpair(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Eigenpair {
    let d = m.nrows();
    let mut best = 0;
    let mut best_norm = -1.0;
    for j in 0..d {
        let n = m.column(j).norm_squared();
        if n > best_norm {
            best_norm = n;
            best = j;
        }
    }
    let start = if best_norm > 0.0 {
        m.column(best).into_owned()
    } else {
        DVector::from_element(d, 1.0)
    };
    power_iteration(|v| m * v, start, tol, max_iter)
}

/// Symmetric inverse square root `M^{-1/2}` of a positive definite matrix.
pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m, 1e-9)?;
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(validation("matrix is not positive definite"));
    }
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        eig.eigenvectors[(i, j)] / eig.eigenvalues[j].sqrt()
    });
    Ok(&scaled * eig.eigenvectors.transpose())
}

pub fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(validation(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return Err(validation(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Solve `A x = b` for symmetric positive definite `A` by Cholesky.
///
/// The condition estimate is the squared ratio of extreme Cholesky diagonal
/// entries (a lower bound on the true condition number).
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>, max_condition: f64) -> Result<DVector<f64>> {
    let chol = match a.clone().cholesky() {
        Some(c) => c,
        None => {
            let condition = condition_number(a);
            return Err(Error::SingularGram { condition });
        }
    };
    let diag = chol.l_dirty().diagonal();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &x in diag.iter() {
        lo = lo.min(x.abs());
        hi = hi.max(x.abs());
    }
    let estimate = if lo > 0.0 { (hi / lo).powi(2) } else { f64::INFINITY };
    if estimate > max_condition {
        return Err(Error::SingularGram { condition: estimate });
    }
    Ok(chol.solve(b))
}

/// Condition number from a full symmetric eigendecomposition.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_finds_dominant_eigenvalue() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 1.0]);
        let top = top_eigenpair(&m, 1e-12, 10_000);
        let exact = (7.0 + 5f64.sqrt()) / 2.0;
        assert!(top.converged);
        assert!((top.value - exact).abs() < 1e-10);
    }

    #[test]
    fn inverse_square_root_whitens() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let w = inv_sqrt_spd(&m).unwrap();
        let id = &w * &m * &w;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn singular_system_reports_condition() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(spd_solve(&a, &b, 1e12), Err(Error::SingularGram { .. })));
    }
}
