//! Small dense linear-algebra helpers shared by the density types and filters.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::{lit, to_f64, FusionError, Real, Result};

/// Relative eigenvalue below which a covariance is rejected as indefinite.
pub(crate) fn reject_ratio<T: Real>() -> T {
    let eps = T::default_epsilon();
    let base: T = lit(1e-10);
    base.max(eps * lit(64.0))
}

/// Relative eigenvalue floor applied to nearly singular covariances.
pub(crate) fn floor_ratio<T: Real>() -> T {
    let eps = T::default_epsilon();
    let base: T = lit(1e-12);
    base.max(eps * lit(4.0))
}

/// Relative Frobenius asymmetry accepted on ingestion.
pub(crate) fn symmetry_tol<T: Real>() -> T {
    let eps = T::default_epsilon();
    let base: T = lit(1e-9);
    base.max(eps * lit(16.0))
}

pub(crate) fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

pub(crate) fn relative_asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let norm = m.norm();
    if norm == T::zero() {
        return T::zero();
    }
    (m - m.transpose()).norm() / norm
}

pub(crate) fn check_finite<T: Real>(m: &DMatrix<T>, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(FusionError::NonFinite(what))
    }
}

/// Symmetrizes `m` and enforces strict positive definiteness.
///
/// Eigenvalues below `-1e-10 * max` are rejected; the remaining ones are
/// floored at `1e-12 * max`. The input is returned unchanged (up to
/// symmetrization) when no eigenvalue needs flooring.
pub(crate) fn regularize_covariance<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !m.is_square() {
        return Err(FusionError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_finite(m, "covariance")?;
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= T::zero() {
        return Err(FusionError::NotPositiveDefinite(to_f64(min)));
    }
    if min < -(reject_ratio::<T>() * max) {
        return Err(FusionError::NotPositiveDefinite(to_f64(min / max)));
    }
    let floor = floor_ratio::<T>() * max;
    if min >= floor {
        return Ok(sym);
    }
    let floored = eig.eigenvalues.map(|l| l.max(floor));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    Ok(symmetrize(&rebuilt))
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| FusionError::NotPositiveDefinite(f64::NAN))?;
    Ok(symmetrize(&chol.inverse()))
}

/// Natural log of the determinant of a symmetric positive-definite matrix.
pub(crate) fn log_det_spd<T: Real>(m: &DMatrix<T>) -> Result<T> {
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| FusionError::NotPositiveDefinite(f64::NAN))?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..m.nrows() {
        acc += l[(i, i)].ln();
    }
    Ok(acc * lit(2.0))
}

/// Squared Mahalanobis norm `d' P^-1 d` via a Cholesky solve.
pub(crate) fn mahalanobis_sq<T: Real>(d: &DVector<T>, p: &DMatrix<T>) -> Result<T> {
    let chol = Cholesky::new(p.clone())
        .ok_or_else(|| FusionError::NotPositiveDefinite(f64::NAN))?;
    let solved = chol.solve(d);
    Ok(d.dot(&solved))
}

/// Symmetric square root `S` with `S S' = P`, using the eigenvalue floor.
pub(crate) fn sqrt_spd<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_finite(m, "covariance")?;
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= T::zero() || min < -(reject_ratio::<T>() * max) {
        return Err(FusionError::NotPositiveDefinite(to_f64(min)));
    }
    let floor = floor_ratio::<T>() * max;
    let roots = eig.eigenvalues.map(|l| l.max(floor).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Smallest eigenvalue of the symmetric part of `m`, together with the scale
/// `max(|lambda|)` used for relative comparisons.
pub(crate) fn min_eigen_with_scale<T: Real>(m: &DMatrix<T>) -> (T, T) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let scale = eig.eigenvalues.iter().fold(T::zero(), |acc, l| acc.max(l.abs()));
    (eig.eigenvalues.min(), scale)
}

pub(crate) fn outer<T: Real>(d: &DVector<T>) -> DMatrix<T> {
    d * d.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regularize_floors_tiny_negative_eigenvalue() {
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-13]);
        let r = regularize_covariance(&m).unwrap();
        let (min, _) = min_eigen_with_scale(&r);
        assert!(min > 0.0);
        assert!((min - 1e-12).abs() < 1e-15);
    }

    #[test]
    fn regularize_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(matches!(
            regularize_covariance(&m),
            Err(FusionError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn log_det_matches_product_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 0.5]));
        assert!((log_det_spd(&m).unwrap() - 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sqrt_spd(&m).unwrap();
        assert!((&s * s.transpose() - m).norm() < 1e-12);
    }
}
