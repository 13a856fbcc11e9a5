//! Dense complex linear algebra helpers used throughout the crate.
//!
//! Everything here operates on `DMatrix<Complex<f64>>`. Factorizations
//! (LU, QR, SVD, Schur) come from [`nalgebra`]; this module adds the pieces
//! nalgebra does not provide for general complex matrices: eigenvectors via
//! Schur triangularization, the principal matrix square root, and a few
//! small conveniences.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::NepError;

/// Complex scalar used everywhere in this crate.
pub type Complex64 = Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Shorthand for a real-valued complex scalar.
#[inline]
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

/// Complex identity matrix of dimension `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Lift a real matrix into the complex domain.
pub fn complexify(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| cplx(x, 0.0))
}

/// Full eigendecomposition of a general complex matrix.
///
/// Returns `(values, vectors)` with `vectors.column(i)` a unit-norm right
/// eigenvector for `values[i]`. The decomposition is computed from the
/// complex Schur form `A = Q T Q^H` followed by back substitution on the
/// triangular factor; for nearly defective matrices the computed vectors may
/// be ill conditioned, but `A v ≈ λ v` holds to roundoff for well separated
/// eigenvalues.
pub fn eig(a: &CMatrix) -> Result<(CVector, CMatrix), NepError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(NepError::dimension("eig requires a square matrix"));
    }
    if n == 0 {
        return Ok((CVector::zeros(0), CMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((
            CVector::from_element(1, a[(0, 0)]),
            CMatrix::identity(1, 1),
        ));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| NepError::eig_failed("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();

    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let smallnum = f64::EPSILON * tnorm;

    let mut values = CVector::zeros(n);
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        values[k] = t[(k, k)];
        let mut y = CVector::zeros(n);
        y[k] = cplx(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::default();
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - t[(k, k)];
            if denom.norm() < smallnum {
                // Clustered diagonal entries: clamp the divisor the way
                // LAPACK's ztrevc does to avoid overflow.
                denom = cplx(smallnum, 0.0);
            }
            y[i] = -s / denom;
        }
        let mut v = &q * y;
        let norm = v.norm();
        if norm > 0.0 {
            v /= cplx(norm, 0.0);
        }
        vectors.set_column(k, &v);
    }
    Ok((values, vectors))
}

/// Eigenvalues only (Schur diagonal) of a general complex matrix.
pub fn eigvals(a: &CMatrix) -> Result<CVector, NepError> {
    let n = a.nrows();
    if n <= 1 {
        return Ok(if n == 0 {
            CVector::zeros(0)
        } else {
            CVector::from_element(1, a[(0, 0)])
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| NepError::eig_failed("Schur iteration did not converge"))?;
    let (_, t) = schur.unpack();
    Ok(CVector::from_fn(n, |i, _| t[(i, i)]))
}

/// Matrix exponential of a complex matrix (scaling and squaring).
pub fn expm(a: &CMatrix) -> CMatrix {
    if a.nrows() == 1 {
        return CMatrix::from_element(1, 1, a[(0, 0)].exp());
    }
    a.exp()
}

/// Principal matrix square root via the Schur method of Björck–Hammarling.
///
/// Requires the spectrum to stay off the closed branch cut `(-inf, 0]`;
/// eigenvalues on the cut yield a [`NepError::Domain`] error.
pub fn sqrtm(a: &CMatrix) -> Result<CMatrix, NepError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(NepError::dimension("sqrtm requires a square matrix"));
    }
    if n == 1 {
        let z = a[(0, 0)];
        if on_sqrt_branch_cut(z) {
            return Err(NepError::domain(z, "sqrt branch cut"));
        }
        return Ok(CMatrix::from_element(1, 1, z.sqrt()));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| NepError::eig_failed("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();
    for k in 0..n {
        if on_sqrt_branch_cut(t[(k, k)]) {
            return Err(NepError::domain(t[(k, k)], "sqrt branch cut"));
        }
    }
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let denom = r[(i, i)] + r[(j, j)];
            if denom.norm() == 0.0 {
                return Err(NepError::domain(t[(i, i)], "singular sqrt recurrence"));
            }
            r[(i, j)] = s / denom;
        }
    }
    Ok(&q * r * q.adjoint())
}

/// True when `z` lies on the principal square root branch cut `(-inf, 0]`.
///
/// The test treats the origin as part of the cut: the matrix square root
/// recurrence divides by `sqrt(z_i) + sqrt(z_j)`.
pub fn on_sqrt_branch_cut(z: Complex64) -> bool {
    (z.re <= 0.0 && z.im.abs() <= 1e-14 * (1.0 + z.re.abs())) || z.norm() == 0.0
}

/// `a^k` by repeated squaring.
pub fn matrix_power(a: &CMatrix, k: usize) -> CMatrix {
    let n = a.nrows();
    let mut result = identity(n);
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value of a complex matrix.
pub fn min_singular_value(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Smallest-magnitude eigenvalue of the pencil `A v = θ B v` together with
/// its right eigenvector, computed from the standard eigenproblem of
/// `B^{-1} A`. Fails when `B` is numerically singular.
pub fn pencil_min_eig(a: &CMatrix, b: &CMatrix) -> Result<(Complex64, CVector), NepError> {
    let lu = b.clone().lu();
    let c = lu
        .solve(a)
        .ok_or_else(|| NepError::eig_failed("singular pencil: B not invertible"))?;
    let (values, vectors) = eig(&c)?;
    let mut best = 0usize;
    for i in 1..values.len() {
        if values[i].norm() < values[best].norm() {
            best = i;
        }
    }
    Ok((values[best], vectors.column(best).into_owned()))
}

/// Modified Gram–Schmidt with one DGKS-style reorthogonalization pass.
///
/// Orthogonalizes `w` against the first `ncols` columns of `basis` and
/// returns the projection coefficients and the norm of the remainder.
pub fn orthogonalize(basis: &CMatrix, ncols: usize, w: &mut CVector) -> (CVector, f64) {
    let before = w.norm();
    let mut h = CVector::zeros(ncols);
    for j in 0..ncols {
        let q = basis.column(j);
        let c = q.dotc(w);
        h[j] = c;
        w.axpy(-c, &q, cplx(1.0, 0.0));
    }
    // Reorthogonalize when the norm dropped enough for cancellation to
    // matter (the usual 1/sqrt(2) test).
    if w.norm() < std::f64::consts::FRAC_1_SQRT_2 * before {
        for j in 0..ncols {
            let q = basis.column(j);
            let c = q.dotc(w);
            h[j] += c;
            w.axpy(-c, &q, cplx(1.0, 0.0));
        }
    }
    let norm = w.norm();
    (h, norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            cplx(
                ((i * 7 + j * 3) % 11) as f64 - 5.0,
                ((i * 5 + j * 2) % 7) as f64 - 3.0,
            )
        })
    }

    #[test]
    fn eig_reconstructs_diagonal_matrix() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(-2.0, 0.5),
            cplx(0.3, -4.0),
        ]));
        let (values, _) = eig(&a).unwrap();
        let mut got: Vec<f64> = values.iter().map(|z| z.norm()).collect();
        got.sort_by(f64::total_cmp);
        let mut want = [1.0, (2.0f64 * 2.0 + 0.25).sqrt(), (0.09f64 + 16.0).sqrt()];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_residual_small_for_generic_matrix() {
        let a = test_matrix(9);
        let (values, vectors) = eig(&a).unwrap();
        for i in 0..9 {
            let v = vectors.column(i).into_owned();
            let r = &a * &v - &v * values[i];
            assert!(
                r.norm() < 1e-10 * a.norm(),
                "eigenpair {i} residual {}",
                r.norm()
            );
        }
    }

    #[test]
    fn sqrtm_squares_back() {
        let a = &test_matrix(6) * cplx(0.1, 0.0) + identity(6) * cplx(4.0, 0.0);
        let s = sqrtm(&a).unwrap();
        assert!((&s * &s - &a).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn sqrtm_rejects_branch_cut() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(-1.0, 0.0), cplx(2.0, 0.0)]));
        assert!(sqrtm(&a).is_err());
    }

    #[test]
    fn expm_matches_nilpotent_series() {
        // exp of the 2x2 nilpotent [[0,1],[0,0]] is I + N.
        let mut n = CMatrix::zeros(2, 2);
        n[(0, 1)] = cplx(1.0, 0.0);
        let e = expm(&n);
        assert!((e[(0, 0)] - cplx(1.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - cplx(1.0, 0.0)).norm() < 1e-14);
        assert!(e[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn pencil_min_eig_linear_problem() {
        // A v = θ B v with A = diag(3, 1), B = I: smallest θ is 1.
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(3.0, 0.0), cplx(1.0, 0.0)]));
        let b = identity(2);
        let (theta, v) = pencil_min_eig(&a, &b).unwrap();
        assert!((theta - cplx(1.0, 0.0)).norm() < 1e-12);
        assert!((v[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonalize_produces_orthonormal_remainder() {
        let mut basis = CMatrix::zeros(4, 2);
        basis[(0, 0)] = cplx(1.0, 0.0);
        basis[(1, 1)] = cplx(1.0, 0.0);
        let mut w = CVector::from_vec(vec![
            cplx(1.0, 1.0),
            cplx(2.0, 0.0),
            cplx(0.0, 3.0),
            cplx(1.0, 0.0),
        ]);
        let (h, norm) = orthogonalize(&basis, 2, &mut w);
        assert!((h[0] - cplx(1.0, 1.0)).norm() < 1e-14);
        assert!((h[1] - cplx(2.0, 0.0)).norm() < 1e-14);
        assert!(w[0].norm() < 1e-14 && w[1].norm() < 1e-14);
        assert!((norm - 10.0f64.sqrt()).abs() < 1e-12);
    }
}
