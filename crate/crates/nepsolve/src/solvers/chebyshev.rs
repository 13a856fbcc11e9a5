//! Chebyshev-basis machinery for the infinite Arnoldi variant.
//!
//! Polynomial iterates are stored as blocks of Chebyshev coefficients. The
//! conventions used throughout: a vector polynomial
//! `x(t) = sum_j x_j T_j(t)` keeps its coefficient blocks `x_j` as the
//! columns of an `n x (N+1)` matrix `X`, and coefficient-space operators act
//! from the right, so the derivation matrix `D_N` below satisfies
//! "`X * D_N` holds the coefficients of `x'`".

use crate::error::NepError;
use crate::linalg::{complexify, cplx, identity, CMatrix, CVector, Complex64};
use crate::types::{MatFun, Spmf};
use nalgebra::DMatrix;

/// The Chebyshev integration operator `L_k` (lower triangular, `k x k`).
///
/// For coefficient blocks `X` of a polynomial of degree `< k`, the product
/// `X * L_k` holds the coefficient blocks of `T_1, ..., T_k` of the
/// antiderivative (the free constant block is not produced). The entries
/// come from the antiderivative relations `int T_0 = T_1`,
/// `int T_1 = T_2 / 4` (plus a constant) and
/// `int T_j = T_{j+1} / (2(j+1)) - T_{j-1} / (2(j-1))` for `j >= 2`.
pub fn integration_matrix(k: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(k, k);
    if k == 0 {
        return l;
    }
    l[(0, 0)] = 1.0;
    for j in 1..k {
        l[(j, j)] = 1.0 / (2.0 * (j + 1) as f64);
    }
    for j in 2..k {
        l[(j, j - 2)] = -1.0 / (2.0 * (j - 1) as f64);
    }
    l
}

/// The derivation matrix `D_N` in the Chebyshev basis, of size
/// `(N+1) x (N+1)`: a zero first row stacked on the first `N` rows of
/// `L_{N+1}^{-1}`.
///
/// `D_N` is strictly lower triangular (hence nilpotent), so any analytic
/// function of it is a finite polynomial; and because the first row is
/// zero, `e_1^T f(D_N) = f(0) e_1^T`, which is what makes the constant
/// coefficient block separable in the boundary-condition formula.
pub fn build_derivation_matrix(n_deg: usize) -> DMatrix<f64> {
    let k = n_deg + 1;
    let l = integration_matrix(k);
    let linv = l
        .clone()
        .try_inverse()
        .expect("integration operator is triangular with nonzero diagonal");
    let mut d = DMatrix::zeros(k, k);
    for i in 0..n_deg {
        for j in 0..k {
            d[(i + 1, j)] = linv[(i, j)];
        }
    }
    d
}

/// `Theta_N(0)`: the values `(T_0(0), ..., T_N(0)) = (1, 0, -1, 0, 1, ...)`.
pub fn theta_at_zero(n_deg: usize) -> CVector {
    CVector::from_fn(n_deg + 1, |j, _| {
        if j % 2 == 1 {
            Complex64::default()
        } else if j % 4 == 0 {
            cplx(1.0, 0.0)
        } else {
            cplx(-1.0, 0.0)
        }
    })
}

/// First-order divided difference of a matrix function,
/// `f[sigma I + alpha S, sigma I]`, computed as the upper-right block of
///
/// ```text
///   f( [ sigma I + alpha S    I       ]
///      [ 0                  sigma I ] )
/// ```
///
/// so the removable singularity of `(f(sigma) - f(sigma + alpha s)) / s`
/// at `s = 0` is never formed numerically.
pub fn divided_difference(
    f: &MatFun,
    s: &CMatrix,
    sigma: Complex64,
    alpha: Complex64,
) -> Result<CMatrix, NepError> {
    let p = s.nrows();
    if s.ncols() != p {
        return Err(NepError::dimension("divided_difference: S must be square"));
    }
    let mut block = CMatrix::zeros(2 * p, 2 * p);
    let shifted = s * alpha + identity(p) * sigma;
    block.view_mut((0, 0), (p, p)).copy_from(&shifted);
    block.view_mut((0, p), (p, p)).copy_from(&identity(p));
    block
        .view_mut((p, p), (p, p))
        .copy_from(&(identity(p) * sigma));
    let fb = f.eval_matrix(&block)?;
    Ok(fb.view((0, p), (p, p)).into_owned())
}

/// The coefficient matrix `b~(S) = -alpha * f[sigma I + alpha S, sigma I]`,
/// i.e. the function `b~(s) = (f(sigma) - f(sigma + alpha s)) / s`
/// evaluated at the matrix argument.
pub fn shifted_b_matrix(
    f: &MatFun,
    s: &CMatrix,
    sigma: Complex64,
    alpha: Complex64,
) -> Result<CMatrix, NepError> {
    Ok(divided_difference(f, s, sigma, alpha)? * (-alpha))
}

/// Frame data for Chebyshev-basis computations: the degree, the derivation
/// matrix, the basis values at zero, and the problem shift and scale.
#[derive(Debug, Clone)]
pub struct ChebyshevFrame {
    degree: usize,
    derivation: CMatrix,
    theta0: CVector,
    sigma: Complex64,
    alpha: Complex64,
}

impl ChebyshevFrame {
    pub fn new(degree: usize, sigma: Complex64, alpha: Complex64) -> Result<Self, NepError> {
        if degree < 1 {
            return Err(NepError::invalid("ChebyshevFrame: degree must be >= 1"));
        }
        if alpha == Complex64::default() {
            return Err(NepError::invalid("ChebyshevFrame: alpha must be nonzero"));
        }
        Ok(ChebyshevFrame {
            degree,
            derivation: complexify(&build_derivation_matrix(degree)),
            theta0: theta_at_zero(degree),
            sigma,
            alpha,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn derivation(&self) -> &CMatrix {
        &self.derivation
    }

    pub fn theta0(&self) -> &CVector {
        &self.theta0
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// `b~_i(D_N)` for every term of `spmf`, one block divided difference
    /// per term.
    pub fn b_matrices(&self, spmf: &Spmf) -> Result<Vec<CMatrix>, NepError> {
        spmf.functions()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                shifted_b_matrix(f, &self.derivation, self.sigma, self.alpha)
                    .map_err(|e| NepError::matrix_function(i, e))
            })
            .collect()
    }
}

/// `sum_i A_i X B_i theta` for precomputed per-term coefficient matrices.
pub(crate) fn weighted_term_sum(
    spmf: &Spmf,
    x: &CMatrix,
    b_matrices: &[CMatrix],
    theta: &CVector,
) -> CVector {
    let n = x.nrows();
    let mut acc = CVector::zeros(n);
    for (a, b) in spmf.matrices().iter().zip(b_matrices) {
        let coeffs = x * (b * theta);
        acc += a * coeffs;
    }
    acc
}

/// The constant-block vector `y_0` of the Chebyshev boundary condition:
///
/// ```text
///   y_0 = sum_i A_i X b~_i(D_N) Theta_N(0) - Y Theta_N(0)
/// ```
///
/// where `X` holds the coefficient blocks of the current iterate, `Y` the
/// integrated blocks, and `b~_i(s) = (f_i(sigma) - f_i(sigma + alpha s))/s`.
/// With `sigma = 0`, `alpha = 1` this reduces to the plain
/// `b_i(s) = (f_i(0) - f_i(s))/s` form. The shift and scale are handled
/// entirely inside the `b~_i`, without constructing a transformed problem.
pub fn compute_y0(
    spmf: &Spmf,
    x: &CMatrix,
    y: &CMatrix,
    frame: &ChebyshevFrame,
) -> Result<CVector, NepError> {
    let n = crate::nep::Nep::size(spmf);
    let width = frame.degree + 1;
    if x.nrows() != n || y.nrows() != n {
        return Err(NepError::dimension("compute_y0: row counts"));
    }
    if x.ncols() != width || y.ncols() != width {
        return Err(NepError::dimension(format!(
            "compute_y0: X and Y must have {width} columns for degree {}",
            frame.degree
        )));
    }
    let b = frame.b_matrices(spmf)?;
    let mut y0 = weighted_term_sum(spmf, x, &b, &frame.theta0);
    y0 -= y * &frame.theta0;
    Ok(y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nep::Nep;

    /// Chebyshev differentiation in coefficient space from the classical
    /// recurrence `T'_j = 2j (T_{j-1} + T_{j-3} + ...)` with the `T_0`
    /// term halved; used as an independent oracle for `D_N`.
    fn classical_derivative_coeffs(c: &[f64]) -> Vec<f64> {
        let k = c.len();
        let mut out = vec![0.0; k];
        for (j, &cj) in c.iter().enumerate().skip(1) {
            let mut i = j as i64 - 1;
            while i >= 0 {
                let w = if i == 0 { j as f64 } else { 2.0 * j as f64 };
                out[i as usize] += w * cj;
                i -= 2;
            }
        }
        out
    }

    #[test]
    fn derivation_matrix_first_row_is_zero() {
        let d = build_derivation_matrix(6);
        for j in 0..7 {
            assert_eq!(d[(0, j)], 0.0);
        }
    }

    #[test]
    fn derivation_matrix_matches_classical_recurrence() {
        // Right action on a coefficient row must equal the classical
        // Chebyshev differentiation of the coefficient vector.
        let n_deg = 7;
        let d = build_derivation_matrix(n_deg);
        let coeffs: Vec<f64> = (0..=n_deg).map(|i| 0.3 + 0.7 * i as f64).collect();
        let row = DMatrix::from_fn(1, n_deg + 1, |_, j| coeffs[j]);
        let got = &row * &d;
        let want = classical_derivative_coeffs(&coeffs);
        for j in 0..=n_deg {
            assert!(
                (got[(0, j)] - want[j]).abs() < 1e-12,
                "entry {j}: {} vs {}",
                got[(0, j)],
                want[j]
            );
        }
    }

    #[test]
    fn derivation_applied_to_t1_gives_t0() {
        let d = build_derivation_matrix(3);
        // T_1 as a coefficient row (0, 1, 0, 0); derivative is T_0.
        let row = DMatrix::from_fn(1, 4, |_, j| if j == 1 { 1.0 } else { 0.0 });
        let got = &row * &d;
        assert!((got[(0, 0)] - 1.0).abs() < 1e-14);
        for j in 1..4 {
            assert!(got[(0, j)].abs() < 1e-14);
        }
    }

    #[test]
    fn double_derivative_of_quadratic_is_constant() {
        // p = T_2 has p'' = 4 T_0 (since T_2 = 2x^2 - 1).
        let d = build_derivation_matrix(4);
        let row = DMatrix::from_fn(1, 5, |_, j| if j == 2 { 1.0 } else { 0.0 });
        let got = &row * &d * &d;
        assert!((got[(0, 0)] - 4.0).abs() < 1e-12);
        for j in 1..5 {
            assert!(got[(0, j)].abs() < 1e-12);
        }
    }

    #[test]
    fn divided_difference_of_identity_is_identity() {
        // f(s) = s: f[a, b] = 1, so the block is the identity.
        let f = MatFun::monomial(1);
        let s = CMatrix::from_fn(3, 3, |i, j| cplx((i + j) as f64, 0.0));
        let dd = divided_difference(&f, &s, Complex64::default(), cplx(1.0, 0.0)).unwrap();
        assert!((dd - identity(3)).norm() < 1e-13);
    }

    #[test]
    fn divided_difference_of_exp_at_nilpotent_scalar() {
        // exp([[0, 1], [0, 0]]) has upper-right entry 1 = exp'(0).
        let f = MatFun::exp();
        let s = CMatrix::zeros(1, 1);
        let dd = divided_difference(&f, &s, Complex64::default(), cplx(1.0, 0.0)).unwrap();
        assert!((dd[(0, 0)] - cplx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn divided_difference_scalar_matches_direct_formula() {
        let f = MatFun::exp();
        let sigma = cplx(0.4, -0.2);
        let alpha = cplx(1.3, 0.5);
        let sval = cplx(0.8, 0.1);
        let s = CMatrix::from_element(1, 1, sval);
        let dd = divided_difference(&f, &s, sigma, alpha).unwrap()[(0, 0)];
        // f[sigma + alpha s, sigma] = (f(sigma + alpha s) - f(sigma)) / (alpha s)
        let direct = ((sigma + alpha * sval).exp() - sigma.exp()) / (alpha * sval);
        assert!((dd - direct).norm() < 1e-10 * direct.norm());
    }

    #[test]
    fn y0_for_single_linear_term() {
        // m = 1, f(s) = s: b(s) = -1, so y0 = -A X Theta - Y Theta.
        let a = CMatrix::from_fn(2, 2, |i, j| cplx(1.0 + (i * 2 + j) as f64, 0.0));
        let spmf = Spmf::new(vec![a.clone()], vec![MatFun::monomial(1)]).unwrap();
        let frame = ChebyshevFrame::new(3, Complex64::default(), cplx(1.0, 0.0)).unwrap();
        let x = CMatrix::from_fn(2, 4, |i, j| cplx(i as f64 - j as f64, 0.2));
        let y = CMatrix::from_fn(2, 4, |i, j| cplx(0.1 * (i + j) as f64, -0.3));
        let y0 = compute_y0(&spmf, &x, &y, &frame).unwrap();
        let want = -(&a * (&x * frame.theta0())) - &y * frame.theta0();
        assert!((y0 - want).norm() < 1e-13);
    }

    #[test]
    fn shifted_formula_with_identity_scaling_equals_unshifted() {
        let a1 = CMatrix::from_fn(3, 3, |i, j| cplx(0.2 * i as f64, 0.1 * j as f64));
        let a2 = identity(3);
        let spmf = Spmf::new(vec![a1, a2], vec![MatFun::exp(), MatFun::monomial(2)]).unwrap();
        let zero_frame = ChebyshevFrame::new(4, Complex64::default(), cplx(1.0, 0.0)).unwrap();
        let x = CMatrix::from_fn(3, 5, |i, j| cplx((i + j) as f64 * 0.1, 0.05 * i as f64));
        let y = CMatrix::from_fn(3, 5, |i, j| cplx(0.3 - 0.1 * j as f64, 0.02 * (i * j) as f64));
        let via_shifted = compute_y0(&spmf, &x, &y, &zero_frame).unwrap();
        // Hand-rolled unshifted formula: b_i(D) = -f_i[D, 0].
        let d = zero_frame.derivation().clone();
        let mut want = CVector::zeros(3);
        for (a, f) in spmf.matrices().iter().zip(spmf.functions()) {
            let b = divided_difference(f, &d, Complex64::default(), cplx(1.0, 0.0)).unwrap()
                * cplx(-1.0, 0.0);
            want += a * (&x * (b * zero_frame.theta0()));
        }
        want -= &y * zero_frame.theta0();
        assert_eq!(via_shifted, want);
    }

    #[test]
    fn y0_consistency_against_block_residual_route() {
        // With X = Y D_N, the identity
        //   sum_i A_i X b~_i(D_N) Theta = M(sigma) Y Theta - MM(sigma I + alpha D_N, Y) Theta
        // gives an independent evaluation of y0 through the block residual.
        let a1 = CMatrix::from_fn(3, 3, |i, j| cplx(0.4 * (i as f64 - j as f64), 0.1));
        let a2 = CMatrix::from_fn(3, 3, |i, j| cplx(0.05 * (i * j) as f64, -0.2));
        let spmf = Spmf::new(vec![a1, a2], vec![MatFun::exp(), MatFun::monomial(3)]).unwrap();
        let sigma = cplx(0.3, -0.1);
        let alpha = cplx(0.9, 0.4);
        let frame = ChebyshevFrame::new(5, sigma, alpha).unwrap();
        let y = CMatrix::from_fn(3, 6, |i, j| cplx(0.1 * (i + 1) as f64, 0.07 * j as f64));
        let x = &y * frame.derivation();

        let got = compute_y0(&spmf, &x, &y, &frame).unwrap();

        let m_sigma = spmf.compute_mder(sigma, 0).unwrap();
        let arg = frame.derivation() * alpha + identity(6) * sigma;
        let mm = spmf.compute_mm(&arg, &y).unwrap();
        let want = &m_sigma * (&y * frame.theta0()) - mm * frame.theta0() - &y * frame.theta0();
        assert!(
            (got.clone() - &want).norm() <= 1e-12 * want.norm().max(1.0),
            "difference {}",
            (got - want).norm()
        );
    }
}
