//! Polynomial eigenvalue problems.

use crate::error::NepError;
use crate::linalg::{cplx, CMatrix, CVector, Complex64};
use crate::nep::{Capabilities, Nep};
use crate::types::{MatFun, Spmf};

/// A matrix polynomial `M(lambda) = A_0 + lambda A_1 + ... + lambda^{m-1} A_{m-1}`.
///
/// Coefficients are stored in ascending powers of `lambda`.
#[derive(Debug, Clone)]
pub struct Pep {
    coeffs: Vec<CMatrix>,
    n: usize,
}

impl Pep {
    /// Build from coefficient matrices in ascending powers.
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self, NepError> {
        if coeffs.is_empty() {
            return Err(NepError::invalid("Pep needs at least one coefficient"));
        }
        let n = coeffs[0].nrows();
        for (i, a) in coeffs.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(NepError::dimension(format!(
                    "coefficient {i} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(Pep { coeffs, n })
    }

    /// Coefficient matrices, ascending powers.
    pub fn coefficients(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Polynomial degree (number of coefficients minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The same problem in sum-of-products form, with monomial functions.
    pub fn to_spmf(&self) -> Spmf {
        let funs = (0..self.coeffs.len())
            .map(|j| MatFun::monomial(j as u32))
            .collect();
        Spmf::new(self.coeffs.clone(), funs).expect("valid by construction")
    }

    /// Falling factorial `j (j-1) ... (j-k+1)` as a real scalar.
    fn falling(j: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (j - i) as f64)
    }
}

impl Nep for Pep {
    fn size(&self) -> usize {
        self.n
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            mder: true,
            mlincomb: true,
            mm: true,
            lin_solve: false,
        }
    }

    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (j, a) in self.coeffs.iter().enumerate() {
            if j < k {
                continue;
            }
            let w = cplx(Self::falling(j, k), 0.0) * lambda.powu((j - k) as u32);
            out += a * w;
        }
        Ok(out)
    }

    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        if v.nrows() != self.n {
            return Err(NepError::dimension("compute_mlincomb: row count"));
        }
        if coeffs.len() != v.ncols() || v.ncols() == 0 {
            return Err(NepError::dimension("compute_mlincomb: coefficient count"));
        }
        let k = v.ncols();
        let mut acc = CVector::zeros(self.n);
        // sum_j A_j (sum_c a_c * d^c/dlambda^c [lambda^j] * v_c)
        for (j, a) in self.coeffs.iter().enumerate() {
            let mut w = CVector::zeros(self.n);
            let mut any = false;
            for (c, &ac) in coeffs.iter().enumerate().take(k.min(j + 1)) {
                if ac == Complex64::default() {
                    continue;
                }
                let scale = ac * cplx(Self::falling(j, c), 0.0) * lambda.powu((j - c) as u32);
                w.axpy(scale, &v.column(c), cplx(1.0, 0.0));
                any = true;
            }
            if any {
                acc += a * w;
            }
        }
        Ok(acc)
    }

    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        if s.nrows() != s.ncols() || v.ncols() != s.nrows() || v.nrows() != self.n {
            return Err(NepError::dimension("compute_mm: operand shapes"));
        }
        let mut power = v.clone(); // V S^j, starting at j = 0
        let mut acc = CMatrix::zeros(self.n, v.ncols());
        for (j, a) in self.coeffs.iter().enumerate() {
            acc += a * &power;
            if j + 1 < self.coeffs.len() {
                power *= s;
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn quad_pep() -> (Pep, CMatrix, CMatrix, CMatrix) {
        // M(lambda) = A0 + lambda A1 + lambda^2 A2
        let a0 = CMatrix::from_row_slice(2, 2, &[cplx(1.0, 0.0), cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(3.0, 0.0)]);
        let a1 = CMatrix::from_row_slice(2, 2, &[cplx(0.5, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(-1.0, 0.5)]);
        let a2 = CMatrix::from_row_slice(2, 2, &[cplx(2.0, 0.0), cplx(1.0, 1.0), cplx(0.0, 0.0), cplx(1.0, 0.0)]);
        (
            Pep::new(vec![a0.clone(), a1.clone(), a2.clone()]).unwrap(),
            a0,
            a1,
            a2,
        )
    }

    #[test]
    fn mder_above_degree_is_zero() {
        let (pep, ..) = quad_pep();
        let m = pep.compute_mder(cplx(1.3, -0.4), 3).unwrap();
        assert!(m.norm() == 0.0);
    }

    #[test]
    fn first_derivative_at_two() {
        // d/dlambda (A0 + lambda A1 + lambda^2 A2) at 2 = A1 + 4 A2.
        let (pep, _, a1, a2) = quad_pep();
        let m = pep.compute_mder(cplx(2.0, 0.0), 1).unwrap();
        let want = &a1 + &a2 * cplx(4.0, 0.0);
        assert!((m - want).norm() < 1e-14);
    }

    #[test]
    fn mlincomb_at_zero_uses_derivatives_at_zero() {
        // At lambda = 0: M(0) v0 + M'(0) v1 = A0 v0 + A1 v1.
        let (pep, a0, a1, _) = quad_pep();
        let v = CMatrix::from_fn(2, 2, |i, j| cplx((i + j) as f64 + 1.0, j as f64));
        let got = pep.compute_mlincomb(Complex64::default(), &v).unwrap();
        let want = &a0 * v.column(0) + &a1 * v.column(1);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn mder_matches_central_differences() {
        let (pep, ..) = quad_pep();
        let z = cplx(1.0, 1.0);
        let h = 1e-4;
        let plus = pep.compute_mder(z + cplx(h, 0.0), 0).unwrap();
        let minus = pep.compute_mder(z - cplx(h, 0.0), 0).unwrap();
        let mid = pep.compute_mder(z, 0).unwrap();
        let fd = (plus - &mid * cplx(2.0, 0.0) + minus) / cplx(h * h, 0.0);
        let m2 = pep.compute_mder(z, 2).unwrap();
        assert!((fd - &m2).norm() < 1e-6 * m2.norm().max(1.0));
    }

    #[test]
    fn mm_with_diagonal_s_is_columnwise_evaluation() {
        let (pep, ..) = quad_pep();
        let l1 = cplx(0.7, 0.2);
        let l2 = cplx(-1.1, 0.0);
        let s = CMatrix::from_diagonal(&CVector::from_vec(vec![l1, l2]));
        let v = CMatrix::from_fn(2, 2, |i, j| cplx(i as f64 - j as f64, 1.0));
        let mm = pep.compute_mm(&s, &v).unwrap();
        let c1 = pep.compute_mder(l1, 0).unwrap() * v.column(0);
        let c2 = pep.compute_mder(l2, 0).unwrap() * v.column(1);
        assert!((mm.column(0) - c1).norm() < 1e-13);
        assert!((mm.column(1) - c2).norm() < 1e-13);
    }

    #[test]
    fn identity_shift_problem_has_unit_solve() {
        // M(lambda) = I - lambda I; factorize at 0 gives the identity solve.
        let pep = Pep::new(vec![identity(3), identity(3) * cplx(-1.0, 0.0)]).unwrap();
        let f = pep.factorize(Complex64::default()).unwrap();
        let b = CVector::from_vec(vec![cplx(1.0, 2.0), cplx(0.0, -1.0), cplx(3.0, 0.0)]);
        let x = f.solve(&b).unwrap();
        assert!((x - b).norm() < 1e-14);
    }
}
