//! Delay eigenvalue problems.

use crate::error::NepError;
use crate::linalg::{self, cplx, CMatrix, CVector, Complex64};
use crate::nep::{Capabilities, Nep};
use crate::types::{MatFun, Spmf};

/// A delay eigenvalue problem
/// `M(lambda) = -lambda I + A_0 + sum_i exp(-tau_i lambda) A_i`
/// with nonnegative delays `tau_i`.
///
/// These arise as the characteristic equation of linear delay differential
/// equations; the rightmost eigenvalues decide stability.
#[derive(Debug, Clone)]
pub struct Dep {
    a0: CMatrix,
    delays: Vec<(f64, CMatrix)>,
    n: usize,
}

impl Dep {
    pub fn new(a0: CMatrix, delays: Vec<(f64, CMatrix)>) -> Result<Self, NepError> {
        let n = a0.nrows();
        if a0.ncols() != n {
            return Err(NepError::dimension("A0 must be square"));
        }
        for (i, (tau, a)) in delays.iter().enumerate() {
            if *tau < 0.0 {
                return Err(NepError::invalid(format!("delay {i} is negative")));
            }
            if a.nrows() != n || a.ncols() != n {
                return Err(NepError::dimension(format!(
                    "delay matrix {i} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(Dep { a0, delays, n })
    }

    pub fn a0(&self) -> &CMatrix {
        &self.a0
    }

    pub fn delays(&self) -> &[(f64, CMatrix)] {
        &self.delays
    }

    /// The same problem in sum-of-products form:
    /// `(-I) * lambda + A_0 * 1 + sum_i A_i * exp(-tau_i lambda)`.
    pub fn to_spmf(&self) -> Spmf {
        let mut matrices = vec![
            linalg::identity(self.n) * cplx(-1.0, 0.0),
            self.a0.clone(),
        ];
        let mut funs = vec![MatFun::monomial(1), MatFun::monomial(0)];
        for (tau, a) in &self.delays {
            matrices.push(a.clone());
            funs.push(MatFun::exp_scaled(cplx(-tau, 0.0)));
        }
        Spmf::new(matrices, funs).expect("valid by construction")
    }
}

impl Nep for Dep {
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
        match k {
            0 => {
                out.fill_diagonal(-lambda);
                out += &self.a0;
            }
            1 => out.fill_diagonal(cplx(-1.0, 0.0)),
            _ => {}
        }
        for (tau, a) in &self.delays {
            let w = cplx(-tau, 0.0).powu(k as u32) * (-lambda * tau).exp();
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
        // -lambda a_0 v_0 - a_1 v_1 + A0 (a_0 v_0) + per-delay weighted sums.
        let mut acc = CVector::zeros(self.n);
        acc.axpy(-lambda * coeffs[0], &v.column(0), cplx(1.0, 0.0));
        if k > 1 {
            acc.axpy(-coeffs[1], &v.column(1), cplx(1.0, 0.0));
        }
        if coeffs[0] != Complex64::default() {
            acc += &self.a0 * (v.column(0) * coeffs[0]);
        }
        for (tau, a) in &self.delays {
            let e = (-lambda * tau).exp();
            let mut w = CVector::zeros(self.n);
            let mut any = false;
            for (c, &ac) in coeffs.iter().enumerate() {
                if ac == Complex64::default() {
                    continue;
                }
                let scale = ac * e * cplx(-tau, 0.0).powu(c as u32);
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
        let mut acc = -(v * s);
        acc += &self.a0 * v;
        for (tau, a) in &self.delays {
            let e = linalg::expm(&(s * cplx(-tau, 0.0)));
            acc += a * v * e;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dep() -> (Dep, CMatrix, CMatrix) {
        let a0 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.3, 0.0), cplx(-0.6, 0.0), cplx(1.1, 0.0), cplx(0.2, 0.0)],
        );
        let a1 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(-0.5, 0.0), cplx(0.4, 0.0), cplx(0.0, 0.0), cplx(0.9, 0.0)],
        );
        (Dep::new(a0.clone(), vec![(1.0, a1.clone())]).unwrap(), a0, a1)
    }

    #[test]
    fn rejects_negative_delay() {
        let a0 = linalg::identity(2);
        assert!(Dep::new(a0.clone(), vec![(-0.1, a0)]).is_err());
    }

    #[test]
    fn value_at_zero_with_zero_delays_sums_matrices() {
        let (_, a0, a1) = small_dep();
        let dep = Dep::new(a0.clone(), vec![(0.0, a1.clone())]).unwrap();
        let m = dep.compute_mder(Complex64::default(), 0).unwrap();
        assert!((m - (&a0 + &a1)).norm() < 1e-15);
    }

    #[test]
    fn second_derivative_single_unit_delay_at_zero() {
        // k = 2, tau = 1, lambda = 0: (-1)^2 e^0 A1 = A1.
        let (dep, _, a1) = small_dep();
        let m = dep.compute_mder(Complex64::default(), 2).unwrap();
        assert!((m - &a1).norm() < 1e-15);
    }

    #[test]
    fn first_derivative_matches_central_differences() {
        let (dep, ..) = small_dep();
        let z = cplx(0.4, -0.3);
        let h = 1e-4;
        let plus = dep.compute_mder(z + cplx(h, 0.0), 0).unwrap();
        let minus = dep.compute_mder(z - cplx(h, 0.0), 0).unwrap();
        let fd = (plus - minus) / cplx(2.0 * h, 0.0);
        let m1 = dep.compute_mder(z, 1).unwrap();
        assert!((fd - &m1).norm() < 1e-6 * m1.norm().max(1.0));
    }

    #[test]
    fn mm_reduces_to_matrix_value_for_scalar_s() {
        let (dep, ..) = small_dep();
        let z = cplx(-0.2, 0.7);
        let s = CMatrix::from_element(1, 1, z);
        let v = CMatrix::from_column_slice(2, 1, &[cplx(1.0, 0.0), cplx(2.0, -1.0)]);
        let mm = dep.compute_mm(&s, &v).unwrap();
        let want = dep.compute_mder(z, 0).unwrap() * v.column(0);
        assert!((mm.column(0) - want).norm() < 1e-13);
    }

    #[test]
    fn mm_is_minus_vs_when_matrices_vanish() {
        let dep = Dep::new(CMatrix::zeros(2, 2), vec![]).unwrap();
        let s = CMatrix::from_fn(3, 3, |i, j| cplx(i as f64, j as f64));
        let v = CMatrix::from_fn(2, 3, |i, j| cplx(1.0 + i as f64, j as f64));
        let mm = dep.compute_mm(&s, &v).unwrap();
        assert!((mm + &v * &s).norm() == 0.0);
    }

    #[test]
    fn spmf_form_matches_closed_form_derivatives() {
        let (dep, ..) = small_dep();
        let spmf = dep.to_spmf();
        let z = cplx(0.3, 0.5);
        for k in 0..=4 {
            let a = dep.compute_mder(z, k).unwrap();
            let b = spmf.compute_mder(z, k).unwrap();
            assert!(
                (a.clone() - &b).norm() <= 1e-12 * a.norm().max(1.0),
                "k = {k}: {}",
                (a - &b).norm()
            );
        }
    }
}
