//! Sum-of-products problems and the derivative-precomputing wrapper.

use crate::error::NepError;
use crate::linalg::{CMatrix, CVector, Complex64};
use crate::nep::{Capabilities, Nep};
use crate::types::MatFun;

/// A sum-of-products problem `M(lambda) = sum_i A_i f_i(lambda)`.
///
/// Each `f_i` must be evaluable in the scalar and the matrix-function sense;
/// see [`MatFun`]. Efficient when the number of terms is small compared to
/// the dimension.
#[derive(Debug, Clone)]
pub struct Spmf {
    matrices: Vec<CMatrix>,
    functions: Vec<MatFun>,
    n: usize,
}

impl Spmf {
    pub fn new(matrices: Vec<CMatrix>, functions: Vec<MatFun>) -> Result<Self, NepError> {
        if matrices.is_empty() {
            return Err(NepError::invalid("Spmf needs at least one term"));
        }
        if matrices.len() != functions.len() {
            return Err(NepError::dimension(format!(
                "{} matrices vs {} functions",
                matrices.len(),
                functions.len()
            )));
        }
        let n = matrices[0].nrows();
        for (i, a) in matrices.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(NepError::dimension(format!(
                    "term {i} matrix is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(Spmf {
            matrices,
            functions,
            n,
        })
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn functions(&self) -> &[MatFun] {
        &self.functions
    }

    pub fn num_terms(&self) -> usize {
        self.matrices.len()
    }

    /// Per-term derivative columns `(f_i(lambda), ..., f_i^(k-1)(lambda))`.
    fn derivative_columns(
        &self,
        lambda: Complex64,
        k: usize,
    ) -> Result<Vec<Vec<Complex64>>, NepError> {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.derivative_column(lambda, k)
                    .map_err(|e| NepError::matrix_function(i, e))
            })
            .collect()
    }

    fn lincomb_from_columns(
        &self,
        v: &CMatrix,
        coeffs: &[Complex64],
        columns: &[Vec<Complex64>],
    ) -> CVector {
        let mut acc = CVector::zeros(self.n);
        for (a, d) in self.matrices.iter().zip(columns) {
            let mut w = CVector::zeros(self.n);
            let mut any = false;
            for (c, &ac) in coeffs.iter().enumerate() {
                if ac == Complex64::default() {
                    continue;
                }
                w.axpy(ac * d[c], &v.column(c), Complex64::new(1.0, 0.0));
                any = true;
            }
            if any {
                acc += a * w;
            }
        }
        acc
    }
}

impl Nep for Spmf {
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
        for (i, (a, f)) in self.matrices.iter().zip(&self.functions).enumerate() {
            let d = f
                .derivative(lambda, k)
                .map_err(|e| NepError::matrix_function(i, e))?;
            out += a * d;
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
        let columns = self.derivative_columns(lambda, v.ncols())?;
        Ok(self.lincomb_from_columns(v, coeffs, &columns))
    }

    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        if s.nrows() != s.ncols() || v.ncols() != s.nrows() || v.nrows() != self.n {
            return Err(NepError::dimension("compute_mm: operand shapes"));
        }
        let mut acc = CMatrix::zeros(self.n, v.ncols());
        for (i, (a, f)) in self.matrices.iter().zip(&self.functions).enumerate() {
            let fs = f
                .eval_matrix(s)
                .map_err(|e| NepError::matrix_function(i, e))?;
            acc += a * v * fs;
        }
        Ok(acc)
    }
}

/// Precomputed derivative table at one expansion point.
#[derive(Debug, Clone)]
struct DerivTable {
    sigma: Complex64,
    /// `derivs[i][k] = f_i^(k)(sigma)`, `k = 0..=max_order`.
    derivs: Vec<Vec<Complex64>>,
    max_order: usize,
}

/// A sum-of-products problem with derivative tables precomputed at one or
/// more expansion points.
///
/// A linear-combination evaluation at a tabulated point uses the table
/// directly (no matrix-function calls); everything else behaves exactly as
/// the parent problem. Wrapping an already wrapped problem at a second
/// point just extends the table set, so precomputation at several points
/// composes.
#[derive(Debug, Clone)]
pub struct DerSpmf {
    parent: Spmf,
    tables: Vec<DerivTable>,
}

/// Precompute `f_i^(k)(sigma)` for `k <= max_order` for every term of
/// `spmf`, by one matrix-function evaluation per term on the bidiagonal
/// derivative matrix.
pub fn make_derspmf(spmf: &Spmf, sigma: Complex64, max_order: usize) -> Result<DerSpmf, NepError> {
    if max_order < 1 {
        return Err(NepError::invalid("make_derspmf: max_order must be >= 1"));
    }
    DerSpmf {
        parent: spmf.clone(),
        tables: vec![],
    }
    .extend(sigma, max_order)
}

impl DerSpmf {
    /// Add a table at another expansion point.
    pub fn extend(mut self, sigma: Complex64, max_order: usize) -> Result<Self, NepError> {
        let derivs = self
            .parent
            .functions()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.derivative_column(sigma, max_order + 1)
                    .map_err(|e| NepError::matrix_function(i, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.tables.push(DerivTable {
            sigma,
            derivs,
            max_order,
        });
        Ok(self)
    }

    /// The wrapped problem.
    pub fn parent(&self) -> &Spmf {
        &self.parent
    }

    /// The table for an exact match of `(sigma, needed order)`, if any.
    fn table_for(&self, lambda: Complex64, order: usize) -> Option<&DerivTable> {
        self.tables
            .iter()
            .find(|t| t.sigma == lambda && order <= t.max_order)
    }

    /// Tabulated derivative `f_i^(k)(sigma)`; used by tests and by the
    /// Chebyshev machinery.
    pub fn table_entry(&self, point: usize, term: usize, order: usize) -> Option<Complex64> {
        self.tables
            .get(point)
            .and_then(|t| t.derivs.get(term))
            .and_then(|d| d.get(order))
            .copied()
    }
}

impl Nep for DerSpmf {
    fn size(&self) -> usize {
        self.parent.size()
    }

    fn capabilities(&self) -> Capabilities {
        self.parent.capabilities()
    }

    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        self.parent.compute_mder(lambda, k)
    }

    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        if v.nrows() != self.parent.size() {
            return Err(NepError::dimension("compute_mlincomb: row count"));
        }
        if coeffs.len() != v.ncols() || v.ncols() == 0 {
            return Err(NepError::dimension("compute_mlincomb: coefficient count"));
        }
        match self.table_for(lambda, v.ncols() - 1) {
            Some(table) => {
                let columns: Vec<Vec<Complex64>> = table
                    .derivs
                    .iter()
                    .map(|d| d[..v.ncols()].to_vec())
                    .collect();
                Ok(self.parent.lincomb_from_columns(v, coeffs, &columns))
            }
            None => self.parent.compute_mlincomb_scaled(lambda, v, coeffs),
        }
    }

    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        self.parent.compute_mm(s, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, identity};

    fn sample_spmf() -> Spmf {
        let a1 = CMatrix::from_fn(3, 3, |i, j| cplx((i + 2 * j) as f64 * 0.1, 0.0));
        let a2 = identity(3);
        let a3 = CMatrix::from_fn(3, 3, |i, j| cplx(0.0, ((i * j) % 3) as f64 * 0.2 - 0.1));
        Spmf::new(
            vec![a1, a2, a3],
            vec![MatFun::exp(), MatFun::monomial(1), MatFun::monomial(2)],
        )
        .unwrap()
    }

    #[test]
    fn identity_function_derivatives() {
        // Single term A * lambda: first derivative A, higher ones zero.
        let a = CMatrix::from_fn(2, 2, |i, j| cplx((i + j) as f64, 1.0));
        let spmf = Spmf::new(vec![a.clone()], vec![MatFun::monomial(1)]).unwrap();
        let z = cplx(0.3, -0.8);
        assert!((spmf.compute_mder(z, 1).unwrap() - &a).norm() < 1e-14);
        assert!(spmf.compute_mder(z, 2).unwrap().norm() < 1e-14);
        assert!(spmf.compute_mder(z, 5).unwrap().norm() < 1e-14);
    }

    #[test]
    fn exp_term_derivatives_at_zero_are_the_matrix() {
        let a = CMatrix::from_fn(2, 2, |i, j| cplx(1.0 + i as f64, j as f64));
        let spmf = Spmf::new(vec![a.clone()], vec![MatFun::exp()]).unwrap();
        for k in 0..=3 {
            let m = spmf.compute_mder(Complex64::default(), k).unwrap();
            assert!((m - &a).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn sqrt_term_first_derivative_at_one() {
        // f = 1 + sqrt(lambda): f'(1) = 1/2.
        let a = identity(2) * cplx(2.0, 0.0);
        let spmf = Spmf::new(vec![a.clone()], vec![MatFun::one_plus_sqrt()]).unwrap();
        let m = spmf.compute_mder(cplx(1.0, 0.0), 1).unwrap();
        assert!((m - &a * cplx(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn matrix_function_error_carries_term_index() {
        let spmf = Spmf::new(
            vec![identity(2), identity(2)],
            vec![MatFun::exp(), MatFun::sqrt()],
        )
        .unwrap();
        // Derivative at a branch-cut point: term 1 must be reported.
        let err = spmf.compute_mder(cplx(-1.0, 0.0), 1).unwrap_err();
        match err {
            NepError::MatrixFunction { term, .. } => assert_eq!(term, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn derspmf_table_column_zero_is_function_values() {
        let spmf = sample_spmf();
        let sigma = cplx(0.4, 0.1);
        let d = make_derspmf(&spmf, sigma, 6).unwrap();
        for (i, f) in spmf.functions().iter().enumerate() {
            let want = f.eval_scalar(sigma).unwrap();
            let got = d.table_entry(0, i, 0).unwrap();
            assert!((got - want).norm() < 1e-13);
        }
    }

    #[test]
    fn derspmf_matches_parent_at_expansion_point() {
        let spmf = sample_spmf();
        let sigma = cplx(-0.3, 0.2);
        let d = make_derspmf(&spmf, sigma, 8).unwrap();
        let v = CMatrix::from_fn(3, 5, |i, j| cplx(i as f64 - j as f64, 0.3 * j as f64));
        let got = d.compute_mlincomb(sigma, &v).unwrap();
        let want = spmf.compute_mlincomb(sigma, &v).unwrap();
        assert!((got - &want).norm() <= 1e-12 * want.norm().max(1.0));
    }

    #[test]
    fn derspmf_delegates_away_from_expansion_point() {
        let spmf = sample_spmf();
        let sigma = cplx(-0.3, 0.2);
        let other = cplx(0.5, 0.0);
        let d = make_derspmf(&spmf, sigma, 4).unwrap();
        let v = CMatrix::from_fn(3, 3, |i, j| cplx(i as f64, j as f64));
        let got = d.compute_mlincomb(other, &v).unwrap();
        let want = spmf.compute_mlincomb(other, &v).unwrap();
        // Bit-identical: same code path.
        assert_eq!(got, want);
    }

    #[test]
    fn derspmf_composes_at_two_points() {
        let spmf = sample_spmf();
        let s1 = cplx(0.0, 0.0);
        let s2 = cplx(1.0, 0.0);
        let d = make_derspmf(&spmf, s1, 4).unwrap().extend(s2, 6).unwrap();
        let v = CMatrix::from_fn(3, 4, |i, j| cplx(1.0 + i as f64 * j as f64, 0.0));
        for sigma in [s1, s2] {
            let got = d.compute_mlincomb(sigma, &v).unwrap();
            let want = spmf.compute_mlincomb(sigma, &v).unwrap();
            assert!((got - &want).norm() <= 1e-11 * want.norm().max(1.0));
        }
    }
}
