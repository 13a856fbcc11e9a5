//! Scalar/matrix function pairs for sum-of-products problems.
//!
//! Each term of a sum-of-products problem carries a function that must be
//! evaluable both in the scalar sense and in the matrix-function sense
//! (`f(S)` for a square complex `S`). Built-ins are provided for monomials,
//! constants, exponentials and the principal square root; anything else can
//! be supplied as a pair of closures.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::NepError;
use crate::linalg::{self, cplx, CMatrix, Complex64};
use crate::nep::bidiagonal_derivative_matrix;

type ScalarFn = Arc<dyn Fn(Complex64) -> Result<Complex64, NepError> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&CMatrix) -> Result<CMatrix, NepError> + Send + Sync>;

/// Serializable identifier for a built-in function.
///
/// This is the vocabulary of the problem file format; problems built from
/// arbitrary closures can only be constructed through the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case")]
pub enum FunTag {
    /// `lambda^degree` (degree 0 is the constant 1).
    Monomial { degree: u32 },
    /// A fixed complex constant.
    Constant { re: f64, im: f64 },
    /// `exp(lambda)`.
    Exp,
    /// `exp(a * lambda)`.
    ExpScaled { a_re: f64, a_im: f64 },
    /// Principal branch of `sqrt(lambda)`, cut along `(-inf, 0]`.
    Sqrt,
    /// `1 + sqrt(lambda)` (same branch cut).
    OnePlusSqrt,
}

/// A function given in both scalar and matrix-function sense.
///
/// For built-in constructors the matrix evaluator reduces to the scalar
/// evaluator on 1x1 input, so the two senses agree exactly there.
#[derive(Clone)]
pub struct MatFun {
    tag: Option<FunTag>,
    scalar: ScalarFn,
    matrix: MatrixFn,
}

impl std::fmt::Debug for MatFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.tag {
            Some(tag) => write!(f, "MatFun({tag:?})"),
            None => f.write_str("MatFun(custom)"),
        }
    }
}

impl MatFun {
    /// A function from a pair of user closures.
    pub fn custom<S, M>(scalar: S, matrix: M) -> Self
    where
        S: Fn(Complex64) -> Result<Complex64, NepError> + Send + Sync + 'static,
        M: Fn(&CMatrix) -> Result<CMatrix, NepError> + Send + Sync + 'static,
    {
        MatFun {
            tag: None,
            scalar: Arc::new(scalar),
            matrix: Arc::new(matrix),
        }
    }

    /// `lambda^degree`.
    pub fn monomial(degree: u32) -> Self {
        MatFun {
            tag: Some(FunTag::Monomial { degree }),
            scalar: Arc::new(move |z| Ok(z.powu(degree))),
            matrix: Arc::new(move |s| Ok(linalg::matrix_power(s, degree as usize))),
        }
    }

    /// The identity map `lambda`.
    pub fn linear() -> Self {
        Self::monomial(1)
    }

    /// The constant function `c`.
    pub fn constant(c: Complex64) -> Self {
        MatFun {
            tag: Some(FunTag::Constant { re: c.re, im: c.im }),
            scalar: Arc::new(move |_| Ok(c)),
            matrix: Arc::new(move |s| Ok(linalg::identity(s.nrows()) * c)),
        }
    }

    /// `exp(lambda)`.
    pub fn exp() -> Self {
        MatFun {
            tag: Some(FunTag::Exp),
            scalar: Arc::new(|z| Ok(z.exp())),
            matrix: Arc::new(|s| Ok(linalg::expm(s))),
        }
    }

    /// `exp(a * lambda)`.
    pub fn exp_scaled(a: Complex64) -> Self {
        MatFun {
            tag: Some(FunTag::ExpScaled {
                a_re: a.re,
                a_im: a.im,
            }),
            scalar: Arc::new(move |z| Ok((a * z).exp())),
            matrix: Arc::new(move |s| Ok(linalg::expm(&(s * a)))),
        }
    }

    /// Principal `sqrt(lambda)`, cut along `(-inf, 0]`.
    ///
    /// The scalar evaluator returns the principal value everywhere (on the
    /// cut, the limit from above). The matrix evaluator requires the
    /// spectrum to stay off the closed cut and reports a domain error
    /// otherwise, so derivative evaluations at cut points fail while plain
    /// values still work.
    pub fn sqrt() -> Self {
        MatFun {
            tag: Some(FunTag::Sqrt),
            scalar: Arc::new(|z| Ok(z.sqrt())),
            matrix: Arc::new(|s| linalg::sqrtm(s)),
        }
    }

    /// `1 + sqrt(lambda)` with the principal branch; same domain behavior
    /// as [`MatFun::sqrt`].
    pub fn one_plus_sqrt() -> Self {
        MatFun {
            tag: Some(FunTag::OnePlusSqrt),
            scalar: Arc::new(|z| Ok(cplx(1.0, 0.0) + z.sqrt())),
            matrix: Arc::new(|s| Ok(linalg::identity(s.nrows()) + linalg::sqrtm(s)?)),
        }
    }

    /// Rebuild a built-in from its serialized tag.
    pub fn from_tag(tag: &FunTag) -> Self {
        match tag {
            FunTag::Monomial { degree } => Self::monomial(*degree),
            FunTag::Constant { re, im } => Self::constant(cplx(*re, *im)),
            FunTag::Exp => Self::exp(),
            FunTag::ExpScaled { a_re, a_im } => Self::exp_scaled(cplx(*a_re, *a_im)),
            FunTag::Sqrt => Self::sqrt(),
            FunTag::OnePlusSqrt => Self::one_plus_sqrt(),
        }
    }

    /// The serialization tag, when this is a built-in.
    pub fn tag(&self) -> Option<&FunTag> {
        self.tag.as_ref()
    }

    /// Scalar evaluation `f(lambda)`.
    pub fn eval_scalar(&self, lambda: Complex64) -> Result<Complex64, NepError> {
        (self.scalar)(lambda)
    }

    /// Matrix-function evaluation `f(S)`. 1x1 input goes through the scalar
    /// evaluator so the two senses agree exactly.
    pub fn eval_matrix(&self, s: &CMatrix) -> Result<CMatrix, NepError> {
        if s.nrows() != s.ncols() {
            return Err(NepError::dimension("matrix function argument must be square"));
        }
        if s.nrows() == 1 {
            return Ok(CMatrix::from_element(1, 1, self.eval_scalar(s[(0, 0)])?));
        }
        (self.matrix)(s)
    }

    /// The derivative column `(f(lambda), f'(lambda), ..., f^(k-1)(lambda))`,
    /// read off the first column of `f` applied to the bidiagonal matrix of
    /// [`bidiagonal_derivative_matrix`].
    pub fn derivative_column(
        &self,
        lambda: Complex64,
        k: usize,
    ) -> Result<Vec<Complex64>, NepError> {
        if k == 0 {
            return Ok(vec![]);
        }
        if k == 1 {
            return Ok(vec![self.eval_scalar(lambda)?]);
        }
        let s = bidiagonal_derivative_matrix(lambda, k);
        let f = self.eval_matrix(&s)?;
        Ok((0..k).map(|i| f[(i, 0)]).collect())
    }

    /// `f^(k)(lambda)`.
    pub fn derivative(&self, lambda: Complex64, k: usize) -> Result<Complex64, NepError> {
        Ok(self.derivative_column(lambda, k + 1)?[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_matrix_sense_agree_on_1x1() {
        let funs = [
            MatFun::monomial(3),
            MatFun::constant(cplx(2.0, -1.0)),
            MatFun::exp(),
            MatFun::exp_scaled(cplx(-0.7, 0.2)),
            MatFun::sqrt(),
            MatFun::one_plus_sqrt(),
        ];
        let z = cplx(0.8, 0.3);
        for f in &funs {
            let s = CMatrix::from_element(1, 1, z);
            let fs = f.eval_matrix(&s).unwrap();
            let fz = f.eval_scalar(z).unwrap();
            assert!((fs[(0, 0)] - fz).norm() <= 1e-14 * fz.norm().max(1.0), "{f:?}");
        }
    }

    #[test]
    fn derivative_column_of_exp_at_zero_is_ones() {
        // exp^(k)(0) = 1 for every k.
        let f = MatFun::exp();
        let col = f.derivative_column(Complex64::default(), 5).unwrap();
        for c in col {
            assert!((c - cplx(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_monomial() {
        // d/dz z^3 at z = 2 is 3 z^2 = 12; the second derivative is 6 z = 12.
        let f = MatFun::monomial(3);
        let z = cplx(2.0, 0.0);
        assert!((f.derivative(z, 1).unwrap() - cplx(12.0, 0.0)).norm() < 1e-12);
        assert!((f.derivative(z, 2).unwrap() - cplx(12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_derivative_at_one() {
        // d/dz sqrt(z) at 1 is 1/2.
        let f = MatFun::sqrt();
        assert!((f.derivative(cplx(1.0, 0.0), 1).unwrap() - cplx(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_branch_cut_behavior() {
        let f = MatFun::sqrt();
        // Scalar values exist everywhere (principal branch)...
        assert!((f.eval_scalar(cplx(-4.0, 0.0)).unwrap() - cplx(0.0, 2.0)).norm() < 1e-14);
        assert!(f.eval_scalar(cplx(-2.0, 0.5)).is_ok());
        // ...but derivatives at cut points go through the matrix evaluator
        // and are rejected.
        assert!(f.derivative(cplx(-2.0, 0.0), 1).is_err());
        assert!(f.derivative(cplx(0.0, 0.0), 1).is_err());
        assert!(f.derivative(cplx(-2.0, 0.5), 1).is_ok());
    }

    #[test]
    fn tags_round_trip() {
        let f = MatFun::exp_scaled(cplx(-1.5, 0.0));
        let tag = f.tag().unwrap().clone();
        let g = MatFun::from_tag(&tag);
        let z = cplx(0.3, -0.2);
        assert_eq!(f.eval_scalar(z).unwrap(), g.eval_scalar(z).unwrap());
    }
}
