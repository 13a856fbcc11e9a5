//! The sum of two problems.

use crate::error::NepError;
use crate::linalg::{CMatrix, CVector, Complex64};
use crate::nep::{Capabilities, Nep};

/// `M(lambda) = A(lambda) + B(lambda)` for two problems of the same
/// dimension. Every compute function is the sum of the operands' compute
/// functions; a route exists whenever it exists for both operands.
#[derive(Debug, Clone)]
pub struct SumNep<A, B> {
    left: A,
    right: B,
}

impl<A: Nep, B: Nep> SumNep<A, B> {
    pub fn new(left: A, right: B) -> Result<Self, NepError> {
        if left.size() != right.size() {
            return Err(NepError::dimension(format!(
                "operands have dimensions {} and {}",
                left.size(),
                right.size()
            )));
        }
        Ok(SumNep { left, right })
    }

    pub fn left(&self) -> &A {
        &self.left
    }

    pub fn right(&self) -> &B {
        &self.right
    }
}

impl<A: Nep, B: Nep> Nep for SumNep<A, B> {
    fn size(&self) -> usize {
        self.left.size()
    }

    fn capabilities(&self) -> Capabilities {
        let l = self.left.capabilities();
        let r = self.right.capabilities();
        Capabilities {
            mder: l.has_mder_route() && r.has_mder_route(),
            mlincomb: l.has_mlincomb_route() && r.has_mlincomb_route(),
            mm: l.mm && r.mm,
            lin_solve: false,
        }
    }

    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        Ok(self.left.compute_mder(lambda, k)? + self.right.compute_mder(lambda, k)?)
    }

    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        Ok(self.left.compute_mlincomb_scaled(lambda, v, coeffs)?
            + self.right.compute_mlincomb_scaled(lambda, v, coeffs)?)
    }

    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        Ok(self.left.compute_mm(s, v)? + self.right.compute_mm(s, v)?)
    }
}
