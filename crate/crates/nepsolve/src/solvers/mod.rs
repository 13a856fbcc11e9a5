//! Eigensolvers: Newton-type, Krylov/projection, and contour-integral
//! methods. All solvers operate through the [`crate::nep::Nep`] compute
//! interface only, so every problem type and transformation works with
//! every solver.

mod beyn;
pub mod chebyshev;
pub(crate) mod krylov;
mod newton;
mod nlar;

pub use beyn::{beyn_contour, ContourSpec};
pub use chebyshev::{build_derivation_matrix, compute_y0, divided_difference, ChebyshevFrame};
pub use krylov::{iar, iar_chebyshev, ChebyshevStep};
pub use newton::{
    armijo_damp, augnewton, mslp, newtonqr, quasinewton, resinv, solve_k_eigenpairs,
    solve_k_eigenpairs_with, ArmijoResult, NewtonKind,
};
pub use nlar::nlar;

use crate::error::NepError;
use crate::linalg::{CVector, Complex64};
use crate::nep::Nep;

/// One eigenpair.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: Complex64,
    pub vector: CVector,
}

/// Nullspace-estimate starting vector: the right singular vector of
/// `M(lambda)` for the smallest singular value.
///
/// A much better start than a generic vector when `lambda` is already a
/// reasonable eigenvalue guess; in particular it breaks symmetries of the
/// problem that can trap single-vector Newton iterations in invariant
/// subspaces without nearby eigenvalues.
pub fn nullspace_start<N: Nep + ?Sized>(
    nep: &N,
    lambda: Complex64,
) -> Result<CVector, NepError> {
    let m = nep.compute_mder(lambda, 0)?;
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("svd with v_t");
    let idx = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .ok_or_else(|| NepError::eig_failed("empty problem"))?;
    Ok(vt.row(idx).adjoint())
}

/// What a solver produced.
///
/// Newton-type solvers return a single pair; Krylov-type solvers return
/// every converged pair. `history` is the per-iteration error trace as
/// recorded, which need not be monotone. `residuals` holds the final error
/// measure of each returned pair.
#[derive(Debug, Clone, Default)]
pub struct SolveOutcome {
    pub eigenpairs: Vec<Eigenpair>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Peak subspace dimension, for methods that grow a basis.
    pub basis_dim: Option<usize>,
}

impl SolveOutcome {
    /// The first eigenpair, for single-pair solvers.
    pub fn eigenpair(&self) -> Option<&Eigenpair> {
        self.eigenpairs.first()
    }
}
