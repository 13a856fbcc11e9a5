//! The NEP compute interface.
//!
//! A nonlinear eigenvalue problem is a matrix-valued analytic function
//! `M: C -> C^{n x n}`; the problem is to find `(lambda, v)` with
//! `M(lambda) v = 0`, `v != 0`. Rather than committing to one data
//! representation, problems expose up to three compute functions:
//!
//! * `compute_mder(lambda, k)` — the derivative matrix `M^(k)(lambda)`;
//! * `compute_mlincomb(lambda, V)` — the linear combination
//!   `sum_i M^(i-1)(lambda) v_i` (optionally with per-column coefficients);
//! * `compute_mm(S, V)` — the block residual `MM(S, V)`, which for a
//!   sum-of-products problem `M(lambda) = sum_i A_i f_i(lambda)` is
//!   `sum_i A_i V f_i(S)`.
//!
//! These are mathematically equivalent, and any one that is not provided
//! natively is derived from another one where a route exists, so all three
//! are always callable. The derivation routes are:
//!
//! * `mlincomb` from `mder` (direct summation) when `mder` is native,
//!   otherwise from `mm` via [`mlincomb_via_mm`];
//! * `mder` from `mm` via the bidiagonal construction applied to unit
//!   vectors, column by column ([`mder_via_mm`]);
//! * `mm` has no generic fallback (it would require choosing a contour);
//!   requesting it on a problem without a matrix-function route yields
//!   [`NepError::Capability`].

use std::sync::Arc;

use nalgebra::Dyn;

use crate::error::{NepError, SolverError};
use crate::linalg::{cplx, CMatrix, CVector, Complex64};

/// Which compute functions a problem implements natively.
///
/// `lin_solve` marks a problem that provides its own linear-solver
/// factorization; everything else goes through a dense LU of
/// `compute_mder(lambda, 0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capabilities {
    pub mder: bool,
    pub mlincomb: bool,
    pub mm: bool,
    pub lin_solve: bool,
}

impl Capabilities {
    /// At least one compute function is native.
    pub fn any_compute(&self) -> bool {
        self.mder || self.mlincomb || self.mm
    }

    /// A route to `compute_mder` exists.
    pub fn has_mder_route(&self) -> bool {
        self.mder || self.mm
    }

    /// A route to `compute_mlincomb` exists.
    pub fn has_mlincomb_route(&self) -> bool {
        self.mlincomb || self.mder || self.mm
    }
}

/// A nonlinear eigenvalue problem handle.
///
/// Implementors override the compute functions they can evaluate natively
/// and report them in [`Nep::capabilities`]; the remaining methods fall back
/// to derivation routes. A type that overrides the linear-combination
/// interface should override [`Nep::compute_mlincomb_scaled`] (the variant
/// with per-column coefficients); [`Nep::compute_mlincomb`] always forwards
/// to it with unit coefficients.
///
/// Handles are immutable after construction and safe to share across
/// threads for concurrent read-only evaluation.
pub trait Nep: Send + Sync {
    /// Problem dimension `n`.
    fn size(&self) -> usize;

    /// Which compute functions are native.
    fn capabilities(&self) -> Capabilities;

    /// `M^(k)(lambda)`.
    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        if self.capabilities().mm {
            mder_via_mm(self, lambda, k)
        } else {
            Err(NepError::capability(
                "compute_mder: no native implementation and no matrix-function route",
            ))
        }
    }

    /// `sum_i a_i M^(i-1)(lambda) v_i` for the columns `v_i` of `v`.
    ///
    /// `coeffs` must have one entry per column; terms with a zero
    /// coefficient are skipped.
    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        check_lincomb_shapes(self.size(), v, coeffs)?;
        let caps = self.capabilities();
        if caps.mder {
            let mut acc = CVector::zeros(self.size());
            for (i, &a) in coeffs.iter().enumerate() {
                if a == Complex64::default() {
                    continue;
                }
                let mk = self.compute_mder(lambda, i)?;
                acc += mk * (v.column(i) * a);
            }
            Ok(acc)
        } else if caps.mm {
            let scaled = scale_columns(v, coeffs);
            mlincomb_via_mm(self, lambda, &scaled)
        } else {
            Err(NepError::capability(
                "compute_mlincomb: no derivative or matrix-function route",
            ))
        }
    }

    /// `sum_i M^(i-1)(lambda) v_i` (unit coefficients).
    fn compute_mlincomb(&self, lambda: Complex64, v: &CMatrix) -> Result<CVector, NepError> {
        let ones = vec![cplx(1.0, 0.0); v.ncols()];
        self.compute_mlincomb_scaled(lambda, v, &ones)
    }

    /// The block residual `MM(S, V)`.
    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        let _ = (s, v);
        Err(NepError::capability(
            "compute_mm: no matrix-function route for this problem",
        ))
    }

    /// Factorize `M(lambda)` for repeated linear solves.
    fn factorize(&self, lambda: Complex64) -> Result<Factorization, NepError> {
        Factorization::from_matrix(lambda, self.compute_mder(lambda, 0)?)
    }
}

impl<N: Nep + ?Sized> Nep for &N {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }
    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        (**self).compute_mder(lambda, k)
    }
    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        (**self).compute_mlincomb_scaled(lambda, v, coeffs)
    }
    fn compute_mlincomb(&self, lambda: Complex64, v: &CMatrix) -> Result<CVector, NepError> {
        (**self).compute_mlincomb(lambda, v)
    }
    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        (**self).compute_mm(s, v)
    }
    fn factorize(&self, lambda: Complex64) -> Result<Factorization, NepError> {
        (**self).factorize(lambda)
    }
}

impl<N: Nep + ?Sized> Nep for Box<N> {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }
    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        (**self).compute_mder(lambda, k)
    }
    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        (**self).compute_mlincomb_scaled(lambda, v, coeffs)
    }
    fn compute_mlincomb(&self, lambda: Complex64, v: &CMatrix) -> Result<CVector, NepError> {
        (**self).compute_mlincomb(lambda, v)
    }
    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        (**self).compute_mm(s, v)
    }
    fn factorize(&self, lambda: Complex64) -> Result<Factorization, NepError> {
        (**self).factorize(lambda)
    }
}

fn check_lincomb_shapes(n: usize, v: &CMatrix, coeffs: &[Complex64]) -> Result<(), NepError> {
    if v.nrows() != n {
        return Err(NepError::dimension(format!(
            "compute_mlincomb: V has {} rows, problem dimension is {n}",
            v.nrows()
        )));
    }
    if v.ncols() == 0 {
        return Err(NepError::dimension("compute_mlincomb: V has no columns"));
    }
    if coeffs.len() != v.ncols() {
        return Err(NepError::dimension(format!(
            "compute_mlincomb: {} coefficients for {} columns",
            coeffs.len(),
            v.ncols()
        )));
    }
    Ok(())
}

fn scale_columns(v: &CMatrix, coeffs: &[Complex64]) -> CMatrix {
    let mut out = v.clone();
    for (j, &a) in coeffs.iter().enumerate() {
        for i in 0..out.nrows() {
            out[(i, j)] *= a;
        }
    }
    out
}

/// The `k x k` lower bidiagonal matrix with `lambda` on the diagonal and
/// `1, 2, ..., k-1` on the subdiagonal.
///
/// Writing it as `lambda I + N` with `N` nilpotent, `N^j e_1 = j! e_{j+1}`,
/// so for an analytic `f` the first column of `f` applied to this matrix is
/// the derivative column `(f(lambda), f'(lambda), ..., f^(k-1)(lambda))`.
/// This is what makes `MM(S, V) e_1` equal to the derivative linear
/// combination of the columns of `V`.
pub fn bidiagonal_derivative_matrix(lambda: Complex64, k: usize) -> CMatrix {
    let mut s = CMatrix::zeros(k, k);
    for i in 0..k {
        s[(i, i)] = lambda;
        if i + 1 < k {
            s[(i + 1, i)] = cplx((i + 1) as f64, 0.0);
        }
    }
    s
}

/// Evaluate `sum_i M^(i-1)(lambda) v_i` through the block residual:
/// `MM(S, V) e_1` with `S` the [`bidiagonal_derivative_matrix`].
///
/// Agrees with [`Nep::compute_mlincomb`] exactly in exact arithmetic; it is
/// the standard cross-check between the two interfaces.
pub fn mlincomb_via_mm<N: Nep + ?Sized>(
    nep: &N,
    lambda: Complex64,
    v: &CMatrix,
) -> Result<CVector, NepError> {
    let s = bidiagonal_derivative_matrix(lambda, v.ncols());
    Ok(nep.compute_mm(&s, v)?.column(0).into_owned())
}

/// Derive `M^(k)(lambda)` from the block residual, one unit vector at a
/// time: the last column of `V` is `e_j`, so `MM(S, V) e_1 = M^(k)(lambda) e_j`.
pub fn mder_via_mm<N: Nep + ?Sized>(
    nep: &N,
    lambda: Complex64,
    k: usize,
) -> Result<CMatrix, NepError> {
    let n = nep.size();
    let s = bidiagonal_derivative_matrix(lambda, k + 1);
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v = CMatrix::zeros(n, k + 1);
        v[(j, k)] = cplx(1.0, 0.0);
        let col = nep.compute_mm(&s, &v)?;
        out.set_column(j, &col.column(0));
    }
    Ok(out)
}

/// Action of `M^(order)(lambda)` on a single vector, through the
/// linear-combination interface.
pub fn mder_action<N: Nep + ?Sized>(
    nep: &N,
    lambda: Complex64,
    x: &CVector,
    order: usize,
) -> Result<CVector, NepError> {
    let n = nep.size();
    let mut v = CMatrix::zeros(n, order + 1);
    v.set_column(order, x);
    let mut coeffs = vec![Complex64::default(); order + 1];
    coeffs[order] = cplx(1.0, 0.0);
    nep.compute_mlincomb_scaled(lambda, &v, &coeffs)
}

/// A reusable factorization of `M(lambda)`.
///
/// `solve` applies `M(lambda)^{-1}`; the residual of a solve is bounded by
/// `O(kappa(M(lambda)) * eps) * ||b||`, i.e. it is backward stable but the
/// forward error grows with the conditioning of `M(lambda)`. Near-singular
/// matrices are rejected at construction with [`NepError::SingularSystem`],
/// which is informative: the shift is at or very near an eigenvalue.
pub struct Factorization {
    lambda: Complex64,
    lu: nalgebra::linalg::LU<Complex64, Dyn, Dyn>,
}

impl Factorization {
    /// Factorize an explicitly assembled `M(lambda)`.
    pub fn from_matrix(lambda: Complex64, m: CMatrix) -> Result<Self, NepError> {
        let n = m.nrows();
        let lu = m.lu();
        let diag = lu.u().diagonal().map(|z| z.norm());
        let dmax = diag.iter().cloned().fold(0.0f64, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmax == 0.0 || dmin <= (n as f64) * f64::EPSILON * dmax {
            return Err(NepError::SingularSystem { lambda });
        }
        Ok(Factorization { lambda, lu })
    }

    /// The shift this factorization was computed at.
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Solve `M(lambda) x = b`.
    pub fn solve(&self, b: &CVector) -> Result<CVector, NepError> {
        self.lu.solve(b).ok_or(NepError::SingularSystem {
            lambda: self.lambda,
        })
    }

    /// Solve with a matrix right-hand side.
    pub fn solve_mat(&self, b: &CMatrix) -> Result<CMatrix, NepError> {
        self.lu.solve(b).ok_or(NepError::SingularSystem {
            lambda: self.lambda,
        })
    }
}

/// How solvers measure the error of a candidate eigenpair.
#[derive(Clone, Default)]
pub enum ErrMeasure {
    /// Relative residual norm `||M(lambda) v|| / ||v||`; infinite only for
    /// `v = 0`. Invariant under scaling of `v`.
    #[default]
    Residual,
    /// User-supplied measure of `(lambda, v)`.
    Custom(Arc<dyn Fn(Complex64, &CVector) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ErrMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrMeasure::Residual => f.write_str("ErrMeasure::Residual"),
            ErrMeasure::Custom(_) => f.write_str("ErrMeasure::Custom(..)"),
        }
    }
}

impl ErrMeasure {
    /// Evaluate the measure for `(lambda, v)` on `nep`.
    pub fn evaluate<N: Nep + ?Sized>(
        &self,
        nep: &N,
        lambda: Complex64,
        v: &CVector,
    ) -> Result<f64, NepError> {
        match self {
            ErrMeasure::Residual => {
                let vnorm = v.norm();
                if vnorm == 0.0 {
                    return Ok(f64::INFINITY);
                }
                let mv = nep.compute_mlincomb(lambda, &CMatrix::from_columns(&[v.clone()]))?;
                Ok(mv.norm() / vnorm)
            }
            ErrMeasure::Custom(f) => Ok(f(lambda, v)),
        }
    }

    /// Like [`ErrMeasure::evaluate`], mapping evaluation failures (domain
    /// errors during a line search, say) to `+inf`.
    pub fn evaluate_or_inf<N: Nep + ?Sized>(
        &self,
        nep: &N,
        lambda: Complex64,
        v: &CVector,
    ) -> f64 {
        self.evaluate(nep, lambda, v).unwrap_or(f64::INFINITY)
    }
}

/// The default error measure: the relative residual norm.
pub fn default_errmeasure<N: Nep + ?Sized>(_nep: &N) -> ErrMeasure {
    ErrMeasure::Residual
}

/// Iteration log sink: called with (iteration index, error estimate).
pub type LogSink = Arc<dyn Fn(usize, f64) + Send + Sync>;

/// Options shared by all solvers.
#[derive(Clone)]
pub struct SolveOptions {
    /// Convergence tolerance on the error measure.
    pub tol: f64,
    /// Iteration cap; `None` uses the solver's own default (100 for the
    /// Newton family, 30 for the Krylov family).
    pub maxit: Option<usize>,
    /// Target point sigma.
    pub target: Complex64,
    /// Starting vector; all-ones when absent.
    pub v0: Option<CVector>,
    /// Error measure for convergence tests.
    pub errmeasure: ErrMeasure,
    /// For solvers that return several pairs: stop after this many have
    /// converged (`None`: run to the iteration cap and return everything).
    pub num_eigs: Option<usize>,
    /// Seed for any randomized ingredient (contour probing). Fixed seed,
    /// fixed output.
    pub seed: u64,
    /// Per-iteration log sink.
    pub logger: Option<LogSink>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            maxit: None,
            target: Complex64::default(),
            v0: None,
            errmeasure: ErrMeasure::Residual,
            num_eigs: None,
            seed: 1,
            logger: None,
        }
    }
}

impl std::fmt::Debug for SolveOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveOptions")
            .field("tol", &self.tol)
            .field("maxit", &self.maxit)
            .field("target", &self.target)
            .field("v0", &self.v0.as_ref().map(|v| v.len()))
            .field("errmeasure", &self.errmeasure)
            .field("num_eigs", &self.num_eigs)
            .field("seed", &self.seed)
            .finish()
    }
}

impl SolveOptions {
    /// Options with a given target point.
    pub fn with_target(target: Complex64) -> Self {
        SolveOptions {
            target,
            ..Default::default()
        }
    }

    /// Validate against a problem of dimension `n`.
    pub fn validate(&self, n: usize) -> Result<(), NepError> {
        if !(self.tol > 0.0) {
            return Err(NepError::invalid("tol must be positive"));
        }
        if self.maxit == Some(0) {
            return Err(NepError::invalid("maxit must be at least 1"));
        }
        if let Some(v0) = &self.v0 {
            if v0.len() != n {
                return Err(NepError::dimension(format!(
                    "v0 has length {}, problem dimension is {n}",
                    v0.len()
                )));
            }
        }
        Ok(())
    }

    /// The starting vector: `v0` if given, otherwise all ones.
    pub fn initial_vector(&self, n: usize) -> CVector {
        match &self.v0 {
            Some(v) => v.clone(),
            None => CVector::from_element(n, cplx(1.0, 0.0)),
        }
    }

    pub(crate) fn maxit_or(&self, default: usize) -> usize {
        self.maxit.unwrap_or(default)
    }

    pub(crate) fn log(&self, iteration: usize, error: f64) {
        if let Some(sink) = &self.logger {
            sink(iteration, error);
        }
    }
}

/// Solve the scalar Rayleigh functional equation `y^H M(lambda) x = 0` by
/// a damped Newton iteration started at `lambda0`.
///
/// The returned root satisfies `|y^H M(lambda) x| <= 1e-14 ||x|| ||y||`
/// (up to the attainable accuracy of the problem). Steps that increase the
/// residual are halved, at most ten times. After 50 iterations the best
/// iterate is reported inside [`SolverError::NoConvergence`].
pub fn compute_rf<N: Nep + ?Sized>(
    nep: &N,
    x: &CVector,
    y: &CVector,
    lambda0: Complex64,
) -> Result<Complex64, SolverError> {
    const TOL: f64 = 1e-14;
    const MAXIT: usize = 50;
    if x.norm() == 0.0 || y.norm() == 0.0 {
        return Err(NepError::invalid("compute_rf: x and y must be nonzero").into());
    }
    let scale = x.norm() * y.norm();
    let g = |lambda: Complex64| -> Result<Complex64, NepError> {
        let mx = mder_action(nep, lambda, x, 0)?;
        Ok(y.dotc(&mx))
    };
    let gprime = |lambda: Complex64| -> Result<Complex64, NepError> {
        let mx = mder_action(nep, lambda, x, 1)?;
        Ok(y.dotc(&mx))
    };

    let mut lambda = lambda0;
    let mut gval = g(lambda)?;
    let mut best = (lambda, gval.norm());
    for _ in 0..MAXIT {
        if gval.norm() <= TOL * scale {
            return Ok(lambda);
        }
        let gp = gprime(lambda)?;
        if gp.norm() == 0.0 {
            break;
        }
        let full = -gval / gp;
        // Halve the step while the residual grows.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=10 {
            let cand = lambda + full * cplx(step, 0.0);
            if let Ok(gc) = g(cand) {
                if gc.norm() < gval.norm() || step <= 2f64.powi(-10) {
                    accepted = Some((cand, gc));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, gc)) => {
                lambda = cand;
                gval = gc;
                if gval.norm() < best.1 {
                    best = (lambda, gval.norm());
                }
            }
            None => break,
        }
    }
    if gval.norm() <= TOL * scale {
        return Ok(lambda);
    }
    Err(SolverError::NoConvergence {
        iterations: MAXIT,
        best_error: best.1 / scale,
        outcome: Box::new(crate::solvers::SolveOutcome {
            eigenpairs: vec![crate::solvers::Eigenpair {
                lambda: best.0,
                vector: x.clone(),
            }],
            residuals: vec![best.1],
            iterations: MAXIT,
            history: vec![],
            basis_dim: None,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::types::{Dep, MatFun, Pep, Spmf};

    /// Restricts a problem to its block-residual interface, so the
    /// derivation routes can be tested in isolation.
    struct MmOnly<N>(N);

    impl<N: Nep> Nep for MmOnly<N> {
        fn size(&self) -> usize {
            self.0.size()
        }
        fn capabilities(&self) -> Capabilities {
            Capabilities {
                mm: true,
                ..Default::default()
            }
        }
        fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
            self.0.compute_mm(s, v)
        }
    }

    /// A problem with only the linear-combination interface.
    struct LincombOnly<N>(N);

    impl<N: Nep> Nep for LincombOnly<N> {
        fn size(&self) -> usize {
            self.0.size()
        }
        fn capabilities(&self) -> Capabilities {
            Capabilities {
                mlincomb: true,
                ..Default::default()
            }
        }
        fn compute_mlincomb_scaled(
            &self,
            lambda: Complex64,
            v: &CMatrix,
            coeffs: &[Complex64],
        ) -> Result<CVector, NepError> {
            self.0.compute_mlincomb_scaled(lambda, v, coeffs)
        }
    }

    fn sample_dep() -> Dep {
        let a0 = CMatrix::from_row_slice(
            3,
            3,
            &[
                cplx(0.2, 0.0),
                cplx(-0.7, 0.0),
                cplx(0.1, 0.0),
                cplx(0.4, 0.0),
                cplx(0.3, 0.0),
                cplx(-0.2, 0.0),
                cplx(0.0, 0.0),
                cplx(0.5, 0.0),
                cplx(-0.6, 0.0),
            ],
        );
        let a1 = CMatrix::from_fn(3, 3, |i, j| cplx(0.3 - 0.1 * (i + 2 * j) as f64, 0.0));
        Dep::new(a0, vec![(1.0, a1)]).unwrap()
    }

    fn sample_spmf() -> Spmf {
        let a1 = CMatrix::from_fn(3, 3, |i, j| cplx(0.4 * i as f64 - 0.2 * j as f64, 0.1));
        let a2 = CMatrix::from_fn(3, 3, |i, j| cplx(0.1 * (i * j) as f64, -0.3));
        Spmf::new(vec![a1, a2], vec![MatFun::exp(), MatFun::monomial(2)]).unwrap()
    }

    #[test]
    fn dep_value_at_zero_sums_constant_terms() {
        // -lambda I vanishes at 0, exp(0) = 1: M(0) = A0 + A1.
        let dep = sample_dep();
        let m = dep.compute_mder(Complex64::default(), 0).unwrap();
        let want = dep.a0() + &dep.delays()[0].1;
        assert!((m - want).norm() < 1e-15);
    }

    #[test]
    fn single_column_lincomb_is_matrix_action() {
        let dep = sample_dep();
        let z = cplx(0.3, -0.4);
        let v = CVector::from_fn(3, |i, _| cplx(1.0 + i as f64, 0.5));
        let via_lincomb = dep
            .compute_mlincomb(z, &CMatrix::from_columns(&[v.clone()]))
            .unwrap();
        let via_mder = dep.compute_mder(z, 0).unwrap() * &v;
        assert!((via_lincomb - via_mder).norm() < 1e-13);
    }

    #[test]
    fn bidiagonal_matrix_shape() {
        let s = bidiagonal_derivative_matrix(cplx(2.0, 1.0), 4);
        for i in 0..4 {
            assert_eq!(s[(i, i)], cplx(2.0, 1.0));
        }
        assert_eq!(s[(1, 0)], cplx(1.0, 0.0));
        assert_eq!(s[(2, 1)], cplx(2.0, 0.0));
        assert_eq!(s[(3, 2)], cplx(3.0, 0.0));
        assert_eq!(s[(0, 1)], Complex64::default());
    }

    #[test]
    fn mlincomb_via_mm_single_column() {
        let dep = sample_dep();
        let z = cplx(-0.2, 0.1);
        let v = CMatrix::from_fn(3, 1, |i, _| cplx(0.3 * i as f64 - 1.0, 0.2));
        let got = mlincomb_via_mm(&dep, z, &v).unwrap();
        let want = dep.compute_mder(z, 0).unwrap() * v.column(0);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn mlincomb_via_mm_two_columns_is_value_plus_derivative() {
        let pep = Pep::new(vec![
            CMatrix::from_fn(2, 2, |i, j| cplx((i + j) as f64, 0.0)),
            CMatrix::from_fn(2, 2, |i, j| cplx(1.0 - i as f64 * j as f64, 0.5)),
            identity(2),
        ])
        .unwrap();
        let z = cplx(0.7, -0.3);
        let v = CMatrix::from_fn(2, 2, |i, j| cplx(i as f64 + 1.0, j as f64));
        let got = mlincomb_via_mm(&pep, z, &v).unwrap();
        let want = pep.compute_mder(z, 0).unwrap() * v.column(0)
            + pep.compute_mder(z, 1).unwrap() * v.column(1);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn native_lincomb_matches_mm_route() {
        let spmf = sample_spmf();
        let z = cplx(0.3, 0.0);
        let v = CMatrix::from_fn(3, 4, |i, j| cplx(0.2 * (i + j) as f64 - 0.3, 0.1 * i as f64));
        let native = spmf.compute_mlincomb(z, &v).unwrap();
        let via_mm = mlincomb_via_mm(&spmf, z, &v).unwrap();
        assert!(
            (native.clone() - &via_mm).norm() <= 1e-10 * (1.0 + native.norm()),
            "{}",
            (native - via_mm).norm()
        );
    }

    #[test]
    fn mder_falls_back_through_block_residual() {
        let spmf = sample_spmf();
        let wrapped = MmOnly(spmf.clone());
        let z = cplx(0.4, 0.2);
        for k in 0..=4 {
            let native = spmf.compute_mder(z, k).unwrap();
            let derived = wrapped.compute_mder(z, k).unwrap();
            assert!(
                (native.clone() - &derived).norm() <= 1e-10 * (1.0 + native.norm()),
                "k = {k}"
            );
        }
    }

    #[test]
    fn lincomb_falls_back_through_block_residual() {
        let spmf = sample_spmf();
        let wrapped = MmOnly(spmf.clone());
        let z = cplx(-0.1, 0.3);
        let v = CMatrix::from_fn(3, 3, |i, j| cplx(i as f64 - j as f64, 0.4));
        let native = spmf.compute_mlincomb(z, &v).unwrap();
        let derived = wrapped.compute_mlincomb(z, &v).unwrap();
        assert!((native.clone() - &derived).norm() <= 1e-10 * (1.0 + native.norm()));
    }

    #[test]
    fn no_route_reports_capability_error() {
        let only = LincombOnly(sample_spmf());
        // Linear combinations still work...
        let v = CMatrix::from_fn(3, 2, |i, _| cplx(i as f64, 1.0));
        assert!(only.compute_mlincomb(cplx(0.1, 0.0), &v).is_ok());
        // ...but there is no route to the block residual or the derivative
        // matrix.
        let s = identity(2);
        let vv = CMatrix::zeros(3, 2);
        assert!(matches!(
            only.compute_mm(&s, &vv),
            Err(NepError::Capability(_))
        ));
        assert!(matches!(
            only.compute_mder(cplx(0.1, 0.0), 0),
            Err(NepError::Capability(_))
        ));
    }

    #[test]
    fn factorize_at_eigenvalue_reports_singular_system() {
        // Diagonal linear problem I*diag(1,2,3) - lambda I; 2 is an
        // eigenvalue.
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(2.0, 0.0),
            cplx(3.0, 0.0),
        ]));
        let pep = Pep::new(vec![a, identity(3) * cplx(-1.0, 0.0)]).unwrap();
        match pep.factorize(cplx(2.0, 0.0)) {
            Err(NepError::SingularSystem { lambda }) => {
                assert!((lambda - cplx(2.0, 0.0)).norm() < 1e-14)
            }
            Err(other) => panic!("expected SingularSystem, got {other:?}"),
            Ok(_) => panic!("expected SingularSystem, got a factorization"),
        }
    }

    #[test]
    fn factorize_solve_residual_is_small() {
        let dep = sample_dep();
        let z = cplx(-0.5, 0.0);
        let fact = dep.factorize(z).unwrap();
        let b = CVector::from_fn(3, |i, _| cplx(1.0 - i as f64, 0.7));
        let x = fact.solve(&b).unwrap();
        let r = dep.compute_mder(z, 0).unwrap() * x - &b;
        assert!(r.norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn rf_is_exact_for_scalar_linear_problem() {
        // M(lambda) = a - lambda: the Rayleigh functional root is a.
        let a = cplx(1.7, -0.4);
        let pep = Pep::new(vec![
            CMatrix::from_element(1, 1, a),
            CMatrix::from_element(1, 1, cplx(-1.0, 0.0)),
        ])
        .unwrap();
        let one = CVector::from_element(1, cplx(1.0, 0.0));
        for lambda0 in [Complex64::default(), cplx(10.0, 3.0)] {
            let root = compute_rf(&pep, &one, &one, lambda0).unwrap();
            assert!((root - a).norm() < 1e-12);
        }
    }

    #[test]
    fn rf_zeroes_the_bilinear_form_on_a_dep() {
        let dep = sample_dep();
        let x = CVector::from_element(3, cplx(1.0, 0.0));
        let root = compute_rf(&dep, &x, &x, Complex64::default()).unwrap();
        let g = x.dotc(&(dep.compute_mder(root, 0).unwrap() * &x));
        assert!(g.norm() < 1e-10 * x.norm() * x.norm());
    }

    #[test]
    fn errmeasure_scale_invariance_and_consistency() {
        let dep = sample_dep();
        let m = default_errmeasure(&dep);
        let z = cplx(0.2, 0.5);
        let v = CVector::from_fn(3, |i, _| cplx(0.5 * i as f64 + 0.1, -0.3));
        let e1 = m.evaluate(&dep, z, &v).unwrap();
        let e2 = m.evaluate(&dep, z, &(&v * cplx(10.0, 0.0))).unwrap();
        assert!((e1 - e2).abs() <= 1e-15 * e1.max(1.0));
        // Matches a direct recomputation.
        let direct = (dep.compute_mder(z, 0).unwrap() * &v).norm() / v.norm();
        assert!((e1 - direct).abs() <= 1e-14 * direct.max(1.0));
        // Zero vector measures as infinite.
        let zero = CVector::zeros(3);
        assert!(m.evaluate(&dep, z, &zero).unwrap().is_infinite());
    }

    #[test]
    fn solve_options_validation() {
        let mut opts = SolveOptions::default();
        assert!(opts.validate(4).is_ok());
        opts.tol = 0.0;
        assert!(opts.validate(4).is_err());
        opts.tol = 1e-10;
        opts.maxit = Some(0);
        assert!(opts.validate(4).is_err());
        opts.maxit = None;
        opts.v0 = Some(CVector::zeros(3));
        assert!(opts.validate(4).is_err());
    }
}
