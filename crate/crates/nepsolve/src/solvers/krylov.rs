//! Infinite Arnoldi methods.
//!
//! The nonlinear problem is traded for a linear operator acting on vector
//! polynomials: apply the operator `j` times to a constant polynomial and
//! the iterate has degree `j`, so the Krylov basis is a growing block
//! matrix (column `j` holds a polynomial of degree `j` as stacked
//! coefficient blocks). One step integrates the polynomial and closes it
//! with a boundary block obtained from one linear solve at the target.
//! The operator's eigenvalues are `1 / (lambda - sigma)` over the
//! eigenvalues `lambda` of the problem, so Ritz values map back as
//! `lambda = sigma + 1 / mu`, and Ritz vectors are evaluated at the origin
//! to recover eigenvector approximations.

use crate::error::{NepError, SolverError};
use crate::linalg::{self, cplx, complexify, CMatrix, CVector, Complex64};
use crate::nep::{Nep, SolveOptions};
use crate::solvers::chebyshev::{integration_matrix, weighted_term_sum, ChebyshevFrame};
use crate::solvers::{Eigenpair, SolveOutcome};
use crate::types::{Dep, Spmf};

const KRYLOV_DEFAULT_MAXIT: usize = 30;
const BREAKDOWN_TOL: f64 = 1e-14;
const CHECK_EVERY: usize = 5;

struct RitzPair {
    lambda: Complex64,
    vector: CVector,
    error: f64,
}

/// Columns `0..blocks` of the stacked vector `w`, as an `n x blocks` matrix.
fn unstack(w: &CVector, n: usize, blocks: usize) -> CMatrix {
    CMatrix::from_fn(n, blocks, |i, b| w[b * n + i])
}

fn normalized(v: &CVector) -> CVector {
    let norm = v.norm();
    if norm == 0.0 {
        v.clone()
    } else {
        v / cplx(norm, 0.0)
    }
}

/// Shared driver: structured Arnoldi with a per-method expansion step and
/// eigenvector extraction. `alpha` is the spectral scale of the operator:
/// Ritz values map back as `lambda = sigma + alpha / mu`.
fn infinite_arnoldi<N, Step, Extract>(
    nep: &N,
    opts: &SolveOptions,
    alpha: Complex64,
    mut step: Step,
    extract: Extract,
) -> Result<SolveOutcome, SolverError>
where
    N: Nep + ?Sized,
    Step: FnMut(&CMatrix, usize) -> Result<CMatrix, SolverError>,
    Extract: Fn(&CVector, usize) -> CVector,
{
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(KRYLOV_DEFAULT_MAXIT);
    let sigma = opts.target;

    let v0 = opts.initial_vector(n);
    if v0.norm() == 0.0 {
        return Err(NepError::invalid("starting vector must be nonzero").into());
    }

    let rows = n * (maxit + 1);
    let mut basis = CMatrix::zeros(rows, maxit + 1);
    {
        let scaled = normalized(&v0);
        for i in 0..n {
            basis[(i, 0)] = scaled[i];
        }
    }
    let mut h = CMatrix::zeros(maxit + 1, maxit);
    let mut history = Vec::new();
    let mut completed = 0usize;

    let ritz_at = |basis: &CMatrix,
                   h: &CMatrix,
                   j: usize|
     -> Result<Vec<RitzPair>, NepError> {
        let hj = h.view((0, 0), (j, j)).into_owned();
        let (mus, zs) = linalg::eig(&hj)?;
        let mut order: Vec<usize> = (0..j).collect();
        order.sort_by(|&a, &b| mus[b].norm().total_cmp(&mus[a].norm()));
        let mut out = Vec::with_capacity(j);
        for idx in order {
            let mu = mus[idx];
            if mu.norm() < 1e-300 {
                continue;
            }
            let lambda = sigma + alpha / mu;
            let z = zs.column(idx).into_owned();
            let full = basis.columns(0, j) * z;
            let v = normalized(&extract(&full, j));
            let error = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
            out.push(RitzPair {
                lambda,
                vector: v,
                error,
            });
        }
        Ok(out)
    };

    let converged_of = |pairs: &[RitzPair], tol: f64| -> Vec<(Complex64, CVector, f64)> {
        let mut kept: Vec<(Complex64, CVector, f64)> = Vec::new();
        for p in pairs {
            if !(p.error < tol) {
                continue;
            }
            // Keep one copy of each eigenvalue (better-converged wins; the
            // list is unsorted, so replace on improvement).
            match kept
                .iter_mut()
                .find(|(l, _, _)| (*l - p.lambda).norm() <= 1e-10 * (1.0 + p.lambda.norm()))
            {
                Some(slot) => {
                    if p.error < slot.2 {
                        *slot = (p.lambda, p.vector.clone(), p.error);
                    }
                }
                None => kept.push((p.lambda, p.vector.clone(), p.error)),
            }
        }
        kept.sort_by(|a, b| (a.0 - sigma).norm().total_cmp(&(b.0 - sigma).norm()));
        kept
    };

    for j in 1..=maxit {
        let x = unstack(&basis.column(j - 1).into_owned(), n, j);
        let y = step(&x, j)?;
        debug_assert_eq!(y.ncols(), j + 1);

        let mut w = CVector::zeros(rows);
        for b in 0..j + 1 {
            for i in 0..n {
                w[b * n + i] = y[(i, b)];
            }
        }
        let (coeffs, beta) = linalg::orthogonalize(&basis, j, &mut w);
        for i in 0..j {
            h[(i, j - 1)] = coeffs[i];
        }
        h[(j, j - 1)] = cplx(beta, 0.0);
        completed = j;
        if beta < BREAKDOWN_TOL {
            break;
        }
        let wn = &w / cplx(beta, 0.0);
        basis.set_column(j, &wn);

        // Periodic convergence check, only when an eigenpair budget makes
        // early termination possible.
        if let Some(want) = opts.num_eigs {
            if j % CHECK_EVERY == 0 {
                let pairs = ritz_at(&basis, &h, j)?;
                let conv = converged_of(&pairs, opts.tol);
                let best = pairs
                    .iter()
                    .map(|p| p.error)
                    .fold(f64::INFINITY, f64::min);
                history.push(best);
                opts.log(j, best);
                if conv.len() >= want {
                    break;
                }
            }
        }
    }

    let pairs = ritz_at(&basis, &h, completed)?;
    let best = pairs.iter().map(|p| p.error).fold(f64::INFINITY, f64::min);
    history.push(best);
    opts.log(completed, best);
    let conv = converged_of(&pairs, opts.tol);

    let enough = match opts.num_eigs {
        Some(want) => conv.len() >= want,
        None => !conv.is_empty(),
    };
    let outcome = |list: Vec<(Complex64, CVector, f64)>| SolveOutcome {
        residuals: list.iter().map(|t| t.2).collect(),
        eigenpairs: list
            .into_iter()
            .map(|(lambda, vector, _)| Eigenpair { lambda, vector })
            .collect(),
        iterations: completed,
        history: history.clone(),
        basis_dim: Some(completed),
    };
    if enough {
        Ok(outcome(conv))
    } else {
        // Return every Ritz pair with its error, so the caller can inspect
        // how far the iteration got.
        let all: Vec<(Complex64, CVector, f64)> = pairs
            .into_iter()
            .map(|p| (p.lambda, p.vector, p.error))
            .collect();
        Err(SolverError::NoConvergence {
            iterations: completed,
            best_error: best,
            outcome: Box::new(outcome(all)),
        })
    }
}

/// Infinite Arnoldi, Taylor basis.
///
/// Each expansion divides the coefficient blocks (integration in the
/// monomial basis), applies the derivative linear combination at the
/// target, and closes the new polynomial with one linear solve:
/// `y_0 = -M(sigma)^{-1} sum_{i>=1} M^(i)(sigma) y_i`.
pub fn iar<N: Nep + ?Sized>(nep: &N, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    let fact = nep.factorize(opts.target)?;
    let step = |x: &CMatrix, j: usize| -> Result<CMatrix, SolverError> {
        let mut y = CMatrix::zeros(n, j + 1);
        for i in 0..j {
            let scaled = x.column(i) / cplx((i + 1) as f64, 0.0);
            y.set_column(i + 1, &scaled);
        }
        let mut coeffs = vec![cplx(1.0, 0.0); j + 1];
        coeffs[0] = Complex64::default();
        let z = nep.compute_mlincomb_scaled(opts.target, &y, &coeffs)?;
        let y0 = -fact.solve(&z)?;
        y.set_column(0, &y0);
        Ok(y)
    };
    let extract = |w: &CVector, _j: usize| w.rows(0, n).into_owned();
    infinite_arnoldi(nep, opts, cplx(1.0, 0.0), step, extract)
}

/// Pick the spectral scale for the Chebyshev variant and produce the
/// per-term coefficient matrices `b~_i(sigma I + alpha D_N)`.
///
/// The Krylov iteration is scale invariant (the operator for scale
/// `alpha` is similar to `alpha` times the unscaled one, and the constant
/// starting polynomial is fixed by the similarity), so `alpha` is free to
/// choose — but the coefficient matrices are alternating series in the
/// derivation matrix and grow exponentially with `alpha * ||D_N||`,
/// losing all accuracy to cancellation. Starting from `alpha = 1`, the
/// scale is halved until the series majorant
/// `sum_k |f^(k+1)(sigma)| alpha^(k+1) ||D^k|| / (k+1)!` exceeds the norm
/// of the actually computed matrix by less than a fixed cancellation
/// budget.
fn chebyshev_scale(
    spmf: &Spmf,
    sigma: Complex64,
    maxit: usize,
) -> Result<(f64, ChebyshevFrame, Vec<CMatrix>), SolverError> {
    const PREFILTER: f64 = 1e8;
    const CANCEL_BUDGET: f64 = 1e4;
    let dreal = crate::solvers::chebyshev::build_derivation_matrix(maxit);
    let d = complexify(&dreal);
    let mut dnorms = Vec::with_capacity(maxit + 1);
    let mut power = CMatrix::identity(maxit + 1, maxit + 1);
    dnorms.push(1.0);
    for _ in 0..maxit {
        power = &power * &d;
        dnorms.push(power.norm());
    }
    let mut dervs: Vec<Vec<f64>> = Vec::new();
    for (i, f) in spmf.functions().iter().enumerate() {
        let col = f
            .derivative_column(sigma, maxit + 2)
            .map_err(|e| NepError::matrix_function(i, e))?;
        dervs.push(col.iter().map(|z| z.norm()).collect());
    }
    let majorant = |alpha: f64, col: &[f64]| -> f64 {
        let mut total = 0.0;
        let mut weight = alpha; // alpha^{k+1} / (k+1)!
        for (k, &g) in dnorms.iter().enumerate().take(maxit + 1) {
            total += col[k + 1] * weight * g;
            weight *= alpha / (k + 2) as f64;
            if !total.is_finite() {
                return f64::INFINITY;
            }
        }
        total
    };

    let mut alpha = 1.0f64;
    for _ in 0..60 {
        let worst = dervs
            .iter()
            .map(|col| majorant(alpha, col))
            .fold(0.0f64, f64::max);
        if worst > PREFILTER {
            alpha *= 0.5;
            continue;
        }
        let frame = ChebyshevFrame::new(maxit, sigma, cplx(alpha, 0.0))?;
        let b = frame.b_matrices(spmf)?;
        let cancel_ok = dervs.iter().zip(&b).all(|(col, bi)| {
            majorant(alpha, col) <= CANCEL_BUDGET * bi.norm().max(f64::MIN_POSITIVE)
        });
        if cancel_ok {
            return Ok((alpha, frame, b));
        }
        alpha *= 0.5;
    }
    let frame = ChebyshevFrame::new(maxit, sigma, cplx(alpha, 0.0))?;
    let b = frame.b_matrices(spmf)?;
    Ok((alpha, frame, b))
}

/// Problems the Chebyshev-basis infinite Arnoldi can run on: they supply
/// the spectral scale and the boundary-block computation for one
/// expansion step.
pub trait ChebyshevStep: Nep {
    /// The scale `alpha` and the boundary closure
    /// `(X, Y, j) -> y_0`, where `X` (`n x j`) holds the current iterate,
    /// `Y` (`n x (j+1)`) the integrated blocks with a zero constant block,
    /// and the result is the new constant block.
    #[allow(clippy::type_complexity)]
    fn chebyshev_stepper(
        &self,
        sigma: Complex64,
        maxit: usize,
    ) -> Result<
        (
            f64,
            Box<dyn FnMut(&CMatrix, &CMatrix, usize) -> Result<CVector, SolverError> + '_>,
        ),
        SolverError,
    >;
}

/// Boundary stepper for a sum-of-products problem, owning its data.
pub(crate) fn spmf_stepper_owned(
    spmf: Spmf,
    sigma: Complex64,
    maxit: usize,
) -> Result<
    (
        f64,
        Box<dyn FnMut(&CMatrix, &CMatrix, usize) -> Result<CVector, SolverError>>,
    ),
    SolverError,
> {
    let n = Nep::size(&spmf);
    let fact = spmf.factorize(sigma)?;
    let (alpha, frame, b_full) = chebyshev_scale(&spmf, sigma, maxit.max(1))?;
    let theta_full = frame.theta0().clone();
    let boundary = move |x: &CMatrix, y: &CMatrix, j: usize| -> Result<CVector, SolverError> {
        let mut xpad = CMatrix::zeros(n, j + 1);
        xpad.view_mut((0, 0), (n, j)).copy_from(x);
        let theta = theta_full.rows(0, j + 1).into_owned();
        let b_sliced: Vec<CMatrix> = b_full
            .iter()
            .map(|b| b.view((0, 0), (j + 1, j + 1)).into_owned())
            .collect();
        let t = weighted_term_sum(&spmf, &xpad, &b_sliced, &theta);
        Ok(fact.solve(&t)? - y * &theta)
    };
    Ok((alpha, Box::new(boundary)))
}

impl ChebyshevStep for Spmf {
    fn chebyshev_stepper(
        &self,
        sigma: Complex64,
        maxit: usize,
    ) -> Result<
        (
            f64,
            Box<dyn FnMut(&CMatrix, &CMatrix, usize) -> Result<CVector, SolverError> + '_>,
        ),
        SolverError,
    > {
        let (alpha, boundary) = spmf_stepper_owned(self.clone(), sigma, maxit)?;
        Ok((alpha, boundary))
    }
}

impl ChebyshevStep for Dep {
    fn chebyshev_stepper(
        &self,
        sigma: Complex64,
        _maxit: usize,
    ) -> Result<
        (
            f64,
            Box<dyn FnMut(&CMatrix, &CMatrix, usize) -> Result<CVector, SolverError> + '_>,
        ),
        SolverError,
    > {
        // For a delay problem the boundary condition
        // `[M~(d/dtheta) y](0) = 0` turns the exponential terms into shift
        // operators: the scaled delays become evaluation points of the
        // polynomial, which is exact and stable at any frame size. The
        // scale puts every delay inside the Chebyshev interval.
        let fact = self.factorize(sigma)?;
        let tau_max = self
            .delays()
            .iter()
            .map(|(tau, _)| *tau)
            .fold(0.0f64, f64::max);
        let alpha = if tau_max > 1.0 { 1.0 / tau_max } else { 1.0 };
        let shifted_a0 = {
            let mut m = self.a0().clone();
            for i in 0..m.nrows() {
                m[(i, i)] -= sigma;
            }
            m
        };
        let boundary = move |x: &CMatrix, y: &CMatrix, j: usize| -> Result<CVector, SolverError> {
            // t = alpha x(0) - (A0 - sigma I) y(0) - sum_i A_i e^{-tau_i sigma} y(-alpha tau_i)
            let x0 = x * chebyshev_values_at(j, 0.0);
            let y0 = y * chebyshev_values_at(j + 1, 0.0);
            let mut t = x0 * cplx(alpha, 0.0) - &shifted_a0 * y0;
            for (tau, a) in self.delays() {
                let ytau = y * chebyshev_values_at(j + 1, -alpha * tau);
                t -= a * ytau * (-sigma * *tau).exp();
            }
            Ok(fact.solve(&t)?)
        };
        Ok((alpha, Box::new(boundary)))
    }
}

/// `(T_0(theta), ..., T_{k-1}(theta))` by the three-term recurrence.
fn chebyshev_values_at(k: usize, theta: f64) -> CVector {
    let mut v = CVector::zeros(k);
    if k == 0 {
        return v;
    }
    v[0] = cplx(1.0, 0.0);
    if k > 1 {
        v[1] = cplx(theta, 0.0);
    }
    for j in 2..k {
        v[j] = cplx(2.0 * theta, 0.0) * v[j - 1] - v[j - 2];
    }
    v
}

/// Infinite Arnoldi, Chebyshev basis.
///
/// The integration step uses the Chebyshev integration operator; the
/// boundary block depends on the problem structure. Delay problems get the
/// shift-operator formula (polynomial evaluation at the scaled delay
/// points — stable at any iteration count). Sum-of-products problems use
/// the divided-difference coefficient matrices `b~_i(D_N)` of
/// [`crate::solvers::chebyshev::compute_y0`], precomputed once at full
/// size and sliced as the basis grows; that route is reliable for
/// eigenvalues in a target-local region whose size shrinks with the
/// derivative growth rate of the term functions.
pub fn iar_chebyshev<N: ChebyshevStep + ?Sized>(
    nep: &N,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(KRYLOV_DEFAULT_MAXIT);
    let (alpha_scale, mut boundary) = nep.chebyshev_stepper(opts.target, maxit)?;
    let alpha = cplx(alpha_scale, 0.0);
    let l_full = complexify(&integration_matrix(maxit + 1));
    let theta_full = crate::solvers::chebyshev::theta_at_zero(maxit);

    let step = |x: &CMatrix, j: usize| -> Result<CMatrix, SolverError> {
        let mut y = CMatrix::zeros(n, j + 1);
        let lj = l_full.view((0, 0), (j, j));
        let integrated = x * lj;
        y.view_mut((0, 1), (n, j)).copy_from(&integrated);
        let y0 = boundary(x, &y, j)?;
        y.set_column(0, &y0);
        Ok(y)
    };
    let extract = move |w: &CVector, j: usize| {
        let blocks = unstack(w, n, j);
        &blocks * theta_full.rows(0, j).into_owned()
    };
    infinite_arnoldi(nep, opts, alpha, step, extract)
}
