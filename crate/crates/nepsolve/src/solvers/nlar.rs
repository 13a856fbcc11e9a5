//! Nonlinear Arnoldi: an expanding-subspace projection method.

use crate::error::{NepError, SolverError};
use crate::linalg::{self, cplx, CMatrix, CVector, Complex64};
use crate::nep::{mder_action, Nep, SolveOptions};
use crate::solvers::newton::mslp;
use crate::solvers::{Eigenpair, SolveOutcome};
use crate::transforms::{create_proj_nep, ProjectedNep};

const NLAR_DEFAULT_MAXIT: usize = 30;

/// Nonlinear Arnoldi method.
///
/// Projects the problem onto a growing orthonormal subspace, solves the
/// projected problem (which is again a problem of the same kind, so any
/// method applies; the dense successive-linear-problems iteration is used
/// here), and expands the subspace with the preconditioned, orthogonalized
/// residual `M(sigma)^{-1} M(lambda) u`. Converged pairs are locked and the
/// iteration continues until `num_eigs` pairs (default one) have been
/// found. The projected problem dimension never exceeds the iteration
/// count plus the initial dimension; once the subspace saturates at the
/// full dimension the projected solve is the dense problem itself.
pub fn nlar<N: Nep + ?Sized>(nep: &N, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(NLAR_DEFAULT_MAXIT);
    let sigma = opts.target;
    let want = opts.num_eigs.unwrap_or(1);
    let fact = nep.factorize(sigma)?;

    let v0 = opts.initial_vector(n);
    if v0.norm() == 0.0 {
        return Err(NepError::invalid("starting vector must be nonzero").into());
    }
    let mut basis = CMatrix::zeros(n, n.min(maxit + 1));
    let mut q = 0usize;
    append_column(&mut basis, &mut q, &(v0.clone() / cplx(v0.norm(), 0.0)));

    let mut found: Vec<Eigenpair> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut history = Vec::new();
    let mut peak_dim = 1usize;

    let mut inner_opts = SolveOptions {
        tol: (opts.tol * 1e-2).max(1e-15),
        maxit: Some(60),
        target: sigma,
        ..SolveOptions::default()
    };

    for it in 0..maxit {
        let active = basis.columns(0, q).into_owned();
        let mut proj = create_proj_nep(nep);
        proj.set_projection_matrices(active.clone(), active.clone())?;
        peak_dim = peak_dim.max(q);

        let (lambda, u) = match solve_projected(&proj, &mut inner_opts, &found) {
            Some(pair) => pair,
            None => {
                // Inner solve failed outright; widen the subspace with a
                // fresh direction and move on.
                expand_with_unit(&mut basis, &mut q, n);
                continue;
            }
        };
        let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &u);
        history.push(err);
        opts.log(it, err);

        if err < opts.tol {
            if found
                .iter()
                .all(|p| (p.lambda - lambda).norm() > 1e-6 * (1.0 + lambda.norm()))
            {
                found.push(Eigenpair { lambda, vector: u.clone() });
                residuals.push(err);
            }
            if found.len() >= want {
                return Ok(SolveOutcome {
                    eigenpairs: found,
                    residuals,
                    iterations: it + 1,
                    history,
                    basis_dim: Some(peak_dim),
                });
            }
        }

        if q >= basis.ncols() {
            break; // subspace saturated: the projected problem is dense already
        }
        // Preconditioned residual expansion.
        let r = mder_action(nep, lambda, &u, 0)?;
        let mut d = fact.solve(&r)?;
        let (_, norm) = linalg::orthogonalize(&basis, q, &mut d);
        if norm > 1e-12 {
            append_column(&mut basis, &mut q, &(d / cplx(norm, 0.0)));
        } else {
            expand_with_unit(&mut basis, &mut q, n);
        }
    }

    let best = residuals
        .iter()
        .copied()
        .chain(history.iter().copied())
        .fold(f64::INFINITY, f64::min);
    Err(SolverError::NoConvergence {
        iterations: maxit,
        best_error: best,
        outcome: Box::new(SolveOutcome {
            eigenpairs: found,
            residuals,
            iterations: maxit,
            history,
            basis_dim: Some(peak_dim),
        }),
    })
}

/// Inner solve on the projected problem, steering away from already locked
/// eigenvalues by retrying from jittered targets.
fn solve_projected<N: Nep + ?Sized>(
    proj: &ProjectedNep<&N>,
    inner_opts: &mut SolveOptions,
    found: &[Eigenpair],
) -> Option<(Complex64, CVector)> {
    let base_target = inner_opts.target;
    for attempt in 0..4 {
        if attempt > 0 {
            let scale = 0.05 * attempt as f64 * (1.0 + base_target.norm());
            inner_opts.target = base_target + cplx(scale, scale * 0.7);
        }
        let solved = mslp(proj, inner_opts);
        inner_opts.target = base_target;
        let (lambda, z) = match solved {
            Ok(out) => {
                let p = out.eigenpair().expect("single pair");
                (p.lambda, p.vector.clone())
            }
            Err(SolverError::NoConvergence { outcome, .. }) if !outcome.eigenpairs.is_empty() => {
                let p = &outcome.eigenpairs[0];
                (p.lambda, p.vector.clone())
            }
            Err(_) => continue,
        };
        let fresh = found
            .iter()
            .all(|p| (p.lambda - lambda).norm() > 1e-6 * (1.0 + lambda.norm()));
        if fresh || attempt == 3 {
            let u = proj.lift(&z);
            let norm = u.norm();
            if norm > 0.0 {
                return Some((lambda, u / cplx(norm, 0.0)));
            }
        }
    }
    None
}

fn append_column(basis: &mut CMatrix, q: &mut usize, v: &CVector) {
    basis.set_column(*q, v);
    *q += 1;
}

/// Deterministic fallback expansion: the first unit vector with a
/// substantial component outside the current subspace.
fn expand_with_unit(basis: &mut CMatrix, q: &mut usize, n: usize) {
    if *q >= basis.ncols() {
        return;
    }
    for i in 0..n {
        let mut e = CVector::zeros(n);
        e[i] = cplx(1.0, 0.0);
        let (_, norm) = linalg::orthogonalize(basis, *q, &mut e);
        if norm > 1e-8 {
            append_column(basis, q, &(e / cplx(norm, 0.0)));
            return;
        }
    }
}
