//! Newton-type eigensolvers.
//!
//! All methods iterate on a single eigenpair; combine them with
//! [`solve_k_eigenpairs`] to compute several pairs without reconverging,
//! via deflation. Step damping by the Armijo rule makes the plain Newton
//! methods considerably more reliable on bad starting values.

use crate::error::{NepError, SolverError};
use crate::linalg::{self, cplx, CMatrix, CVector, Complex64};
use crate::nep::{compute_rf, mder_action, Nep, SolveOptions};
use crate::solvers::{Eigenpair, SolveOutcome};
use crate::transforms::effenberger_deflation;

const DEFAULT_MAXIT: usize = 100;

/// Result of the Armijo backtracking rule.
#[derive(Debug, Clone, Copy)]
pub struct ArmijoResult {
    /// Chosen step length in `(0, 1]`.
    pub step: f64,
    /// No candidate step reduced the error; the smallest step was taken.
    pub stagnated: bool,
}

/// Backtracking steplength rule: the largest step in
/// `{1, 1/2, 1/4, ..., 2^-10}` that reduces the error to at most
/// `(1 - c * step) * err0` with `c = 1e-4`. When no step qualifies, the
/// smallest one is returned with the stagnation flag set.
///
/// `err_at(step)` evaluates the error measure at the damped candidate
/// iterate.
pub fn armijo_damp(err0: f64, mut err_at: impl FnMut(f64) -> f64) -> ArmijoResult {
    const C: f64 = 1e-4;
    let mut step = 1.0;
    for _ in 0..=10 {
        if err_at(step) <= (1.0 - C * step) * err0 {
            return ArmijoResult {
                step,
                stagnated: false,
            };
        }
        step *= 0.5;
    }
    ArmijoResult {
        step: 2f64.powi(-10),
        stagnated: true,
    }
}

fn outcome_single(
    lambda: Complex64,
    vector: CVector,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
) -> SolveOutcome {
    SolveOutcome {
        eigenpairs: vec![Eigenpair { lambda, vector }],
        residuals: vec![residual],
        iterations,
        history,
        basis_dim: None,
    }
}

fn no_convergence(
    lambda: Complex64,
    vector: CVector,
    best_error: f64,
    iterations: usize,
    history: Vec<f64>,
) -> SolverError {
    SolverError::NoConvergence {
        iterations,
        best_error,
        outcome: Box::new(outcome_single(
            lambda, vector, best_error, iterations, history,
        )),
    }
}

/// Factorize with one perturb-and-retry on a singular shift.
fn factorize_with_retry<N: Nep + ?Sized>(
    nep: &N,
    lambda: &mut Complex64,
) -> Result<crate::nep::Factorization, NepError> {
    match nep.factorize(*lambda) {
        Ok(f) => Ok(f),
        Err(NepError::SingularSystem { .. }) => {
            // The shift sits on an eigenvalue; nudge it and try once more.
            *lambda += cplx(1e-8 * (1.0 + lambda.norm()), 0.0);
            nep.factorize(*lambda)
        }
        Err(e) => Err(e),
    }
}

/// Augmented Newton iteration (nonlinear inverse iteration) on the system
/// `[M(lambda) v; c^H v - 1] = 0`, with `c` fixed to the starting vector.
///
/// Each step factorizes `M(lambda)`, applies the derivative action
/// `M'(lambda) v`, and updates
/// `lambda <- lambda - 1 / (c^H u)`, `v <- u / (c^H u)` with
/// `u = M(lambda)^{-1} M'(lambda) v`, damped by the Armijo rule.
pub fn augnewton<N: Nep + ?Sized>(
    nep: &N,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(DEFAULT_MAXIT);
    let c = opts.initial_vector(n);
    if c.norm() == 0.0 {
        return Err(NepError::invalid("starting vector must be nonzero").into());
    }
    // Normalize so that c^H v = 1.
    let mut v = &c / c.dotc(&c);
    let mut lambda = opts.target;
    let mut history = Vec::new();
    let mut best = (lambda, v.clone(), f64::INFINITY);

    for it in 0..maxit {
        let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
        history.push(err);
        opts.log(it, err);
        if err < best.2 {
            best = (lambda, v.clone(), err);
        }
        if err < opts.tol {
            return Ok(outcome_single(lambda, normalized(&v), err, it, history));
        }

        // A step onto a domain boundary (a branch cut, say) ends the
        // iteration with the best iterate instead of a hard error.
        let fact = match factorize_with_retry(nep, &mut lambda) {
            Ok(f) => f,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let mpv = match mder_action(nep, lambda, &v, 1) {
            Ok(x) => x,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let u = fact.solve(&mpv)?;
        let d = c.dotc(&u);
        if d.norm() == 0.0 {
            return Err(no_convergence(lambda, v, err, it, history));
        }
        let dlambda = -cplx(1.0, 0.0) / d;
        let vnext = &u / d;
        let dv = &vnext - &v;

        let damp = armijo_damp(err, |s| {
            let lam = lambda + dlambda * cplx(s, 0.0);
            let cand = &v + &dv * cplx(s, 0.0);
            opts.errmeasure.evaluate_or_inf(nep, lam, &cand)
        });
        let s = cplx(damp.step, 0.0);
        lambda += dlambda * s;
        v += &dv * s;
    }
    let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
    history.push(err);
    if err < opts.tol {
        return Ok(outcome_single(lambda, normalized(&v), err, maxit, history));
    }
    let (bl, bv, be) = best;
    Err(no_convergence(bl, normalized(&bv), be, maxit, history))
}

/// Residual inverse iteration: the factorization is fixed at the target
/// `sigma`, the eigenvalue is updated through the scalar Rayleigh
/// functional, and the eigenvector through
/// `v <- v - M(sigma)^{-1} M(lambda) v`, normalized.
pub fn resinv<N: Nep + ?Sized>(nep: &N, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(DEFAULT_MAXIT);
    let sigma = opts.target;
    let fact = nep.factorize(sigma).map_err(|e| match e {
        NepError::SingularSystem { lambda } => SolverError::Nep(NepError::SingularShift { lambda }),
        other => SolverError::Nep(other),
    })?;
    let mut v = normalized(&opts.initial_vector(n));
    let mut lambda = sigma;
    let mut history = Vec::new();
    let mut best = (lambda, v.clone(), f64::INFINITY);

    for it in 0..maxit {
        // Eigenvalue update through the Rayleigh functional.
        lambda = match compute_rf(nep, &v, &v, lambda) {
            Ok(l) => l,
            Err(SolverError::NoConvergence { outcome, .. }) => outcome.eigenpairs[0].lambda,
            Err(e) => return Err(e),
        };
        let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
        history.push(err);
        opts.log(it, err);
        if err < best.2 {
            best = (lambda, v.clone(), err);
        }
        if err < opts.tol {
            return Ok(outcome_single(lambda, v, err, it, history));
        }
        // Residual correction through the frozen factorization.
        let r = match mder_action(nep, lambda, &v, 0) {
            Ok(x) => x,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let dv = fact.solve(&r)?;
        v = normalized(&(&v - dv));
    }
    let (bl, bv, be) = best;
    Err(no_convergence(bl, bv, be, maxit, history))
}

/// Quasi-Newton iteration: the augmented-Newton step with the linear-system
/// matrix frozen at `factorize(sigma)`. Exactly one factorization is
/// performed per run; only the eigenvalue updates use the derivative
/// action.
pub fn quasinewton<N: Nep + ?Sized>(
    nep: &N,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(DEFAULT_MAXIT);
    let sigma = opts.target;
    let fact = nep.factorize(sigma).map_err(|e| match e {
        NepError::SingularSystem { lambda } => SolverError::Nep(NepError::SingularShift { lambda }),
        other => SolverError::Nep(other),
    })?;
    let c = opts.initial_vector(n);
    if c.norm() == 0.0 {
        return Err(NepError::invalid("starting vector must be nonzero").into());
    }
    let mut v = &c / c.dotc(&c);
    let mut lambda = sigma;
    let mut history = Vec::new();
    let mut best = (lambda, v.clone(), f64::INFINITY);

    for it in 0..maxit {
        let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
        history.push(err);
        opts.log(it, err);
        if err < best.2 {
            best = (lambda, v.clone(), err);
        }
        if err < opts.tol {
            return Ok(outcome_single(lambda, normalized(&v), err, it, history));
        }

        let actions = mder_action(nep, lambda, &v, 0)
            .and_then(|mv| Ok((mv, mder_action(nep, lambda, &v, 1)?)));
        let (mv, mpv) = match actions {
            Ok(t) => t,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let w = fact.solve(&mv)?;
        let u = fact.solve(&mpv)?;
        let du = c.dotc(&u);
        if du.norm() == 0.0 {
            return Err(no_convergence(lambda, v, err, it, history));
        }
        let dlambda = -c.dotc(&w) / du;
        let dv = -(&w) - &u * dlambda;

        let damp = armijo_damp(err, |s| {
            let lam = lambda + dlambda * cplx(s, 0.0);
            let cand = &v + &dv * cplx(s, 0.0);
            opts.errmeasure.evaluate_or_inf(nep, lam, &cand)
        });
        let s = cplx(damp.step, 0.0);
        lambda += dlambda * s;
        v += &dv * s;
    }
    let (bl, bv, be) = best;
    Err(no_convergence(bl, normalized(&bv), be, maxit, history))
}

/// Method of successive linear problems: at each iterate the pencil
/// `M(lambda) w = theta M'(lambda) w` is solved densely and the
/// smallest-magnitude `theta` (ties broken by index order) updates
/// `lambda <- lambda - theta`.
pub fn mslp<N: Nep + ?Sized>(nep: &N, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(DEFAULT_MAXIT);
    let mut lambda = opts.target;
    let mut v = normalized(&opts.initial_vector(n));
    let mut history = Vec::new();
    let mut best = (lambda, v.clone(), f64::INFINITY);

    let mut err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
    for it in 0..maxit {
        history.push(err);
        opts.log(it, err);
        if err < best.2 {
            best = (lambda, v.clone(), err);
        }
        if err < opts.tol {
            return Ok(outcome_single(lambda, v, err, it, history));
        }

        let pencil = nep
            .compute_mder(lambda, 0)
            .and_then(|m0| Ok((m0, nep.compute_mder(lambda, 1)?)));
        let (m0, m1) = match pencil {
            Ok(t) => t,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let (theta, w) = match linalg::pencil_min_eig(&m0, &m1) {
            Ok(pair) => pair,
            Err(_) => {
                // Defective pencil: perturb once and retry.
                lambda += cplx(1e-8 * (1.0 + lambda.norm()), 0.0);
                let m0 = nep.compute_mder(lambda, 0)?;
                let m1 = nep.compute_mder(lambda, 1)?;
                linalg::pencil_min_eig(&m0, &m1)?
            }
        };
        lambda -= theta;
        v = normalized(&w);
        err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
    }
    history.push(err);
    if err < opts.tol {
        return Ok(outcome_single(lambda, v, err, maxit, history));
    }
    let (bl, bv, be) = best;
    Err(no_convergence(bl, bv, be, maxit, history))
}

/// Newton-QR iteration (Kublanovskaya): Newton's method on the last
/// diagonal entry of the column-pivoted QR factorization of `M(lambda)`,
/// with the eigenvector taken from the factorization's null-vector
/// estimate.
pub fn newtonqr<N: Nep + ?Sized>(
    nep: &N,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let n = nep.size();
    opts.validate(n)?;
    let maxit = opts.maxit_or(DEFAULT_MAXIT);
    let mut lambda = opts.target;
    let mut history = Vec::new();
    let mut best: (Complex64, Option<CVector>, f64) = (lambda, None, f64::INFINITY);

    for it in 0..maxit {
        let m = nep.compute_mder(lambda, 0)?;
        let (rnn, vtilde, y) = colpiv_null_estimate(&m)?;
        let v = normalized(&vtilde);
        let err = opts.errmeasure.evaluate_or_inf(nep, lambda, &v);
        history.push(err);
        opts.log(it, err);
        if err < best.2 {
            best = (lambda, Some(v.clone()), err);
        }
        if err < opts.tol {
            return Ok(outcome_single(lambda, v, err, it, history));
        }
        // g(lambda) = y^H M(lambda) vtilde has value rnn at the current
        // point; Newton's correction uses g'(lambda) = y^H M'(lambda) vtilde.
        let mpv = match mder_action(nep, lambda, &vtilde, 1) {
            Ok(x) => x,
            Err(e) if e.is_domain() => break,
            Err(e) => return Err(e.into()),
        };
        let gprime = y.dotc(&mpv);
        if gprime.norm() == 0.0 {
            break;
        }
        lambda -= rnn / gprime;
    }
    let (bl, bv, be) = best;
    let bv = bv.unwrap_or_else(|| normalized(&opts.initial_vector(n)));
    Err(no_convergence(bl, bv, be, maxit, history))
}

/// Column-pivoted QR of `m`; returns the last diagonal entry of `R`, the
/// (unnormalized) null-vector estimate, and the last column of `Q`.
///
/// With `M P = Q R`, solving `R11 w = -r12` for the leading block and
/// un-permuting `[w; 1]` gives a vector with
/// `y^H M v = R[n-1, n-1]` exactly for `y = Q e_n`.
fn colpiv_null_estimate(m: &CMatrix) -> Result<(Complex64, CVector, CVector), NepError> {
    let n = m.nrows();
    if n == 1 {
        return Ok((
            m[(0, 0)],
            CVector::from_element(1, cplx(1.0, 0.0)),
            CVector::from_element(1, cplx(1.0, 0.0)),
        ));
    }
    let qr = m.clone().col_piv_qr();
    let (q, r, p) = qr.unpack();
    let rnn = r[(n - 1, n - 1)];
    // Back-substitute R11 w = -r12 with clamped pivots, so that multiple
    // eigenvalues do not break the estimate.
    let rscale = r.norm().max(f64::MIN_POSITIVE);
    let clamp = f64::EPSILON * rscale;
    let mut w = CVector::zeros(n - 1);
    for i in (0..n - 1).rev() {
        let mut s = -r[(i, n - 1)];
        for j in i + 1..n - 1 {
            s -= r[(i, j)] * w[j];
        }
        let mut d = r[(i, i)];
        if d.norm() < clamp {
            d = cplx(clamp, 0.0);
        }
        w[i] = s / d;
    }
    let mut z = CVector::zeros(n);
    z.rows_mut(0, n - 1).copy_from(&w);
    z[n - 1] = cplx(1.0, 0.0);
    // Undo the column pivoting: v = P z.
    let mut v = z.clone();
    p.inv_permute_rows(&mut v);
    let y = q.column(n - 1).into_owned();
    Ok((rnn, v, y))
}

fn normalized(v: &CVector) -> CVector {
    let norm = v.norm();
    if norm == 0.0 {
        v.clone()
    } else {
        v / cplx(norm, 0.0)
    }
}

/// Which single-pair method drives [`solve_k_eigenpairs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NewtonKind {
    #[default]
    Augnewton,
    Quasinewton,
    Mslp,
    Resinv,
    Newtonqr,
}

fn run_newton<N: Nep + ?Sized>(
    kind: NewtonKind,
    nep: &N,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    match kind {
        NewtonKind::Augnewton => augnewton(nep, opts),
        NewtonKind::Quasinewton => quasinewton(nep, opts),
        NewtonKind::Mslp => mslp(nep, opts),
        NewtonKind::Resinv => resinv(nep, opts),
        NewtonKind::Newtonqr => newtonqr(nep, opts),
    }
}

/// Compute `k` eigenpairs one at a time, deflating each converged pair so
/// the next solve cannot reconverge to it.
///
/// The returned eigenvalues are pairwise separated by at least `1e-6`; a
/// solve that lands within that distance of an already computed eigenvalue
/// counts as a failure and is retried once from a perturbed target. On a
/// failure at index `i`, the pairs found so far are carried inside the
/// `NoConvergence` error.
pub fn solve_k_eigenpairs<N: Nep + ?Sized>(
    nep: &N,
    k: usize,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    solve_k_eigenpairs_with(nep, k, opts, NewtonKind::Augnewton)
}

/// [`solve_k_eigenpairs`] with an explicit choice of inner method.
pub fn solve_k_eigenpairs_with<N: Nep + ?Sized>(
    nep: &N,
    k: usize,
    opts: &SolveOptions,
    kind: NewtonKind,
) -> Result<SolveOutcome, SolverError> {
    const MIN_SEPARATION: f64 = 1e-6;
    if k == 0 {
        return Err(NepError::invalid("k must be at least 1").into());
    }
    let n = nep.size();
    opts.validate(n)?;

    let mut pairs: Vec<Eigenpair> = Vec::new();
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut invariant: Option<(CMatrix, CMatrix)> = None;

    // One attempt: solve (possibly deflated), and report the eigenpair in
    // parent coordinates together with the extended invariant pair.
    type Attempt = (Complex64, CVector, SolveOutcome, (CMatrix, CMatrix));
    let attempt = |invariant: &Option<(CMatrix, CMatrix)>,
                   attempt_opts: &SolveOptions|
     -> Result<Attempt, SolverError> {
        match invariant {
            None => {
                let out = run_newton(kind, nep, attempt_opts)?;
                let pair = out.eigenpair().expect("single pair").clone();
                let s0 = CMatrix::from_element(1, 1, pair.lambda);
                let v0 = CMatrix::from_columns(&[pair.vector.clone()]);
                Ok((pair.lambda, pair.vector, out, (s0, v0)))
            }
            Some((s0, v0)) => {
                let dnep = effenberger_deflation(&nep, s0.clone(), v0.clone())?;
                // Deflated problems have dimension n + p; drop any user
                // starting vector of the wrong length.
                let mut dopts = attempt_opts.clone();
                dopts.v0 = None;
                let out = run_newton(kind, &dnep, &dopts)?;
                let pair = out.eigenpair().expect("single pair").clone();
                let parent_v = normalized(&dnep.extract_parent_vector(pair.lambda, &pair.vector)?);
                let ext = dnep.extended_pair(pair.lambda, &pair.vector);
                Ok((pair.lambda, parent_v, out, ext))
            }
        }
    };

    while pairs.len() < k {
        let mut attempt_opts = opts.clone();
        let mut accepted = None;
        for retry in 0..2 {
            if retry == 1 {
                // Perturb the target before the one allowed retry.
                let bump = 1e-2 * (1.0 + attempt_opts.target.norm());
                attempt_opts.target += cplx(bump, bump);
            }
            let (lambda, vector, out, extension) = match attempt(&invariant, &attempt_opts) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let parent_err = opts.errmeasure.evaluate_or_inf(nep, lambda, &vector);
            let separated = pairs
                .iter()
                .all(|p| (p.lambda - lambda).norm() > MIN_SEPARATION);
            if parent_err < opts.tol.max(1e-10) && separated {
                accepted = Some((lambda, vector, out, extension));
                break;
            }
        }
        match accepted {
            Some((lambda, vector, out, extension)) => {
                iterations += out.iterations;
                history.extend(out.history.iter().copied());
                residuals.push(opts.errmeasure.evaluate_or_inf(nep, lambda, &vector));
                pairs.push(Eigenpair { lambda, vector });
                invariant = Some(extension);
            }
            None => {
                let best = residuals.last().copied().unwrap_or(f64::INFINITY);
                return Err(SolverError::NoConvergence {
                    iterations,
                    best_error: best,
                    outcome: Box::new(SolveOutcome {
                        eigenpairs: pairs,
                        residuals,
                        iterations,
                        history,
                        basis_dim: None,
                    }),
                });
            }
        }
    }

    Ok(SolveOutcome {
        eigenpairs: pairs,
        residuals,
        iterations,
        history,
        basis_dim: None,
    })
}
