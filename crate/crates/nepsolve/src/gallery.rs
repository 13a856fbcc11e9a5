//! Named benchmark problems and interpolation utilities.
//!
//! Every gallery constructor is deterministic: random data comes from the
//! documented [`SplitMix64`](crate::rng::SplitMix64) stream, so the same
//! name and parameters rebuild bit-identical matrices on any platform.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::NepError;
use crate::linalg::{cplx, identity, CMatrix, CVector, Complex64};
use crate::nep::{Capabilities, Nep};
use crate::rng::SplitMix64;
use crate::types::{Dep, MatFun, Pep, Spmf};

/// Parameter overrides for gallery constructors, as a key-value map.
pub type GalleryParams = HashMap<String, f64>;

/// The available gallery names.
pub const GALLERY_NAMES: [&str; 5] = ["dep0", "pep0", "neuron0", "sqrt_spmf", "spmf_5x5"];

/// A gallery problem: one of the concrete types, with conversion to
/// sum-of-products form always available.
#[derive(Debug, Clone)]
pub enum GalleryNep {
    Dep(Dep),
    Pep(Pep),
    Spmf(Spmf),
}

impl GalleryNep {
    /// The problem in sum-of-products form (used by the Chebyshev-basis
    /// solver).
    pub fn to_spmf(&self) -> Spmf {
        match self {
            GalleryNep::Dep(d) => d.to_spmf(),
            GalleryNep::Pep(p) => p.to_spmf(),
            GalleryNep::Spmf(s) => s.clone(),
        }
    }
}

impl Nep for GalleryNep {
    fn size(&self) -> usize {
        match self {
            GalleryNep::Dep(d) => d.size(),
            GalleryNep::Pep(p) => p.size(),
            GalleryNep::Spmf(s) => s.size(),
        }
    }

    fn capabilities(&self) -> Capabilities {
        match self {
            GalleryNep::Dep(d) => d.capabilities(),
            GalleryNep::Pep(p) => p.capabilities(),
            GalleryNep::Spmf(s) => s.capabilities(),
        }
    }

    fn compute_mder(&self, lambda: Complex64, k: usize) -> Result<CMatrix, NepError> {
        match self {
            GalleryNep::Dep(d) => d.compute_mder(lambda, k),
            GalleryNep::Pep(p) => p.compute_mder(lambda, k),
            GalleryNep::Spmf(s) => s.compute_mder(lambda, k),
        }
    }

    fn compute_mlincomb_scaled(
        &self,
        lambda: Complex64,
        v: &CMatrix,
        coeffs: &[Complex64],
    ) -> Result<CVector, NepError> {
        match self {
            GalleryNep::Dep(d) => d.compute_mlincomb_scaled(lambda, v, coeffs),
            GalleryNep::Pep(p) => p.compute_mlincomb_scaled(lambda, v, coeffs),
            GalleryNep::Spmf(s) => s.compute_mlincomb_scaled(lambda, v, coeffs),
        }
    }

    fn compute_mm(&self, s: &CMatrix, v: &CMatrix) -> Result<CMatrix, NepError> {
        match self {
            GalleryNep::Dep(d) => d.compute_mm(s, v),
            GalleryNep::Pep(p) => p.compute_mm(s, v),
            GalleryNep::Spmf(x) => x.compute_mm(s, v),
        }
    }
}

impl crate::solvers::ChebyshevStep for GalleryNep {
    fn chebyshev_stepper(
        &self,
        sigma: Complex64,
        maxit: usize,
    ) -> Result<
        (
            f64,
            Box<
                dyn FnMut(&CMatrix, &CMatrix, usize) -> Result<CVector, crate::SolverError>
                    + '_,
            >,
        ),
        crate::SolverError,
    > {
        match self {
            GalleryNep::Dep(d) => d.chebyshev_stepper(sigma, maxit),
            GalleryNep::Pep(p) => {
                let (alpha, boundary) =
                    crate::solvers::krylov::spmf_stepper_owned(p.to_spmf(), sigma, maxit)?;
                Ok((alpha, boundary))
            }
            GalleryNep::Spmf(s) => s.chebyshev_stepper(sigma, maxit),
        }
    }
}

fn param(params: &GalleryParams, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(params: &GalleryParams, allowed: &[&str]) -> Result<(), NepError> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(NepError::invalid(format!(
                "unknown parameter '{k}'; allowed: {}",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn random_matrix(rng: &mut SplitMix64, n: usize) -> CMatrix {
    // Row-major fill so the layout is part of the documented stream.
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = cplx(rng.next_symmetric(), 0.0);
        }
    }
    m
}

/// Build a named benchmark problem.
///
/// Recognized names and their parameters (all overridable through
/// `params`):
///
/// * `dep0` — single-delay problem with dense random `A0`, `A1` from the
///   documented generator. Parameters `n` (5), `seed` (0), `tau` (1).
/// * `pep0` — quadratic matrix polynomial with random coefficients.
///   Parameters `n` (5), `seed` (0).
/// * `neuron0` — the 2x2 two-neuron delay model
///   `M(lambda) = -lambda I + A0 + A1 e^{-tau1 lambda} + A2 e^{-tau2 lambda}
///   + A3 e^{-tau3 lambda}` with `A0 = -kappa I`, `A1 = [[0,0],[a2,0]]`,
///   `A2 = [[0,a1],[0,0]]`, `A3 = beta I`. Parameters `kappa` (0.5),
///   `beta` (-1), `a1` (1), `a2` (2.34), `tau1` (0.2), `tau2` (0.2),
///   `tau3` (1.5), the standard two-neuron demo constants.
/// * `sqrt_spmf` — small sum-of-products problem with a square-root term,
///   whose branch cut exercises domain-error paths. Parameters `n` (3),
///   `seed` (7).
/// * `spmf_5x5` — the fixed 5x5 three-term problem
///   `lambda A + e^lambda B + (1 + sqrt(lambda)) C` with `A` all ones,
///   `B = A + I`, `C` equal to `B` with the row order reversed. No
///   parameters.
pub fn nep_gallery(name: &str, params: &GalleryParams) -> Result<GalleryNep, NepError> {
    match name {
        "dep0" => {
            check_keys(params, &["n", "seed", "tau"])?;
            let n = param(params, "n", 5.0) as usize;
            let seed = param(params, "seed", 0.0) as u64;
            let tau = param(params, "tau", 1.0);
            let mut rng = SplitMix64::new(seed);
            let a0 = random_matrix(&mut rng, n);
            let a1 = random_matrix(&mut rng, n);
            Ok(GalleryNep::Dep(Dep::new(a0, vec![(tau, a1)])?))
        }
        "pep0" => {
            check_keys(params, &["n", "seed"])?;
            let n = param(params, "n", 5.0) as usize;
            let seed = param(params, "seed", 0.0) as u64;
            let mut rng = SplitMix64::new(seed);
            let coeffs = vec![
                random_matrix(&mut rng, n),
                random_matrix(&mut rng, n),
                random_matrix(&mut rng, n),
            ];
            Ok(GalleryNep::Pep(Pep::new(coeffs)?))
        }
        "neuron0" => {
            check_keys(
                params,
                &["kappa", "beta", "a1", "a2", "tau1", "tau2", "tau3"],
            )?;
            let kappa = param(params, "kappa", 0.5);
            let beta = param(params, "beta", -1.0);
            let a1 = param(params, "a1", 1.0);
            let a2 = param(params, "a2", 2.34);
            let tau1 = param(params, "tau1", 0.2);
            let tau2 = param(params, "tau2", 0.2);
            let tau3 = param(params, "tau3", 1.5);
            let a0 = identity(2) * cplx(-kappa, 0.0);
            let mut m1 = CMatrix::zeros(2, 2);
            m1[(1, 0)] = cplx(a2, 0.0);
            let mut m2 = CMatrix::zeros(2, 2);
            m2[(0, 1)] = cplx(a1, 0.0);
            let m3 = identity(2) * cplx(beta, 0.0);
            Ok(GalleryNep::Dep(Dep::new(
                a0,
                vec![(tau1, m1), (tau2, m2), (tau3, m3)],
            )?))
        }
        "sqrt_spmf" => {
            check_keys(params, &["n", "seed"])?;
            let n = param(params, "n", 3.0) as usize;
            let seed = param(params, "seed", 7.0) as u64;
            let mut rng = SplitMix64::new(seed);
            let a0 = random_matrix(&mut rng, n);
            let a1 = random_matrix(&mut rng, n);
            let a2 = random_matrix(&mut rng, n);
            Ok(GalleryNep::Spmf(Spmf::new(
                vec![a0, a1, a2],
                vec![MatFun::monomial(0), MatFun::monomial(1), MatFun::sqrt()],
            )?))
        }
        "spmf_5x5" => {
            check_keys(params, &[])?;
            let ones = CMatrix::from_element(5, 5, cplx(1.0, 0.0));
            let b = &ones + identity(5);
            // C is B with the row order reversed.
            let c = CMatrix::from_fn(5, 5, |i, j| b[(4 - i, j)]);
            Ok(GalleryNep::Spmf(Spmf::new(
                vec![ones, b, c],
                vec![MatFun::monomial(1), MatFun::exp(), MatFun::one_plus_sqrt()],
            )?))
        }
        other => Err(NepError::invalid(format!(
            "unknown gallery name '{other}'; valid names: {}",
            GALLERY_NAMES.join(", ")
        ))),
    }
}

/// The many-term benchmark: an `n x n` problem with `m` terms,
/// `f_1 = 1`, `f_2 = lambda` and `f_i = exp(i^{1/6} lambda)` for
/// `i >= 3` (1-based), with sparse random coefficient matrices (each entry
/// nonzero with probability `density`, value uniform in `[0, 1)`).
///
/// Derivative evaluation dominates the infinite Arnoldi iteration on this
/// problem, which is what the derivative-precomputing wrapper is for; not
/// part of the named gallery.
pub fn many_term_spmf(n: usize, m: usize, density: f64, seed: u64) -> Result<Spmf, NepError> {
    if m < 3 {
        return Err(NepError::invalid("many_term_spmf: need at least 3 terms"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut matrices = Vec::with_capacity(m);
    for _ in 0..m {
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if rng.next_f64() < density {
                    a[(i, j)] = cplx(rng.next_f64(), 0.0);
                }
            }
        }
        matrices.push(a);
    }
    let mut funs = Vec::with_capacity(m);
    funs.push(MatFun::monomial(0));
    funs.push(MatFun::monomial(1));
    for i in 3..=m {
        funs.push(MatFun::exp_scaled(cplx((i as f64).powf(1.0 / 6.0), 0.0)));
    }
    Spmf::new(matrices, funs)
}

/// A Newton-form polynomial interpolant with exact-arithmetic divided
/// differences.
///
/// The divided-difference table is computed in rational arithmetic (exact
/// for `f64` inputs) and rounded to double precision once, which keeps
/// round-off from compounding when many interpolation points are used.
/// The matrix evaluator applies the nested Newton form
/// `c_0 I + (S - x_0 I)(c_1 I + (S - x_1 I)(...))`, so the interpolant
/// can stand in for a matrix function that is not otherwise available.
#[derive(Debug, Clone)]
pub struct NewtonInterpolant {
    nodes: Vec<Complex64>,
    coefficients: Vec<Complex64>,
}

/// Interpolate `f` at the given distinct nodes.
pub fn newton_interp_matfun(
    f: impl Fn(Complex64) -> Complex64,
    nodes: &[Complex64],
) -> Result<NewtonInterpolant, NepError> {
    NewtonInterpolant::from_function(f, nodes)
}

type BigComplex = num_complex::Complex<BigRational>;

fn to_big(z: Complex64) -> Result<BigComplex, NepError> {
    let conv = |x: f64| {
        BigRational::from_float(x)
            .ok_or_else(|| NepError::invalid(format!("non-finite value {x} in interpolation")))
    };
    Ok(num_complex::Complex::new(conv(z.re)?, conv(z.im)?))
}

fn from_big(z: &BigComplex) -> Result<Complex64, NepError> {
    let conv = |x: &BigRational| {
        x.to_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| NepError::invalid("interpolation coefficient overflowed f64"))
    };
    Ok(cplx(conv(&z.re)?, conv(&z.im)?))
}

impl NewtonInterpolant {
    pub fn from_function(
        f: impl Fn(Complex64) -> Complex64,
        nodes: &[Complex64],
    ) -> Result<Self, NepError> {
        if nodes.len() < 2 {
            return Err(NepError::invalid("need at least 2 interpolation nodes"));
        }
        for (i, a) in nodes.iter().enumerate() {
            for b in nodes.iter().skip(i + 1) {
                if a == b {
                    return Err(NepError::invalid(format!("duplicate node {a}")));
                }
            }
        }
        let values: Vec<Complex64> = nodes.iter().map(|&x| f(x)).collect();
        for (x, v) in nodes.iter().zip(&values) {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(NepError::invalid(format!("f({x}) is not finite")));
            }
        }

        // Divided differences in exact rational arithmetic, rounded once.
        let m = nodes.len();
        let big_nodes: Vec<BigComplex> = nodes
            .iter()
            .map(|&x| to_big(x))
            .collect::<Result<_, _>>()?;
        let mut table: Vec<BigComplex> = values
            .iter()
            .map(|&v| to_big(v))
            .collect::<Result<_, _>>()?;
        for level in 1..m {
            for i in (level..m).rev() {
                let num = table[i].clone() - table[i - 1].clone();
                let den = big_nodes[i].clone() - big_nodes[i - level].clone();
                table[i] = num / den;
            }
        }
        let coefficients: Vec<Complex64> =
            table.iter().map(from_big).collect::<Result<_, _>>()?;

        let interp = NewtonInterpolant {
            nodes: nodes.to_vec(),
            coefficients,
        };
        // The rounded coefficients must still reproduce the data.
        for (&x, &v) in nodes.iter().zip(&values) {
            let p = interp.eval_scalar(x);
            if (p - v).norm() > 1e-12 * (1.0 + v.norm()) {
                return Err(NepError::invalid(
                    "interpolation is too ill-conditioned for double precision",
                ));
            }
        }
        Ok(interp)
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Newton coefficients `f[x_0], f[x_0, x_1], ...` after rounding.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Evaluate by the nested Newton form.
    pub fn eval_scalar(&self, z: Complex64) -> Complex64 {
        let m = self.coefficients.len();
        let mut p = self.coefficients[m - 1];
        for j in (0..m - 1).rev() {
            p = self.coefficients[j] + (z - self.nodes[j]) * p;
        }
        p
    }

    /// Evaluate at a matrix argument.
    pub fn eval_matrix(&self, s: &CMatrix) -> CMatrix {
        let n = s.nrows();
        let m = self.coefficients.len();
        let mut p = identity(n) * self.coefficients[m - 1];
        for j in (0..m - 1).rev() {
            p = identity(n) * self.coefficients[j] + (s - identity(n) * self.nodes[j]) * p;
        }
        p
    }

    /// Wrap as a scalar/matrix function pair usable in a sum-of-products
    /// problem.
    pub fn to_matfun(&self) -> MatFun {
        let a = Arc::new(self.clone());
        let b = Arc::clone(&a);
        MatFun::custom(
            move |z| Ok(a.eval_scalar(z)),
            move |s| Ok(b.eval_matrix(s)),
        )
    }
}
