//! Nonlinear eigenvalue problems: find `(lambda, v)` with `M(lambda) v = 0`
//! for a matrix-valued analytic function `M`.
//!
//! The crate is organized around a small compute interface
//! ([`nep::Nep`]): a problem exposes derivative evaluation, derivative
//! linear combinations, the block residual for matrix arguments, and
//! linear solves. Everything else is built on top of that interface:
//!
//! * [`types`] — concrete problem classes (matrix polynomials, delay
//!   problems, general sums of products of matrices and scalar functions)
//!   with specialized compute functions, plus a derivative-precomputing
//!   wrapper and a serialization schema;
//! * [`transforms`] — shift-and-scale, Möbius transformation, deflation of
//!   converged invariant pairs, and projection onto subspaces, each
//!   producing a new problem that works with every solver;
//! * [`solvers`] — Newton-type iterations (augmented Newton, residual
//!   inverse iteration, quasi-Newton, successive linear problems,
//!   Newton-QR), infinite Arnoldi in Taylor and Chebyshev bases, nonlinear
//!   Arnoldi, and a contour-integral method;
//! * [`gallery`] — deterministic benchmark problems and a Newton
//!   interpolation utility for building polynomial surrogates of matrix
//!   functions.
//!
//! ```
//! use nepsolve::gallery::{nep_gallery, GalleryParams};
//! use nepsolve::nep::SolveOptions;
//! use nepsolve::solvers::augnewton;
//!
//! let nep = nep_gallery("dep0", &GalleryParams::new()).unwrap();
//! let out = augnewton(&nep, &SolveOptions::default()).unwrap();
//! let pair = out.eigenpair().unwrap();
//! assert!(out.residuals[0] < 1e-12);
//! println!("eigenvalue {}", pair.lambda);
//! ```

pub mod error;
pub mod gallery;
pub mod linalg;
pub mod nep;
pub mod rng;
pub mod solvers;
pub mod transforms;
pub mod types;

pub use error::{NepError, SolverError};
pub use linalg::{CMatrix, CVector, Complex64};
pub use nep::{
    bidiagonal_derivative_matrix, compute_rf, default_errmeasure, mder_via_mm, mlincomb_via_mm,
    Capabilities, ErrMeasure, Factorization, Nep, SolveOptions,
};
pub use solvers::{nullspace_start, Eigenpair, SolveOutcome};
