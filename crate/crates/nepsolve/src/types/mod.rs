//! Concrete problem types with specialized compute functions.

mod dep;
mod matfun;
mod pep;
mod schema;
mod spmf;
mod sum;

pub use dep::Dep;
pub use matfun::{FunTag, MatFun};
pub use pep::Pep;
pub use schema::{DelaySchema, MatrixSchema, ProblemFromSchema, ProblemSchema};
pub use spmf::{make_derspmf, DerSpmf, Spmf};
pub use sum::SumNep;
