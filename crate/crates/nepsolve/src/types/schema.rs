//! On-disk problem schema.
//!
//! Problems serialize to a plain data description: a type tag, the
//! dimension, dense matrices as row-major re/im pairs, and delays or
//! built-in function tags. Problems whose functions are arbitrary closures
//! cannot be serialized; they are API-only.

use serde::{Deserialize, Serialize};

use crate::error::NepError;
use crate::linalg::{cplx, CMatrix};
use crate::types::{Dep, FunTag, MatFun, Pep, Spmf};

/// A dense complex matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSchema {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixSchema {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixSchema {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, NepError> {
        if self.data.len() != self.rows * self.cols {
            return Err(NepError::dimension(format!(
                "matrix schema claims {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            cplx(re, im)
        }))
    }
}

/// One delay term of a delay problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySchema {
    pub tau: f64,
    pub matrix: MatrixSchema,
}

/// Serializable description of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSchema {
    Dep {
        n: usize,
        a0: MatrixSchema,
        delays: Vec<DelaySchema>,
    },
    Pep {
        n: usize,
        coefficients: Vec<MatrixSchema>,
    },
    Spmf {
        n: usize,
        matrices: Vec<MatrixSchema>,
        functions: Vec<FunTag>,
    },
}

impl ProblemSchema {
    pub fn from_dep(dep: &Dep) -> Self {
        ProblemSchema::Dep {
            n: crate::nep::Nep::size(dep),
            a0: MatrixSchema::from_matrix(dep.a0()),
            delays: dep
                .delays()
                .iter()
                .map(|(tau, a)| DelaySchema {
                    tau: *tau,
                    matrix: MatrixSchema::from_matrix(a),
                })
                .collect(),
        }
    }

    pub fn from_pep(pep: &Pep) -> Self {
        ProblemSchema::Pep {
            n: crate::nep::Nep::size(pep),
            coefficients: pep
                .coefficients()
                .iter()
                .map(MatrixSchema::from_matrix)
                .collect(),
        }
    }

    /// Fails when any term function is a closure without a tag.
    pub fn from_spmf(spmf: &Spmf) -> Result<Self, NepError> {
        let functions = spmf
            .functions()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.tag().cloned().ok_or_else(|| {
                    NepError::invalid(format!(
                        "term {i} uses a custom closure; only built-in functions serialize"
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProblemSchema::Spmf {
            n: crate::nep::Nep::size(spmf),
            matrices: spmf
                .matrices()
                .iter()
                .map(MatrixSchema::from_matrix)
                .collect(),
            functions,
        })
    }
}

/// Concrete problems rebuilt from a schema.
#[derive(Debug, Clone)]
pub enum ProblemFromSchema {
    Dep(Dep),
    Pep(Pep),
    Spmf(Spmf),
}

impl TryFrom<&ProblemSchema> for ProblemFromSchema {
    type Error = NepError;

    fn try_from(schema: &ProblemSchema) -> Result<Self, NepError> {
        match schema {
            ProblemSchema::Dep { a0, delays, .. } => {
                let a0 = a0.to_matrix()?;
                let delays = delays
                    .iter()
                    .map(|d| Ok((d.tau, d.matrix.to_matrix()?)))
                    .collect::<Result<Vec<_>, NepError>>()?;
                Ok(ProblemFromSchema::Dep(Dep::new(a0, delays)?))
            }
            ProblemSchema::Pep { coefficients, .. } => {
                let coeffs = coefficients
                    .iter()
                    .map(|m| m.to_matrix())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ProblemFromSchema::Pep(Pep::new(coeffs)?))
            }
            ProblemSchema::Spmf {
                matrices,
                functions,
                ..
            } => {
                let mats = matrices
                    .iter()
                    .map(|m| m.to_matrix())
                    .collect::<Result<Vec<_>, _>>()?;
                let funs = functions.iter().map(MatFun::from_tag).collect();
                Ok(ProblemFromSchema::Spmf(Spmf::new(mats, funs)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nep::Nep;

    #[test]
    fn dep_round_trips_through_json() {
        let a0 = CMatrix::from_fn(2, 2, |i, j| cplx(i as f64, j as f64));
        let a1 = CMatrix::from_fn(2, 2, |i, j| cplx(1.0, (i * j) as f64));
        let dep = Dep::new(a0, vec![(0.5, a1)]).unwrap();
        let schema = ProblemSchema::from_dep(&dep);
        let json = serde_json::to_string(&schema).unwrap();
        let parsed: ProblemSchema = serde_json::from_str(&json).unwrap();
        let rebuilt = ProblemFromSchema::try_from(&parsed).unwrap();
        let ProblemFromSchema::Dep(d2) = rebuilt else {
            panic!("wrong variant");
        };
        let z = cplx(0.3, 0.4);
        assert_eq!(
            dep.compute_mder(z, 0).unwrap(),
            d2.compute_mder(z, 0).unwrap()
        );
    }

    #[test]
    fn custom_closure_refuses_to_serialize() {
        let f = MatFun::custom(|z| Ok(z), |s| Ok(s.clone()));
        let spmf = Spmf::new(vec![CMatrix::zeros(2, 2)], vec![f]).unwrap();
        assert!(ProblemSchema::from_spmf(&spmf).is_err());
    }
}
