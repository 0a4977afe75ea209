//! Additive Schwarz preconditioner `sum_i R_i^T A_i^{-1} R_i` with exact
//! local solves on principal minors and an optional coarse correction.

use rayon::prelude::*;

use crate::assembly::assemble_system;
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::factor::EnvelopeCholesky;
use crate::krylov::Preconditioner;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoarseSpace {
    /// One-level method.
    None,
    /// Coarse matrix assembled on the coarse mesh with coefficient `eta`.
    Assembled { eta: f64 },
    /// Coarse matrix `P^T A P`.
    Galerkin,
}

#[derive(Clone, Debug)]
struct LocalSolver {
    dofs: Vec<usize>,
    factor: EnvelopeCholesky,
}

#[derive(Clone, Debug)]
struct CoarseSolver {
    prolongation: CsrMatrix,
    factor: EnvelopeCholesky,
}

#[derive(Clone, Debug)]
pub struct SchwarzPreconditioner {
    n: usize,
    locals: Vec<LocalSolver>,
    coarse: Option<CoarseSolver>,
}

impl SchwarzPreconditioner {
    /// Factors every local principal minor of `a` (the reduced matrix over
    /// free DOFs) and the coarse matrix.
    pub fn build(a: &CsrMatrix, decomp: &Decomposition, coarse: CoarseSpace) -> Result<Self> {
        let n = a.nrows();
        if n != decomp.n_free() {
            return Err(Error::DimensionMismatch { expected: decomp.n_free(), actual: n });
        }
        let locals = decomp
            .subdomains()
            .par_iter()
            .filter(|s| !s.dofs.is_empty())
            .map(|s| {
                let factor = EnvelopeCholesky::factor(&a.principal_submatrix(&s.dofs))
                    .map_err(|e| remap_row(e, &s.dofs))?;
                Ok(LocalSolver { dofs: s.dofs.clone(), factor })
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse = match coarse {
            CoarseSpace::None => None,
            _ if decomp.coarse_free().is_empty() => None,
            CoarseSpace::Assembled { eta } => {
                let ah = assemble_system(decomp.coarse_mesh(), decomp.space(), eta)?
                    .principal_submatrix(decomp.coarse_free());
                Some(CoarseSolver { prolongation: decomp.prolongation().clone(), factor: EnvelopeCholesky::factor(&ah)? })
            }
            CoarseSpace::Galerkin => {
                let p = decomp.prolongation();
                let ah = p.transpose().matmul(&a.matmul(p)?)?;
                Some(CoarseSolver { prolongation: p.clone(), factor: EnvelopeCholesky::factor(&ah)? })
            }
        };
        if coarse.is_none() && !decomp.covers_all() {
            return Err(Error::Layout("local spaces do not cover every free DOF".into()));
        }
        Ok(Self { n, locals, coarse })
    }

    pub fn local_count(&self) -> usize {
        self.locals.len()
    }

    pub fn has_coarse(&self) -> bool {
        self.coarse.is_some()
    }
}

fn remap_row(e: Error, dofs: &[usize]) -> Error {
    match e {
        Error::NotPositiveDefinite { row, pivot } => Error::NotPositiveDefinite { row: dofs[row], pivot },
        other => other,
    }
}

impl Preconditioner for SchwarzPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n, "residual length");
        let parts: Vec<Vec<f64>> = self
            .locals
            .par_iter()
            .map(|l| {
                let rl: Vec<f64> = l.dofs.iter().map(|&i| r[i]).collect();
                l.factor.solve(&rl)
            })
            .collect();
        let mut z = vec![0.0; self.n];
        if let Some(c) = &self.coarse {
            let y = c.factor.solve(&c.prolongation.mul_transpose_vec(r));
            z = c.prolongation.mul_vec(&y);
        }
        // Fixed accumulation order keeps the result bit-reproducible.
        for (l, x) in self.locals.iter().zip(&parts) {
            for (&i, v) in l.dofs.iter().zip(x) {
                z[i] += v;
            }
        }
        z
    }
}
