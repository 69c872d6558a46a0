//! Sparse symmetric matrices, conjugate gradients, and the small dense
//! kernels used by the Newton step (solve, singular values).

mod cg;
mod csr;
mod dense;

pub use cg::{
    cg_solve, pcg_solve, IdentityPreconditioner, JacobiPreconditioner, Preconditioner,
    SolverReport,
};
pub(crate) use cg::{dot, norm2};
pub use csr::{CsrMatrix, CsrRect};
pub use dense::{condition_number_2, dense_solve, singular_values, DenseMatrix, MAX_DENSE_DIM};

/// Default relative residual tolerance for finite element solves.
pub const DEFAULT_CG_TOL: f64 = 1e-12;
