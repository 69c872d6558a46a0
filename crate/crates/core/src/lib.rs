//! Finite-element Newton reconstruction of a Robin boundary coefficient.
//!
//! Given the solution `u` of
//!
//! ```text
//! Delta u = f in Omega = [0, 1]^2,   d_nu u + a u = g on the boundary,
//! ```
//!
//! measured only on an interior subdomain `omega`, the crate recovers the
//! coefficient `a` from a finite trigonometric space by driving the boundary
//! functional `F_h(a)_j = int phi_j u_h z_h ds` to zero with a damped Newton
//! method, where `z_h` solves an adjoint problem loaded by the mismatch on
//! `omega`.
//!
//! Modules, bottom-up:
//!
//! - [`mesh`]: structured triangulation and boundary arc-length parametrization
//! - [`quadrature`]: triangle and Gauss-Legendre edge rules
//! - [`sparse_linalg`]: CSR matrices, conjugate gradients, dense kernels
//! - [`robin_basis`]: the coefficient space, norms, positivity
//! - [`fem`]: assembly and the forward / adjoint / linearized solves
//! - [`inverse_newton`]: `F_h`, its Jacobian, and the Newton reconstruction
//! - [`experiments`]: convergence, noise, subspace and conditioning studies
//! - [`cli`]: configuration, file formats and the command implementations

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod inverse_newton;
pub mod mesh;
pub mod quadrature;
pub mod robin_basis;
pub mod sparse_linalg;

pub use error::{Error, Result};
pub use fem::{Discretization, FemField, ProblemData, SubdomainSpec};
pub use inverse_newton::{newton_reconstruct, InverseProblem, NewtonConfig, ReconstructionResult};
pub use mesh::Mesh;
pub use robin_basis::{Basis, BasisSpec, RobinParameter};
