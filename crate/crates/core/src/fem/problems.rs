use super::multigrid::MultigridPreconditioner;
use super::{Discretization, EdgeMass, FemField, OmegaMass, ProblemData, SubdomainSpec};
use crate::error::{Error, Result};
use crate::robin_basis::{min_on_boundary, RobinParameter, DEFAULT_SAMPLES};
use crate::sparse_linalg::{
    pcg_solve, CsrMatrix, JacobiPreconditioner, Preconditioner, SolverReport, DEFAULT_CG_TOL,
};

/// Meshes this fine or coarser are always solved through the multigrid path
/// (which degenerates to a direct solve).
const DIRECT_MAX_N: usize = 32;

#[derive(Debug, Clone)]
enum OperatorPreconditioner {
    Multigrid(MultigridPreconditioner),
    Jacobi(JacobiPreconditioner),
}

impl Preconditioner for OperatorPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            OperatorPreconditioner::Multigrid(m) => m.apply(r, z),
            OperatorPreconditioner::Jacobi(j) => j.apply(r, z),
        }
    }
}

/// The assembled form `b(., .)` for one Robin coefficient together with its
/// preconditioner. Assemble once, then run any number of solves against it.
#[derive(Debug, Clone)]
pub struct RobinOperator {
    n: usize,
    matrix: CsrMatrix,
    precond: OperatorPreconditioner,
    tol: f64,
}

impl RobinOperator {
    pub fn new(disc: &Discretization, a: &RobinParameter) -> Result<Self> {
        let matrix = assemble_system(disc, a)?;
        let n = disc.n_per_side();
        let precond = if !disc.transfers().is_empty() || n <= DIRECT_MAX_N {
            OperatorPreconditioner::Multigrid(MultigridPreconditioner::new(
                &matrix,
                disc.transfers(),
            )?)
        } else {
            OperatorPreconditioner::Jacobi(JacobiPreconditioner::new(&matrix))
        };
        Ok(RobinOperator {
            n,
            matrix,
            precond,
            tol: DEFAULT_CG_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn n_per_side(&self) -> usize {
        self.n
    }

    pub fn solve_with_report(&self, rhs: &[f64]) -> Result<(FemField, SolverReport)> {
        let max_iter = 10 * self.matrix.dim();
        let (x, report) = pcg_solve(&self.matrix, rhs, None, &self.precond, self.tol, max_iter)?;
        Ok((FemField::new(self.n, x)?, report))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<FemField> {
        self.solve_with_report(rhs).map(|r| r.0)
    }

    /// `b(u_h, v) = l_{f,g}(v)` with a precomputed load vector.
    pub fn forward(&self, load: &[f64]) -> Result<FemField> {
        self.solve(load)
    }

    /// `b(z_h, v) = -int 1_omega (q - u_h) v dx`.
    pub fn adjoint(&self, omega: &OmegaMass, q: &FemField, u: &FemField) -> Result<FemField> {
        q.check_mesh(self.n)?;
        u.check_mesh(self.n)?;
        let mismatch = q.sub(u)?;
        let mut rhs = omega.apply(mismatch.values());
        rhs.iter_mut().for_each(|v| *v = -*v);
        self.solve(&rhs)
    }

    /// `b(u_dot, v) = -int eta u_h v ds`, with `eta_mass` the boundary mass of `eta`.
    pub fn u_dot(&self, eta_mass: &EdgeMass, u: &FemField) -> Result<FemField> {
        u.check_mesh(self.n)?;
        check_edge_mass(eta_mass, self.n)?;
        let mut rhs = vec![0.0; u.values().len()];
        eta_mass.apply_add(u.values(), -1.0, &mut rhs);
        self.solve(&rhs)
    }

    /// `b(z_dot, v) = int 1_omega u_dot v dx - int eta z_h v ds`.
    pub fn z_dot(
        &self,
        omega: &OmegaMass,
        eta_mass: &EdgeMass,
        u_dot: &FemField,
        z: &FemField,
    ) -> Result<FemField> {
        u_dot.check_mesh(self.n)?;
        z.check_mesh(self.n)?;
        check_edge_mass(eta_mass, self.n)?;
        let mut rhs = omega.apply(u_dot.values());
        eta_mass.apply_add(z.values(), -1.0, &mut rhs);
        self.solve(&rhs)
    }
}

fn check_edge_mass(m: &EdgeMass, n: usize) -> Result<()> {
    if m.n_per_side() != n {
        return Err(Error::MeshMismatch {
            expected: n,
            found: m.n_per_side(),
        });
    }
    Ok(())
}

fn check_positive(a: &RobinParameter) -> Result<()> {
    let min = min_on_boundary(a, DEFAULT_SAMPLES);
    if !(min > 0.0) {
        return Err(Error::NonPositiveRobin { min });
    }
    Ok(())
}

/// Stiffness plus Robin boundary mass; rejects coefficients that are not
/// positive on the boundary.
pub fn assemble_system(disc: &Discretization, a: &RobinParameter) -> Result<CsrMatrix> {
    check_positive(a)?;
    Ok(disc.system_matrix(a))
}

pub fn assemble_load_fg(disc: &Discretization, data: &ProblemData) -> Vec<f64> {
    disc.load_vector(data)
}

pub fn solve_forward(
    disc: &Discretization,
    a: &RobinParameter,
    data: &ProblemData,
) -> Result<FemField> {
    RobinOperator::new(disc, a)?.forward(&disc.load_vector(data))
}

pub fn solve_adjoint(
    disc: &Discretization,
    a: &RobinParameter,
    q: &FemField,
    u: &FemField,
    omega: &SubdomainSpec,
) -> Result<FemField> {
    let n = disc.n_per_side();
    q.check_mesh(n)?;
    u.check_mesh(n)?;
    RobinOperator::new(disc, a)?.adjoint(&disc.omega_mass(omega), q, u)
}

pub fn solve_u_dot(
    disc: &Discretization,
    a: &RobinParameter,
    eta: &RobinParameter,
    u: &FemField,
) -> Result<FemField> {
    u.check_mesh(disc.n_per_side())?;
    RobinOperator::new(disc, a)?.u_dot(&disc.robin_mass(eta), u)
}

pub fn solve_z_dot(
    disc: &Discretization,
    a: &RobinParameter,
    eta: &RobinParameter,
    u_dot: &FemField,
    z: &FemField,
    omega: &SubdomainSpec,
) -> Result<FemField> {
    let n = disc.n_per_side();
    u_dot.check_mesh(n)?;
    z.check_mesh(n)?;
    RobinOperator::new(disc, a)?.z_dot(&disc.omega_mass(omega), &disc.robin_mass(eta), u_dot, z)
}

/// Nodal restriction from a nested fine mesh (`N_fine = k N_coarse`, `k >= 2`).
pub fn restrict_fine_to_coarse(fine: &FemField, n_coarse: usize) -> Result<FemField> {
    let nf = fine.n_per_side();
    if n_coarse < 2 || nf % n_coarse != 0 || nf / n_coarse < 2 {
        return Err(Error::NotNested {
            fine: nf,
            coarse: n_coarse,
        });
    }
    let k = nf / n_coarse;
    let mut values = Vec::with_capacity((n_coarse + 1) * (n_coarse + 1));
    for j in 0..=n_coarse {
        for i in 0..=n_coarse {
            values.push(fine.value_at_node(k * i, k * j));
        }
    }
    FemField::new(n_coarse, values)
}
