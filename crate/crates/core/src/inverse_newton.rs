//! The boundary functional `F_h`, its Jacobian, and the damped Newton
//! reconstruction of the Robin coefficient.
//!
//! For a coefficient `a` with modes `phi_j`:
//!
//! ```text
//! F_{h,j}(a)          = int phi_j u_h z_h ds
//! (J_{F_h})_{ij}      = int phi_i (u_dot_j z_h + u_h z_dot_j) ds
//! ```
//!
//! where `u_dot_j`, `z_dot_j` are the linearized solves in direction `phi_j`.
//! One system matrix is assembled per coefficient and shared by the forward,
//! adjoint and linearized solves.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{
    Discretization, EdgeMass, FemField, OmegaMass, ProblemData, RobinOperator, SubdomainSpec,
};
use crate::robin_basis::{c1_distance, min_on_boundary, RobinParameter, DEFAULT_SAMPLES};
use crate::sparse_linalg::{dense_solve, dot, norm2, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `|x_k - x_{k-1}| <= tol` (Euclidean, coefficient space).
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Grid size for the sampled positivity check of each trial coefficient.
    pub positivity_samples: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iter: 300,
            max_backtracks: 40,
            positivity_samples: DEFAULT_SAMPLES,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("newton tol {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("newton max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One accepted Newton step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iteration number, starting at 1.
    pub k: usize,
    /// Coefficients after the step.
    pub x: Vec<f64>,
    /// `|F_h|` at the new iterate.
    pub res_norm: f64,
    /// Accepted step length `0.5^kappa`.
    pub step: f64,
    pub backtracks: usize,
    /// `C^1` distance to the reference coefficient, when one was supplied.
    pub c1_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonTrace {
    pub initial: Vec<f64>,
    pub initial_res_norm: f64,
    pub records: Vec<TraceRecord>,
}

impl NewtonTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV with header `k,res_norm,step,c1_error`; a missing error is `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,res_norm,step,c1_error\n");
        for r in &self.records {
            let err = r.c1_error.map_or_else(|| "NA".to_string(), |e| format!("{e:.16e}"));
            out.push_str(&format!("{},{:.16e},{:.16e},{}\n", r.k, r.res_norm, r.step, err));
        }
        out
    }

    /// Iterates `x_0, x_1, ...`.
    pub fn iterates(&self) -> impl Iterator<Item = &[f64]> {
        std::iter::once(self.initial.as_slice()).chain(self.records.iter().map(|r| r.x.as_slice()))
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub a_h: RobinParameter,
    pub iterations: usize,
    pub converged: bool,
    pub trace: NewtonTrace,
}

/// Everything `F_h` needs at one coefficient: the shared operator, the
/// forward and adjoint fields, and the residual itself.
pub struct Evaluation {
    pub a: RobinParameter,
    pub operator: RobinOperator,
    pub u: FemField,
    pub z: FemField,
    pub residual: Vec<f64>,
    mode_masses: Vec<EdgeMass>,
}

impl Evaluation {
    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }
}

/// Fixed data of one reconstruction: mesh, `(f, g)`, measurements on `omega`.
pub struct InverseProblem {
    disc: Discretization,
    load: Vec<f64>,
    q: FemField,
    omega: SubdomainSpec,
    omega_mass: OmegaMass,
}

impl InverseProblem {
    /// `q` must live on the reconstruction mesh (restrict fine data first).
    pub fn new(
        disc: Discretization,
        data: &ProblemData,
        q: FemField,
        omega: SubdomainSpec,
    ) -> Result<Self> {
        q.check_mesh(disc.n_per_side())?;
        let load = disc.load_vector(data);
        let omega_mass = disc.omega_mass(&omega);
        Ok(InverseProblem {
            disc,
            load,
            q,
            omega,
            omega_mass,
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn measurements(&self) -> &FemField {
        &self.q
    }

    pub fn omega(&self) -> &SubdomainSpec {
        &self.omega
    }

    pub fn omega_mass(&self) -> &OmegaMass {
        &self.omega_mass
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// Forward and adjoint solves plus `F_h(a)`.
    pub fn evaluate(&self, a: &RobinParameter) -> Result<Evaluation> {
        let operator = RobinOperator::new(&self.disc, a)?;
        let u = operator.forward(&self.load)?;
        let z = operator.adjoint(&self.omega_mass, &self.q, &u)?;
        let mode_masses: Vec<EdgeMass> = a
            .basis()
            .modes()
            .iter()
            .map(|m| self.disc.edge_mass(|t| m.eval(t)))
            .collect();
        let residual = mode_masses
            .iter()
            .map(|m| m.bilinear(u.values(), z.values()))
            .collect();
        Ok(Evaluation {
            a: a.clone(),
            operator,
            u,
            z,
            residual,
            mode_masses,
        })
    }

    pub fn residual(&self, a: &RobinParameter) -> Result<Vec<f64>> {
        Ok(self.evaluate(a)?.residual)
    }

    /// Column `j` of the Jacobian from the linearized solves `u_dot_j`,
    /// `z_dot_j` in direction `phi_j`.
    pub fn jacobian_column(&self, ev: &Evaluation, j: usize) -> Result<Vec<f64>> {
        let eta = &ev.mode_masses[j];
        let u_dot = ev.operator.u_dot(eta, &ev.u)?;
        let z_dot = ev.operator.z_dot(&self.omega_mass, eta, &u_dot, &ev.z)?;
        Ok(ev
            .mode_masses
            .iter()
            .map(|m| {
                m.bilinear(u_dot.values(), ev.z.values()) + m.bilinear(ev.u.values(), z_dot.values())
            })
            .collect())
    }

    /// Full `J x J` Jacobian.
    ///
    /// With `w_j = A^{-1} B_j u` the linearized fields are `u_dot_j = -w_j`
    /// and `z_dot_j = A^{-1} (M u_dot_j - B_j z)`, which folds the entries into
    ///
    /// ```text
    /// J_ij = -w_i^T M w_j - w_i^T B_j z - w_j^T B_i z
    /// ```
    ///
    /// so one solve per mode suffices and the result is symmetric by
    /// construction. The solves run in parallel; the result does not depend
    /// on scheduling.
    pub fn jacobian(&self, ev: &Evaluation) -> Result<DenseMatrix> {
        let dim = ev.a.dim();
        let w = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut rhs = vec![0.0; ev.u.values().len()];
                ev.mode_masses[j].apply_add(ev.u.values(), 1.0, &mut rhs);
                ev.operator.solve(&rhs).map(FemField::into_values)
            })
            .collect::<Result<Vec<_>>>()?;
        let mw: Vec<Vec<f64>> = w.iter().map(|wj| self.omega_mass.apply(wj)).collect();
        let bz: Vec<Vec<f64>> = ev.mode_masses.iter().map(|m| m.apply(ev.z.values())).collect();
        let mut jac = DenseMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = -dot(&w[i], &mw[j]) - dot(&w[i], &bz[j]) - dot(&w[j], &bz[i]);
                jac[(i, j)] = v;
                jac[(j, i)] = v;
            }
        }
        Ok(jac)
    }

    /// The Jacobian assembled column by column from the linearized solves.
    /// Twice the work of [`InverseProblem::jacobian`]; kept as a reference.
    pub fn jacobian_by_columns(&self, ev: &Evaluation) -> Result<DenseMatrix> {
        let cols = (0..ev.a.dim())
            .into_par_iter()
            .map(|j| self.jacobian_column(ev, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix::from_columns(&cols))
    }
}

/// `F_h(a)` on `disc`.
pub fn compute_f(
    disc: &Discretization,
    a: &RobinParameter,
    data: &ProblemData,
    q: &FemField,
    omega: &SubdomainSpec,
) -> Result<Vec<f64>> {
    InverseProblem::new(disc.clone(), data, q.clone(), omega.clone())?.residual(a)
}

/// Jacobian of `F_h` at `a`.
pub fn compute_jacobian(
    disc: &Discretization,
    a: &RobinParameter,
    data: &ProblemData,
    q: &FemField,
    omega: &SubdomainSpec,
) -> Result<DenseMatrix> {
    let problem = InverseProblem::new(disc.clone(), data, q.clone(), omega.clone())?;
    let ev = problem.evaluate(a)?;
    problem.jacobian(&ev)
}

/// Damped Newton iteration for `F_h(a) = 0` starting at `x0`.
///
/// Each step solves `J d = -F`, then takes the first `kappa = 0, 1, ...`
/// with `|F_h(x + 0.5^kappa d)| <= |F_h(x)|` and `x + 0.5^kappa d` positive
/// on the boundary. A Newton step already shorter than `tol` is taken in
/// full and ends the iteration. `reference`, when given, fills the `c1_error`
/// column of the trace.
pub fn newton_reconstruct(
    problem: &InverseProblem,
    x0: &RobinParameter,
    cfg: &NewtonConfig,
    reference: Option<&RobinParameter>,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let min = min_on_boundary(x0, cfg.positivity_samples);
    if !(min > 0.0) {
        return Err(Error::NonPositiveRobin { min });
    }
    let mut ev = problem.evaluate(x0)?;
    let mut trace = NewtonTrace {
        initial: x0.coeffs().to_vec(),
        initial_res_norm: ev.residual_norm(),
        records: Vec::new(),
    };
    let mut converged = false;

    for k in 1..=cfg.max_iter {
        let jac = problem.jacobian(&ev)?;
        let rhs: Vec<f64> = ev.residual.iter().map(|v| -v).collect();
        let d = match dense_solve(&jac, &rhs) {
            Ok(d) => d,
            Err(Error::Singular { .. }) | Err(Error::NonFinite(_)) => {
                return Err(Error::SingularJacobian { iteration: k })
            }
            Err(e) => return Err(e),
        };
        let d_norm = norm2(&d);
        let x = ev.a.coeffs().to_vec();
        let res = ev.residual_norm();

        let mut accepted = None;
        for kappa in 0..=cfg.max_backtracks {
            let step = 0.5f64.powi(kappa as i32);
            let cand: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let a_cand = ev.a.with_coeffs(cand)?;
            if !(min_on_boundary(&a_cand, cfg.positivity_samples) > 0.0) {
                continue;
            }
            let ev_cand = problem.evaluate(&a_cand)?;
            if d_norm <= cfg.tol || ev_cand.residual_norm() <= res {
                accepted = Some((ev_cand, step, kappa));
                break;
            }
        }
        let Some((ev_new, step, kappa)) = accepted else {
            return Err(Error::BacktrackExhausted {
                iteration: k,
                max_backtracks: cfg.max_backtracks,
            });
        };

        let moved = step * d_norm;
        trace.records.push(TraceRecord {
            k,
            x: ev_new.a.coeffs().to_vec(),
            res_norm: ev_new.residual_norm(),
            step,
            backtracks: kappa,
            c1_error: reference.map(|r| c1_distance(&ev_new.a, r)),
        });
        ev = ev_new;
        if moved <= cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(ReconstructionResult {
        iterations: trace.len(),
        a_h: ev.a,
        converged,
        trace,
    })
}

/// Ratios `e_{k+1} / e_k^2`, `e_k = |x_k - x_star|`, over the trailing run of
/// full Newton steps. Needs at least four full steps in that run.
pub fn local_quadratic_rate(trace: &NewtonTrace, x_star: &[f64]) -> Result<Vec<f64>> {
    let errors: Vec<f64> = trace
        .iterates()
        .map(|x| {
            x.iter()
                .zip(x_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let full_run = trace
        .records
        .iter()
        .rev()
        .take_while(|r| r.step == 1.0)
        .count();
    if full_run < 4 {
        return Err(Error::InsufficientTrace {
            needed: 4,
            available: full_run,
        });
    }
    let first = trace.records.len() - full_run;
    // transition i: iterate i -> i + 1, taken by record i
    Ok((first..trace.records.len())
        .filter(|&i| errors[i] > 0.0)
        .map(|i| errors[i + 1] / (errors[i] * errors[i]))
        .collect())
}

/// Fitted order `p` in `e_{k+1} = C e_k^p` over the last `transitions`
/// full-step transitions whose errors stay above `floor`.
///
/// `e_k = |x_k - x_star|`. Iterates within `floor` of `x_star` are dropped
/// because `x_star` itself is only known to about the stopping tolerance.
/// `p` and `ln C` come from a least-squares line through
/// `(ln e_k, ln e_{k+1})`.
pub fn estimated_order(
    trace: &NewtonTrace,
    x_star: &[f64],
    floor: f64,
    transitions: usize,
) -> Result<(f64, f64)> {
    let errors: Vec<f64> = trace
        .iterates()
        .map(|x| {
            x.iter()
                .zip(x_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let usable: Vec<(f64, f64)> = (0..trace.records.len())
        .filter(|&i| trace.records[i].step == 1.0 && errors[i + 1] > floor && errors[i] < 1.0)
        .map(|i| (errors[i].ln(), errors[i + 1].ln()))
        .collect();
    let needed = transitions.max(2);
    if usable.len() < needed {
        return Err(Error::InsufficientTrace {
            needed,
            available: usable.len(),
        });
    }
    let pts = &usable[usable.len() - needed..];
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let order = sxy / sxx;
    Ok((order, (my - order * mx).exp()))
}
