//! End-to-end studies: convergence in `h`, noisy data, truncated coefficient
//! spaces and Jacobian conditioning. Each study returns plain rows and has a
//! matching CSV writer with fixed formatting, so reruns are byte-identical.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{
    restrict_fine_to_coarse, solve_forward, Discretization, FemField, ProblemData, SubdomainSpec,
};
use crate::inverse_newton::{newton_reconstruct, InverseProblem, NewtonConfig};
use crate::mesh::Point;
use crate::robin_basis::{c1_distance, Basis, BasisSpec, RobinParameter};
use crate::sparse_linalg::condition_number_2;

/// Smallest fine mesh accepted for synthetic measurements.
pub const MIN_FINE_N: usize = 64;
/// Boundary samples per column of the subspace table.
pub const SUBSPACE_SAMPLES: usize = 512;

/// Deterministic perturbation `sigma * sum_i Re(exp(i (x - x_i) . z)) 1_{B_i}(x)`
/// over the measurement discs `B_i` with centers `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    /// Complex wave vector `z`, as `[re, im]` per component.
    pub wave_vector: [[f64; 2]; 2],
    pub omega: SubdomainSpec,
}

impl NoiseSpec {
    /// `z = (10, 10 i)` over the discs of `omega`.
    pub fn new(sigma: f64, omega: SubdomainSpec) -> Result<Self> {
        Self::with_wave_vector(sigma, [[10.0, 0.0], [0.0, 10.0]], omega)
    }

    pub fn with_wave_vector(
        sigma: f64,
        wave_vector: [[f64; 2]; 2],
        omega: SubdomainSpec,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma {sigma} must be >= 0")));
        }
        Ok(NoiseSpec {
            sigma,
            wave_vector,
            omega,
        })
    }

    /// Perturbation at `p`.
    pub fn eval(&self, p: Point) -> f64 {
        let [z1, z2] = self.wave_vector;
        self.sigma
            * self
                .omega
                .discs()
                .iter()
                .filter(|d| d.contains(p))
                .map(|d| {
                    let (d1, d2) = (p[0] - d.center[0], p[1] - d.center[1]);
                    let phase = d1 * z1[0] + d2 * z2[0];
                    let decay = d1 * z1[1] + d2 * z2[1];
                    (-decay).exp() * phase.cos()
                })
                .sum::<f64>()
    }
}

/// Adds the nodal values of the perturbation to `q`.
pub fn apply_noise(q: &FemField, spec: &NoiseSpec) -> FemField {
    if spec.sigma == 0.0 {
        return q.clone();
    }
    let n = q.n_per_side();
    let values = q
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, j) = (idx % (n + 1), idx / (n + 1));
            v + spec.eval([i as f64 / n as f64, j as f64 / n as f64])
        })
        .collect();
    FemField::new(n, values).expect("same node count")
}

/// Synthetic measurements: the P1 forward solution for `a_true` on the
/// `n_fine` mesh. Restriction to the reconstruction mesh happens later.
pub fn simulate_measurement(
    n_fine: usize,
    data: &ProblemData,
    a_true: &RobinParameter,
) -> Result<FemField> {
    if n_fine < MIN_FINE_N {
        return Err(Error::InvalidArgument(format!(
            "fine mesh N = {n_fine} is below the minimum of {MIN_FINE_N}"
        )));
    }
    let disc = Discretization::unit_square(n_fine)?;
    solve_forward(&disc, a_true, data)
}

/// Where the measurement for a reconstruction on `N` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FineMesh {
    /// A separate fine solve on `factor * N` for every `N`.
    PerRow { factor: usize },
    /// One fine solve on this mesh, restricted to every `N`.
    Shared(usize),
}

impl FineMesh {
    fn check(&self, n_list: &[usize]) -> Result<()> {
        for &n in n_list {
            let ok = match *self {
                FineMesh::PerRow { factor } => factor >= 2 && n * factor >= MIN_FINE_N,
                FineMesh::Shared(nf) => n >= 2 && nf % n == 0 && nf / n >= 2,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "fine mesh {self:?} is not a refinement of N = {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Inputs shared by all reconstruction studies.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub data: ProblemData,
    pub a_true: RobinParameter,
    pub omega: SubdomainSpec,
    /// Starting coefficient; also fixes the reconstruction basis.
    pub x0: RobinParameter,
    pub newton: NewtonConfig,
}

impl StudySetup {
    /// Reference problem, reference truth, start `a = 1` in the 6 + 6 basis.
    pub fn reference() -> Self {
        let a_true = crate::robin_basis::reference_truth();
        let x0 = RobinParameter::constant(a_true.basis().clone(), 1.0).expect("has Cos(0)");
        StudySetup {
            data: ProblemData::reference(),
            a_true,
            omega: SubdomainSpec::reference(),
            x0,
            newton: NewtonConfig::default(),
        }
    }
}

/// Outcome of one reconstruction inside a study.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub n: usize,
    pub a_h: Option<RobinParameter>,
    /// `C^1` distance to the truth; `None` when the reconstruction failed.
    pub error: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
}

fn reconstruct_cell(
    n: usize,
    q: FemField,
    setup: &StudySetup,
    x0: &RobinParameter,
) -> Reconstruction {
    let run = || -> Result<_> {
        let problem =
            InverseProblem::new(Discretization::unit_square(n)?, &setup.data, q, setup.omega.clone())?;
        newton_reconstruct(&problem, x0, &setup.newton, Some(&setup.a_true))
    };
    match run() {
        Ok(r) if r.converged => Reconstruction {
            n,
            error: Some(c1_distance(&r.a_h, &setup.a_true)),
            a_h: Some(r.a_h),
            iterations: r.iterations,
            converged: true,
            failure: None,
        },
        Ok(r) => Reconstruction {
            n,
            error: None,
            a_h: Some(r.a_h),
            iterations: r.iterations,
            converged: false,
            failure: Some(format!("no convergence in {} iterations", r.iterations)),
        },
        Err(e) => Reconstruction {
            n,
            a_h: None,
            error: None,
            iterations: 0,
            converged: false,
            failure: Some(e.to_string()),
        },
    }
}

/// Coarse measurements for every `N`, in order.
fn coarse_measurements(
    n_list: &[usize],
    fine: FineMesh,
    setup: &StudySetup,
) -> Result<Vec<FemField>> {
    fine.check(n_list)?;
    match fine {
        FineMesh::Shared(nf) => {
            let q = simulate_measurement(nf, &setup.data, &setup.a_true)?;
            n_list.iter().map(|&n| restrict_fine_to_coarse(&q, n)).collect()
        }
        FineMesh::PerRow { factor } => n_list
            .par_iter()
            .map(|&n| {
                let q = simulate_measurement(factor * n, &setup.data, &setup.a_true)?;
                restrict_fine_to_coarse(&q, n)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EocRow {
    pub n: usize,
    /// Longest triangle edge, `sqrt(2) / N`.
    pub h: f64,
    pub error: Option<f64>,
    /// Rate against the previous successful row.
    pub eoc: Option<f64>,
    pub iterations: usize,
    pub failure: Option<String>,
}

pub fn mesh_size(n: usize) -> f64 {
    std::f64::consts::SQRT_2 / n as f64
}

/// Fills in `eoc = log(e_prev / e) / log(h_prev / h)` between consecutive
/// successful rows.
pub fn eoc_rows(cells: Vec<Reconstruction>) -> Vec<EocRow> {
    let mut prev: Option<(f64, f64)> = None;
    cells
        .into_iter()
        .map(|c| {
            let h = mesh_size(c.n);
            let eoc = match (prev, c.error) {
                (Some((hp, ep)), Some(e)) => Some((ep / e).ln() / (hp / h).ln()),
                _ => None,
            };
            if let Some(e) = c.error {
                prev = Some((h, e));
            }
            EocRow {
                n: c.n,
                h,
                error: c.error,
                eoc,
                iterations: c.iterations,
                failure: c.failure,
            }
        })
        .collect()
}

/// Reconstruct on every mesh in `n_list` and tabulate the `C^1` error.
pub fn run_eoc_study(n_list: &[usize], fine: FineMesh, setup: &StudySetup) -> Result<Vec<EocRow>> {
    let qs = coarse_measurements(n_list, fine, setup)?;
    let cells = n_list
        .par_iter()
        .zip(qs)
        .map(|(&n, q)| reconstruct_cell(n, q, setup, &setup.x0))
        .collect();
    Ok(eoc_rows(cells))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRow {
    pub n: usize,
    pub h: f64,
    pub sigma: f64,
    pub error: Option<f64>,
    pub iterations: usize,
    pub failure: Option<String>,
}

/// Reconstruction errors on the grid `n_list x sigma_list` with noisy
/// measurements (wave vector `(10, 10 i)` over the measurement discs).
pub fn run_noise_study(
    n_list: &[usize],
    sigma_list: &[f64],
    fine: FineMesh,
    setup: &StudySetup,
) -> Result<Vec<NoiseRow>> {
    run_noise_study_with(n_list, sigma_list, [[10.0, 0.0], [0.0, 10.0]], fine, setup)
}

pub fn run_noise_study_with(
    n_list: &[usize],
    sigma_list: &[f64],
    wave_vector: [[f64; 2]; 2],
    fine: FineMesh,
    setup: &StudySetup,
) -> Result<Vec<NoiseRow>> {
    let specs = sigma_list
        .iter()
        .map(|&s| NoiseSpec::with_wave_vector(s, wave_vector, setup.omega.clone()))
        .collect::<Result<Vec<_>>>()?;
    let qs = coarse_measurements(n_list, fine, setup)?;
    let cells: Vec<(usize, &FemField, &NoiseSpec)> = n_list
        .iter()
        .zip(&qs)
        .flat_map(|(&n, q)| specs.iter().map(move |s| (n, q, s)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(n, q, spec)| {
            let c = reconstruct_cell(n, apply_noise(q, spec), setup, &setup.x0);
            NoiseRow {
                n,
                h: mesh_size(n),
                sigma: spec.sigma,
                error: c.error,
                iterations: c.iterations,
                failure: c.failure,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceColumn {
    pub spec: BasisSpec,
    pub result: Reconstruction,
    /// `a_h` on the sample grid, when the reconstruction converged.
    pub samples: Option<Vec<f64>>,
    /// `C^1` distance between `a_h` and the coefficient truncation of the truth.
    pub distance_to_truncation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceStudy {
    pub t: Vec<f64>,
    pub a_true: Vec<f64>,
    pub columns: Vec<SubspaceColumn>,
}

/// Uniform boundary samples `t_k = 4 k / n`.
pub fn boundary_samples(n: usize) -> Vec<f64> {
    (0..n).map(|k| 4.0 * k as f64 / n as f64).collect()
}

/// Reconstruct in each truncated space `V_{j1, j2}` from one data set on `N`.
pub fn run_subspace_study(
    pairs: &[BasisSpec],
    n: usize,
    fine: FineMesh,
    setup: &StudySetup,
) -> Result<SubspaceStudy> {
    let full_alpha = setup.a_true.alpha().len();
    let full_beta = setup.a_true.beta().len();
    for s in pairs {
        if s.j1 > full_alpha || s.j2 > full_beta {
            return Err(Error::InvalidArgument(format!(
                "subspace ({}, {}) exceeds the truth's ({full_alpha}, {full_beta}) modes",
                s.j1, s.j2
            )));
        }
    }
    let q = coarse_measurements(&[n], fine, setup)?.remove(0);
    let t = boundary_samples(SUBSPACE_SAMPLES);
    let a_true = t.iter().map(|&s| setup.a_true.eval(s)).collect();
    let columns = pairs
        .par_iter()
        .map(|&spec| {
            let basis = Basis::trig(spec);
            let x0 = setup.x0.project_onto(&basis);
            let result = reconstruct_cell(n, q.clone(), setup, &x0);
            let samples = result
                .a_h
                .as_ref()
                .filter(|_| result.converged)
                .map(|a| t.iter().map(|&s| a.eval(s)).collect());
            let distance_to_truncation = result
                .a_h
                .as_ref()
                .filter(|_| result.converged)
                .map(|a| c1_distance(a, &setup.a_true.project_onto(&basis)));
            SubspaceColumn {
                spec,
                result,
                samples,
                distance_to_truncation,
            }
        })
        .collect();
    Ok(SubspaceStudy {
        t,
        a_true,
        columns,
    })
}

/// `(2,2), (3,2), (3,3), ...` up to `(max, max)`.
pub fn condition_schedule(max: usize) -> Vec<BasisSpec> {
    let mut out = Vec::new();
    let (mut j1, mut j2) = (2, 2);
    while j1 <= max && j2 <= max {
        out.push(BasisSpec { j1, j2 });
        if j1 == j2 {
            j1 += 1;
        } else {
            j2 += 1;
        }
    }
    out
}

/// Truth extended by `extra` unit coefficients in both blocks.
pub fn prolong_truth(a: &RobinParameter, extra: usize) -> Result<RobinParameter> {
    let mut alpha = a.alpha();
    let mut beta = a.beta();
    alpha.extend(std::iter::repeat(1.0).take(extra));
    beta.extend(std::iter::repeat(1.0).take(extra));
    RobinParameter::new(&alpha, &beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub spec: BasisSpec,
    /// Spectral condition number; infinite for a singular Jacobian.
    pub kappa: f64,
}

/// Spectral condition number of the Jacobian at the truth for each space in
/// `schedule`. For each space the truth is truncated to it and the data are
/// generated on the same mesh, so `F_h` vanishes at the evaluation point.
pub fn run_condition_study(
    schedule: &[BasisSpec],
    n: usize,
    data: &ProblemData,
    a_true: &RobinParameter,
    omega: &SubdomainSpec,
) -> Result<Vec<ConditionRow>> {
    let disc = Discretization::unit_square(n)?;
    schedule
        .iter()
        .map(|&spec| {
            let a = a_true.project_onto(&Basis::trig(spec));
            let q = solve_forward(&disc, &a, data)?;
            let problem = InverseProblem::new(disc.clone(), data, q, omega.clone())?;
            let ev = problem.evaluate(&a)?;
            let jac = problem.jacobian(&ev)?;
            let kappa = match condition_number_2(&jac) {
                Ok(k) => k,
                Err(Error::Singular { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(ConditionRow { spec, kappa })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "slope needs two or more paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("slope needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope needs distinct x values".into()));
    }
    Ok(sxy / sxx)
}

/// `|F_h(truth)|` with measurements from a nested fine mesh, for each `N`.
pub fn consistency_residuals(
    n_list: &[usize],
    fine: FineMesh,
    setup: &StudySetup,
) -> Result<Vec<f64>> {
    let qs = coarse_measurements(n_list, fine, setup)?;
    n_list
        .par_iter()
        .zip(qs)
        .map(|(&n, q)| {
            let problem = InverseProblem::new(
                Discretization::unit_square(n)?,
                &setup.data,
                q,
                setup.omega.clone(),
            )?;
            Ok(problem.evaluate(&setup.a_true)?.residual_norm())
        })
        .collect()
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt)
}

pub fn eoc_csv(rows: &[EocRow]) -> String {
    let mut out = String::from("h,error,eoc\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", fmt(r.h), fmt_opt(r.error), fmt_opt(r.eoc)));
    }
    out
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut out = String::from("h,sigma,error\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", fmt(r.h), fmt(r.sigma), fmt_opt(r.error)));
    }
    out
}

/// Columns `t, a_true, a_(j1,j2)...`; the pair headers are quoted because
/// they contain a comma. Failed columns are `NA`.
pub fn subspace_csv(study: &SubspaceStudy) -> String {
    let mut out = String::from("t,a_true");
    for c in &study.columns {
        out.push_str(&format!(",\"a_({},{})\"", c.spec.j1, c.spec.j2));
    }
    out.push('\n');
    for (k, t) in study.t.iter().enumerate() {
        out.push_str(&format!("{},{}", fmt(*t), fmt(study.a_true[k])));
        for c in &study.columns {
            out.push(',');
            out.push_str(&fmt_opt(c.samples.as_ref().map(|s| s[k])));
        }
        out.push('\n');
    }
    out
}

pub fn condition_csv(rows: &[ConditionRow]) -> String {
    let mut out = String::from("J,kappa\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.spec.dim(), fmt(r.kappa)));
    }
    out
}
