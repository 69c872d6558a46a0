//! Configuration, file formats and the command implementations behind the
//! `robin` binary.
//!
//! A configuration is a JSON object; every key is optional and the defaults
//! reproduce the reference setup (reference source, two measurement discs, six
//! cosine and six sine modes, start at `a = 1`). Unknown keys are rejected.
//!
//! ```json
//! {
//!   "problem": { "f": "reference", "g": "reference" },
//!   "omega": [ { "center": [0.8, 0.8], "radius": 0.05 },
//!              { "center": [0.4, 0.2], "radius": 0.1 } ],
//!   "basis": [6, 6],
//!   "a_true": { "alpha": [10, 1, -0.5, 2, 1, -0.5], "beta": [0.2, 1, -0.5, 2, 1, -0.5] },
//!   "x0": null,
//!   "mesh": { "n": 128, "n_fine": 1024, "fine": "shared", "fine_factor": 4 },
//!   "newton": { "tol": 1e-10, "max_iter": 300, "max_backtracks": 40 },
//!   "noise": { "sigma": [1e-4, 1e-5, 1e-6], "z": [[10, 0], [0, 10]] },
//!   "eoc": { "n_list": [16, 32, 64, 128, 256] },
//!   "subspace": { "pairs": [[3, 3], [4, 4], [5, 5]] },
//!   "condition": { "n": 64, "max_modes": 8, "extra": 2 }
//! }
//! ```
//!
//! `x0: null` means the constant `1` in the reconstruction basis. Source
//! ids are `reference`, `zero`, `constant(c)`; boundary ids additionally accept
//! `robin`, which sets `g = a_true` (so that `u = 1` when `f = 0`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    condition_csv, condition_schedule, eoc_csv, noise_csv, prolong_truth, run_condition_study,
    run_eoc_study, run_noise_study_with, run_subspace_study, simulate_measurement, subspace_csv,
    FineMesh, StudySetup,
};
use crate::fem::{
    restrict_fine_to_coarse, BoundaryDatum, Disc, Discretization, FemField, ProblemData,
    SourceTerm, SubdomainSpec,
};
use crate::inverse_newton::{newton_reconstruct, InverseProblem, NewtonConfig};
use crate::robin_basis::{
    c1_distance, min_on_boundary, reference_truth, Basis, BasisSpec, RobinParameter,
    DEFAULT_SAMPLES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub f: String,
    pub g: String,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            f: "reference".into(),
            g: "reference".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinePolicy {
    /// One fine solve on `n_fine`, restricted to every mesh.
    Shared,
    /// A fine solve on `fine_factor * N` for every mesh.
    PerRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub n: usize,
    pub n_fine: usize,
    pub fine: FinePolicy,
    pub fine_factor: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            n: 128,
            n_fine: 1024,
            fine: FinePolicy::Shared,
            fine_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSection {
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = NewtonConfig::default();
        NewtonSection {
            tol: d.tol,
            max_iter: d.max_iter,
            max_backtracks: d.max_backtracks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub sigma: Vec<f64>,
    /// Complex wave vector as `[[re, im], [re, im]]`.
    pub z: [[f64; 2]; 2],
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma: vec![1e-4, 1e-5, 1e-6],
            z: [[10.0, 0.0], [0.0, 10.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EocConfig {
    pub n_list: Vec<usize>,
}

impl Default for EocConfig {
    fn default() -> Self {
        EocConfig {
            n_list: vec![16, 32, 64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubspaceConfig {
    pub pairs: Vec<[usize; 2]>,
}

impl Default for SubspaceConfig {
    fn default() -> Self {
        SubspaceConfig {
            pairs: vec![[3, 3], [4, 4], [5, 5]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionConfig {
    pub n: usize,
    /// Largest `j1 = j2` in the growth schedule.
    pub max_modes: usize,
    /// Unit coefficients appended to both blocks of the truth.
    pub extra: usize,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        ConditionConfig {
            n: 64,
            max_modes: 8,
            extra: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub omega: Vec<DiscConfig>,
    pub basis: [usize; 2],
    pub a_true: CoeffConfig,
    pub x0: Option<CoeffConfig>,
    pub mesh: MeshConfig,
    pub newton: NewtonSection,
    pub noise: NoiseConfig,
    pub eoc: EocConfig,
    pub subspace: SubspaceConfig,
    pub condition: ConditionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let truth = reference_truth();
        ExperimentConfig {
            problem: ProblemConfig::default(),
            omega: SubdomainSpec::reference()
                .discs()
                .iter()
                .map(|d| DiscConfig {
                    center: d.center,
                    radius: d.radius,
                })
                .collect(),
            basis: [6, 6],
            a_true: CoeffConfig {
                alpha: truth.alpha(),
                beta: truth.beta(),
            },
            x0: None,
            mesh: MeshConfig::default(),
            newton: NewtonSection::default(),
            noise: NoiseConfig::default(),
            eoc: EocConfig::default(),
            subspace: SubspaceConfig::default(),
            condition: ConditionConfig::default(),
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

/// Pulls the offending key out of a serde message such as
/// "unknown field `foo`, expected ...".
fn serde_key(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<config>".into())
}

/// Validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub setup: StudySetup,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            config_err(&serde_key(&msg), msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err("<config>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn a_true(&self) -> Result<RobinParameter> {
        RobinParameter::new(&self.a_true.alpha, &self.a_true.beta)
            .map_err(|e| config_err("a_true", e.to_string()))
    }

    fn basis_spec(&self) -> Result<BasisSpec> {
        BasisSpec::new(self.basis[0], self.basis[1]).map_err(|e| config_err("basis", e.to_string()))
    }

    /// Checks every field against the preconditions of the modules it feeds.
    pub fn resolve(&self) -> Result<Resolved> {
        let a_true = self.a_true()?;
        let min = min_on_boundary(&a_true, DEFAULT_SAMPLES);
        if !(min > 0.0) {
            return Err(config_err("a_true", format!("not positive on the boundary (min {min:.3e})")));
        }
        let f = SourceTerm::parse(&self.problem.f).map_err(|e| config_err("problem.f", e.to_string()))?;
        let g = BoundaryDatum::parse(&self.problem.g, Some(&a_true))
            .map_err(|e| config_err("problem.g", e.to_string()))?;
        let omega = SubdomainSpec::new(
            self.omega
                .iter()
                .map(|d| Disc {
                    center: d.center,
                    radius: d.radius,
                })
                .collect(),
        )
        .map_err(|e| config_err("omega", e.to_string()))?;
        if omega.discs().is_empty() {
            return Err(config_err("omega", "at least one disc is required"));
        }
        let basis = Basis::trig(self.basis_spec()?);
        let x0 = match &self.x0 {
            None => RobinParameter::constant(basis, 1.0).expect("trig basis has Cos(0)"),
            Some(c) => {
                if c.alpha.len() != self.basis[0] || c.beta.len() != self.basis[1] {
                    return Err(config_err(
                        "x0",
                        format!(
                            "{} + {} coefficients do not match basis {:?}",
                            c.alpha.len(),
                            c.beta.len(),
                            self.basis
                        ),
                    ));
                }
                RobinParameter::new(&c.alpha, &c.beta).map_err(|e| config_err("x0", e.to_string()))?
            }
        };
        let min = min_on_boundary(&x0, DEFAULT_SAMPLES);
        if !(min > 0.0) {
            return Err(config_err("x0", format!("not positive on the boundary (min {min:.3e})")));
        }
        if self.mesh.n < 2 {
            return Err(config_err("mesh.n", "must be at least 2"));
        }
        if self.mesh.fine_factor < 2 {
            return Err(config_err("mesh.fine_factor", "must be at least 2"));
        }
        if self.eoc.n_list.is_empty() {
            return Err(config_err("eoc.n_list", "must not be empty"));
        }
        let newton = NewtonConfig {
            tol: self.newton.tol,
            max_iter: self.newton.max_iter,
            max_backtracks: self.newton.max_backtracks,
            positivity_samples: DEFAULT_SAMPLES,
        };
        newton.validate().map_err(|e| config_err("newton", e.to_string()))?;
        if self.noise.sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(config_err("noise.sigma", "values must be >= 0"));
        }
        for p in &self.subspace.pairs {
            if p[0] == 0 || p[0] > a_true.alpha().len() || p[1] > a_true.beta().len() {
                return Err(config_err(
                    "subspace.pairs",
                    format!("pair {p:?} is outside the modes of a_true"),
                ));
            }
        }
        if self.condition.n < 2 || self.condition.max_modes < 2 {
            return Err(config_err("condition", "n and max_modes must be at least 2"));
        }
        Ok(Resolved {
            config: self.clone(),
            setup: StudySetup {
                data: ProblemData { f, g },
                a_true,
                omega,
                x0,
                newton,
            },
        })
    }

    fn fine_mesh(&self) -> FineMesh {
        match self.mesh.fine {
            FinePolicy::Shared => FineMesh::Shared(self.mesh.n_fine),
            FinePolicy::PerRow => FineMesh::PerRow {
                factor: self.mesh.fine_factor,
            },
        }
    }
}

/// Writes `field v1`, `N <n>`, then one value per line with 17 significant digits.
pub fn write_field(path: &Path, q: &FemField) -> Result<()> {
    fs::write(path, format_field(q))?;
    Ok(())
}

pub fn format_field(q: &FemField) -> String {
    let mut out = String::with_capacity(24 * q.values().len() + 32);
    out.push_str("field v1\n");
    let _ = writeln!(out, "N {}", q.n_per_side());
    for v in q.values() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn read_field(path: &Path) -> Result<FemField> {
    parse_field(&fs::read_to_string(path)?)
}

pub fn parse_field(text: &str) -> Result<FemField> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("field v1") {
        return Err(Error::FieldFormat("missing `field v1` header".into()));
    }
    let n: usize = lines
        .next()
        .and_then(|l| l.trim().strip_prefix("N "))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::FieldFormat("second line must be `N <int>`".into()))?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::FieldFormat(format!("value {k}: cannot parse {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = (n + 1) * (n + 1);
    if values.len() != expected {
        return Err(Error::FieldFormat(format!(
            "N = {n} needs {expected} values, found {}",
            values.len()
        )));
    }
    FemField::new(n, values)
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::UnknownRegistry(_)
        | Error::InvalidArgument(_)
        | Error::NonPositiveRobin { .. }
        | Error::NotNested { .. }
        | Error::MeshMismatch { .. }
        | Error::FieldFormat(_)
        | Error::Io(_)
        | Error::NotOnBoundary { .. } => EXIT_CONFIG,
        Error::BacktrackExhausted { .. } => EXIT_NOT_CONVERGED,
        Error::NotConverged { .. }
        | Error::NonFinite(_)
        | Error::Singular { .. }
        | Error::SingularJacobian { .. }
        | Error::InsufficientTrace { .. } => EXIT_SOLVER,
    }
}

/// Forward solve on the fine mesh; writes the field and reports its range.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let r = cfg.resolve()?;
    let q = simulate_measurement(cfg.mesh.n_fine, &r.setup.data, &r.setup.a_true)?;
    write_field(out, &q)?;
    println!("n_fine={}", q.n_per_side());
    println!("min={:.16e}", q.min());
    println!("max={:.16e}", q.max());
    Ok(EXIT_OK)
}

/// Newton reconstruction on `mesh.n` from a field file on a nested mesh.
pub fn cmd_reconstruct(
    cfg: &ExperimentConfig,
    data: &Path,
    out: &Path,
    trace: Option<&Path>,
) -> Result<i32> {
    let r = cfg.resolve()?;
    let n = cfg.mesh.n;
    let fine = read_field(data)?;
    let q = if fine.n_per_side() == n {
        fine
    } else {
        restrict_fine_to_coarse(&fine, n)?
    };
    let problem = InverseProblem::new(
        Discretization::unit_square(n)?,
        &r.setup.data,
        q,
        r.setup.omega.clone(),
    )?;
    let result = newton_reconstruct(&problem, &r.setup.x0, &r.setup.newton, Some(&r.setup.a_true))?;

    let mut text = String::new();
    let join = |v: Vec<f64>| {
        v.iter()
            .map(|c| format!("{c:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let _ = writeln!(text, "converged={}", result.converged);
    let _ = writeln!(text, "iterations={}", result.iterations);
    let _ = writeln!(text, "n={n}");
    let _ = writeln!(text, "j1={}", cfg.basis[0]);
    let _ = writeln!(text, "j2={}", cfg.basis[1]);
    let _ = writeln!(text, "alpha={}", join(result.a_h.alpha()));
    let _ = writeln!(text, "beta={}", join(result.a_h.beta()));
    let res = result.trace.records.last().map_or(result.trace.initial_res_norm, |t| t.res_norm);
    let _ = writeln!(text, "res_norm={res:.16e}");
    let _ = writeln!(text, "c1_error={:.16e}", c1_distance(&result.a_h, &r.setup.a_true));
    fs::write(out, text)?;
    if let Some(p) = trace {
        fs::write(p, result.trace.to_csv())?;
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_eoc(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let r = cfg.resolve()?;
    let rows = run_eoc_study(&cfg.eoc.n_list, cfg.fine_mesh(), &r.setup)?;
    fs::write(out, eoc_csv(&rows))?;
    report_failures(rows.iter().map(|r| (r.n, None, r.failure.as_deref())));
    Ok(if rows.iter().all(|r| r.error.is_none()) { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

pub fn cmd_noise(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let r = cfg.resolve()?;
    let rows = run_noise_study_with(
        &cfg.eoc.n_list,
        &cfg.noise.sigma,
        cfg.noise.z,
        cfg.fine_mesh(),
        &r.setup,
    )?;
    fs::write(out, noise_csv(&rows))?;
    report_failures(rows.iter().map(|r| (r.n, Some(r.sigma), r.failure.as_deref())));
    Ok(if rows.iter().all(|r| r.error.is_none()) { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

pub fn cmd_subspace(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let r = cfg.resolve()?;
    let pairs = cfg
        .subspace
        .pairs
        .iter()
        .map(|p| BasisSpec::new(p[0], p[1]))
        .collect::<Result<Vec<_>>>()?;
    let study = run_subspace_study(&pairs, cfg.mesh.n, cfg.fine_mesh(), &r.setup)?;
    fs::write(out, subspace_csv(&study))?;
    for c in &study.columns {
        if let Some(f) = &c.result.failure {
            eprintln!("subspace ({}, {}): {f}", c.spec.j1, c.spec.j2);
        }
    }
    Ok(if study.columns.iter().all(|c| c.samples.is_none()) { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

pub fn cmd_condition(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let r = cfg.resolve()?;
    let truth = prolong_truth(&r.setup.a_true, cfg.condition.extra)?;
    let max = cfg
        .condition
        .max_modes
        .min(truth.alpha().len())
        .min(truth.beta().len());
    let rows = run_condition_study(
        &condition_schedule(max),
        cfg.condition.n,
        &r.setup.data,
        &truth,
        &r.setup.omega,
    )?;
    fs::write(out, condition_csv(&rows))?;
    Ok(EXIT_OK)
}

fn report_failures<'a>(rows: impl Iterator<Item = (usize, Option<f64>, Option<&'a str>)>) {
    for (n, sigma, failure) in rows {
        if let Some(f) = failure {
            match sigma {
                Some(s) => eprintln!("N = {n}, sigma = {s:e}: {f}"),
                None => eprintln!("N = {n}: {f}"),
            }
        }
    }
}

/// Runs a command and turns errors into a message on stderr plus an exit code.
pub fn run(command: impl FnOnce() -> Result<i32>) -> i32 {
    match command() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
