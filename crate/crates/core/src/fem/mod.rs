//! P1 finite elements for the Robin problem
//!
//! ```text
//! b(u, v) = int_Omega grad u . grad v dx + int_boundary a u v ds
//! l_{f,g}(v) = int_boundary g v ds - int_Omega f v dx
//! ```
//!
//! and the four discrete problems built on it: the forward solve, the
//! adjoint driven by the interior mismatch, and their linearizations with
//! respect to the Robin coefficient.

mod assembly;
mod multigrid;
mod problems;

pub use assembly::{Discretization, EdgeMass, OmegaMass};
pub use multigrid::MultigridPreconditioner;
pub use problems::{
    assemble_load_fg, assemble_system, restrict_fine_to_coarse, solve_adjoint, solve_forward,
    solve_u_dot, solve_z_dot, RobinOperator,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::robin_basis::RobinParameter;

/// Nodal values of a P1 function on the `N x N` unit-square mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FemField {
    n: usize,
    values: Vec<f64>,
}

impl FemField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("field mesh N = {n} < 2")));
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidArgument(format!(
                "field on N = {n} needs {} values, got {}",
                (n + 1) * (n + 1),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(FemField { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        FemField {
            n,
            values: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        FemField {
            n: mesh.n_per_side(),
            values: mesh.nodes().iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn n_per_side(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at_node(&self, i: usize, j: usize) -> f64 {
        self.values[i + j * (self.n + 1)]
    }

    /// Barycentric interpolation at any point of the square.
    pub fn eval(&self, p: Point) -> f64 {
        let (nodes, w) = locate_structured(self.n, p);
        w[0] * self.values[nodes[0]] + w[1] * self.values[nodes[1]] + w[2] * self.values[nodes[2]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check_mesh(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::MeshMismatch {
                expected: n,
                found: self.n,
            });
        }
        Ok(())
    }

    /// `self - other`, nodewise.
    pub fn sub(&self, other: &FemField) -> Result<FemField> {
        other.check_mesh(self.n)?;
        Ok(FemField {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

/// Vertex indices and barycentric weights of the triangle containing `p` on
/// the structured `N x N` mesh.
pub(crate) fn locate_structured(n: usize, p: Point) -> ([usize; 3], [f64; 3]) {
    let nf = n as f64;
    let x = p[0].clamp(0.0, 1.0) * nf;
    let y = p[1].clamp(0.0, 1.0) * nf;
    let i = (x.floor() as usize).min(n - 1);
    let j = (y.floor() as usize).min(n - 1);
    let xi = x - i as f64;
    let eta = y - j as f64;
    let stride = n + 1;
    let n00 = i + j * stride;
    let (n10, n01, n11) = (n00 + 1, n00 + stride, n00 + stride + 1);
    if xi >= eta {
        ([n00, n10, n11], [1.0 - xi, xi - eta, eta])
    } else {
        ([n00, n11, n01], [1.0 - eta, xi, eta - xi])
    }
}

/// Interior source `f` of `Delta u = f`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    /// `f(x, y) = -10 x exp(sin(4 pi y))`.
    Reference,
    Zero,
    Constant(f64),
}

impl SourceTerm {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            SourceTerm::Reference => -10.0 * p[0] * (4.0 * PI * p[1]).sin().exp(),
            SourceTerm::Zero => 0.0,
            SourceTerm::Constant(c) => *c,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceTerm::Zero) || matches!(self, SourceTerm::Constant(c) if *c == 0.0)
    }

    /// Parses `reference`, `zero` or `constant(<value>)`.
    pub fn parse(id: &str) -> Result<Self> {
        match id.trim() {
            "reference" => Ok(SourceTerm::Reference),
            "zero" => Ok(SourceTerm::Zero),
            other => parse_constant(other)
                .map(SourceTerm::Constant)
                .ok_or_else(|| Error::UnknownRegistry(other.to_string())),
        }
    }
}

/// Boundary datum `g` of `d_nu u + a u = g`, as a function of arc length.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryDatum {
    /// `g = 0`, the datum used throughout the numerical examples.
    Reference,
    Zero,
    Constant(f64),
    /// `g(p(t)) = a(t)`; with `f = 0` the exact solution is `u = 1`.
    Robin(RobinParameter),
}

impl BoundaryDatum {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BoundaryDatum::Reference | BoundaryDatum::Zero => 0.0,
            BoundaryDatum::Constant(c) => *c,
            BoundaryDatum::Robin(a) => a.eval(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundaryDatum::Reference | BoundaryDatum::Zero => true,
            BoundaryDatum::Constant(c) => *c == 0.0,
            BoundaryDatum::Robin(_) => false,
        }
    }

    /// Parses `reference`, `zero`, `constant(<value>)` or `robin`; the latter
    /// binds to `robin`, the coefficient supplied by the caller.
    pub fn parse(id: &str, robin: Option<&RobinParameter>) -> Result<Self> {
        match id.trim() {
            "reference" => Ok(BoundaryDatum::Reference),
            "zero" => Ok(BoundaryDatum::Zero),
            "robin" => robin
                .cloned()
                .map(BoundaryDatum::Robin)
                .ok_or_else(|| Error::UnknownRegistry("robin (no coefficient bound)".into())),
            other => parse_constant(other)
                .map(BoundaryDatum::Constant)
                .ok_or_else(|| Error::UnknownRegistry(other.to_string())),
        }
    }
}

fn parse_constant(id: &str) -> Option<f64> {
    let inner = id.strip_prefix("constant(")?.strip_suffix(')')?;
    inner.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Problem data `(f, g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub f: SourceTerm,
    pub g: BoundaryDatum,
}

impl ProblemData {
    /// The data of the numerical examples: `f = -10 x exp(sin(4 pi y))`, `g = 0`.
    pub fn reference() -> Self {
        ProblemData {
            f: SourceTerm::Reference,
            g: BoundaryDatum::Reference,
        }
    }

    pub fn zero() -> Self {
        ProblemData {
            f: SourceTerm::Zero,
            g: BoundaryDatum::Zero,
        }
    }

    /// `f = 0`, `g = a`, whose solution is identically one.
    pub fn manufactured_unit(a: &RobinParameter) -> Self {
        ProblemData {
            f: SourceTerm::Zero,
            g: BoundaryDatum::Robin(a.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    /// Strict interior test.
    pub fn contains(&self, p: Point) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }
}

/// Measurement subdomain: a union of open discs inside the square.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainSpec {
    discs: Vec<Disc>,
}

impl SubdomainSpec {
    pub fn new(discs: Vec<Disc>) -> Result<Self> {
        for (k, d) in discs.iter().enumerate() {
            let ok = d.radius >= 0.0
                && d.radius.is_finite()
                && d.center[0] - d.radius >= 0.0
                && d.center[0] + d.radius <= 1.0
                && d.center[1] - d.radius >= 0.0
                && d.center[1] + d.radius <= 1.0;
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "disc {k} (center {:?}, radius {}) does not lie inside the unit square",
                    d.center, d.radius
                )));
            }
        }
        Ok(SubdomainSpec { discs })
    }

    /// Two discs: radius 0.05 around (0.8, 0.8) and radius 0.1 around (0.4, 0.2).
    pub fn reference() -> Self {
        SubdomainSpec {
            discs: vec![
                Disc {
                    center: [0.8, 0.8],
                    radius: 0.05,
                },
                Disc {
                    center: [0.4, 0.2],
                    radius: 0.1,
                },
            ],
        }
    }

    pub fn discs(&self) -> &[Disc] {
        &self.discs
    }

    pub fn contains(&self, p: Point) -> bool {
        self.discs.iter().any(|d| d.contains(p))
    }

    /// Exact area when the discs do not overlap.
    pub fn nominal_area(&self) -> f64 {
        self.discs.iter().map(|d| PI * d.radius * d.radius).sum()
    }
}
