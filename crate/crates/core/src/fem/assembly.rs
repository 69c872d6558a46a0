use super::{multigrid, Disc, FemField, ProblemData, SubdomainSpec};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::quadrature::{barycentric_to_xy, edge_rule, triangle_rule, EdgeRule, TriangleRule};
use crate::robin_basis::RobinParameter;
use crate::sparse_linalg::{CsrMatrix, CsrRect};

/// Points per boundary edge for `int a u v ds` with trigonometric `a`.
pub const EDGE_POINTS: usize = 4;
/// Triangle rule for loads with `f` and for the subdomain indicator.
pub const LOAD_DEGREE: usize = 4;

/// Mesh-dependent data shared by every solve on that mesh: the stiffness
/// matrix, the boundary-edge slots in its sparsity pattern, quadrature rules
/// and multigrid transfer operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Mesh,
    stiffness: CsrMatrix,
    edge_slots: Vec<[usize; 4]>,
    edge_rule: EdgeRule,
    load_rule: TriangleRule,
    transfers: Vec<CsrRect>,
}

/// Boundary mass `int c u v ds` for a coefficient `c(t)`, stored per
/// boundary edge as `[m_aa, m_ab, m_bb]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMass {
    n: usize,
    entries: Vec<[f64; 3]>,
    edges: Vec<(usize, usize)>,
}

impl EdgeMass {
    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_add(x, 1.0, &mut y);
        y
    }

    /// `y += scale * M x`.
    pub fn apply_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        for (&(a, b), m) in self.edges.iter().zip(&self.entries) {
            y[a] += scale * (m[0] * x[a] + m[1] * x[b]);
            y[b] += scale * (m[1] * x[a] + m[2] * x[b]);
        }
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (&(a, b), m) in self.edges.iter().zip(&self.entries) {
            s += x[a] * (m[0] * y[a] + m[1] * y[b]) + x[b] * (m[1] * y[a] + m[2] * y[b]);
        }
        s
    }

    pub fn n_per_side(&self) -> usize {
        self.n
    }
}

/// `int 1_omega u v dx` with the indicator sampled at the load quadrature points.
#[derive(Debug, Clone)]
pub struct OmegaMass {
    matrix: CsrMatrix,
    area: f64,
}

impl OmegaMass {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Quadrature approximation of `|omega|`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let n_nodes = mesh.n_nodes();
        let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let k = element_stiffness(&mesh.triangle_vertices(t));
            for a in 0..3 {
                for b in 0..3 {
                    triplets.push((tri[a], tri[b], k[a][b]));
                }
            }
        }
        let stiffness = CsrMatrix::from_triplets(n_nodes, &triplets);
        let edge_slots = mesh
            .boundary_edges()
            .iter()
            .map(|e| {
                let pos = |i, j| {
                    stiffness
                        .position(i, j)
                        .expect("boundary edge is part of the sparsity pattern")
                };
                [pos(e.a, e.a), pos(e.a, e.b), pos(e.b, e.a), pos(e.b, e.b)]
            })
            .collect();
        let transfers = multigrid::transfer_hierarchy(mesh.n_per_side());
        Ok(Discretization {
            stiffness,
            edge_slots,
            edge_rule: edge_rule(EDGE_POINTS)?,
            load_rule: triangle_rule(LOAD_DEGREE)?,
            transfers,
            mesh,
        })
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(Mesh::unit_square(n)?)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_per_side(&self) -> usize {
        self.mesh.n_per_side()
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub(crate) fn transfers(&self) -> &[CsrRect] {
        &self.transfers
    }

    /// Boundary mass for the coefficient `c(t)`.
    pub fn edge_mass(&self, c: impl Fn(f64) -> f64) -> EdgeMass {
        let rule = &self.edge_rule;
        let mut entries = Vec::with_capacity(self.mesh.boundary_edges().len());
        let mut edges = Vec::with_capacity(entries.capacity());
        for e in self.mesh.boundary_edges() {
            let len = e.length();
            let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let cw = w * c(e.t_a + s * len);
                aa += cw * (1.0 - s) * (1.0 - s);
                ab += cw * (1.0 - s) * s;
                bb += cw * s * s;
            }
            entries.push([len * aa, len * ab, len * bb]);
            edges.push((e.a, e.b));
        }
        EdgeMass {
            n: self.n_per_side(),
            entries,
            edges,
        }
    }

    pub fn robin_mass(&self, a: &RobinParameter) -> EdgeMass {
        self.edge_mass(|t| a.eval(t))
    }

    /// Stiffness plus the boundary mass of `a`, no positivity check.
    pub fn system_matrix(&self, a: &RobinParameter) -> CsrMatrix {
        let mass = self.robin_mass(a);
        let mut m = self.stiffness.clone();
        let vals = m.values_mut();
        for (slots, e) in self.edge_slots.iter().zip(&mass.entries) {
            vals[slots[0]] += e[0];
            vals[slots[1]] += e[1];
            vals[slots[2]] += e[1];
            vals[slots[3]] += e[2];
        }
        m
    }

    /// `l_{f,g}(v_i) = int g v_i ds - int f v_i dx` for every nodal hat function.
    pub fn load_vector(&self, data: &ProblemData) -> Vec<f64> {
        let mut load = vec![0.0; self.n_nodes()];
        if !data.f.is_zero() {
            let rule = &self.load_rule;
            for (t, tri) in self.mesh.triangles().iter().enumerate() {
                let v = self.mesh.triangle_vertices(t);
                let area = self.mesh.signed_area(t);
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    let fw = area * w * data.f.eval(barycentric_to_xy(&v, l));
                    for k in 0..3 {
                        load[tri[k]] -= fw * l[k];
                    }
                }
            }
        }
        if !data.g.is_zero() {
            let rule = &self.edge_rule;
            for e in self.mesh.boundary_edges() {
                let len = e.length();
                for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                    let gw = len * w * data.g.eval(e.t_a + s * len);
                    load[e.a] += gw * (1.0 - s);
                    load[e.b] += gw * s;
                }
            }
        }
        load
    }

    /// Mass matrix restricted to the subdomain.
    pub fn omega_mass(&self, omega: &SubdomainSpec) -> OmegaMass {
        let rule = &self.load_rule;
        let mut triplets = Vec::new();
        let mut area_sum = 0.0;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let v = self.mesh.triangle_vertices(t);
            if !omega.discs().iter().any(|d| triangle_may_meet(&v, d)) {
                continue;
            }
            let area = self.mesh.signed_area(t);
            let mut local = [[0.0; 3]; 3];
            let mut hit = false;
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                if !omega.contains(barycentric_to_xy(&v, l)) {
                    continue;
                }
                hit = true;
                area_sum += area * w;
                for a in 0..3 {
                    for b in 0..3 {
                        local[a][b] += area * w * l[a] * l[b];
                    }
                }
            }
            if hit {
                for a in 0..3 {
                    for b in 0..3 {
                        triplets.push((tri[a], tri[b], local[a][b]));
                    }
                }
            }
        }
        OmegaMass {
            matrix: CsrMatrix::from_triplets(self.n_nodes(), &triplets),
            area: area_sum,
        }
    }

    /// `int_boundary c u v ds` for P1 fields, with the edge rule.
    pub fn boundary_integral(&self, c: impl Fn(f64) -> f64, u: &FemField, v: &FemField) -> f64 {
        self.edge_mass(c).bilinear(u.values(), v.values())
    }
}

fn element_stiffness(v: &[[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let area2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    // gradient of barycentric coordinate k, scaled by twice the area
    let g = |k: usize| {
        let (p, q) = (v[(k + 1) % 3], v[(k + 2) % 3]);
        [p[1] - q[1], q[0] - p[0]]
    };
    let grads = [g(0), g(1), g(2)];
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]) / (2.0 * area2);
        }
    }
    k
}

/// Cheap bounding-box test so only triangles near a disc are sampled.
fn triangle_may_meet(v: &[[f64; 2]; 3], d: &Disc) -> bool {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in v {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    d.center[0] + d.radius >= x0
        && d.center[0] - d.radius <= x1
        && d.center[1] + d.radius >= y0
        && d.center[1] - d.radius <= y1
}
