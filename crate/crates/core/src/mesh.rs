//! Structured triangulation of the unit square and the arc-length
//! parametrization of its boundary.
//!
//! Nodes are laid out row-major on the lattice `(i/N, j/N)`, node index
//! `i + j (N + 1)`. Every lattice cell is split along the diagonal from
//! `(i, j)` to `(i + 1, j + 1)`, so a mesh with `N_fine = k N_coarse` contains
//! the coarse mesh as a sub-triangulation and coarse nodes coincide bitwise
//! with fine nodes.
//!
//! The boundary is parametrized by arc length `t in [0, 4)`, positively
//! oriented, starting at the bottom-left corner.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Tolerance used to decide whether a point lies on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A straight boundary edge between two nodes, with arc-length parameters.
///
/// `t_a < t_b` always holds; the final edge closing the loop ends at `t_b = 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub t_a: f64,
    pub t_b: f64,
}

impl BoundaryEdge {
    pub fn length(&self) -> f64 {
        self.t_b - self.t_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub t: f64,
    pub xy: Point,
}

impl BoundaryPoint {
    pub fn at(t: f64) -> Self {
        let t = t.rem_euclid(4.0);
        BoundaryPoint {
            t,
            xy: boundary_param(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    /// Builds the `N x N` structured triangulation of `[0, 1]^2`.
    pub fn unit_square(n_per_side: usize) -> Result<Self> {
        if n_per_side < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_per_side must be at least 2, got {n_per_side}"
            )));
        }
        let n = n_per_side;
        let nf = n as f64;
        let stride = n + 1;

        let mut nodes = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 / nf, j as f64 / nf]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let n00 = i + j * stride;
                let n10 = n00 + 1;
                let n01 = n00 + stride;
                let n11 = n01 + 1;
                triangles.push([n00, n10, n11]);
                triangles.push([n00, n11, n01]);
            }
        }

        let mut boundary_edges = Vec::with_capacity(4 * n);
        let param = |side: usize, k: usize| side as f64 + k as f64 / nf;
        // bottom, left to right
        for k in 0..n {
            boundary_edges.push(BoundaryEdge {
                a: k,
                b: k + 1,
                t_a: param(0, k),
                t_b: param(0, k + 1),
            });
        }
        // right, bottom to top
        for k in 0..n {
            boundary_edges.push(BoundaryEdge {
                a: n + k * stride,
                b: n + (k + 1) * stride,
                t_a: param(1, k),
                t_b: param(1, k + 1),
            });
        }
        // top, right to left
        for k in 0..n {
            boundary_edges.push(BoundaryEdge {
                a: (n - k) + n * stride,
                b: (n - k - 1) + n * stride,
                t_a: param(2, k),
                t_b: param(2, k + 1),
            });
        }
        // left, top to bottom
        for k in 0..n {
            boundary_edges.push(BoundaryEdge {
                a: (n - k) * stride,
                b: (n - k - 1) * stride,
                t_a: param(3, k),
                t_b: param(3, k + 1),
            });
        }

        Ok(Mesh {
            n,
            nodes,
            triangles,
            boundary_edges,
        })
    }

    pub fn n_per_side(&self) -> usize {
        self.n
    }

    /// Mesh size `sqrt(2) / N` (diameter of a cell).
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + j * (self.n + 1)
    }

    pub fn triangle_vertices(&self, tri: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[tri];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area of a triangle (positive for counterclockwise orientation).
    pub fn signed_area(&self, tri: usize) -> f64 {
        let [p, q, r] = self.triangle_vertices(tri);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    /// Number of distinct mesh edges (interior and boundary).
    pub fn n_edges(&self) -> usize {
        // horizontal + vertical + one diagonal per cell
        2 * self.n * (self.n + 1) + self.n * self.n
    }

    /// Finds the triangle containing `p` and the barycentric weights of its
    /// three vertices. Points outside the square are clamped onto it.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        let nf = self.n as f64;
        let x = p[0].clamp(0.0, 1.0) * nf;
        let y = p[1].clamp(0.0, 1.0) * nf;
        let i = (x.floor() as usize).min(self.n - 1);
        let j = (y.floor() as usize).min(self.n - 1);
        let xi = x - i as f64;
        let eta = y - j as f64;
        let cell = 2 * (i + j * self.n);
        if xi >= eta {
            (cell, [1.0 - xi, xi - eta, eta])
        } else {
            (cell + 1, [1.0 - eta, xi, eta - xi])
        }
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let stride = self.n + 1;
        let (i, j) = (idx % stride, idx / stride);
        i == 0 || j == 0 || i == self.n || j == self.n
    }
}

/// Arc-length parametrization `p(t)` of the boundary, `t` reduced modulo 4.
pub fn boundary_param(t: f64) -> Point {
    let t = t.rem_euclid(4.0);
    if t < 1.0 {
        [t, 0.0]
    } else if t < 2.0 {
        [1.0, t - 1.0]
    } else if t < 3.0 {
        [3.0 - t, 1.0]
    } else {
        [0.0, 4.0 - t]
    }
}

/// Inverse of [`boundary_param`], returning the representative in `[0, 4)`.
pub fn boundary_inverse_param(xy: Point) -> Result<f64> {
    let [x, y] = xy;
    let not_on = || Error::NotOnBoundary { x, y };
    if !(x.is_finite() && y.is_finite()) {
        return Err(not_on());
    }
    let inside = |v: f64| (-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&v);
    if !inside(x) || !inside(y) {
        return Err(not_on());
    }
    let x = x.clamp(0.0, 1.0);
    let y = y.clamp(0.0, 1.0);
    let t = if y <= BOUNDARY_TOL && x < 1.0 - BOUNDARY_TOL {
        x
    } else if x >= 1.0 - BOUNDARY_TOL && y < 1.0 - BOUNDARY_TOL {
        1.0 + y
    } else if y >= 1.0 - BOUNDARY_TOL && x > BOUNDARY_TOL {
        3.0 - x
    } else if x <= BOUNDARY_TOL {
        4.0 - y
    } else {
        return Err(not_on());
    };
    // snap corners onto their exact parameter value
    let t = if (t - t.round()).abs() <= BOUNDARY_TOL {
        t.round()
    } else {
        t
    };
    Ok(if t >= 4.0 { t - 4.0 } else { t })
}
