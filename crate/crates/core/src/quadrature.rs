//! Fixed quadrature rules for triangles (barycentric) and edges (Gauss-Legendre on `(0, 1)`).
//!
//! Triangle weights are normalized to sum to 1, so an integral over a
//! triangle `T` is `|T| * sum_q w_q f(x_q)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrates `f` over the triangle with the given vertices.
    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, v: &[[f64; 2]; 3], f: F) -> f64 {
        let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
            - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
            .abs();
        let mut sum = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            sum += w * f(barycentric_to_xy(v, l));
        }
        area * sum
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrates `f` over `[0, 1]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

pub fn barycentric_to_xy(v: &[[f64; 2]; 3], l: &[f64; 3]) -> [f64; 2] {
    [
        l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
        l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
    ]
}

/// Symmetric triangle rule exact up to `degree` (1, 2 or 4).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    let (points, weights) = match degree {
        1 => (vec![[1.0 / 3.0; 3]], vec![1.0]),
        2 => (
            vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            vec![1.0 / 3.0; 3],
        ),
        4 => {
            // Strang-Fix / Dunavant six-point rule, closed form
            let s10 = 10f64.sqrt();
            let r = (38.0 - 44.0 * (0.4f64).sqrt()).sqrt();
            let a1 = (8.0 - s10 + r) / 18.0;
            let a2 = (8.0 - s10 - r) / 18.0;
            let q = (213125.0 - 53320.0 * s10).sqrt();
            let w1 = (620.0 + q) / 3720.0;
            let w2 = (620.0 - q) / 3720.0;
            let b1 = 1.0 - 2.0 * a1;
            let b2 = 1.0 - 2.0 * a2;
            (
                vec![
                    [a1, a1, b1],
                    [a1, b1, a1],
                    [b1, a1, a1],
                    [a2, a2, b2],
                    [a2, b2, a2],
                    [b2, a2, a2],
                ],
                vec![w1, w1, w1, w2, w2, w2],
            )
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unsupported triangle rule degree {degree} (expected 1, 2 or 4)"
            )))
        }
    };
    Ok(TriangleRule {
        degree,
        points,
        weights,
    })
}

/// Gauss-Legendre rule with `n_points` nodes mapped to `(0, 1)`.
pub fn edge_rule(n_points: usize) -> Result<EdgeRule> {
    if !(2..=5).contains(&n_points) {
        return Err(Error::InvalidArgument(format!(
            "unsupported edge rule size {n_points} (expected 2..=5)"
        )));
    }
    let (nodes, weights) = gauss_legendre(n_points);
    Ok(EdgeRule {
        points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
    })
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    /// Exact integral of x^p y^q over the reference triangle: p! q! / (p + q + 2)!
    fn ref_monomial(p: u32, q: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn centroid_rule() {
        let r = triangle_rule(1).unwrap();
        assert_eq!(r.points, vec![[1.0 / 3.0; 3]]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn rejects_unsupported() {
        assert!(triangle_rule(3).is_err());
        assert!(triangle_rule(0).is_err());
        assert!(edge_rule(1).is_err());
        assert!(edge_rule(6).is_err());
    }

    #[test]
    fn triangle_rules_exact_to_degree() {
        for deg in [1, 2, 4] {
            let r = triangle_rule(deg).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for p in 0..=deg as u32 {
                for q in 0..=(deg as u32 - p) {
                    let got = r.integrate(&REF, |x| x[0].powi(p as i32) * x[1].powi(q as i32));
                    let want = ref_monomial(p, q);
                    assert!((got - want).abs() < 1e-15, "deg {deg} x^{p} y^{q}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn degree4_on_unit_square() {
        let r = triangle_rule(4).unwrap();
        let f = |x: [f64; 2]| x[0] * x[0] * x[1] * x[1];
        let t1 = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let t2 = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let got = r.integrate(&t1, f) + r.integrate(&t2, f);
        assert!((got - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn two_point_gauss() {
        let r = edge_rule(2).unwrap();
        let d = 1.0 / (2.0 * 3f64.sqrt());
        assert!((r.points[0] - (0.5 - d)).abs() < 1e-15);
        assert!((r.points[1] - (0.5 + d)).abs() < 1e-15);
        assert!(r.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!((r.integrate(|t| t * t * t) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn edge_rules_exact_to_degree() {
        for n in 2..=5 {
            let r = edge_rule(n).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.points.iter().all(|&p| p > 0.0 && p < 1.0));
            for k in 0..(2 * n) as i32 {
                let got = r.integrate(|t| t.powi(k));
                assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cosine_integral() {
        let r = edge_rule(4).unwrap();
        let got = r.integrate(|t| (std::f64::consts::FRAC_PI_2 * t).cos());
        // Gauss error bound (4!)^4 / (9 (8!)^3) (pi/2)^8 ~ 2.1e-8
        assert!((got - 2.0 / std::f64::consts::PI).abs() < 2.2e-8, "{got}");
    }
}
