//! Trigonometric space of Robin coefficients on the boundary.
//!
//! A coefficient is a function of the arc-length parameter `t in [0, 4)`:
//!
//! ```text
//! a(t) = sum_m alpha_m * 1/2 cos((m - 1) pi t / 2) + sum_n beta_n * 1/2 sin(n pi t / 2)
//! ```
//!
//! with `m = 1..j1` and `n = 1..j2`. Every mode is 4-periodic, so `a` is
//! `C^1` across the start corner of the parametrization.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Default number of samples for sup-norms and positivity checks.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Dimensions of the trigonometric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    /// Number of cosine modes, including the constant mode.
    pub j1: usize,
    /// Number of sine modes.
    pub j2: usize,
}

impl BasisSpec {
    pub fn new(j1: usize, j2: usize) -> Result<Self> {
        if j1 == 0 {
            return Err(Error::InvalidArgument(
                "j1 must be at least 1 so constants are representable".into(),
            ));
        }
        Ok(BasisSpec { j1, j2 })
    }

    pub fn dim(&self) -> usize {
        self.j1 + self.j2
    }
}

/// A single basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `1/2 cos(k pi t / 2)`, `k >= 0`.
    Cos(usize),
    /// `1/2 sin(k pi t / 2)`, `k >= 1`.
    Sin(usize),
}

impl Mode {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Mode::Cos(k) => 0.5 * (k as f64 * FRAC_PI_2 * t).cos(),
            Mode::Sin(k) => 0.5 * (k as f64 * FRAC_PI_2 * t).sin(),
        }
    }

    /// Derivative with respect to arc length.
    pub fn deriv(self, t: f64) -> f64 {
        match self {
            Mode::Cos(k) => {
                let w = k as f64 * FRAC_PI_2;
                -0.5 * w * (w * t).sin()
            }
            Mode::Sin(k) => {
                let w = k as f64 * FRAC_PI_2;
                0.5 * w * (w * t).cos()
            }
        }
    }
}

/// Ordered list of modes; coefficient vectors are indexed in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    modes: Vec<Mode>,
}

impl Basis {
    /// All cosines (constant first), then all sines.
    pub fn trig(spec: BasisSpec) -> Self {
        let modes = (0..spec.j1)
            .map(Mode::Cos)
            .chain((1..=spec.j2).map(Mode::Sin))
            .collect();
        Basis { modes }
    }

    /// Cosines and sines alternating by frequency: `cos0, cos1, sin1, cos2, sin2, ...`.
    pub fn interleaved(spec: BasisSpec) -> Self {
        let mut modes = vec![Mode::Cos(0)];
        for k in 1..spec.j1.max(spec.j2 + 1) {
            if k < spec.j1 {
                modes.push(Mode::Cos(k));
            }
            if k <= spec.j2 {
                modes.push(Mode::Sin(k));
            }
        }
        Basis { modes }
    }

    pub fn from_modes(modes: Vec<Mode>) -> Self {
        Basis { modes }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn position(&self, mode: Mode) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }
}

/// Value of the `j`-th basis function (0-based, cosines first) of `spec` at `t`.
pub fn eval_basis(spec: BasisSpec, j: usize, t: f64) -> Result<f64> {
    if j >= spec.dim() {
        return Err(Error::InvalidArgument(format!(
            "basis index {j} out of range for dimension {}",
            spec.dim()
        )));
    }
    Ok(Basis::trig(spec).modes[j].eval(t))
}

/// A Robin coefficient as a coefficient vector over a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobinParameter {
    basis: Basis,
    coeffs: Vec<f64>,
}

impl RobinParameter {
    /// Blocked cosine/sine coefficients.
    pub fn new(alpha: &[f64], beta: &[f64]) -> Result<Self> {
        let spec = BasisSpec::new(alpha.len(), beta.len())?;
        Ok(RobinParameter {
            basis: Basis::trig(spec),
            coeffs: [alpha, beta].concat(),
        })
    }

    pub fn from_coeffs(basis: Basis, coeffs: Vec<f64>) -> Result<Self> {
        if basis.dim() != coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(RobinParameter { basis, coeffs })
    }

    /// The constant function `c` in the given basis (which must contain `Cos(0)`).
    pub fn constant(basis: Basis, c: f64) -> Result<Self> {
        let pos = basis.position(Mode::Cos(0)).ok_or_else(|| {
            Error::InvalidArgument("basis has no constant mode".into())
        })?;
        let mut coeffs = vec![0.0; basis.dim()];
        coeffs[pos] = 2.0 * c;
        Ok(RobinParameter { basis, coeffs })
    }

    /// Unit coefficient on mode `j` of `basis`.
    pub fn unit(basis: Basis, j: usize) -> Self {
        let mut coeffs = vec![0.0; basis.dim()];
        coeffs[j] = 1.0;
        RobinParameter { basis, coeffs }
    }

    pub fn zero(basis: Basis) -> Self {
        let coeffs = vec![0.0; basis.dim()];
        RobinParameter { basis, coeffs }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Cosine coefficients ordered by frequency.
    pub fn alpha(&self) -> Vec<f64> {
        self.collect_modes(|m| matches!(m, Mode::Cos(_)))
    }

    /// Sine coefficients ordered by frequency.
    pub fn beta(&self) -> Vec<f64> {
        self.collect_modes(|m| matches!(m, Mode::Sin(_)))
    }

    fn collect_modes(&self, keep: impl Fn(Mode) -> bool) -> Vec<f64> {
        let mut pairs: Vec<(usize, f64)> = self
            .basis
            .modes
            .iter()
            .zip(&self.coeffs)
            .filter(|(m, _)| keep(**m))
            .map(|(m, c)| match m {
                Mode::Cos(k) | Mode::Sin(k) => (*k, *c),
            })
            .collect();
        pairs.sort_by_key(|p| p.0);
        pairs.into_iter().map(|p| p.1).collect()
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        Self::from_coeffs(self.basis.clone(), coeffs)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.basis
            .modes
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| c * m.eval(t))
            .sum()
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.basis
            .modes
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| c * m.deriv(t))
            .sum()
    }

    /// `self - other` as a function, over the union of both mode sets.
    pub fn difference(&self, other: &RobinParameter) -> RobinParameter {
        let mut modes = self.basis.modes.clone();
        let mut coeffs = self.coeffs.clone();
        for (m, c) in other.basis.modes.iter().zip(&other.coeffs) {
            match modes.iter().position(|x| x == m) {
                Some(p) => coeffs[p] -= c,
                None => {
                    modes.push(*m);
                    coeffs.push(-c);
                }
            }
        }
        RobinParameter {
            basis: Basis { modes },
            coeffs,
        }
    }

    /// The same function expressed in `basis`, dropping modes it lacks.
    pub fn project_onto(&self, basis: &Basis) -> RobinParameter {
        let coeffs = basis
            .modes
            .iter()
            .map(|m| self.basis.position(*m).map_or(0.0, |p| self.coeffs[p]))
            .collect();
        RobinParameter {
            basis: basis.clone(),
            coeffs,
        }
    }
}

pub fn eval_robin(a: &RobinParameter, t: f64) -> f64 {
    a.eval(t)
}

pub fn eval_robin_tderiv(a: &RobinParameter, t: f64) -> f64 {
    a.deriv(t)
}

fn sample_grid(n_samples: usize) -> impl Iterator<Item = f64> {
    let n = n_samples.max(1);
    (0..n).map(move |k| 4.0 * k as f64 / n as f64)
}

/// Sampled `C^1(boundary)` norm: `max_t |a(t)| + |a'(t)|` on a uniform grid.
pub fn c1_norm(a: &RobinParameter, n_samples: usize) -> f64 {
    sample_grid(n_samples)
        .map(|t| a.eval(t).abs() + a.deriv(t).abs())
        .fold(0.0, f64::max)
}

/// Sampled minimum of `a` over the boundary.
pub fn min_on_boundary(a: &RobinParameter, n_samples: usize) -> f64 {
    sample_grid(n_samples)
        .map(|t| a.eval(t))
        .fold(f64::INFINITY, f64::min)
}

/// `c1_norm(a - b)` with the default sample count.
pub fn c1_distance(a: &RobinParameter, b: &RobinParameter) -> f64 {
    c1_norm(&a.difference(b), DEFAULT_SAMPLES)
}

/// Truth coefficients from the numerical section: `alpha`, `beta` of the
/// six-plus-six mode example.
pub fn reference_truth() -> RobinParameter {
    RobinParameter::new(
        &[10.0, 1.0, -0.5, 2.0, 1.0, -0.5],
        &[0.2, 1.0, -0.5, 2.0, 1.0, -0.5],
    )
    .expect("valid reference coefficients")
}
