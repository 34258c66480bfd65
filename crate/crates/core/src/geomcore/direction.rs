use serde::Serialize;

use super::matrix::{dot, norm};
use crate::error::{Error, Result};

/// Unit normal `θ` of a hyperplane `H = θ⊥`, with its ℓ₁ norm cached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitDirection {
    coords: Vec<f64>,
    l1: f64,
}

impl UnitDirection {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// Standard basis vector `e_axis` (0-based).
    pub fn axis(n: usize, axis: usize) -> Result<Self> {
        if axis >= n {
            return Err(Error::IndexOutOfRange { index: axis, n });
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        normalize_direction(&v)
    }

    /// Cube mixture weights `|θᵢ| / ‖θ‖₁`.
    pub fn l1_weights(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.abs() / self.l1).collect()
    }
}

pub fn normalize_direction(v: &[f64]) -> Result<UnitDirection> {
    if v.len() < 2 {
        return Err(Error::DimensionTooSmall(v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotFinite("direction coordinates".into()));
    }
    let len = norm(v);
    if len < 1e-300 {
        return Err(Error::ZeroVector);
    }
    let coords: Vec<f64> = v.iter().map(|x| x / len).collect();
    let l1 = coords.iter().map(|x| x.abs()).sum();
    Ok(UnitDirection { coords, l1 })
}

/// Orthonormal basis of `θ⊥`, taken from the Householder reflection that
/// exchanges `θ` with `∓e_n`.
///
/// With `u = θ + sign(θ_n)·e_n` the reflection `R = I − 2uuᵀ/|u|²` is
/// symmetric and orthogonal, its last column is `−sign(θ_n)·θ`, and its first
/// `n − 1` columns are the frame. `|u|² = 2(1 + |θ_n|) ≥ 2`, so the
/// construction never divides by a small number.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneFrame {
    theta: UnitDirection,
    reflector: Vec<f64>,
    scale: f64,
    basis: Vec<Vec<f64>>,
}

pub fn hyperplane_frame(theta: &UnitDirection) -> HyperplaneFrame {
    let n = theta.n();
    let t = theta.coords();
    let pivot = if t[n - 1] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = t.to_vec();
    u[n - 1] += pivot;
    let scale = 2.0 / dot(&u, &u);
    let basis = (0..n - 1)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    delta - scale * u[i] * u[j]
                })
                .collect()
        })
        .collect();
    HyperplaneFrame { theta: theta.clone(), reflector: u, scale, basis }
}

impl HyperplaneFrame {
    pub fn theta(&self) -> &UnitDirection {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    /// Dimension of `H`, i.e. `n − 1`.
    pub fn dim(&self) -> usize {
        self.theta.n() - 1
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Frame coordinates of `x`, written into `out` (length `n − 1`).
    ///
    /// Uses the reflector directly, so the cost is `O(n)`.
    pub fn coords_into(&self, x: &[f64], out: &mut [f64]) {
        let k = self.scale * dot(&self.reflector, x);
        for (j, o) in out.iter_mut().enumerate() {
            *o = x[j] - k * self.reflector[j];
        }
    }

    /// Maps frame coordinates back into `ℝⁿ` (a point of `H`).
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; n];
        for (c, b) in coords.iter().zip(&self.basis) {
            for i in 0..n {
                x[i] += c * b[i];
            }
        }
        x
    }
}

pub fn project_to_frame(x: &[f64], frame: &HyperplaneFrame) -> Result<Vec<f64>> {
    if x.len() != frame.n() {
        return Err(Error::DimensionMismatch { expected: frame.n(), got: x.len() });
    }
    let mut out = vec![0.0; frame.dim()];
    frame.coords_into(x, &mut out);
    Ok(out)
}
