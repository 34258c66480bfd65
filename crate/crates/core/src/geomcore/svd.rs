use super::matrix::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Invertible linear map `T = V·diag(Λ)·U₁` with cached norms.
#[derive(Debug, Clone)]
pub struct LinearMapSpec {
    pub matrix: Matrix,
    /// Descending, all positive.
    pub singular_values: Vec<f64>,
    pub left: Matrix,
    pub right: Matrix,
    pub op_norm: f64,
    pub hs_norm: f64,
}

impl LinearMapSpec {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.mul_vec_into(x, out)
    }

    /// `V·diag(Λ)·U₁`.
    pub fn rebuild(&self) -> Matrix {
        let vl = Matrix::from_fn(self.n(), self.n(), |i, j| self.left[(i, j)] * self.singular_values[j]);
        &vl * &self.right
    }

    /// `‖T‖_op² / ‖T‖_HS²`.
    pub fn op_hs_ratio_sq(&self) -> f64 {
        (self.op_norm / self.hs_norm).powi(2)
    }
}

/// Singular decomposition through the eigendecomposition of `TᵀT`.
///
/// The Jacobi rotations that diagonalise `TᵀT` are applied to the columns of
/// `T` directly (one-sided Jacobi), so `TᵀT` is never formed and small singular
/// values keep full relative accuracy. On exit `T·W` has orthogonal columns
/// of lengths `λⱼ`, `U₁ = Wᵀ`, and `V = T·U₁ᵀ·diag(1/λ)`.
pub fn svd_decompose(matrix: &Matrix) -> Result<LinearMapSpec> {
    let n = matrix.rows();
    if matrix.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: matrix.cols() });
    }
    if !matrix.is_finite() {
        return Err(Error::NotFinite("linear map entries".into()));
    }
    let mut a = matrix.clone();
    let mut w = Matrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    alpha += a[(i, p)] * a[(i, p)];
                    beta += a[(i, q)] * a[(i, q)];
                    gamma += a[(i, p)] * a[(i, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, q)] = s * ap + c * aq;
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let max = singular_values.first().copied().unwrap_or(0.0);
    let min = singular_values.last().copied().unwrap_or(0.0);
    if n == 0 || !(min > 1e-12 * max) {
        return Err(Error::SingularMatrix);
    }

    let left = Matrix::from_fn(n, n, |i, c| a[(i, order[c])] / singular_values[c]);
    let right = Matrix::from_fn(n, n, |r, j| w[(j, order[r])]);
    let hs_norm = singular_values.iter().map(|l| l * l).sum::<f64>().sqrt();
    Ok(LinearMapSpec {
        matrix: matrix.clone(),
        singular_values,
        left,
        right,
        op_norm: max,
        hs_norm,
    })
}
