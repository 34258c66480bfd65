use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{dot, norm, Matrix};

/// Haar-distributed orthogonal matrix: Householder QR of a standard Gaussian
/// matrix, with the columns of `Q` flipped so that `diag(R) > 0`.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut a = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let mut q = Matrix::identity(n);
    let mut v = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let alpha = {
            let col: Vec<f64> = (k..n).map(|i| a[(i, k)]).collect();
            norm(&col)
        };
        if alpha == 0.0 {
            continue;
        }
        let akk = a[(k, k)];
        let beta = if akk >= 0.0 { -alpha } else { alpha };
        for i in 0..n {
            v[i] = if i < k { 0.0 } else { a[(i, k)] };
        }
        v[k] -= beta;
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm2;
        // A ← (I − s·vvᵀ)·A
        for j in k..n {
            let d: f64 = (k..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * scale;
            for i in k..n {
                a[(i, j)] -= d * v[i];
            }
        }
        // Q ← Q·(I − s·vvᵀ)
        for i in 0..n {
            let d: f64 = (k..n).map(|j| q[(i, j)] * v[j]).sum::<f64>() * scale;
            for j in k..n {
                q[(i, j)] -= d * v[j];
            }
        }
    }

    for j in 0..n {
        if a[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Uniform point on `S^{n−1}` (normalised Gaussian).
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// First `k` columns of a Haar rotation: Gram–Schmidt on Gaussian vectors.
pub fn random_orthonormal_set<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(k <= n, "cannot fit {k} orthonormal vectors in dimension {n}");
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &out {
                let c = dot(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            out.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    out
}
