//! Streaming moment accumulation and the statistics derived from it.

mod experiments;

pub use experiments::{
    accumulate_parallel, rotation_average_experiment, sandwich_check, LinearImage, RotationStats,
    RotationSummary, SandwichCheck, DEFAULT_CHUNKS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomcore::{top_eigenvalue_sym, Matrix, SymmetricMatrix};

pub const DEFAULT_BATCHES: usize = 64;

/// Orthonormal basis `{ηᵢ}` along which marginal and pairwise moments are tracked.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    None,
    Canonical,
    /// Rows are the basis vectors.
    Custom(Matrix),
}

impl Basis {
    pub fn custom(rows: Matrix) -> Result<Self> {
        if rows.rows() != rows.cols() || rows.orthogonality_error() > 1e-10 {
            return Err(Error::DegenerateInput("basis is not a square orthonormal matrix".into()));
        }
        Ok(Basis::Custom(rows))
    }
}

/// Raw weighted sums over one group of samples.
#[derive(Debug, Clone, PartialEq)]
struct Sums {
    count: u64,
    w: f64,
    s1: f64,
    s2: f64,
    s4: f64,
    lin: Vec<f64>,
    cov: SymmetricMatrix,
    p2: Vec<f64>,
    p4: Vec<f64>,
    /// Σw⟨x,ηᵢ⟩²⟨x,ηⱼ⟩², upper triangle (diagonal unused).
    q: SymmetricMatrix,
}

impl Sums {
    fn new(dim: usize, tracked: usize) -> Self {
        Self {
            count: 0,
            w: 0.0,
            s1: 0.0,
            s2: 0.0,
            s4: 0.0,
            lin: vec![0.0; dim],
            cov: SymmetricMatrix::zeros(dim),
            p2: vec![0.0; tracked],
            p4: vec![0.0; tracked],
            q: SymmetricMatrix::zeros(tracked),
        }
    }

    fn add_assign(&mut self, other: &Sums) {
        self.count += other.count;
        self.w += other.w;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s4 += other.s4;
        add_slices(&mut self.lin, &other.lin);
        add_slices(self.cov.packed_mut(), other.cov.packed());
        add_slices(&mut self.p2, &other.p2);
        add_slices(&mut self.p4, &other.p4);
        add_slices(self.q.packed_mut(), other.q.packed());
    }
}

fn add_slices(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Mergeable streaming sums: `Σw`, `Σw|x|`, `Σw|x|²`, `Σw|x|⁴`, `Σw·x`,
/// `Σw·x⊗x`, and per-basis `Σw⟨x,ηᵢ⟩²`, `Σw⟨x,ηᵢ⟩⁴`, `Σw⟨x,ηᵢ⟩²⟨x,ηⱼ⟩²`.
///
/// Samples are dealt round-robin into a fixed number of batches; the totals
/// are the batch sums added up, and the batch-to-batch spread gives the
/// standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    dim: usize,
    basis: Basis,
    count: u64,
    batches: Vec<Sums>,
}

impl MomentAccumulator {
    pub fn new(dim: usize, basis: Basis) -> Result<Self> {
        Self::with_batches(dim, basis, DEFAULT_BATCHES)
    }

    pub fn with_batches(dim: usize, basis: Basis, batches: usize) -> Result<Self> {
        if let Basis::Custom(m) = &basis {
            if m.rows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.rows() });
            }
        }
        if batches == 0 {
            return Err(Error::InsufficientData("at least one batch is required".into()));
        }
        let tracked = if basis == Basis::None { 0 } else { dim };
        Ok(Self { dim, basis, count: 0, batches: vec![Sums::new(dim, tracked); batches] })
    }

    /// A fresh accumulator with the same shape.
    pub fn empty_like(&self) -> Self {
        let tracked = if self.basis == Basis::None { 0 } else { self.dim };
        Self {
            dim: self.dim,
            basis: self.basis.clone(),
            count: 0,
            batches: vec![Sums::new(self.dim, tracked); self.batches.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn weight_sum(&self) -> f64 {
        self.batches.iter().map(|b| b.w).sum()
    }

    pub fn accumulate(&mut self, x: &[f64], w: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::NotFinite(format!("sample weight {w}")));
        }
        let slot = (self.count % self.batches.len() as u64) as usize;
        self.count += 1;
        let batch = &mut self.batches[slot];
        batch.count += 1;
        batch.w += w;

        let r2: f64 = x.iter().map(|v| v * v).sum();
        batch.s1 += w * r2.sqrt();
        batch.s2 += w * r2;
        batch.s4 += w * r2 * r2;

        let cov = batch.cov.packed_mut();
        let mut k = 0;
        for i in 0..self.dim {
            let wx = w * x[i];
            batch.lin[i] += wx;
            for xj in &x[i..] {
                cov[k] += wx * xj;
                k += 1;
            }
        }

        let squares: Vec<f64> = match &self.basis {
            Basis::None => return Ok(()),
            Basis::Canonical => x.iter().map(|v| v * v).collect(),
            Basis::Custom(m) => (0..self.dim)
                .map(|i| {
                    let c: f64 = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                    c * c
                })
                .collect(),
        };
        let q = batch.q.packed_mut();
        let mut k = 0;
        for i in 0..self.dim {
            let wi = w * squares[i];
            batch.p2[i] += wi;
            batch.p4[i] += wi * squares[i];
            k += 1; // diagonal slot
            for sj in &squares[i + 1..] {
                q[k] += wi * sj;
                k += 1;
            }
        }
        Ok(())
    }

    /// Adds `other` into `self`. Both must share dimension, basis and batch count.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if other.batches.len() != self.batches.len() || other.basis != self.basis {
            return Err(Error::DegenerateInput("accumulators differ in basis or batch count".into()));
        }
        self.count += other.count;
        for (a, b) in self.batches.iter_mut().zip(&other.batches) {
            a.add_assign(b);
        }
        Ok(())
    }

    fn totals(&self) -> Sums {
        let mut t = self.batches[0].clone();
        for b in &self.batches[1..] {
            t.add_assign(b);
        }
        t
    }

    /// `trace(Σw·x⊗x)/W` and `Σw|x|²/W`; equal up to rounding.
    pub fn trace_check(&self) -> (f64, f64) {
        let t = self.totals();
        (t.cov.trace() / t.w, t.s2 / t.w)
    }

    pub fn finalize(&self) -> Result<ConjectureReport> {
        let totals = self.totals();
        if totals.count < 2 {
            return Err(Error::InsufficientData(format!("{} samples", totals.count)));
        }
        if !(totals.w > 0.0) {
            return Err(Error::InsufficientData("total weight is zero".into()));
        }
        let full = Stats::from_sums(&totals)?;
        let batch_stats: Vec<Stats> = self
            .batches
            .iter()
            .filter(|b| b.count >= 2 && b.w > 0.0)
            .map(Stats::from_sums)
            .collect::<Result<_>>()?;

        let se = |f: &dyn Fn(&Stats) -> f64| batch_se(batch_stats.iter().map(f));
        let basis = full.basis.as_ref().map(|b| {
            let d = b.m2.len();
            let mut snc_se = vec![vec![0.0; d]; d];
            let mut pair_se = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in 0..d {
                    snc_se[i][j] = se(&|s| s.basis.as_ref().map_or(0.0, |bb| bb.snc[i][j])).unwrap_or(f64::NAN);
                    pair_se[i][j] = se(&|s| s.basis.as_ref().map_or(0.0, |bb| bb.pair[i][j])).unwrap_or(f64::NAN);
                }
            }
            BasisMoments {
                m2: b.m2.clone(),
                m4: b.m4.clone(),
                pair_fourth: b.pair.clone(),
                pair_fourth_se: pair_se,
                snc: b.snc.clone(),
                snc_se,
                a_eta: b.a_eta,
            }
        });

        let offdiag = |pick: fn(f64, f64) -> f64| {
            full.basis.as_ref().and_then(|b| {
                let d = b.m2.len();
                (0..d)
                    .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                    .map(|(i, j)| b.snc[i][j])
                    .reduce(pick)
            })
        };

        Ok(ConjectureReport {
            n: self.dim,
            dim: self.dim,
            body: String::new(),
            theta: None,
            samples: totals.count,
            weight_sum: totals.w,
            batches: batch_stats.len(),
            e_x: full.m1,
            e_x2: full.m2,
            e_x2_se: se(&|s| s.m2),
            e_x4: full.m4,
            var_x2: full.var,
            var_x2_se: se(&|s| s.var),
            lambda2: full.lambda2,
            lambda2_min: full.lambda2_min,
            variance_ratio: full.variance_ratio,
            variance_ratio_se: se(&|s| s.variance_ratio),
            sigma: full.sigma2.sqrt(),
            sigma2: full.sigma2,
            thin_shell_ratio: (full.sigma2 / full.lambda2).sqrt(),
            b2: full.lambda2 / full.lambda2_min,
            snc_min: offdiag(f64::min),
            snc_max: offdiag(f64::max),
            a_eta: basis.as_ref().map(|b| b.a_eta),
            decomposition_residual: basis.as_ref().map(|b| decomposition_residual(full.var, b)),
            basis_moments: basis,
        })
    }
}

fn batch_se(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return None;
    }
    let b = v.len() as f64;
    let mean = v.iter().sum::<f64>() / b;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    Some((var / b).sqrt())
}

struct BasisStats {
    m2: Vec<f64>,
    m4: Vec<f64>,
    pair: Vec<Vec<f64>>,
    snc: Vec<Vec<f64>>,
    a_eta: f64,
}

struct Stats {
    m1: f64,
    m2: f64,
    m4: f64,
    var: f64,
    sigma2: f64,
    lambda2: f64,
    lambda2_min: f64,
    variance_ratio: f64,
    basis: Option<BasisStats>,
}

impl Stats {
    fn from_sums(s: &Sums) -> Result<Self> {
        let w = s.w;
        let m1 = s.s1 / w;
        let m2 = s.s2 / w;
        let m4 = s.s4 / w;
        let var = m4 - m2 * m2;
        let sigma2 = (2.0 * m2 - 2.0 * m2.sqrt() * m1).max(0.0);

        let dim = s.lin.len();
        let mean: Vec<f64> = s.lin.iter().map(|v| v / w).collect();
        let mut centered = SymmetricMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                centered.set(i, j, s.cov.get(i, j) / w - mean[i] * mean[j]);
            }
        }
        let (lambda2, lambda2_min) = top_eigenvalue_sym(&centered)?;

        let basis = (!s.p2.is_empty()).then(|| {
            let d = s.p2.len();
            let m2v: Vec<f64> = s.p2.iter().map(|v| v / w).collect();
            let m4v: Vec<f64> = s.p4.iter().map(|v| v / w).collect();
            let mut pair = vec![vec![0.0; d]; d];
            let mut snc = vec![vec![0.0; d]; d];
            let mut a_eta = 0.0;
            for i in 0..d {
                pair[i][i] = m4v[i];
                snc[i][i] = m4v[i] - m2v[i] * m2v[i];
                for j in i + 1..d {
                    let p = s.q.get(i, j) / w;
                    let c = p - m2v[i] * m2v[j];
                    pair[i][j] = p;
                    pair[j][i] = p;
                    snc[i][j] = c;
                    snc[j][i] = c;
                    a_eta += 2.0 * c;
                }
            }
            BasisStats { m2: m2v, m4: m4v, pair, snc, a_eta }
        });

        Ok(Self {
            m1,
            m2,
            m4,
            var,
            sigma2,
            lambda2,
            lambda2_min,
            variance_ratio: var / (lambda2 * m2),
            basis,
        })
    }
}

/// Moments along the tracked basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisMoments {
    /// `E⟨X,ηᵢ⟩²`.
    pub m2: Vec<f64>,
    /// `E⟨X,ηᵢ⟩⁴`.
    pub m4: Vec<f64>,
    /// `E⟨X,ηᵢ⟩²⟨X,ηⱼ⟩²` (diagonal: `E⟨X,ηᵢ⟩⁴`).
    pub pair_fourth: Vec<Vec<f64>>,
    pub pair_fourth_se: Vec<Vec<f64>>,
    /// `C_ij = E⟨X,ηᵢ⟩²⟨X,ηⱼ⟩² − E⟨X,ηᵢ⟩²E⟨X,ηⱼ⟩²`; the diagonal holds `Var⟨X,ηᵢ⟩²`.
    pub snc: Vec<Vec<f64>>,
    pub snc_se: Vec<Vec<f64>>,
    /// `Σ_{i≠j} C_ij`.
    pub a_eta: f64,
}

/// Every conjecture statistic of one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    /// Ambient dimension of the body (the points themselves live in `dim`).
    pub n: usize,
    pub dim: usize,
    pub body: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<Vec<f64>>,
    pub samples: u64,
    pub weight_sum: f64,
    pub batches: usize,
    pub e_x: f64,
    pub e_x2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub e_x2_se: Option<f64>,
    pub e_x4: f64,
    pub var_x2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub var_x2_se: Option<f64>,
    /// Top eigenvalue of the centred empirical covariance.
    pub lambda2: f64,
    pub lambda2_min: f64,
    /// `Var|X|² / (λ_X²·E|X|²)`.
    pub variance_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variance_ratio_se: Option<f64>,
    /// Thin-shell width `σ_X = √E(|X| − √E|X|²)²`.
    pub sigma: f64,
    pub sigma2: f64,
    /// `σ_X / λ_X`.
    pub thin_shell_ratio: f64,
    /// Spectral condition number `λ_max/λ_min` of the covariance.
    pub b2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub snc_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub snc_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decomposition_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis_moments: Option<BasisMoments>,
}

impl ConjectureReport {
    pub fn with_meta(mut self, n: usize, body: &str, theta: Option<&[f64]>) -> Self {
        self.n = n;
        self.body = body.to_string();
        self.theta = theta.map(|t| t.to_vec());
        self
    }

    fn basis(&self) -> Result<&BasisMoments> {
        self.basis_moments.as_ref().ok_or(Error::NoBasis)
    }
}

fn decomposition_residual(var: f64, b: &BasisMoments) -> f64 {
    let diag: f64 = b.m4.iter().zip(&b.m2).map(|(m4, m2)| m4 - m2 * m2).sum();
    (var - diag - b.a_eta).abs()
}

/// `|Var|X|² − Σᵢ(E⟨X,ηᵢ⟩⁴ − (E⟨X,ηᵢ⟩²)²) − A(η)|`; zero up to rounding.
pub fn variance_decomposition_check(report: &ConjectureReport) -> Result<f64> {
    Ok(decomposition_residual(report.var_x2, report.basis()?))
}

/// The square-correlation matrix `C_ij` (diagonal: `Var⟨X,ηᵢ⟩²`).
pub fn snc_matrix(report: &ConjectureReport) -> Result<Vec<Vec<f64>>> {
    Ok(report.basis()?.snc.clone())
}

/// Weak averaged square correlation `A(η) = Σ_{i≠j} C_ij`.
pub fn weak_avg_snc(report: &ConjectureReport) -> Result<f64> {
    Ok(report.basis()?.a_eta)
}

/// `E⟨X,ηᵢ⟩⁴ / (E⟨X,ηᵢ⟩²)²`.
pub fn borell_ratio(report: &ConjectureReport, i: usize) -> Result<f64> {
    let b = report.basis()?;
    let (m2, m4) = match (b.m2.get(i), b.m4.get(i)) {
        (Some(m2), Some(m4)) => (*m2, *m4),
        _ => return Err(Error::IndexOutOfRange { index: i, n: b.m2.len() }),
    };
    if !(m2 > 0.0) {
        return Err(Error::DegenerateMarginal(i));
    }
    Ok(m4 / (m2 * m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::{haar_orthogonal, StreamRng};
    use crate::samplers::{CubeProjection, PointSampler, ScaledCube};
    use crate::geomcore::normalize_direction;
    use rand::Rng;

    fn fill(acc: &mut MomentAccumulator, s: &dyn PointSampler, m: usize, rng: &mut StreamRng) {
        let mut x = vec![0.0; s.dim()];
        for _ in 0..m {
            let w = s.draw(rng, &mut x);
            acc.accumulate(&x, w).unwrap();
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let mut a = MomentAccumulator::new(3, Basis::Canonical).unwrap();
        a.accumulate(&[1.0, 2.0, 3.0], 1.0).unwrap();
        a.accumulate(&[-1.0, 0.5, 0.0], 1.0).unwrap();
        let before = a.clone();
        a.merge(&a.empty_like()).unwrap();
        assert_eq!(a, before);
    }

    #[test]
    fn split_halves_match_one_pass() {
        let s = ScaledCube::isotropic(5);
        let mut rng = StreamRng::new(1, 0);
        let points: Vec<Vec<f64>> = (0..10_000)
            .map(|_| {
                let mut x = vec![0.0; 5];
                s.draw(&mut rng, &mut x);
                x
            })
            .collect();
        let q = haar_orthogonal(5, &mut rng);
        let basis = Basis::custom(q).unwrap();
        let mut whole = MomentAccumulator::new(5, basis.clone()).unwrap();
        let mut left = whole.empty_like();
        let mut right = whole.empty_like();
        for (k, x) in points.iter().enumerate() {
            whole.accumulate(x, 1.0).unwrap();
            if k % 2 == 0 { left.accumulate(x, 1.0).unwrap() } else { right.accumulate(x, 1.0).unwrap() }
        }
        let mut merged = right.clone();
        merged.merge(&left).unwrap();
        let a = whole.finalize().unwrap();
        let b = merged.finalize().unwrap();
        for (x, y) in [(a.e_x2, b.e_x2), (a.var_x2, b.var_x2), (a.lambda2, b.lambda2), (a.a_eta.unwrap(), b.a_eta.unwrap())] {
            assert!(rel(x, y) <= 1e-10, "{x} vs {y}");
        }
        assert!(merged.merge(&MomentAccumulator::new(4, Basis::Canonical).unwrap()).is_err());
    }

    #[test]
    fn single_weighted_point_dominates() {
        let mut acc = MomentAccumulator::new(2, Basis::Canonical).unwrap();
        acc.accumulate(&[3.0, 4.0], 0.0).unwrap();
        acc.accumulate(&[1.0, 2.0], 2.0).unwrap();
        acc.accumulate(&[-7.0, 1.0], 0.0).unwrap();
        let r = acc.finalize().unwrap();
        assert!((r.e_x2 - 5.0).abs() < 1e-14);
        assert!(r.var_x2.abs() < 1e-12);
        assert!(r.sigma2.abs() < 1e-12);
    }

    #[test]
    fn point_mass_has_zero_spread() {
        let mut acc = MomentAccumulator::new(3, Basis::Canonical).unwrap();
        for _ in 0..10 {
            acc.accumulate(&[0.3, -1.2, 2.0], 1.0).unwrap();
        }
        let r = acc.finalize().unwrap();
        assert!(r.var_x2.abs() <= 1e-12 && r.sigma.abs() <= 1e-6);
    }

    #[test]
    fn errors() {
        let mut acc = MomentAccumulator::new(2, Basis::None).unwrap();
        assert!(matches!(acc.accumulate(&[1.0], 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(acc.accumulate(&[1.0, 1.0], -1.0).is_err());
        acc.accumulate(&[1.0, 1.0], 1.0).unwrap();
        assert!(matches!(acc.finalize(), Err(Error::InsufficientData(_))));
        acc.accumulate(&[1.0, -1.0], 1.0).unwrap();
        let r = acc.finalize().unwrap();
        assert_eq!(variance_decomposition_check(&r), Err(Error::NoBasis));
        assert_eq!(weak_avg_snc(&r), Err(Error::NoBasis));
        assert_eq!(borell_ratio(&r, 0), Err(Error::NoBasis));
        assert!(Basis::custom(Matrix::from_diag(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn equal_weights_match_unweighted() {
        let s = ScaledCube::isotropic(4);
        let mut rng = StreamRng::new(2, 0);
        let mut a = MomentAccumulator::new(4, Basis::Canonical).unwrap();
        let mut b = a.empty_like();
        let mut x = vec![0.0; 4];
        for _ in 0..5000 {
            s.draw(&mut rng, &mut x);
            a.accumulate(&x, 1.0).unwrap();
            b.accumulate(&x, 0.5).unwrap();
        }
        let (ra, rb) = (a.finalize().unwrap(), b.finalize().unwrap());
        for (x, y) in [(ra.e_x2, rb.e_x2), (ra.var_x2, rb.var_x2), (ra.lambda2, rb.lambda2), (ra.sigma2, rb.sigma2)] {
            assert!(rel(x, y) <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn two_point_identity_by_hand() {
        // x = (1, 2), y = (3, −1), canonical basis, equal weights.
        let mut acc = MomentAccumulator::new(2, Basis::Canonical).unwrap();
        acc.accumulate(&[1.0, 2.0], 1.0).unwrap();
        acc.accumulate(&[3.0, -1.0], 1.0).unwrap();
        let r = acc.finalize().unwrap();
        // |x|² = 5, |y|² = 10 → Var = (25 + 100)/2 − 7.5² = 6.25
        assert_eq!(r.var_x2, 6.25);
        let b = r.basis_moments.as_ref().unwrap();
        // m2 = (5, 2.5), m4 = (41, 8.5), pair = (4 + 9)/2 = 6.5
        assert_eq!(b.m2, vec![5.0, 2.5]);
        assert_eq!(b.m4, vec![41.0, 8.5]);
        assert_eq!(b.pair_fourth[0][1], 6.5);
        // diag = (41 − 25) + (8.5 − 6.25) = 18.25, A = 2(6.5 − 12.5) = −12
        assert_eq!(b.a_eta, -12.0);
        assert_eq!(variance_decomposition_check(&r).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_holds_in_any_basis() {
        let theta = normalize_direction(&[0.5, -0.2, 0.7, 0.1, 0.3]).unwrap();
        let s = CubeProjection::new(&theta);
        let mut rng = StreamRng::new(3, 0);
        let mut samples = vec![];
        let mut x = vec![0.0; 4];
        for _ in 0..20_000 {
            s.draw(&mut rng, &mut x);
            samples.push(x.clone());
        }
        let mut vars = vec![];
        let mut a_etas = vec![];
        for k in 0..5 {
            let basis = if k == 0 { Basis::Canonical } else { Basis::custom(haar_orthogonal(4, &mut rng)).unwrap() };
            let mut acc = MomentAccumulator::new(4, basis).unwrap();
            for p in &samples {
                acc.accumulate(p, 1.0).unwrap();
            }
            let r = acc.finalize().unwrap();
            let res = variance_decomposition_check(&r).unwrap();
            assert!(res <= 1e-10 * r.var_x2.max(1.0), "residual {res}");
            assert!(r.sigma2 <= r.var_x2 / r.e_x2);
            vars.push(r.var_x2);
            a_etas.push(r.a_eta.unwrap());
        }
        assert!(vars.iter().all(|v| rel(*v, vars[0]) < 1e-12));
        assert!(a_etas.iter().any(|a| rel(*a, a_etas[0]) > 1e-6));
    }

    #[test]
    fn isotropic_cube_statistics() {
        let n = 8;
        let s = ScaledCube::isotropic(n);
        let mut acc = MomentAccumulator::new(n, Basis::Canonical).unwrap();
        fill(&mut acc, &s, 1_000_000, &mut StreamRng::new(4, 0));
        let r = acc.finalize().unwrap();
        assert!((0.95..=1.05).contains(&r.lambda2), "{}", r.lambda2);
        assert!((0.95..=1.05).contains(&r.lambda2_min));
        // population ratio: n·Var(x²)/(1·n) = 9/5 − 1 = 4/5
        assert!(r.variance_ratio <= 1.0 + 4.0 * r.variance_ratio_se.unwrap());
        assert!((r.variance_ratio - 0.8).abs() <= 4.0 * r.variance_ratio_se.unwrap());
        let (tr, s2) = acc.trace_check();
        assert!(rel(tr, s2) <= 1e-10);
        // independent coordinates: no square correlation in population
        let b = r.basis_moments.as_ref().unwrap();
        for i in 0..n {
            assert!((borell_ratio(&r, i).unwrap() - 1.8).abs() < 0.02);
            for j in i + 1..n {
                assert!(b.snc[i][j].abs() <= 4.0 * b.snc_se[i][j] + 1e-12, "C[{i}][{j}] = {}", b.snc[i][j]);
            }
        }
    }

    #[test]
    fn gaussian_borell_ratio() {
        struct Gauss;
        impl PointSampler for Gauss {
            fn dim(&self) -> usize {
                2
            }
            fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
                for o in out.iter_mut() {
                    *o = rng.sample(rand_distr::StandardNormal);
                }
                1.0
            }
        }
        let mut acc = MomentAccumulator::new(2, Basis::Canonical).unwrap();
        let mut rng = StreamRng::new(5, 0);
        let mut x = [0.0; 2];
        let mut fourth = vec![];
        for _ in 0..1_000_000 {
            Gauss.draw(&mut rng, &mut x);
            acc.accumulate(&x, 1.0).unwrap();
            fourth.push(x[0].powi(4));
        }
        let r = acc.finalize().unwrap();
        let ratio = borell_ratio(&r, 0).unwrap();
        // SE of the ratio dominated by the fourth-moment estimate
        let mean4 = fourth.iter().sum::<f64>() / fourth.len() as f64;
        let sd4 = (fourth.iter().map(|v| (v - mean4).powi(2)).sum::<f64>() / fourth.len() as f64).sqrt();
        let se = sd4 / (fourth.len() as f64).sqrt() * 1.5;
        assert!((ratio - 3.0).abs() <= 4.0 * se, "ratio {ratio}, se {se}");
        let _ = rng.random::<u8>();
    }

    #[test]
    fn hexagon_projection_second_moment() {
        let theta = normalize_direction(&[1.0, 1.0, 1.0]).unwrap();
        let s = CubeProjection::new(&theta);
        let mut acc = MomentAccumulator::new(2, Basis::Canonical).unwrap();
        fill(&mut acc, &s, 1_000_000, &mut StreamRng::new(6, 0));
        let r = acc.finalize().unwrap();
        assert!((r.e_x2 - 10.0 / 9.0).abs() <= 4.0 * r.e_x2_se.unwrap());
    }
}
