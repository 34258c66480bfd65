//! Exact uniform samplers for the simplex, cube facets and the hyperplane
//! projections `P_H B∞ⁿ`, `P_H B₁ⁿ`.
//!
//! Both projected bodies are sampled through the facet decomposition of a
//! projected polytope: a uniform point of `P_H K₀` is the projection of a
//! uniform point of a facet `F` chosen with probability proportional to
//! `Vol(P_H F)`. For the cube, `Vol(P_H F_{±i}) ∝ |θᵢ|`; for the
//! cross-polytope the facets are the signed simplices `εΔ_{n−1}` with
//! `Vol(P_H(εΔ)) ∝ |⟨ε, θ⟩|`.
//!
//! All points are returned in [`HyperplaneFrame`] coordinates (length `n − 1`).

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::geomcore::{hyperplane_frame, normalize_direction, HyperplaneFrame, StreamRng, UnitDirection};

/// Largest `n` for which the `2ⁿ` sign table is enumerated.
pub const MAX_EXACT_SIGN_DIM: usize = 20;

/// Source of (possibly weighted) points for the moment accumulators.
pub trait PointSampler: Sync {
    /// Length of each point.
    fn dim(&self) -> usize;

    /// Writes one point into `out` and returns its weight (1 for exact samplers).
    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64;
}

/// Uniform point of `Δ_{n−1} = {y ≥ 0, Σyᵢ = 1}` from normalised exponential spacings.
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut y = vec![0.0; n];
    simplex_into(rng, &mut y);
    y
}

pub(crate) fn simplex_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for y in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *y = e;
        total += e;
    }
    for y in out.iter_mut() {
        *y /= total;
    }
}

/// Uniform point of the facet `{y ∈ B∞ⁿ : y_axis = sign}` (`axis` is 0-based).
pub fn sample_cube_facet<R: Rng + ?Sized>(n: usize, axis: usize, positive: bool, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if axis >= n {
        return Err(Error::IndexOutOfRange { index: axis, n });
    }
    let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    y[axis] = if positive { 1.0 } else { -1.0 };
    Ok(y)
}

fn cumulative(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn pick(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

/// Uniform sampler on `P_H B∞ⁿ`.
#[derive(Debug, Clone)]
pub struct CubeProjection {
    frame: HyperplaneFrame,
    cdf: Vec<f64>,
}

impl CubeProjection {
    pub fn new(theta: &UnitDirection) -> Self {
        Self::with_frame(hyperplane_frame(theta))
    }

    pub fn with_frame(frame: HyperplaneFrame) -> Self {
        let cdf = cumulative(frame.theta().coords().iter().map(|t| t.abs()));
        Self { frame, cdf }
    }

    pub fn frame(&self) -> &HyperplaneFrame {
        &self.frame
    }

    /// Facet-axis probabilities `|θᵢ|/‖θ‖₁`.
    pub fn mixture_weights(&self) -> Vec<f64> {
        self.frame.theta().l1_weights()
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut [f64], out: &mut [f64]) {
        let axis = pick(&self.cdf, rng.random::<f64>());
        for y in scratch.iter_mut() {
            *y = rng.random_range(-1.0..=1.0);
        }
        scratch[axis] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        self.frame.coords_into(scratch, out);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut scratch = vec![0.0; self.frame.n()];
        let mut out = vec![0.0; self.frame.dim()];
        self.draw_into(rng, &mut scratch, &mut out);
        out
    }
}

impl PointSampler for CubeProjection {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        let mut scratch = [0.0; 64];
        if self.frame.n() <= scratch.len() {
            self.draw_into(rng, &mut scratch[..self.frame.n()], out);
        } else {
            let mut scratch = vec![0.0; self.frame.n()];
            self.draw_into(rng, &mut scratch, out);
        }
        1.0
    }
}

/// Exact uniform sample on `P_H B∞ⁿ` in frame coordinates.
pub fn sample_cube_projection<R: Rng + ?Sized>(theta: &UnitDirection, frame: &HyperplaneFrame, rng: &mut R) -> Vec<f64> {
    debug_assert_eq!(frame.theta(), theta);
    CubeProjection::with_frame(frame.clone()).sample(rng)
}

/// Sign pattern `ε ∈ {−1, 1}ⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    /// Bit `i` of `mask` set means `εᵢ = −1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self { signs: (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect() }
    }

    pub fn mask(&self) -> u64 {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.signs.iter().zip(v).map(|(&s, x)| f64::from(s) * x).sum()
    }
}

/// `|⟨ε, θ⟩|` for the sign vector encoded by `mask`.
pub(crate) fn sign_dot_abs(theta: &[f64], mask: u64) -> f64 {
    theta
        .iter()
        .enumerate()
        .map(|(i, t)| if mask >> i & 1 == 1 { -t } else { *t })
        .sum::<f64>()
        .abs()
}

/// Inverse-CDF table of the tilted sign measure `P(ε) ∝ |⟨ε, θ⟩|`.
#[derive(Debug, Clone)]
pub struct TiltedSigns {
    n: usize,
    cdf: Vec<f64>,
}

impl TiltedSigns {
    pub fn new(theta: &UnitDirection) -> Result<Self> {
        let n = theta.n();
        if n > MAX_EXACT_SIGN_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_EXACT_SIGN_DIM });
        }
        let t = theta.coords();
        let cdf = cumulative((0..1u64 << n).map(|m| sign_dot_abs(t, m)));
        Ok(Self { n, cdf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of the sign vector with the given mask.
    pub fn mass(&self, mask: u64) -> f64 {
        let m = mask as usize;
        let lo = if m == 0 { 0.0 } else { self.cdf[m - 1] };
        (self.cdf[m] - lo) / self.cdf[self.cdf.len() - 1]
    }

    pub fn sample_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        pick(&self.cdf, rng.random::<f64>()) as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SignVector {
        SignVector::from_mask(self.n, self.sample_mask(rng))
    }
}

/// One draw from the tilted sign measure. Builds the `2ⁿ` table on every call;
/// hold a [`TiltedSigns`] to reuse it.
pub fn sample_sign_tilted<R: Rng + ?Sized>(theta: &UnitDirection, rng: &mut R) -> Result<SignVector> {
    Ok(TiltedSigns::new(theta)?.sample(rng))
}

/// Points on the cross-polytope projection.
///
/// In exact mode `ε` follows the tilted measure and every weight is 1. In
/// weighted mode `ε` is uniform and the weight is `|⟨ε, θ⟩|`; the ratio
/// `Σw·f(x)/Σw` is then consistent for `E f(X)`.
#[derive(Debug, Clone)]
pub struct CrossProjection {
    frame: HyperplaneFrame,
    signs: Option<TiltedSigns>,
}

impl CrossProjection {
    pub fn exact(theta: &UnitDirection) -> Result<Self> {
        Ok(Self { signs: Some(TiltedSigns::new(theta)?), frame: hyperplane_frame(theta) })
    }

    pub fn weighted(theta: &UnitDirection) -> Self {
        Self { signs: None, frame: hyperplane_frame(theta) }
    }

    /// Exact when `n ≤ 20`, weighted beyond.
    pub fn auto(theta: &UnitDirection) -> Self {
        Self::exact(theta).unwrap_or_else(|_| Self::weighted(theta))
    }

    pub fn is_exact(&self) -> bool {
        self.signs.is_some()
    }

    pub fn frame(&self) -> &HyperplaneFrame {
        &self.frame
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut [f64], out: &mut [f64]) -> f64 {
        let n = self.frame.n();
        simplex_into(rng, scratch);
        let weight = match &self.signs {
            Some(table) => {
                let mask = table.sample_mask(rng);
                for (i, y) in scratch.iter_mut().enumerate() {
                    if mask >> i & 1 == 1 {
                        *y = -*y;
                    }
                }
                1.0
            }
            None => {
                let theta = self.frame.theta().coords();
                let mut dot = 0.0;
                let mut bits = 0u64;
                for (i, y) in scratch.iter_mut().enumerate() {
                    if i % 64 == 0 {
                        bits = rng.random::<u64>();
                    }
                    if bits >> (i % 64) & 1 == 1 {
                        *y = -*y;
                        dot -= theta[i];
                    } else {
                        dot += theta[i];
                    }
                }
                dot.abs()
            }
        };
        debug_assert_eq!(scratch.len(), n);
        self.frame.coords_into(scratch, out);
        weight
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let mut scratch = vec![0.0; self.frame.n()];
        let mut out = vec![0.0; self.frame.dim()];
        let w = self.draw_into(rng, &mut scratch, &mut out);
        (out, w)
    }
}

impl PointSampler for CrossProjection {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        let mut scratch = vec![0.0; self.frame.n()];
        self.draw_into(rng, &mut scratch, out)
    }
}

/// Exact uniform sample on `P_H B₁ⁿ` (requires `n ≤ 20`).
pub fn sample_cross_projection<R: Rng + ?Sized>(theta: &UnitDirection, frame: &HyperplaneFrame, rng: &mut R) -> Result<Vec<f64>> {
    debug_assert_eq!(frame.theta(), theta);
    let table = TiltedSigns::new(theta)?;
    let sampler = CrossProjection { frame: frame.clone(), signs: Some(table) };
    Ok(sampler.sample(rng).0)
}

/// Points with nonnegative importance weights.
#[derive(Debug, Clone, Default)]
pub struct WeightedBatch {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Self-normalised estimate `Σw·f(x) / Σw`.
    pub fn ratio_estimate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let (num, den) = self
            .points
            .iter()
            .zip(&self.weights)
            .fold((0.0, 0.0), |(num, den), (x, w)| (num + w * f(x), den + w));
        num / den
    }
}

/// `m` cross-polytope points with uniform signs and weights `|⟨ε, θ⟩|`.
pub fn weighted_cross_batch<R: Rng + ?Sized>(
    theta: &UnitDirection,
    frame: &HyperplaneFrame,
    m: usize,
    rng: &mut R,
) -> WeightedBatch {
    debug_assert_eq!(frame.theta(), theta);
    let sampler = CrossProjection { frame: frame.clone(), signs: None };
    let mut scratch = vec![0.0; theta.n()];
    let mut batch = WeightedBatch { points: Vec::with_capacity(m), weights: Vec::with_capacity(m) };
    for _ in 0..m {
        let mut out = vec![0.0; frame.dim()];
        let w = sampler.draw_into(rng, &mut scratch, &mut out);
        batch.points.push(out);
        batch.weights.push(w);
    }
    batch
}

/// Uniform point of the cube `[−s, s]ⁿ` (isotropic for `s = √3`).
#[derive(Debug, Clone)]
pub struct ScaledCube {
    n: usize,
    half_side: f64,
}

impl ScaledCube {
    pub fn new(n: usize, half_side: f64) -> Self {
        Self { n, half_side }
    }

    pub fn isotropic(n: usize) -> Self {
        Self::new(n, 3f64.sqrt())
    }
}

impl PointSampler for ScaledCube {
    fn dim(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        for x in out.iter_mut() {
            *x = self.half_side * rng.random_range(-1.0..=1.0);
        }
        1.0
    }
}

/// The simplex `Δ_{n−1}` translated to its barycentre, in the frame of
/// `θ = (1, …, 1)/√n` (so points live in `ℝ^{n−1}`).
#[derive(Debug, Clone)]
pub struct CenteredSimplex {
    frame: HyperplaneFrame,
}

impl CenteredSimplex {
    pub fn new(n: usize) -> Result<Self> {
        let theta = normalize_direction(&vec![1.0; n])?;
        Ok(Self { frame: hyperplane_frame(&theta) })
    }
}

impl PointSampler for CenteredSimplex {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        let n = self.frame.n();
        let mut y = vec![0.0; n];
        simplex_into(rng, &mut y);
        let c = 1.0 / n as f64;
        for v in y.iter_mut() {
            *v -= c;
        }
        self.frame.coords_into(&y, out);
        1.0
    }
}
