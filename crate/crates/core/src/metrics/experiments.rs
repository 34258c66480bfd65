use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Basis, ConjectureReport, MomentAccumulator};
use crate::error::{Error, Result};
use crate::geomcore::{haar_orthogonal, LinearMapSpec, Matrix, StreamRng, Streams};
use crate::samplers::PointSampler;

/// Work is split into this many chunks regardless of the thread count, so
/// results depend only on the seed.
pub const DEFAULT_CHUNKS: u64 = 64;

const TAG_ISOTROPY: u64 = 0x150;
const TAG_ROTATION: u64 = 0x201;
const TAG_HAAR: u64 = 0x202;

/// `x ↦ M·x` applied on top of another sampler.
pub struct LinearImage<'a> {
    pub base: &'a dyn PointSampler,
    pub matrix: Matrix,
}

impl PointSampler for LinearImage<'_> {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        let mut x = vec![0.0; self.base.dim()];
        let w = self.base.draw(rng, &mut x);
        self.matrix.mul_vec_into(&x, out);
        w
    }
}

/// Draws `samples` points in `DEFAULT_CHUNKS` chunks, chunk `c` on stream
/// `keyed(tag, index, c)`, and merges the chunk accumulators in order.
pub fn accumulate_parallel<S: PointSampler + ?Sized>(
    sampler: &S,
    samples: u64,
    streams: &Streams,
    tag: u64,
    index: u64,
    template: &MomentAccumulator,
) -> Result<MomentAccumulator> {
    if sampler.dim() != template.dim() {
        return Err(Error::DimensionMismatch { expected: template.dim(), got: sampler.dim() });
    }
    let chunks = DEFAULT_CHUNKS.min(samples.max(1));
    // Chunks run a thread-pool's worth at a time to bound memory; merging
    // stays in chunk order either way.
    let wave = rayon::current_num_threads().max(1) as u64;
    let mut total = template.empty_like();
    for start in (0..chunks).step_by(wave as usize) {
        let parts: Vec<Result<MomentAccumulator>> = (start..chunks.min(start + wave))
            .into_par_iter()
            .map(|c| {
                let len = samples / chunks + u64::from(c < samples % chunks);
                let mut rng = streams.keyed(tag, index, c);
                let mut acc = template.empty_like();
                let mut x = vec![0.0; sampler.dim()];
                for _ in 0..len {
                    let w = sampler.draw(&mut rng, &mut x);
                    acc.accumulate(&x, w)?;
                }
                Ok(acc)
            })
            .collect();
        for part in parts {
            total.merge(&part?)?;
        }
    }
    Ok(total)
}

/// Both sides of `σ² ≤ Var|TX|²/E|TX|² ≤ C₁σ² + C₂(‖T‖_op²/‖T‖_HS²)λ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub sigma2: f64,
    pub ratio: f64,
    /// `(‖T‖_op²/‖T‖_HS²)·λ_{TX}²`.
    pub op_hs_term: f64,
    pub left_holds: bool,
    /// The `C₁` used for the envelope.
    pub c1: f64,
    /// Smallest `C₂ ≥ 0` making the right side hold with the given `C₁`.
    pub c2_given_c1: f64,
    /// `ratio/σ²`: the `C₁` needed when `C₂ = 0`.
    pub c1_only: f64,
    /// `ratio/op_hs_term`: the `C₂` needed when `C₁ = 0`.
    pub c2_only: f64,
}

pub fn sandwich_check(t: &LinearMapSpec, report: &ConjectureReport, c1: f64) -> Result<SandwichCheck> {
    if report.samples < 2 || !(report.weight_sum > 0.0) {
        return Err(Error::InsufficientData(format!("{} samples", report.samples)));
    }
    if report.dim != t.n() {
        return Err(Error::DimensionMismatch { expected: t.n(), got: report.dim });
    }
    let sigma2 = report.sigma2;
    let (ratio, op_hs_term) = if report.e_x2 > 0.0 {
        (report.var_x2 / report.e_x2, t.op_hs_ratio_sq() * report.lambda2)
    } else {
        (0.0, 0.0)
    };
    let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    // σ² ≤ ratio is an identity of empirical moments; allow for rounding only.
    let slack = 64.0 * f64::EPSILON * report.e_x2.max(ratio).max(1.0);
    Ok(SandwichCheck {
        sigma2,
        ratio,
        op_hs_term,
        left_holds: sigma2 <= ratio + slack,
        c1,
        c2_given_c1: div((ratio - c1 * sigma2).max(0.0), op_hs_term),
        c1_only: div(ratio, sigma2),
        c2_only: div(ratio, op_hs_term),
    })
}

/// Statistics of `T∘U(X)` for one Haar rotation `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationStats {
    pub e_x2: f64,
    pub e_x2_se: f64,
    pub lambda2: f64,
    pub var_x2: f64,
    pub var_x2_se: f64,
    /// `|E|TUX|² − ‖T‖_HS²| / ‖T‖_HS²`.
    pub hs_rel_err: f64,
    /// `|λ² − ‖T‖_op²| / ‖T‖_op²`.
    pub op_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationSummary {
    pub n: usize,
    pub rotations: usize,
    pub samples_per_rotation: u64,
    /// Largest `|eigenvalue − 1|` of the base sampler's covariance.
    pub isotropy_deviation: f64,
    pub op_norm2: f64,
    pub hs_norm2: f64,
    pub mean_var: f64,
    pub mean_var_se: f64,
    /// `mean_var / (‖T‖_op²‖T‖_HS²)`.
    pub ratio: f64,
    pub max_hs_rel_err: f64,
    pub max_op_rel_err: f64,
    pub per_rotation: Vec<RotationStats>,
}

/// Estimates `E_U Var|T∘U(X)|²` over `k` Haar rotations with `m` samples each.
pub fn rotation_average_experiment(
    t: &LinearMapSpec,
    base: &dyn PointSampler,
    k: usize,
    m: u64,
    streams: &Streams,
) -> Result<RotationSummary> {
    let n = t.n();
    if base.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: base.dim() });
    }
    if k == 0 || m < 2 {
        return Err(Error::InsufficientData(format!("{k} rotations of {m} samples")));
    }

    let template = MomentAccumulator::new(n, Basis::None)?;
    let iso = accumulate_parallel(base, m, streams, TAG_ISOTROPY, 0, &template)?.finalize()?;
    let isotropy_deviation = (iso.lambda2 - 1.0).abs().max((iso.lambda2_min - 1.0).abs());
    if !(isotropy_deviation <= 0.05) {
        return Err(Error::NotIsotropic(isotropy_deviation));
    }

    let op_norm2 = t.op_norm * t.op_norm;
    let hs_norm2 = t.hs_norm * t.hs_norm;
    let mut per_rotation = Vec::with_capacity(k);
    for j in 0..k {
        let u = haar_orthogonal(n, &mut streams.keyed(TAG_HAAR, j as u64, 0));
        let image = LinearImage { base, matrix: &t.matrix * &u };
        let r = accumulate_parallel(&image, m, streams, TAG_ROTATION, j as u64, &template)?.finalize()?;
        per_rotation.push(RotationStats {
            e_x2: r.e_x2,
            e_x2_se: r.e_x2_se.unwrap_or(0.0),
            lambda2: r.lambda2,
            var_x2: r.var_x2,
            var_x2_se: r.var_x2_se.unwrap_or(0.0),
            hs_rel_err: (r.e_x2 - hs_norm2).abs() / hs_norm2,
            op_rel_err: (r.lambda2 - op_norm2).abs() / op_norm2,
        });
    }

    let kf = k as f64;
    let mean_var = per_rotation.iter().map(|r| r.var_x2).sum::<f64>() / kf;
    let mean_var_se = per_rotation.iter().map(|r| r.var_x2_se.powi(2)).sum::<f64>().sqrt() / kf;
    Ok(RotationSummary {
        n,
        rotations: k,
        samples_per_rotation: m,
        isotropy_deviation,
        op_norm2,
        hs_norm2,
        mean_var,
        mean_var_se,
        ratio: mean_var / (op_norm2 * hs_norm2),
        max_hs_rel_err: per_rotation.iter().map(|r| r.hs_rel_err).fold(0.0, f64::max),
        max_op_rel_err: per_rotation.iter().map(|r| r.op_rel_err).fold(0.0, f64::max),
        per_rotation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::svd_decompose;
    use crate::samplers::ScaledCube;

    fn diagonal_map(values: &[f64]) -> Result<LinearMapSpec> {
        svd_decompose(&Matrix::from_diag(values))
    }

    #[test]
    fn parallel_result_ignores_thread_count() {
        let s = ScaledCube::isotropic(4);
        let template = MomentAccumulator::new(4, Basis::Canonical).unwrap();
        let streams = Streams::new(9);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| accumulate_parallel(&s, 10_001, &streams, 1, 0, &template).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a, b);
        assert_eq!(a.count(), 10_001);
    }

    #[test]
    fn sandwich_identity_map() {
        let t = diagonal_map(&[1.0; 5]).unwrap();
        let template = MomentAccumulator::new(5, Basis::None).unwrap();
        let r = accumulate_parallel(&ScaledCube::isotropic(5), 100_000, &Streams::new(1), 1, 0, &template)
            .unwrap()
            .finalize()
            .unwrap();
        let s = sandwich_check(&t, &r, 4.0).unwrap();
        assert!(s.left_holds && s.sigma2 <= s.ratio);
        assert!((s.op_hs_term - r.lambda2 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_point_mass() {
        let t = diagonal_map(&[1.0, 2.0]).unwrap();
        let mut acc = MomentAccumulator::new(2, Basis::None).unwrap();
        acc.accumulate(&[1.0, 1.0], 1.0).unwrap();
        acc.accumulate(&[1.0, 1.0], 1.0).unwrap();
        let r = acc.finalize().unwrap();
        let s = sandwich_check(&t, &r, 4.0).unwrap();
        assert!(s.sigma2.abs() < 1e-12 && s.ratio.abs() < 1e-12 && s.left_holds);
    }

    #[test]
    fn scaled_identity_rotations() {
        let n = 4;
        let t = diagonal_map(&[2.0; 4]).unwrap();
        let s = rotation_average_experiment(&t, &ScaledCube::isotropic(n), 8, 100_000, &Streams::new(3)).unwrap();
        assert!((s.hs_norm2 - 16.0).abs() < 1e-12 && (s.op_norm2 - 4.0).abs() < 1e-12);
        assert!(s.max_hs_rel_err < 0.01, "{}", s.max_hs_rel_err);
        assert!(s.max_op_rel_err < 0.05, "{}", s.max_op_rel_err);
    }

    #[test]
    fn non_isotropic_base_is_rejected() {
        let t = diagonal_map(&[1.0; 3]).unwrap();
        let err = rotation_average_experiment(&t, &ScaledCube::new(3, 1.0), 8, 10_000, &Streams::new(3)).unwrap_err();
        assert!(matches!(err, Error::NotIsotropic(_)));
    }
}
