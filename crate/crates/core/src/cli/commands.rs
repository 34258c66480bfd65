use serde::Serialize;

use super::args::{BodyKind, MomentsArgs, OracleArgs, RotateArgs, Sampling, SncArgs, SweepArgs, VolumeArgs};
use super::CliError;
use crate::exactmoments::{
    cube_proj_mixed_fourth, cube_proj_second_moment, cube_proj_snc_gap, cube_proj_volume,
    cross_proj_radial_second_moment, cross_proj_volume,
};
use crate::geomcore::{
    hyperplane_frame, normalize_direction, random_orthonormal_set, random_unit_vector, svd_decompose, Matrix,
    Streams, UnitDirection,
};
use crate::metrics::{
    accumulate_parallel, rotation_average_experiment, variance_decomposition_check, Basis, ConjectureReport,
    MomentAccumulator, RotationSummary,
};
use crate::oracle::{oracle_moments, Body};
use crate::samplers::{CenteredSimplex, CrossProjection, CubeProjection, PointSampler, ScaledCube};

/// Largest dimension the harness accepts; per-batch covariances grow as n².
pub const MAX_N: usize = 200;
pub const SNC_TOLERANCE: f64 = 1e-12;
pub const ORACLE_TOLERANCE: f64 = 1e-9;

const TAG_THETA: u64 = 0x10;
const TAG_SAMPLES: u64 = 0x11;
const TAG_SNC: u64 = 0x12;
const TAG_ORACLE: u64 = 0x13;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_theta(spec: &str, n: usize, streams: &Streams) -> Result<UnitDirection, CliError> {
    let coords: Vec<f64> = if spec == "random" {
        random_unit_vector(n, &mut streams.keyed(TAG_THETA, n as u64, 0))
    } else if let Some(i) = spec.strip_prefix("axis:") {
        let i: usize = i.parse().map_err(|_| usage(format!("bad axis index `{i}`")))?;
        if i == 0 || i > n {
            return Err(usage(format!("axis index {i} outside 1..={n}")));
        }
        (0..n).map(|k| if k + 1 == i { 1.0 } else { 0.0 }).collect()
    } else if let Some(list) = spec.strip_prefix("coords:") {
        parse_numbers(list)?
    } else if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
        parse_numbers(&text)?
    } else {
        return Err(usage(format!("unknown theta spec `{spec}` (random | axis:i | coords:… | file:path)")));
    };
    if coords.len() != n {
        return Err(usage(format!("theta has {} coordinates, expected {n}", coords.len())));
    }
    normalize_direction(&coords).map_err(|e| usage(format!("theta: {e}")))
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| usage(format!("bad number `{s}`"))))
        .collect()
}

fn check_n(body: BodyKind, n: usize) -> Result<(), CliError> {
    let min = if body == BodyKind::Cube { 1 } else { 2 };
    if n < min || n > MAX_N {
        return Err(usage(format!("--n {n} outside {min}..={MAX_N} for {}", body.label())));
    }
    Ok(())
}

fn check_sampling(s: &Sampling) -> Result<(), CliError> {
    if s.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    if s.batches < 2 {
        return Err(usage("--batches must be at least 2"));
    }
    Ok(())
}

/// A sampler together with the direction it was built from.
pub type BuiltSampler = (Box<dyn PointSampler>, Option<Vec<f64>>);

/// The sampler for `body` in dimension `n`.
pub fn build_sampler(body: BodyKind, n: usize, theta_spec: &str, streams: &Streams) -> Result<BuiltSampler, CliError> {
    check_n(body, n)?;
    Ok(match body {
        BodyKind::CubeProj => {
            let theta = parse_theta(theta_spec, n, streams)?;
            (Box::new(CubeProjection::new(&theta)), Some(theta.coords().to_vec()))
        }
        BodyKind::CrossProj => {
            let theta = parse_theta(theta_spec, n, streams)?;
            (Box::new(CrossProjection::auto(&theta)), Some(theta.coords().to_vec()))
        }
        BodyKind::Cube => (Box::new(ScaledCube::isotropic(n)), None),
        BodyKind::Simplex => {
            let s = CenteredSimplex::new(n).map_err(|e| usage(e.to_string()))?;
            let t = 1.0 / (n as f64).sqrt();
            (Box::new(s), Some(vec![t; n]))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportChecks {
    /// `σ² ≤ Var|X|²/E|X|²` up to rounding.
    pub sigma2_le_ratio: bool,
    /// Decomposition residual divided by `max(1, Var|X|²)`.
    pub decomposition_residual_rel: f64,
}

impl ReportChecks {
    pub fn of(r: &ConjectureReport) -> Result<Self, CliError> {
        let residual = variance_decomposition_check(r).map_err(CliError::from)?;
        let ratio = r.var_x2 / r.e_x2;
        Ok(Self {
            sigma2_le_ratio: r.sigma2 <= ratio + 64.0 * f64::EPSILON * r.e_x2.max(1.0),
            decomposition_residual_rel: residual / r.var_x2.max(1.0),
        })
    }

    pub fn passed(&self) -> bool {
        self.sigma2_le_ratio && self.decomposition_residual_rel <= 1e-10
    }
}

fn sample_report(
    body: BodyKind,
    n: usize,
    theta_spec: &str,
    sampling: &Sampling,
    streams: &Streams,
) -> Result<ConjectureReport, CliError> {
    let (sampler, theta) = build_sampler(body, n, theta_spec, streams)?;
    let template = MomentAccumulator::with_batches(sampler.dim(), Basis::Canonical, sampling.batches)?;
    let acc = accumulate_parallel(&*sampler, sampling.samples, streams, TAG_SAMPLES, n as u64, &template)?;
    Ok(acc.finalize()?.with_meta(n, body.label(), theta.as_deref()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentsResult {
    pub report: ConjectureReport,
    pub checks: ReportChecks,
}

pub fn moments(a: &MomentsArgs) -> Result<MomentsResult, CliError> {
    check_sampling(&a.sampling)?;
    let streams = Streams::new(a.common.seed);
    let report = sample_report(a.body, a.n, &a.theta, &a.sampling, &streams)?;
    let checks = ReportChecks::of(&report)?;
    Ok(MomentsResult { report, checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<ConjectureReport>,
    pub checks: Vec<ReportChecks>,
}

pub fn sweep(a: &SweepArgs) -> Result<SweepResult, CliError> {
    check_sampling(&a.sampling)?;
    if a.n_min > a.n_max {
        return Err(usage(format!("--n-min {} exceeds --n-max {}", a.n_min, a.n_max)));
    }
    let streams = Streams::new(a.common.seed);
    let mut rows = vec![];
    let mut checks = vec![];
    for n in a.n_min..=a.n_max {
        let r = sample_report(a.body, n, &a.theta, &a.sampling, &streams)?;
        checks.push(ReportChecks::of(&r)?);
        rows.push(r);
    }
    Ok(SweepResult { rows, checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct SncResult {
    pub n: usize,
    pub trials: usize,
    pub max_gap: f64,
    pub min_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_snc(a: &SncArgs) -> Result<SncResult, CliError> {
    if a.n < 3 || a.n > 10_000 {
        return Err(usage(format!("--n {} outside 3..=10000", a.n)));
    }
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let streams = Streams::new(a.common.seed);
    let mut max_gap = f64::NEG_INFINITY;
    let mut min_gap = f64::INFINITY;
    for t in 0..a.trials {
        let set = random_orthonormal_set(a.n, 3, &mut streams.keyed(TAG_SNC, a.n as u64, t as u64));
        let theta = normalize_direction(&set[0])?;
        let gap = cube_proj_snc_gap(&theta, &set[1], &set[2])?;
        max_gap = max_gap.max(gap);
        min_gap = min_gap.min(gap);
    }
    Ok(SncResult {
        n: a.n,
        trials: a.trials,
        max_gap,
        min_gap,
        tolerance: SNC_TOLERANCE,
        passed: max_gap <= SNC_TOLERANCE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RotateResult {
    pub t_diag: Vec<f64>,
    pub summary: RotationSummary,
    /// Every rotation has `E|TUX|²` within 1% of `‖T‖_HS²`.
    pub hs_identity_holds: bool,
    /// Every rotation has `λ²` within 5% of `‖T‖_op²`.
    pub op_identity_holds: bool,
}

pub fn rotate(a: &RotateArgs) -> Result<RotateResult, CliError> {
    check_sampling(&a.sampling)?;
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let streams = Streams::new(a.common.seed);
    let (base, _) = build_sampler(a.body, a.n, "random", &streams)?;
    let d = base.dim();
    let t_diag = match &a.t_diag {
        Some(s) => parse_numbers(s)?,
        None => (0..d).map(|i| if i + 1 == d { 10.0 } else { 1.0 }).collect(),
    };
    if t_diag.len() != d {
        return Err(usage(format!("--t-diag has {} entries, expected {d}", t_diag.len())));
    }
    let t = svd_decompose(&Matrix::from_diag(&t_diag)).map_err(|e| usage(format!("--t-diag: {e}")))?;
    let summary = rotation_average_experiment(&t, &*base, a.trials, a.sampling.samples, &streams)?;
    Ok(RotateResult {
        t_diag,
        hs_identity_holds: summary.max_hs_rel_err <= 0.01,
        op_identity_holds: summary.max_op_rel_err <= 0.05,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloCheck {
    pub quantity: String,
    pub estimate: f64,
    pub se: f64,
    pub oracle: f64,
    /// `(estimate − oracle)/se`.
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub n: usize,
    pub body: String,
    pub theta: Vec<f64>,
    pub comparisons: Vec<Comparison>,
    pub max_delta: f64,
    pub tolerance: f64,
    pub monte_carlo: Vec<MonteCarloCheck>,
    pub passed: bool,
}

fn oracle_body(body: BodyKind) -> Result<Body, CliError> {
    match body {
        BodyKind::CubeProj => Ok(Body::Cube),
        BodyKind::CrossProj => Ok(Body::Cross),
        other => Err(usage(format!("{} has no projected-vertex oracle; use cube-proj or cross-proj", other.label()))),
    }
}

pub fn oracle_compare(a: &OracleArgs) -> Result<OracleResult, CliError> {
    check_sampling(&a.sampling)?;
    let body = oracle_body(a.body)?;
    if !(2..=4).contains(&a.n) {
        return Err(usage(format!("--n {} outside 2..=4 for the oracle", a.n)));
    }
    let streams = Streams::new(a.common.seed);
    let theta = parse_theta(&a.theta, a.n, &streams)?;
    let frame = hyperplane_frame(&theta);
    let om = oracle_moments(body, &frame)?;
    let d = frame.dim();
    let unit = |j: usize| (0..d).map(|k| if k == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();

    let mut comparisons = vec![];
    let mut push = |quantity: String, closed_form: f64, oracle: f64| {
        comparisons.push(Comparison { quantity, closed_form, oracle, delta: (closed_form - oracle).abs() });
    };
    match body {
        Body::Cube => {
            push("volume".into(), cube_proj_volume(&theta), om.volume);
            for j in 0..d {
                let ej = unit(j);
                let closed = cube_proj_second_moment(&theta, &frame.basis()[j])?;
                push(format!("E<X,eta{}>^2", j + 1), closed, om.expect_product(&[&ej, &ej])?);
                for k in j + 1..d {
                    let ek = unit(k);
                    let closed = cube_proj_mixed_fourth(&theta, &frame.basis()[j], &frame.basis()[k])?;
                    let oracle = om.expect_product(&[&ej, &ej, &ek, &ek])?;
                    push(format!("E<X,eta{}>^2<X,eta{}>^2", j + 1, k + 1), closed, oracle);
                }
            }
        }
        Body::Cross => {
            push("volume".into(), cross_proj_volume(&theta)?, om.volume);
            push("E|X|^2".into(), cross_proj_radial_second_moment(&theta)?, om.e_x2);
        }
    }
    let max_delta = comparisons.iter().map(|c| c.delta).fold(0.0, f64::max);

    let (sampler, _) = build_sampler(a.body, a.n, &a.theta, &streams)?;
    let template = MomentAccumulator::with_batches(d, Basis::None, a.sampling.batches)?;
    let r = accumulate_parallel(&*sampler, a.sampling.samples, &streams, TAG_ORACLE, a.n as u64, &template)?
        .finalize()?;
    let mc = |quantity: &str, estimate: f64, se: Option<f64>, oracle: f64| {
        let se = se.unwrap_or(0.0);
        MonteCarloCheck { quantity: quantity.into(), estimate, se, oracle, z: if se > 0.0 { (estimate - oracle) / se } else { 0.0 } }
    };
    let monte_carlo = vec![
        mc("E|X|^2", r.e_x2, r.e_x2_se, om.e_x2),
        mc("Var|X|^2", r.var_x2, r.var_x2_se, om.var_x2),
    ];

    Ok(OracleResult {
        n: a.n,
        body: a.body.label().into(),
        theta: theta.coords().to_vec(),
        comparisons,
        max_delta,
        tolerance: ORACLE_TOLERANCE,
        monte_carlo,
        passed: max_delta <= ORACLE_TOLERANCE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeResult {
    pub n: usize,
    pub body: String,
    pub theta: Vec<f64>,
    pub volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_volume: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_delta: Option<f64>,
    pub passed: bool,
}

pub fn volume(a: &VolumeArgs) -> Result<VolumeResult, CliError> {
    let body = oracle_body(a.body)?;
    check_n(a.body, a.n)?;
    let streams = Streams::new(a.common.seed);
    let theta = parse_theta(&a.theta, a.n, &streams)?;
    let volume = match body {
        Body::Cube => cube_proj_volume(&theta),
        Body::Cross => cross_proj_volume(&theta).map_err(|e| usage(e.to_string()))?,
    };
    let oracle_volume = if a.n <= 4 { Some(oracle_moments(body, &hyperplane_frame(&theta))?.volume) } else { None };
    let relative_delta = oracle_volume.map(|v| (v - volume).abs() / volume.abs().max(1e-300));
    Ok(VolumeResult {
        n: a.n,
        body: a.body.label().into(),
        theta: theta.coords().to_vec(),
        volume,
        oracle_volume,
        relative_delta,
        passed: relative_delta.is_none_or(|d| d <= ORACLE_TOLERANCE),
    })
}
