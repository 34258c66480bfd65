//! Exact moments, exact samplers and empirical conjecture statistics for
//! random vectors uniformly distributed on hyperplane projections of the
//! cube `B∞ⁿ` and the cross-polytope `B₁ⁿ`.
//!
//! The crate is organised in layers:
//!
//! * [`geomcore`]: small dense linear algebra (hyperplane frames, Haar
//!   rotations, Jacobi eigensolver, singular decomposition) and the
//!   reproducible random streams everything else draws from.
//! * [`samplers`]: exact uniform samplers for the simplex, cube facets and the
//!   projected bodies, plus the self-normalised weighted path for the
//!   cross-polytope in high dimension.
//! * [`exactmoments`]: closed-form moments and volumes.
//! * [`oracle`]: brute-force ground truth in dimension ≤ 3 (convex hull,
//!   fan triangulation, exact monomial integration).
//! * [`metrics`]: streaming moment accumulation and every derived statistic
//!   (variance ratio, thin-shell width, square correlations, sandwich bounds,
//!   rotation averages).
//! * [`cli`]: the command-line harness.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exactmoments;
pub mod geomcore;
pub mod metrics;
pub mod oracle;
pub mod samplers;

pub use error::{Error, Result};
pub use geomcore::{
    haar_orthogonal, hyperplane_frame, normalize_direction, project_to_frame, svd_decompose,
    top_eigenvalue_sym, HyperplaneFrame, LinearMapSpec, Matrix, StreamRng, Streams,
    SymmetricMatrix, UnitDirection,
};
pub use metrics::{ConjectureReport, MomentAccumulator};
