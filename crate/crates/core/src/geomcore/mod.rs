//! Small dense linear algebra for dimensions up to a few hundred.

mod direction;
mod eigen;
mod haar;
mod matrix;
mod rng;
mod svd;

pub use direction::{hyperplane_frame, normalize_direction, project_to_frame, HyperplaneFrame, UnitDirection};
pub use eigen::{jacobi_eigen, top_eigenvalue_sym, SymEigen, SymmetricMatrix};
pub use haar::{haar_orthogonal, random_orthonormal_set, random_unit_vector};
pub use matrix::{dot, norm, Matrix};
pub use rng::{StreamRng, Streams};
pub use svd::{svd_decompose, LinearMapSpec};
