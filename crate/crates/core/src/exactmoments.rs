//! Closed-form moments and volumes.
//!
//! Simplex and spherical moments are exact rationals. Everything that depends
//! on `θ` is evaluated in `f64`. Sums over the `2ⁿ` sign vectors use
//! compensated summation and are limited to `n ≤ 20`.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};

use crate::error::{Error, Result};
use crate::geomcore::{dot, hyperplane_frame, top_eigenvalue_sym, SymmetricMatrix, UnitDirection};
use crate::samplers::{sign_dot_abs, MAX_EXACT_SIGN_DIM};

pub type Rational = Ratio<i128>;

const GEOMETRY_TOL: f64 = 1e-10;

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: impl Into<Vec<u32>>) -> Self {
        Self(exponents.into())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_dim(theta: &UnitDirection, v: &[f64]) -> Result<()> {
    if v.len() != theta.n() {
        return Err(Error::DimensionMismatch { expected: theta.n(), got: v.len() });
    }
    Ok(())
}

fn check_in_hyperplane(theta: &UnitDirection, eta: &[f64]) -> Result<()> {
    check_dim(theta, eta)?;
    let len = dot(eta, eta).sqrt();
    if (len - 1.0).abs() > GEOMETRY_TOL {
        return Err(Error::NotUnit(len));
    }
    let t = dot(eta, theta.coords());
    if t.abs() > GEOMETRY_TOL {
        return Err(Error::NotOrthogonal(t));
    }
    Ok(())
}

/// `E⟨X, η⟩²` for `X` uniform on `P_H B∞ⁿ`: `1/3 + (2/3)·Σⱼ ηⱼ²|θⱼ|/‖θ‖₁`.
pub fn cube_proj_second_moment(theta: &UnitDirection, eta: &[f64]) -> Result<f64> {
    check_in_hyperplane(theta, eta)?;
    let weighted: f64 = theta
        .coords()
        .iter()
        .zip(eta)
        .map(|(t, e)| e * e * t.abs())
        .sum::<f64>()
        / theta.l1();
    Ok(1.0 / 3.0 + 2.0 / 3.0 * weighted)
}

/// Coefficients `(c₁, c₂, c₃)` of the mixed fourth moment, from expanding
/// `E⟨Y, η₁⟩²⟨Y, η₂⟩²` over a facet point `Y` with `E y⁴ = 1/5`,
/// `E y_p² y_q² = 1/9` and the cross pairing counted twice.
pub const MIXED_FOURTH_COEFFS: (f64, f64, f64) = (2.0 / 9.0, -2.0 / 3.0, -2.0 / 15.0);

/// `E⟨X, η₁⟩²⟨X, η₂⟩²` for `X` uniform on `P_H B∞ⁿ`:
///
/// `1/9 + Σᵢ wᵢ [c₁(η₁(i)² + η₂(i)²) + c₂ η₁(i)²η₂(i)² + c₃ Σ_{l≠i} η₁(l)²η₂(l)²]`
/// with `wᵢ = |θᵢ|/‖θ‖₁` and `(c₁, c₂, c₃) = (2/9, −2/3, −2/15)`.
pub fn cube_proj_mixed_fourth(theta: &UnitDirection, eta1: &[f64], eta2: &[f64]) -> Result<f64> {
    check_in_hyperplane(theta, eta1).map_err(|_| Error::NotOrthonormalTriple)?;
    check_in_hyperplane(theta, eta2).map_err(|_| Error::NotOrthonormalTriple)?;
    if dot(eta1, eta2).abs() > GEOMETRY_TOL {
        return Err(Error::NotOrthonormalTriple);
    }
    let (c1, c2, c3) = MIXED_FOURTH_COEFFS;
    let products: Vec<f64> = eta1.iter().zip(eta2).map(|(a, b)| a * a * b * b).collect();
    let total: f64 = products.iter().sum();
    let l1 = theta.l1();
    let sum: f64 = theta
        .coords()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (a2, b2) = (eta1[i] * eta1[i], eta2[i] * eta2[i]);
            t.abs() / l1 * (c1 * (a2 + b2) + c2 * products[i] + c3 * (total - products[i]))
        })
        .sum();
    Ok(1.0 / 9.0 + sum)
}

/// `E⟨X,η₁⟩²⟨X,η₂⟩² − E⟨X,η₁⟩² E⟨X,η₂⟩²`; never positive for cube projections.
pub fn cube_proj_snc_gap(theta: &UnitDirection, eta1: &[f64], eta2: &[f64]) -> Result<f64> {
    let mixed = cube_proj_mixed_fourth(theta, eta1, eta2)?;
    Ok(mixed - cube_proj_second_moment(theta, eta1)? * cube_proj_second_moment(theta, eta2)?)
}

/// `Vol_{n−1}(P_H B∞ⁿ) = 2^{n−1}‖θ‖₁`.
pub fn cube_proj_volume(theta: &UnitDirection) -> f64 {
    2f64.powi(theta.n() as i32 - 1) * theta.l1()
}

/// `Vol_{n−1}(P_H F_i) = 2^{n−1}|θᵢ|` (0-based `i`; same for `F_{+i}` and `F_{−i}`).
pub fn cube_facet_proj_volume(theta: &UnitDirection, i: usize) -> Result<f64> {
    let t = theta.coords().get(i).ok_or(Error::IndexOutOfRange { index: i, n: theta.n() })?;
    Ok(2f64.powi(theta.n() as i32 - 1) * t.abs())
}

/// Second-moment matrix `(1/3)I + (2/3)diag(|θ|/‖θ‖₁)` of `P_H B∞ⁿ`, in `ℝⁿ`.
pub fn cube_proj_moment_form(theta: &UnitDirection) -> SymmetricMatrix {
    let diag: Vec<f64> = theta.l1_weights().iter().map(|w| 1.0 / 3.0 + 2.0 / 3.0 * w).collect();
    SymmetricMatrix::from_diag(&diag)
}

/// Spectral condition number `B² = λ_max/λ_min` of the cube-projection moment
/// form restricted to `θ⊥`.
pub fn cube_proj_condition_number(theta: &UnitDirection) -> Result<f64> {
    let frame = hyperplane_frame(theta);
    let weights = theta.l1_weights();
    let d = frame.dim();
    let mut restricted = SymmetricMatrix::zeros(d);
    for (i, bi) in frame.basis().iter().enumerate() {
        for (j, bj) in frame.basis().iter().enumerate().skip(i) {
            let v: f64 = (0..theta.n())
                .map(|k| bi[k] * bj[k] * (2.0 / 3.0 * weights[k]))
                .sum::<f64>();
            let v = if i == j { v + 1.0 / 3.0 } else { v };
            restricted.set(i, j, v);
        }
    }
    let (max, min) = top_eigenvalue_sym(&restricted)?;
    Ok(max / min)
}

fn factorial(k: u32) -> Result<i128> {
    (1..=k as i128).try_fold(1i128, |acc, v| acc.checked_mul(v)).ok_or(Error::Overflow)
}

/// Dirichlet moment `E Π Yᵢ^{aᵢ} = (n−1)!·Π aᵢ! / (n−1+|a|)!` for `Y` uniform
/// on `Δ_{n−1}`.
pub fn simplex_moment(n: usize, a: &MultiIndex) -> Result<Rational> {
    if n == 0 || a.0.len() > n {
        return Err(Error::DimensionMismatch { expected: n, got: a.0.len() });
    }
    let num = a
        .0
        .iter()
        .try_fold(1i128, |acc, &k| acc.checked_mul(factorial(k)?).ok_or(Error::Overflow))?;
    let n = n as i128;
    let den = (0..a.degree() as i128).try_fold(1i128, |acc, k| acc.checked_mul(n + k).ok_or(Error::Overflow))?;
    Ok(Rational::new(num, den))
}

/// `(E|Y|², E|Y|⁴)` for `Y` uniform on `Δ_{n−1}`: `2/(n+1)` and
/// `4(n+5)/((n+3)(n+2)(n+1))`.
pub fn simplex_radial_moments(n: usize) -> Result<(Rational, Rational)> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let nn = Rational::from_integer(n as i128);
    let pairs = Rational::from_integer((n as i128) * (n as i128 - 1));
    let m2 = nn
        .checked_mul(&simplex_moment(n, &MultiIndex::new([2]))?)
        .ok_or(Error::Overflow)?;
    let diag = nn
        .checked_mul(&simplex_moment(n, &MultiIndex::new([4]))?)
        .ok_or(Error::Overflow)?;
    let off = pairs
        .checked_mul(&simplex_moment(n, &MultiIndex::new([2, 2]))?)
        .ok_or(Error::Overflow)?;
    let m4 = diag.checked_add(&off).ok_or(Error::Overflow)?;
    Ok((m2, m4))
}

fn enumerable(theta: &UnitDirection) -> Result<()> {
    if theta.n() > MAX_EXACT_SIGN_DIM {
        return Err(Error::DimensionTooLarge { n: theta.n(), max: MAX_EXACT_SIGN_DIM });
    }
    Ok(())
}

/// `|⟨ε, θ⟩|` over half of `{−1, 1}ⁿ` (`εₙ = +1`); the other half mirrors it.
fn half_sign_dots(theta: &UnitDirection) -> impl Iterator<Item = f64> + '_ {
    let half = 1u64 << (theta.n() - 1);
    (0..half).map(move |m| sign_dot_abs(theta.coords(), m))
}

/// `E|⟨ε, θ⟩|^p` under the tilted measure `P(ε) ∝ |⟨ε, θ⟩|`, by enumeration.
pub fn tilted_sign_moment(theta: &UnitDirection, p: u32) -> Result<f64> {
    enumerable(theta)?;
    let num = compensated_sum(half_sign_dots(theta).map(|s| s.powi(p as i32 + 1)));
    let den = compensated_sum(half_sign_dots(theta));
    Ok(num / den)
}

/// `E⟨εY, θ⟩² = (1 + E_tilted⟨ε, θ⟩²)/((n+1)n)`, the `θ`-component of the
/// unprojected mixture; `E|X|² = 2/(n+1) − this` for `X` uniform on `P_H B₁ⁿ`.
pub fn cross_proj_second_moment(theta: &UnitDirection) -> Result<f64> {
    let n = theta.n() as f64;
    Ok((1.0 + tilted_sign_moment(theta, 2)?) / ((n + 1.0) * n))
}

/// `E|X|²` for `X` uniform on `P_H B₁ⁿ`.
pub fn cross_proj_radial_second_moment(theta: &UnitDirection) -> Result<f64> {
    Ok(2.0 / (theta.n() as f64 + 1.0) - cross_proj_second_moment(theta)?)
}

/// `Vol_{n−1}(P_H B₁ⁿ) = Σ_ε |⟨ε, θ⟩| / (2·(n−1)!)`.
pub fn cross_proj_volume(theta: &UnitDirection) -> Result<f64> {
    enumerable(theta)?;
    let total = 2.0 * compensated_sum(half_sign_dots(theta));
    let fact: f64 = (1..theta.n()).map(|k| k as f64).product();
    Ok(total / (2.0 * fact))
}

/// `∫_{S^{n−1}} ⟨e₁, η⟩⁴ dν(η) = 3/(n(n+2))`.
pub fn sphere_fourth_moment(n: usize) -> Rational {
    let n = n as i128;
    Rational::new(3, n * (n + 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::{haar_orthogonal, normalize_direction, random_unit_vector, StreamRng};
    use proptest::prelude::*;

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    fn unit(v: &[f64]) -> Vec<f64> {
        let l = dot(v, v).sqrt();
        v.iter().map(|x| x / l).collect()
    }

    #[test]
    fn cube_second_moment_examples() {
        let e3 = UnitDirection::axis(3, 2).unwrap();
        assert!((cube_proj_second_moment(&e3, &[1.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let diag2 = normalize_direction(&[1.0, 1.0]).unwrap();
        let v = cube_proj_second_moment(&diag2, &unit(&[1.0, -1.0])).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);

        let diag3 = normalize_direction(&[1.0, 1.0, 1.0]).unwrap();
        for eta in [unit(&[1.0, -1.0, 0.0]), unit(&[1.0, 1.0, -2.0])] {
            assert!((cube_proj_second_moment(&diag3, &eta).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cube_second_moment_errors() {
        let e3 = UnitDirection::axis(3, 2).unwrap();
        assert!(matches!(cube_proj_second_moment(&e3, &[0.0, 0.0, 1.0]), Err(Error::NotOrthogonal(_))));
        assert!(matches!(cube_proj_second_moment(&e3, &[2.0, 0.0, 0.0]), Err(Error::NotUnit(_))));
        assert!(matches!(cube_proj_second_moment(&e3, &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mixed_fourth_axis_cases() {
        let e3 = UnitDirection::axis(3, 2).unwrap();
        let m = cube_proj_mixed_fourth(&e3, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((m - 1.0 / 9.0).abs() < 1e-15);
        assert!(cube_proj_snc_gap(&e3, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap().abs() < 1e-15);

        let a = unit(&[1.0, 1.0, 0.0]);
        let b = unit(&[1.0, -1.0, 0.0]);
        assert!((cube_proj_mixed_fourth(&e3, &a, &b).unwrap() - 2.0 / 45.0).abs() < 1e-15);
        assert!((cube_proj_snc_gap(&e3, &a, &b).unwrap() + 3.0 / 45.0).abs() < 1e-15);

        let diag3 = normalize_direction(&[1.0, 1.0, 1.0]).unwrap();
        let m = cube_proj_mixed_fourth(&diag3, &unit(&[1.0, -1.0, 0.0]), &unit(&[1.0, 1.0, -2.0])).unwrap();
        assert!((m - 28.0 / 135.0).abs() < 1e-15, "{m}");

        assert_eq!(cube_proj_mixed_fourth(&e3, &a, &a), Err(Error::NotOrthonormalTriple));
        assert_eq!(cube_proj_mixed_fourth(&e3, &a, &[0.0, 0.0, 1.0]), Err(Error::NotOrthonormalTriple));
    }

    #[test]
    fn snc_gap_nonpositive_randomized() {
        let mut rng = StreamRng::new(77, 0);
        for trial in 0..1000 {
            let n = 3 + trial % 48;
            let theta = normalize_direction(&random_unit_vector(n, &mut rng)).unwrap();
            let frame = hyperplane_frame(&theta);
            let q = haar_orthogonal(n - 1, &mut rng);
            let eta1 = frame.lift(&q.column(0));
            let eta2 = frame.lift(&q.column(1));
            let gap = cube_proj_snc_gap(&theta, &eta1, &eta2).unwrap();
            assert!(gap <= 1e-12, "n={n}: gap {gap}");
        }
    }

    #[test]
    fn volume_examples() {
        let e3 = UnitDirection::axis(3, 2).unwrap();
        assert_eq!(cube_proj_volume(&e3), 4.0);
        let diag3 = normalize_direction(&[1.0, 1.0, 1.0]).unwrap();
        assert!((cube_proj_volume(&diag3) - 4.0 * 3f64.sqrt()).abs() < 1e-14);
        // hexagon with circumradius √(8/3): (3√3/2)·R²
        assert!((cube_proj_volume(&diag3) - 1.5 * 3f64.sqrt() * 8.0 / 3.0).abs() < 1e-14);

        let theta = normalize_direction(&[0.3, -0.9, 0.2, 0.5]).unwrap();
        let facets: f64 = (0..4).map(|i| 2.0 * cube_facet_proj_volume(&theta, i).unwrap()).sum();
        assert!((facets - 2.0 * cube_proj_volume(&theta)).abs() < 1e-13);
        assert!(cube_facet_proj_volume(&theta, 4).is_err());

        assert!((cross_proj_volume(&normalize_direction(&[1.0, 1.0]).unwrap()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((cross_proj_volume(&e3).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simplex_moment_examples() {
        assert_eq!(simplex_moment(3, &MultiIndex::new([4])).unwrap(), r(1, 15));
        assert_eq!(simplex_moment(3, &MultiIndex::new([2, 2])).unwrap(), r(1, 90));
        assert_eq!(simplex_moment(3, &MultiIndex::new([1, 1])).unwrap(), r(1, 12));
        assert!(simplex_moment(2, &MultiIndex::new([1, 1, 1])).is_err());
        assert_eq!(simplex_moment(4, &MultiIndex::new([200])), Err(Error::Overflow));
    }

    #[test]
    fn simplex_pair_expansion_sums_to_one() {
        for n in 2..=30usize {
            let diag = simplex_moment(n, &MultiIndex::new([2])).unwrap();
            let off = simplex_moment(n, &MultiIndex::new([1, 1])).unwrap();
            let total = diag * r(n as i128, 1) + off * r((n * (n - 1)) as i128, 1);
            assert_eq!(total, r(1, 1));
        }
    }

    #[test]
    fn radial_moment_examples() {
        assert_eq!(simplex_radial_moments(3).unwrap(), (r(1, 2), r(4, 15)));
        assert_eq!(simplex_radial_moments(2).unwrap(), (r(2, 3), r(7, 15)));
        let (_, m4) = simplex_radial_moments(10_000).unwrap();
        let scaled = *m4.numer() as f64 / *m4.denom() as f64 * 1e8;
        assert!((3.99..=4.01).contains(&scaled), "{scaled}");
    }

    #[test]
    fn tilted_moment_examples() {
        let d = normalize_direction(&[1.0, 1.0]).unwrap();
        assert!((tilted_sign_moment(&d, 2).unwrap() - 2.0).abs() < 1e-14);
        let a = normalize_direction(&[1.0, 0.0]).unwrap();
        assert!((tilted_sign_moment(&a, 2).unwrap() - 1.0).abs() < 1e-15);
        let a10 = UnitDirection::axis(10, 6).unwrap();
        assert_eq!(tilted_sign_moment(&a10, 2).unwrap(), 1.0);
        let big = UnitDirection::axis(21, 0).unwrap();
        assert!(matches!(tilted_sign_moment(&big, 2), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn cross_second_moment_examples() {
        let d = normalize_direction(&[1.0, 1.0]).unwrap();
        assert!((cross_proj_second_moment(&d).unwrap() - 0.5).abs() < 1e-15);
        let e1 = UnitDirection::axis(3, 0).unwrap();
        assert!((cross_proj_second_moment(&e1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_moment_examples() {
        assert_eq!(sphere_fourth_moment(2), r(3, 8));
        assert_eq!(sphere_fourth_moment(3), r(1, 5));
        assert_eq!(sphere_fourth_moment(8), r(3, 80));
        assert_eq!(3.0 / 80.0, 0.0375);
    }

    #[test]
    fn condition_number_of_axis_projection_is_one() {
        let e = UnitDirection::axis(5, 1).unwrap();
        assert!((cube_proj_condition_number(&e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_reproduces_second_moment() {
        let mut rng = StreamRng::new(12, 0);
        for _ in 0..1000 {
            let n = 6;
            let theta = normalize_direction(&random_unit_vector(n, &mut rng)).unwrap();
            let frame = hyperplane_frame(&theta);
            let eta = frame.lift(&random_unit_vector(n - 1, &mut rng));
            let q = cube_proj_moment_form(&theta).to_dense();
            let form = dot(&eta, &q.mul_vec(&eta));
            assert!((form - cube_proj_second_moment(&theta, &eta).unwrap()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn second_moment_bounds(v in prop::collection::vec(-1.0f64..1.0, 3..12), seed in any::<u64>()) {
            prop_assume!(dot(&v, &v) > 1e-4);
            let theta = normalize_direction(&v).unwrap();
            let frame = hyperplane_frame(&theta);
            let eta = frame.lift(&random_unit_vector(theta.n() - 1, &mut StreamRng::new(seed, 0)));
            let m = cube_proj_second_moment(&theta, &eta).unwrap();
            let wmax = theta.l1_weights().into_iter().fold(0.0, f64::max);
            prop_assert!(m >= 1.0 / 3.0 - 1e-15 && m <= 1.0 / 3.0 + 2.0 / 3.0 * wmax + 1e-15);
        }

        #[test]
        fn cross_volume_symmetry(v in prop::collection::vec(-1.0f64..1.0, 2..9), flips in any::<u16>(), rot in 0usize..8) {
            prop_assume!(dot(&v, &v) > 1e-4);
            let theta = normalize_direction(&v).unwrap();
            let mut w: Vec<f64> = v.iter().enumerate().map(|(i, x)| if flips >> i & 1 == 1 { -x } else { *x }).collect();
            let len = w.len();
            w.rotate_left(rot % len);
            let other = normalize_direction(&w).unwrap();
            let a = cross_proj_volume(&theta).unwrap();
            let b = cross_proj_volume(&other).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
