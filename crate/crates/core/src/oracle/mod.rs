//! Brute-force ground truth in low dimension: convex hulls of projected
//! vertices, fan triangulation and exact monomial integration.

mod hull;

pub use hull::{convex_hull, dedup_points, Facet, HullModel, Simplex};

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmoments::MultiIndex;
use crate::geomcore::{HyperplaneFrame, SymmetricMatrix};

pub const MAX_CUBE_DIM: usize = 4;
pub const MAX_CROSS_DIM: usize = 6;
pub const MAX_DEGREE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Body {
    Cube,
    Cross,
}

/// Frame coordinates of every vertex of the cube (sign patterns) or the
/// cross-polytope (`±eᵢ`) projected onto `θ⊥`.
pub fn projected_vertices(body: Body, frame: &HyperplaneFrame) -> Result<Vec<Vec<f64>>> {
    let n = frame.n();
    let project = |x: &[f64]| {
        let mut c = vec![0.0; n - 1];
        frame.coords_into(x, &mut c);
        c
    };
    match body {
        Body::Cube => {
            if n > MAX_CUBE_DIM {
                return Err(Error::DimensionTooLarge { n, max: MAX_CUBE_DIM });
            }
            Ok((0..1u32 << n)
                .map(|m| {
                    let v: Vec<f64> = (0..n).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                    project(&v)
                })
                .collect())
        }
        Body::Cross => {
            if n > MAX_CROSS_DIM {
                return Err(Error::DimensionTooLarge { n, max: MAX_CROSS_DIM });
            }
            Ok((0..2 * n)
                .map(|k| {
                    let mut v = vec![0.0; n];
                    v[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                    project(&v)
                })
                .collect())
        }
    }
}

/// Polynomial in barycentric coordinates, keyed by exponent vectors.
type Poly = BTreeMap<Vec<u32>, f64>;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `∫_S x^α dx` over one simplex, via `x = Σλᵢvᵢ` and
/// `∫_S λ^β = vol·d!·Πβᵢ!/(d+|β|)!`.
fn simplex_monomial_integral(s: &Simplex, alpha: &[u32]) -> f64 {
    let d = s.points.len() - 1;
    let mut poly: Poly = BTreeMap::from([(vec![0; d + 1], 1.0)]);
    for (k, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            let mut next = Poly::new();
            for (beta, c) in &poly {
                for (i, v) in s.points.iter().enumerate() {
                    if v[k] == 0.0 {
                        continue;
                    }
                    let mut b = beta.clone();
                    b[i] += 1;
                    *next.entry(b).or_insert(0.0) += c * v[k];
                }
            }
            poly = next;
        }
    }
    let total: u32 = alpha.iter().sum();
    let norm = s.volume * factorial(d as u32) / factorial(d as u32 + total);
    poly.iter()
        .map(|(beta, c)| c * beta.iter().map(|&b| factorial(b)).product::<f64>())
        .sum::<f64>()
        * norm
}

/// `∫_K x^α dx` (unnormalised).
pub fn exact_monomial_moment(hull: &HullModel, alpha: &MultiIndex) -> Result<f64> {
    if alpha.degree() > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(alpha.degree()));
    }
    if alpha.exponents().len() != hull.dim {
        return Err(Error::DimensionMismatch { expected: hull.dim, got: alpha.exponents().len() });
    }
    Ok(hull.simplices.iter().map(|s| simplex_monomial_integral(s, alpha.exponents())).sum())
}

pub fn hull_contains(hull: &HullModel, point: &[f64]) -> bool {
    hull.contains(point)
}

/// Exactly uniform point: simplex chosen by volume, then flat Dirichlet
/// barycentric coordinates.
pub fn oracle_uniform_sample<R: Rng + ?Sized>(hull: &HullModel, rng: &mut R) -> Vec<f64> {
    let target = rng.random::<f64>() * hull.volume;
    let mut acc = 0.0;
    let mut pick = &hull.simplices[hull.simplices.len() - 1];
    for s in &hull.simplices {
        acc += s.volume;
        if target < acc {
            pick = s;
            break;
        }
    }
    let e: Vec<f64> = (0..pick.points.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    (0..hull.dim)
        .map(|k| pick.points.iter().zip(&e).map(|(p, w)| p[k] * w).sum::<f64>() / total)
        .collect()
}

/// Every normalised moment `E X^α` with `|α| ≤ 4` of the uniform measure on a hull.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMoments {
    pub dim: usize,
    pub volume: f64,
    pub table: BTreeMap<Vec<u32>, f64>,
    pub e_x2: f64,
    pub e_x4: f64,
    pub var_x2: f64,
}

fn multi_indices(d: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = vec![];
        for a in &out {
            let used: u32 = a.iter().sum();
            for e in 0..=max_degree - used {
                let mut b = a.clone();
                b.push(e);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

impl OracleMoments {
    pub fn from_hull(hull: &HullModel) -> Result<Self> {
        let d = hull.dim;
        let mut table = BTreeMap::new();
        for alpha in multi_indices(d, MAX_DEGREE) {
            let m = exact_monomial_moment(hull, &MultiIndex::new(alpha.clone()))? / hull.volume;
            table.insert(alpha, m);
        }
        let unit = |i: usize, p: u32| {
            let mut a = vec![0; d];
            a[i] += p;
            a
        };
        let e_x2 = (0..d).map(|i| table[&unit(i, 2)]).sum::<f64>();
        let mut e_x4 = 0.0;
        for i in 0..d {
            e_x4 += table[&unit(i, 4)];
            for j in i + 1..d {
                let mut a = unit(i, 2);
                a[j] = 2;
                e_x4 += 2.0 * table[&a];
            }
        }
        Ok(Self { dim: d, volume: hull.volume, table, e_x2, e_x4, var_x2: e_x4 - e_x2 * e_x2 })
    }

    pub fn moment(&self, alpha: &[u32]) -> Option<f64> {
        self.table.get(alpha).copied()
    }

    /// `E Π_k ⟨X, a_k⟩` for up to four linear forms given in frame coordinates.
    pub fn expect_product(&self, forms: &[&[f64]]) -> Result<f64> {
        if forms.len() > MAX_DEGREE as usize {
            return Err(Error::UnsupportedDegree(forms.len() as u32));
        }
        if let Some(f) = forms.iter().find(|f| f.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: f.len() });
        }
        let mut poly: Poly = BTreeMap::from([(vec![0; self.dim], 1.0)]);
        for f in forms {
            let mut next = Poly::new();
            for (alpha, c) in &poly {
                for (i, a) in f.iter().enumerate() {
                    let mut b = alpha.clone();
                    b[i] += 1;
                    *next.entry(b).or_insert(0.0) += c * a;
                }
            }
            poly = next;
        }
        Ok(poly.iter().map(|(alpha, c)| c * self.table[alpha]).sum())
    }

    /// Second-moment matrix `E XXᵀ`.
    pub fn second_moment_form(&self) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let mut a = vec![0; self.dim];
                a[i] += 1;
                a[j] += 1;
                m.set(i, j, self.table[&a]);
            }
        }
        m
    }
}

/// Hull of the projected body in the frame of `θ`, with its moment table.
pub fn oracle_moments(body: Body, frame: &HyperplaneFrame) -> Result<OracleMoments> {
    let hull = oracle_hull(body, frame)?;
    OracleMoments::from_hull(&hull)
}

pub fn oracle_hull(body: Body, frame: &HyperplaneFrame) -> Result<HullModel> {
    let pts = projected_vertices(body, frame)?;
    convex_hull(&pts, frame.dim())
}
