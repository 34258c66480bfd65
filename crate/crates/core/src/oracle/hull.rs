use crate::error::{Error, Result};

const DEDUP_TOL: f64 = 1e-10;
const CONTAINS_TOL: f64 = 1e-9;

/// Supporting hyperplane `⟨normal, x⟩ = offset` of a facet, normal outward.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Indices into [`HullModel::vertices`].
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A simplex of the triangulation with its `d`-volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub points: Vec<Vec<f64>>,
    pub volume: f64,
}

/// Convex polytope in dimension 1, 2 or 3, with a fan triangulation from the
/// vertex centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct HullModel {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
    pub facets: Vec<Facet>,
    pub simplices: Vec<Simplex>,
    pub volume: f64,
}

impl HullModel {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim && self.facets.iter().all(|f| dot(&f.normal, p) <= f.offset + CONTAINS_TOL)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let d = m.len();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = row[c] / pivot[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
        }
    }
    det
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Unsigned `d`-volume of the simplex on `points` (`d + 1` points in `ℝᵈ`).
pub(crate) fn simplex_volume(points: &[Vec<f64>]) -> f64 {
    let d = points.len() - 1;
    let rows = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    determinant(rows).abs() / factorial(d)
}

/// Removes points closer than `1e−10` (max norm) to an earlier point.
pub fn dedup_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let dup = out
            .iter()
            .any(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() <= DEDUP_TOL));
        if !dup {
            out.push(p.clone());
        }
    }
    out
}

pub fn convex_hull(points: &[Vec<f64>], d: usize) -> Result<HullModel> {
    if !(1..=3).contains(&d) {
        return Err(Error::DimensionTooLarge { n: d, max: 3 });
    }
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NotFinite("hull input".into()));
    }
    let pts = dedup_points(points);
    if pts.len() < d + 1 {
        return Err(Error::DegenerateInput(format!("{} distinct points cannot span dimension {d}", pts.len())));
    }
    let scale = pts.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let (vertices, facets) = match d {
        1 => hull_1d(&pts, scale)?,
        2 => hull_2d(&pts, scale)?,
        _ => hull_3d(&pts, scale)?,
    };

    let centroid: Vec<f64> = (0..d)
        .map(|k| vertices.iter().map(|v| v[k]).sum::<f64>() / vertices.len() as f64)
        .collect();
    let simplices: Vec<Simplex> = facets
        .iter()
        .map(|f| {
            let mut s = vec![centroid.clone()];
            s.extend(f.vertices.iter().map(|&i| vertices[i].clone()));
            let volume = simplex_volume(&s);
            Simplex { points: s, volume }
        })
        .collect();
    let volume = simplices.iter().map(|s| s.volume).sum();
    Ok(HullModel { dim: d, vertices, centroid, facets, simplices, volume })
}

type HullParts = (Vec<Vec<f64>>, Vec<Facet>);

fn hull_1d(pts: &[Vec<f64>], scale: f64) -> Result<HullParts> {
    let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= DEDUP_TOL * scale {
        return Err(Error::DegenerateInput("points do not span a segment".into()));
    }
    let facets = vec![
        Facet { vertices: vec![0], normal: vec![-1.0], offset: -lo },
        Facet { vertices: vec![1], normal: vec![1.0], offset: hi },
    ];
    Ok((vec![vec![lo], vec![hi]], facets))
}

fn orient2(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Gift wrapping; returns the vertices counter-clockwise.
fn hull_2d(pts: &[Vec<f64>], scale: f64) -> Result<HullParts> {
    let eps = 1e-12 * scale * scale;
    let start = (0..pts.len())
        .min_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]).then(pts[i][1].total_cmp(&pts[j][1])))
        .unwrap();
    let mut ring = vec![start];
    let mut current = start;
    loop {
        let mut next = if current == 0 { 1 } else { 0 };
        for k in 0..pts.len() {
            if k == current {
                continue;
            }
            let o = orient2(&pts[current], &pts[next], &pts[k]);
            let farther = dot(&sub(&pts[k], &pts[current]), &sub(&pts[k], &pts[current]))
                > dot(&sub(&pts[next], &pts[current]), &sub(&pts[next], &pts[current]));
            // keep the most clockwise candidate; on ties the farthest one
            if o < -eps || (o.abs() <= eps && farther) {
                next = k;
            }
        }
        if next == start {
            break;
        }
        if ring.len() > pts.len() {
            return Err(Error::DegenerateInput("gift wrapping did not close".into()));
        }
        ring.push(next);
        current = next;
    }
    let vertices: Vec<Vec<f64>> = ring.iter().map(|&i| pts[i].clone()).collect();
    let m = vertices.len();
    let area2: f64 = (0..m).map(|i| orient2(&vertices[0], &vertices[i], &vertices[(i + 1) % m])).sum();
    if m < 3 || area2.abs() <= 1e-10 * scale * scale {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    let facets = (0..m)
        .map(|i| {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % m]);
            let e = sub(b, a);
            let len = e[0].hypot(e[1]);
            // counter-clockwise ring: outward normal is the edge turned clockwise
            let normal = vec![e[1] / len, -e[0] / len];
            let offset = dot(&normal, a);
            Facet { vertices: vec![i, (i + 1) % m], normal, offset }
        })
        .collect();
    Ok((vertices, facets))
}

/// Incremental hull with triangular faces.
fn hull_3d(pts: &[Vec<f64>], scale: f64) -> Result<HullParts> {
    let eps = 1e-10 * scale;
    let dist2 = |a: &[f64], b: &[f64]| {
        let e = sub(a, b);
        dot(&e, &e)
    };
    let i0 = 0;
    let i1 = (0..pts.len()).max_by(|&a, &b| dist2(&pts[a], &pts[i0]).total_cmp(&dist2(&pts[b], &pts[i0]))).unwrap();
    let line = sub(&pts[i1], &pts[i0]);
    let line_dist = |p: &[f64]| {
        let c = cross(&line, &sub(p, &pts[i0]));
        dot(&c, &c)
    };
    let i2 = (0..pts.len()).max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b]))).unwrap();
    let plane = cross(&line, &sub(&pts[i2], &pts[i0]));
    let plane_norm = dot(&plane, &plane).sqrt();
    if plane_norm <= eps * scale {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    let plane_dist = |p: &[f64]| dot(&plane, &sub(p, &pts[i0])) / plane_norm;
    let i3 = (0..pts.len()).max_by(|&a, &b| plane_dist(&pts[a]).abs().total_cmp(&plane_dist(&pts[b]).abs())).unwrap();
    if plane_dist(&pts[i3]).abs() <= eps {
        return Err(Error::DegenerateInput("points are coplanar".into()));
    }

    let seed = [i0, i1, i2, i3];
    let interior: Vec<f64> = (0..3).map(|k| seed.iter().map(|&i| pts[i][k]).sum::<f64>() / 4.0).collect();
    let plane_of = |f: &[usize; 3]| {
        let n = cross(&sub(&pts[f[1]], &pts[f[0]]), &sub(&pts[f[2]], &pts[f[0]]));
        let len = dot(&n, &n).sqrt();
        let n = [n[0] / len, n[1] / len, n[2] / len];
        (n, dot(&n, &pts[f[0]]))
    };
    let outward = |f: [usize; 3]| {
        let (n, off) = plane_of(&f);
        if dot(&n, &interior) > off {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };

    let mut faces: Vec<[usize; 3]> = vec![
        outward([i0, i1, i2]),
        outward([i0, i1, i3]),
        outward([i0, i2, i3]),
        outward([i1, i2, i3]),
    ];
    for (p, point) in pts.iter().enumerate() {
        if seed.contains(&p) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| {
                let (n, off) = plane_of(f);
                dot(&n, point) - off > eps
            })
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for k in 0..3 {
                edges.push((f[k], f[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> =
            edges.iter().copied().filter(|&(a, b)| !edges.contains(&(b, a))).collect();
        let mut kept: Vec<[usize; 3]> =
            faces.iter().zip(&visible).filter(|(_, v)| !**v).map(|(f, _)| *f).collect();
        kept.extend(horizon.into_iter().map(|(a, b)| outward([a, b, p])));
        faces = kept;
    }

    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let remap = |i: usize| used.binary_search(&i).unwrap();
    let vertices = used.iter().map(|&i| pts[i].clone()).collect();
    let facets = faces
        .iter()
        .map(|f| {
            let (n, offset) = plane_of(f);
            Facet { vertices: f.iter().map(|&i| remap(i)).collect(), normal: n.to_vec(), offset }
        })
        .collect();
    Ok((vertices, facets))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]]
    }

    #[test]
    fn square_hull() {
        let mut pts = square();
        pts.push(vec![0.0, 0.0]);
        pts.push(vec![1.0, 0.0]);
        let h = convex_hull(&pts, 2).unwrap();
        assert_eq!(h.facets.len(), 4);
        assert!((h.volume - 4.0).abs() < 1e-12);
        assert!(h.contains(&[0.99, -0.99]) && !h.contains(&[1.01, 0.0]));
    }

    #[test]
    fn interval_hull() {
        let h = convex_hull(&[vec![0.5], vec![-2.0], vec![0.0]], 1).unwrap();
        assert!((h.volume - 2.5).abs() < 1e-15);
        assert!(convex_hull(&[vec![1.0], vec![1.0]], 1).is_err());
    }

    #[test]
    fn cube_hull_3d() {
        let mut pts = vec![];
        for m in 0..8 {
            pts.push((0..3).map(|k| if m >> k & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        pts.push(vec![0.0, 0.0, 0.0]);
        pts.push(vec![1.0, 0.0, 0.0]);
        let h = convex_hull(&pts, 3).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert!((h.volume - 8.0).abs() < 1e-12);
        for p in &pts {
            assert!(h.contains(p));
        }
        for f in &h.facets {
            assert!(dot(&f.normal, &h.centroid) < f.offset);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let coplanar = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(convex_hull(&coplanar, 3), Err(Error::DegenerateInput(_))));
        let collinear = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(convex_hull(&collinear, 2), Err(Error::DegenerateInput(_))));
        assert!(matches!(convex_hull(&square(), 4), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(vec![vec![2.0, 1.0], vec![1.0, 3.0]]), 5.0);
        assert_eq!(determinant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }
}
