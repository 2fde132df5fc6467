//! Brute-force reference computations used to validate the geometry and
//! detector implementations.
//!
//! Everything here is built directly on orientation predicates and exhaustive
//! enumeration; none of it calls into [`crate::geometry`], so these functions
//! can serve as independent oracles in tests and in the acceptance suite.

use crate::geometry::Point;

/// Orientation of `c` relative to the directed line `a -> b` (positive =
/// left turn).
fn orient2d(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Signed side of `p` relative to the plane through `a`, `b`, `c`.
fn orient3d(a: &[f64], b: &[f64], c: &[f64], p: &[f64]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    n[0] * (p[0] - a[0]) + n[1] * (p[1] - a[1]) + n[2] * (p[2] - a[2])
}

/// Hull vertices of a 2-D point set by exhaustive edge enumeration: an edge
/// is on the hull iff every other point lies strictly on one side, and a
/// point is a hull vertex iff it is an endpoint of some hull edge.
///
/// Exact coordinate duplicates are collapsed to their lowest index first.
pub fn brute_force_hull_vertices_2d(points: &[Point]) -> Vec<usize> {
    let idx = dedup(points);
    let mut is_vertex = vec![false; points.len()];
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let (i, j) = (idx[a], idx[b]);
            let mut pos = false;
            let mut neg = false;
            for &k in &idx {
                if k == i || k == j {
                    continue;
                }
                let o = orient2d(&points[i].coords, &points[j].coords, &points[k].coords);
                if o > 0.0 {
                    pos = true;
                } else if o < 0.0 {
                    neg = true;
                }
                if pos && neg {
                    break;
                }
            }
            if !(pos && neg) {
                is_vertex[i] = true;
                is_vertex[j] = true;
            }
        }
    }
    (0..points.len()).filter(|&i| is_vertex[i]).collect()
}

/// Hull vertices of a 3-D point set by exhaustive facet enumeration: a
/// triangle is on the hull iff every other point lies strictly on one side.
pub fn brute_force_hull_vertices_3d(points: &[Point]) -> Vec<usize> {
    let idx = dedup(points);
    let mut is_vertex = vec![false; points.len()];
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            for c in b + 1..idx.len() {
                let (i, j, k) = (idx[a], idx[b], idx[c]);
                let mut pos = false;
                let mut neg = false;
                for &m in &idx {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let o = orient3d(
                        &points[i].coords,
                        &points[j].coords,
                        &points[k].coords,
                        &points[m].coords,
                    );
                    if o > 0.0 {
                        pos = true;
                    } else if o < 0.0 {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
                if !(pos && neg) {
                    is_vertex[i] = true;
                    is_vertex[j] = true;
                    is_vertex[k] = true;
                }
            }
        }
    }
    (0..points.len()).filter(|&i| is_vertex[i]).collect()
}

/// Shoelace area of a polygon given in boundary order.
pub fn shoelace_area(ring: &[[f64; 2]]) -> f64 {
    let mut acc = 0.0;
    for i in 0..ring.len() {
        let [x1, y1] = ring[i];
        let [x2, y2] = ring[(i + 1) % ring.len()];
        acc += x1 * y2 - x2 * y1;
    }
    acc.abs() / 2.0
}

/// Hull area of a 2-D point set computed without the hull implementation:
/// brute-force vertices, ordered by angle around their centroid, then
/// shoelace. Returns `None` for degenerate sets.
pub fn brute_force_hull_area_2d(points: &[Point]) -> Option<f64> {
    let ring = brute_force_hull_ring_2d(points)?;
    Some(shoelace_area(&ring))
}

/// Hull boundary of a 2-D point set in counter-clockwise order, via the
/// brute-force vertex test.
pub fn brute_force_hull_ring_2d(points: &[Point]) -> Option<Vec<[f64; 2]>> {
    let vertices = brute_force_hull_vertices_2d(points);
    if vertices.len() < 3 {
        return None;
    }
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|&v| points[v].coords[0]).sum::<f64>() / n;
    let cy = vertices.iter().map(|&v| points[v].coords[1]).sum::<f64>() / n;
    let mut ring: Vec<[f64; 2]> = vertices
        .iter()
        .map(|&v| [points[v].coords[0], points[v].coords[1]])
        .collect();
    ring.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
    Some(ring)
}

/// Point-in-convex-polygon test against a counter-clockwise ring.
pub fn point_in_ring_2d(ring: &[[f64; 2]], p: [f64; 2]) -> bool {
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        if orient2d(&a, &b, &p) < 0.0 {
            return false;
        }
    }
    true
}

/// Oriented hull facets of a 3-D set as plane tuples `(a, b, c)` such that a
/// query is inside iff it is on the non-positive side of every plane.
pub fn brute_force_hull_planes_3d(points: &[Point]) -> Vec<([f64; 3], [f64; 3], [f64; 3], f64)> {
    let idx = dedup(points);
    let mut planes = Vec::new();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            for c in b + 1..idx.len() {
                let (i, j, k) = (idx[a], idx[b], idx[c]);
                let mut pos = false;
                let mut neg = false;
                for &m in &idx {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let o = orient3d(
                        &points[i].coords,
                        &points[j].coords,
                        &points[k].coords,
                        &points[m].coords,
                    );
                    if o > 0.0 {
                        pos = true;
                    } else if o < 0.0 {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
                if !(pos && neg) {
                    // All points sit on one side; +1 sign means that side is
                    // positive, so flip the facet to keep "inside <= 0".
                    let sign = if pos { 1.0 } else { -1.0 };
                    let pa = [
                        points[i].coords[0],
                        points[i].coords[1],
                        points[i].coords[2],
                    ];
                    let pb = [
                        points[j].coords[0],
                        points[j].coords[1],
                        points[j].coords[2],
                    ];
                    let pc = [
                        points[k].coords[0],
                        points[k].coords[1],
                        points[k].coords[2],
                    ];
                    planes.push((pa, pb, pc, -sign));
                }
            }
        }
    }
    planes
}

/// Point-in-convex-polytope test against [`brute_force_hull_planes_3d`]
/// output.
pub fn point_in_planes_3d(planes: &[([f64; 3], [f64; 3], [f64; 3], f64)], p: [f64; 3]) -> bool {
    planes
        .iter()
        .all(|(a, b, c, sign)| sign * orient3d(a, b, c, &p) <= 0.0)
}

/// Rejection-sampling volume estimate over the bounding box of `points`.
///
/// `inside` decides membership; returns `(estimate, standard_error)` for
/// `samples` draws from the supplied uniform stream in `[0, 1)`.
pub fn monte_carlo_volume(
    points: &[Point],
    mut inside: impl FnMut(&[f64]) -> bool,
    samples: usize,
    mut unit_uniform: impl FnMut() -> f64,
) -> (f64, f64) {
    let dim = points[0].dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for j in 0..dim {
            lo[j] = lo[j].min(p.coords[j]);
            hi[j] = hi[j].max(p.coords[j]);
        }
    }
    let box_volume: f64 = (0..dim).map(|j| hi[j] - lo[j]).product();
    let mut hits = 0usize;
    let mut draw = vec![0.0; dim];
    for _ in 0..samples {
        for (j, d) in draw.iter_mut().enumerate() {
            *d = lo[j] + unit_uniform() * (hi[j] - lo[j]);
        }
        if inside(&draw) {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / samples as f64;
    let estimate = p_hat * box_volume;
    let se = box_volume * (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
    (estimate, se)
}

fn dedup(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .coords
            .iter()
            .zip(&points[b].coords)
            .find_map(|(x, y)| {
                let c = x.total_cmp(y);
                (c != std::cmp::Ordering::Equal).then_some(c)
            })
            .unwrap_or_else(|| a.cmp(&b))
    });
    let mut unique: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        if unique
            .last()
            .is_none_or(|&prev| points[prev].coords != points[i].coords)
        {
            unique.push(i);
        }
    }
    unique.sort_unstable();
    unique
}
