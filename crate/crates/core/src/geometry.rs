//! d-dimensional convex hulls: construction, hyper-volume, containment.
//!
//! Hulls are built with an incremental quickhull that works for any d >= 2;
//! 2-D inputs take an exact monotone-chain shortcut that produces the same
//! vertex set. Volume is the centroid-fan simplex decomposition, which for
//! d = 2 coincides with the shoelace area.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Relative factor applied to the bounding-box diagonal to obtain the
/// geometric tolerance used by orientation and containment tests.
pub const EPS_GEOM_REL: f64 = 1e-9;

/// A point in d-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Self::new(coords.to_vec())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least {needed} points for a {dim}-dimensional hull, got {got}")]
    TooFewPoints {
        needed: usize,
        got: usize,
        dim: usize,
    },
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("input points are affinely dependent; hull volume would be zero")]
    DegenerateInput,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
}

/// Oriented hyperplane of a facet: `normal . x - offset` is the signed
/// distance, negative on the hull's interior side.
#[derive(Debug, Clone)]
struct FacetPlane {
    normal: Vec<f64>,
    offset: f64,
}

impl FacetPlane {
    fn signed_distance(&self, coords: &[f64]) -> f64 {
        dot(&self.normal, coords) - self.offset
    }
}

/// Convex hull of a point subset: extreme-point indices, boundary facets and
/// the enclosed d-dimensional volume.
///
/// Facet vertex indices refer to positions in the source point list handed to
/// [`compute_hull`]; each facet is a (d-1)-simplex with outward orientation.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    vertex_indices: Vec<usize>,
    facets: Vec<Vec<usize>>,
    planes: Vec<FacetPlane>,
    volume: f64,
    dim: usize,
}

impl ConvexHull {
    /// Indices of the hull vertices, sorted ascending.
    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertex_indices
    }

    /// Boundary facets; each entry holds the d vertex indices of one
    /// (d-1)-simplex.
    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_vertex(&self, index: usize) -> bool {
        self.vertex_indices.binary_search(&index).is_ok()
    }

    /// Reindexes all vertex references through `map`, e.g. from a compacted
    /// subset back into the original point list. The geometry (planes,
    /// volume) is unchanged.
    pub fn map_indices(mut self, map: impl Fn(usize) -> usize) -> ConvexHull {
        for v in self.vertex_indices.iter_mut() {
            *v = map(*v);
        }
        self.vertex_indices.sort_unstable();
        for facet in self.facets.iter_mut() {
            for v in facet.iter_mut() {
                *v = map(*v);
            }
        }
        self
    }
}

/// Geometric tolerance for a point cloud: `EPS_GEOM_REL` times the
/// bounding-box diagonal, so it survives unnormalized data.
pub fn epsilon_for(points: &[Point]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let dim = points[0].dim();
    let mut diag_sq = 0.0;
    for j in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in points {
            let c = p.coords[j];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        diag_sq += (hi - lo) * (hi - lo);
    }
    EPS_GEOM_REL * diag_sq.sqrt()
}

/// Builds the convex hull of `points` in `dim` dimensions.
///
/// Fails with `DegenerateInput` when all points are affinely dependent: the
/// peeling algorithm's volume ratios are meaningless at volume zero, so a
/// flat input is an error rather than a volume-0 hull.
pub fn compute_hull(points: &[Point], dim: usize) -> Result<ConvexHull, GeometryError> {
    validate(points, dim)?;
    if dim == 2 {
        monotone_chain_hull(points)
    } else {
        quickhull(points, dim)
    }
}

/// Hyper-volume of `hull` over its source `points`: sum over facets of the
/// |det|/d! simplex volume spanned with an interior reference point. Equals
/// the shoelace area in 2-D.
pub fn hull_volume(hull: &ConvexHull, points: &[Point]) -> f64 {
    centroid_fan_volume(points, &hull.facets, &hull.vertex_indices, hull.dim)
}

/// True iff `query` lies on the inner side of every facet within `tolerance`.
pub fn contains(
    hull: &ConvexHull,
    _points: &[Point],
    query: &Point,
    tolerance: f64,
) -> Result<bool, GeometryError> {
    if query.dim() != hull.dim {
        return Err(GeometryError::DimensionMismatch {
            index: 0,
            expected: hull.dim,
            got: query.dim(),
        });
    }
    Ok(hull
        .planes
        .iter()
        .all(|p| p.signed_distance(&query.coords) <= tolerance))
}

fn validate(points: &[Point], dim: usize) -> Result<(), GeometryError> {
    if dim < 2 {
        return Err(GeometryError::DimensionMismatch {
            index: 0,
            expected: 2,
            got: dim,
        });
    }
    for (i, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(GeometryError::DimensionMismatch {
                index: i,
                expected: dim,
                got: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(GeometryError::NonFinite { index: i });
        }
    }
    if points.len() < dim + 1 {
        return Err(GeometryError::TooFewPoints {
            needed: dim + 1,
            got: points.len(),
            dim,
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Determinant by Gaussian elimination with partial pivoting. The matrices
/// here are at most d x d with small d, so stability beats cleverness.
fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sum of |det|/d! simplex volumes fanned from the hull-vertex centroid.
fn centroid_fan_volume(
    points: &[Point],
    facets: &[Vec<usize>],
    vertex_indices: &[usize],
    dim: usize,
) -> f64 {
    let mut centroid = vec![0.0; dim];
    for &v in vertex_indices {
        for j in 0..dim {
            centroid[j] += points[v].coords[j];
        }
    }
    for c in centroid.iter_mut() {
        *c /= vertex_indices.len() as f64;
    }
    let d_fact = factorial(dim);
    facets
        .iter()
        .map(|facet| {
            let rows: Vec<Vec<f64>> = facet
                .iter()
                .map(|&v| sub(&points[v].coords, &centroid))
                .collect();
            determinant(rows).abs() / d_fact
        })
        .sum()
}

/// Normal of the hyperplane through `vertices`, oriented so that `interior`
/// sits on the negative side. Returns a unit normal and its offset.
fn facet_plane(
    points: &[Point],
    vertices: &[usize],
    interior: &[f64],
) -> Result<FacetPlane, GeometryError> {
    let dim = interior.len();
    let base = &points[vertices[0]].coords;
    let edges: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|&v| sub(&points[v].coords, base))
        .collect();
    // Generalized cross product: cofactor expansion of the edge matrix.
    let mut normal = vec![0.0; dim];
    for j in 0..dim {
        let minor: Vec<Vec<f64>> = edges
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * determinant(minor);
    }
    let norm = dot(&normal, &normal).sqrt();
    if norm == 0.0 {
        return Err(GeometryError::DegenerateInput);
    }
    for c in normal.iter_mut() {
        *c /= norm;
    }
    let mut offset = dot(&normal, base);
    if dot(&normal, interior) - offset > 0.0 {
        for c in normal.iter_mut() {
            *c = -*c;
        }
        offset = -offset;
    }
    Ok(FacetPlane { normal, offset })
}

/// Collapses exact coordinate duplicates, keeping the lowest source index of
/// each group so that only one copy of a duplicated point can become a
/// hull vertex.
fn dedup_indices(points: &[Point]) -> Vec<usize> {
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
    let mut unique = Vec::with_capacity(order.len());
    for &i in &order {
        if unique
            .last()
            .is_none_or(|&prev: &usize| points[prev].coords != points[i].coords)
        {
            unique.push(i);
        }
    }
    unique
}

fn finish_hull(
    points: &[Point],
    facets: Vec<Vec<usize>>,
    planes: Vec<FacetPlane>,
    dim: usize,
) -> ConvexHull {
    let mut vertex_indices: Vec<usize> = facets.iter().flatten().copied().collect();
    vertex_indices.sort_unstable();
    vertex_indices.dedup();
    let volume = centroid_fan_volume(points, &facets, &vertex_indices, dim);
    ConvexHull {
        vertex_indices,
        facets,
        planes,
        volume,
        dim,
    }
}

// --- exact 2-D path -------------------------------------------------------

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain with strict turns: collinear boundary points are
/// excluded, matching the eps-based behaviour of the general path.
fn monotone_chain_hull(points: &[Point]) -> Result<ConvexHull, GeometryError> {
    let sorted = dedup_indices(points);
    let turn = |chain: &[usize], p: usize| {
        cross2(
            &points[chain[chain.len() - 2]].coords,
            &points[chain[chain.len() - 1]].coords,
            &points[p].coords,
        )
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &sorted {
        while lower.len() >= 2 && turn(&lower, p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in sorted.iter().rev() {
        while upper.len() >= 2 && turn(&upper, p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let ring = lower; // counter-clockwise
    if ring.len() < 3 {
        return Err(GeometryError::DegenerateInput);
    }

    let mut facets = Vec::with_capacity(ring.len());
    let mut planes = Vec::with_capacity(ring.len());
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        facets.push(vec![a, b]);
        // CCW ring: outward normal of edge a->b is (dy, -dx).
        let (ax, ay) = (points[a].coords[0], points[a].coords[1]);
        let (bx, by) = (points[b].coords[0], points[b].coords[1]);
        let mut normal = vec![by - ay, ax - bx];
        let len = dot(&normal, &normal).sqrt();
        normal[0] /= len;
        normal[1] /= len;
        let offset = normal[0] * ax + normal[1] * ay;
        planes.push(FacetPlane { normal, offset });
    }
    Ok(finish_hull(points, facets, planes, 2))
}

// --- general quickhull ----------------------------------------------------

struct QhFacet {
    vertices: Vec<usize>,
    plane: FacetPlane,
    outside: Vec<usize>,
    neighbors: Vec<usize>,
    alive: bool,
}

fn ridge_key(vertices: &[usize], skip: usize) -> Vec<usize> {
    let mut key: Vec<usize> = vertices.iter().copied().filter(|&v| v != skip).collect();
    key.sort_unstable();
    key
}

/// Picks d+1 affinely independent points by repeatedly taking the point
/// farthest from the affine hull of those chosen so far (Gram-Schmidt
/// residuals). Errors out when the cloud is flat.
fn initial_simplex(
    points: &[Point],
    candidates: &[usize],
    dim: usize,
    eps: f64,
) -> Result<Vec<usize>, GeometryError> {
    let first = *candidates
        .iter()
        .min_by(|&&a, &&b| {
            points[a]
                .coords
                .iter()
                .zip(&points[b].coords)
                .find_map(|(x, y)| {
                    let c = x.total_cmp(y);
                    (c != std::cmp::Ordering::Equal).then_some(c)
                })
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let mut chosen = vec![first];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = points[first].coords.clone();

    while chosen.len() < dim + 1 {
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for &c in candidates {
            if chosen.contains(&c) {
                continue;
            }
            let mut residual = sub(&points[c].coords, &origin);
            for b in &basis {
                let proj = dot(&residual, b);
                for (r, bb) in residual.iter_mut().zip(b) {
                    *r -= proj * bb;
                }
            }
            let norm = dot(&residual, &residual).sqrt();
            if best.as_ref().is_none_or(|(n, _, _)| norm > *n) {
                best = Some((norm, c, residual));
            }
        }
        match best {
            Some((norm, c, mut residual)) if norm > eps => {
                for r in residual.iter_mut() {
                    *r /= norm;
                }
                basis.push(residual);
                chosen.push(c);
            }
            _ => return Err(GeometryError::DegenerateInput),
        }
    }
    Ok(chosen)
}

fn quickhull(points: &[Point], dim: usize) -> Result<ConvexHull, GeometryError> {
    let eps = epsilon_for(points);
    let candidates = dedup_indices(points);
    if candidates.len() < dim + 1 {
        return Err(GeometryError::DegenerateInput);
    }
    let simplex = initial_simplex(points, &candidates, dim, eps)?;

    let mut interior = vec![0.0; dim];
    for &v in &simplex {
        for j in 0..dim {
            interior[j] += points[v].coords[j];
        }
    }
    for c in interior.iter_mut() {
        *c /= simplex.len() as f64;
    }

    let mut facets: Vec<QhFacet> = Vec::new();
    for skip in 0..simplex.len() {
        let vertices: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .collect();
        let plane = facet_plane(points, &vertices, &interior)?;
        // Every pair of simplex facets shares a ridge.
        let neighbors = (0..simplex.len()).filter(|&i| i != skip).collect();
        facets.push(QhFacet {
            vertices,
            plane,
            outside: Vec::new(),
            neighbors,
            alive: true,
        });
    }

    for &c in &candidates {
        if simplex.contains(&c) {
            continue;
        }
        assign_outside(points, &mut facets, c, eps);
    }

    loop {
        let Some(fid) = facets.iter().position(|f| f.alive && !f.outside.is_empty()) else {
            break;
        };
        let apex = *facets[fid]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = facets[fid].plane.signed_distance(&points[a].coords);
                let db = facets[fid].plane.signed_distance(&points[b].coords);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();

        // Flood the set of facets visible from the apex.
        let mut visible = vec![fid];
        let mut seen = vec![false; facets.len()];
        seen[fid] = true;
        let mut queue = vec![fid];
        while let Some(f) = queue.pop() {
            let neighbors = facets[f].neighbors.clone();
            for nb in neighbors {
                if seen[nb] || !facets[nb].alive {
                    continue;
                }
                seen[nb] = true;
                if facets[nb].plane.signed_distance(&points[apex].coords) > eps {
                    visible.push(nb);
                    queue.push(nb);
                }
            }
        }
        visible.sort_unstable();

        // Horizon ridges: boundaries between visible facets and live hidden
        // neighbors.
        let mut horizon: Vec<(Vec<usize>, usize)> = Vec::new();
        for &v in &visible {
            let neighbors = facets[v].neighbors.clone();
            for nb in neighbors {
                if visible.contains(&nb) || !facets[nb].alive {
                    continue;
                }
                let ridge: Vec<usize> = facets[v]
                    .vertices
                    .iter()
                    .copied()
                    .filter(|x| facets[nb].vertices.contains(x))
                    .collect();
                horizon.push((ridge, nb));
            }
        }

        let mut orphans: Vec<usize> = Vec::new();
        for &v in &visible {
            facets[v].alive = false;
            orphans.append(&mut facets[v].outside);
        }
        orphans.sort_unstable();
        orphans.dedup();
        orphans.retain(|&p| p != apex);

        let mut new_ids = Vec::with_capacity(horizon.len());
        for (ridge, hidden) in &horizon {
            let mut vertices = ridge.clone();
            vertices.push(apex);
            let plane = facet_plane(points, &vertices, &interior)?;
            let id = facets.len();
            facets.push(QhFacet {
                vertices,
                plane,
                outside: Vec::new(),
                neighbors: vec![*hidden],
                alive: true,
            });
            let hidden_facet = &mut facets[*hidden];
            hidden_facet
                .neighbors
                .retain(|n| !facets_is_dead(n, &visible));
            hidden_facet.neighbors.push(id);
            new_ids.push(id);
        }

        // Link the cone facets among themselves through their shared ridges.
        let mut ridge_owner: HashMap<Vec<usize>, usize> = HashMap::new();
        for &id in &new_ids {
            let verts = facets[id].vertices.clone();
            for &skip in verts.iter().filter(|&&v| v != apex) {
                let key = ridge_key(&verts, skip);
                match ridge_owner.get(&key) {
                    Some(&other) => {
                        facets[id].neighbors.push(other);
                        facets[other].neighbors.push(id);
                    }
                    None => {
                        ridge_owner.insert(key, id);
                    }
                }
            }
        }

        for p in orphans {
            assign_outside(points, &mut facets, p, eps);
        }
    }

    let mut final_facets = Vec::new();
    let mut final_planes = Vec::new();
    for f in facets.into_iter().filter(|f| f.alive) {
        final_facets.push(f.vertices);
        final_planes.push(f.plane);
    }
    Ok(finish_hull(points, final_facets, final_planes, dim))
}

fn facets_is_dead(id: &usize, visible: &[usize]) -> bool {
    visible.binary_search(id).is_ok()
}

/// Assigns `p` to the outside set of the facet it is farthest beyond, if any.
fn assign_outside(points: &[Point], facets: &mut [QhFacet], p: usize, eps: f64) {
    let mut best: Option<(f64, usize)> = None;
    for (id, f) in facets.iter().enumerate() {
        if !f.alive {
            continue;
        }
        let d = f.plane.signed_distance(&points[p].coords);
        if d > eps && best.as_ref().is_none_or(|&(bd, _)| d > bd) {
            best = Some((d, id));
        }
    }
    if let Some((_, id)) = best {
        facets[id].outside.push(p);
    }
}
