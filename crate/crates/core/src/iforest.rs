//! Isolation Forest: ensembles of randomized axis-aligned partition trees.
//! Points that isolate in short average paths score close to 1 and are
//! flagged as anomalies; deep, hard-to-isolate points score below 0.5.

use crate::geometry::Point;
#[cfg(feature = "parallel")]
use crate::parallelism;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Euler-Mascheroni constant for the harmonic-number approximation.
const EULER_GAMMA: f64 = 0.577_215_664_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IForestError {
    #[error("isolation forest needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("query has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
}

/// Fitting parameters; the defaults follow the original algorithm (100
/// trees, subsample 256) with contamination 0.1 and seed 42.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub subsample_size: usize,
    pub contamination: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            subsample_size: 256,
            contamination: 0.1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolationTree {
    root: Node,
    height_limit: usize,
}

#[derive(Debug, Clone)]
pub struct IsolationForestModel {
    trees: Vec<IsolationTree>,
    /// Effective subsample size, `min(requested, n)`.
    pub subsample_size: usize,
    pub contamination: f64,
    pub seed: u64,
    dim: usize,
}

impl IsolationForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }
}

/// Fits an isolation forest. Each tree draws an independent uniform
/// subsample without replacement from a generator seeded `seed + tree_index`,
/// so refits are reproducible node-by-node and tree fitting can run in
/// parallel without changing the result.
pub fn iforest_fit(
    points: &[Point],
    params: &ForestParams,
) -> Result<IsolationForestModel, IForestError> {
    let n = points.len();
    if n < 2 {
        return Err(IForestError::TooFewPoints(n));
    }
    for (index, p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(IForestError::NonFinite { index });
        }
    }
    let dim = points[0].dim();
    let subsample = params.subsample_size.min(n).max(2);
    let height_limit = (subsample as f64).log2().ceil() as usize;

    let build = |t: usize| -> IsolationTree {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(t as u64));
        let sample = rand::seq::index::sample(&mut rng, n, subsample).into_vec();
        IsolationTree {
            root: build_node(points, &sample, 0, height_limit, &mut rng),
            height_limit,
        }
    };

    let indices: Vec<usize> = (0..params.n_trees.max(1)).collect();
    #[cfg(feature = "parallel")]
    let trees: Vec<IsolationTree> = if parallelism::parallel_enabled() {
        indices.par_iter().map(|&t| build(t)).collect()
    } else {
        indices.iter().map(|&t| build(t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees: Vec<IsolationTree> = indices.iter().map(|&t| build(t)).collect();

    Ok(IsolationForestModel {
        trees,
        subsample_size: subsample,
        contamination: params.contamination,
        seed: params.seed,
        dim,
    })
}

fn build_node(
    points: &[Point],
    subset: &[usize],
    depth: usize,
    height_limit: usize,
    rng: &mut ChaCha8Rng,
) -> Node {
    if depth >= height_limit || subset.len() <= 1 {
        return Node::Leaf { size: subset.len() };
    }
    let dim = points[subset[0]].dim();
    // Only features with spread admit a split strictly between min and max.
    let mut splittable: Vec<(usize, f64, f64)> = Vec::new();
    for j in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in subset {
            let v = points[i].coords[j];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo < hi {
            splittable.push((j, lo, hi));
        }
    }
    if splittable.is_empty() {
        return Node::Leaf { size: subset.len() };
    }
    let (feature, lo, hi) = splittable[rng.random_range(0..splittable.len())];
    let mut u: f64 = rng.random();
    if u == 0.0 {
        u = 0.5;
    }
    let mut value = lo + u * (hi - lo);
    if value <= lo || value >= hi {
        value = lo + (hi - lo) / 2.0;
    }

    let left: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&i| points[i].coords[feature] < value)
        .collect();
    let right: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&i| points[i].coords[feature] >= value)
        .collect();
    Node::Split {
        feature,
        value,
        left: Box::new(build_node(points, &left, depth + 1, height_limit, rng)),
        right: Box::new(build_node(points, &right, depth + 1, height_limit, rng)),
    }
}

/// Average path length of an unsuccessful binary-search-tree lookup over `m`
/// points; the standard normalizer c(m).
pub fn average_path_length(m: usize) -> f64 {
    match m {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = m as f64;
            2.0 * ((m - 1.0).ln() + EULER_GAMMA) - 2.0 * (m - 1.0) / m
        }
    }
}

fn path_length(tree: &IsolationTree, query: &Point) -> f64 {
    let mut node = &tree.root;
    let mut edges = 0.0;
    loop {
        match node {
            Node::Leaf { size } => return edges + average_path_length(*size),
            Node::Split {
                feature,
                value,
                left,
                right,
            } => {
                node = if query.coords[*feature] < *value {
                    left
                } else {
                    right
                };
                edges += 1.0;
            }
        }
    }
}

/// Anomaly score in (0, 1): `2^(-mean_path / c(subsample_size))`. Higher
/// means more anomalous.
pub fn iforest_score(model: &IsolationForestModel, query: &Point) -> Result<f64, IForestError> {
    if query.dim() != model.dim {
        return Err(IForestError::DimensionMismatch {
            expected: model.dim,
            got: query.dim(),
        });
    }
    let total: f64 = model.trees.iter().map(|t| path_length(t, query)).sum();
    let mean_path = total / model.trees.len() as f64;
    Ok(2f64.powf(-mean_path / average_path_length(model.subsample_size)))
}

/// Scores every point; plumbing over [`iforest_score`].
pub fn iforest_score_all(
    model: &IsolationForestModel,
    points: &[Point],
) -> Result<Vec<f64>, IForestError> {
    points.iter().map(|p| iforest_score(model, p)).collect()
}

/// Labels the `ceil(contamination * n)` highest-scoring points as anomalies;
/// score ties break toward the lower dataset index.
pub fn iforest_predict(
    model: &IsolationForestModel,
    points: &[Point],
    contamination: f64,
) -> Result<Vec<bool>, IForestError> {
    let scores = iforest_score_all(model, points)?;
    let n = points.len();
    let flagged = (contamination * n as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut labels = vec![false; n];
    for &i in order.iter().take(flagged.min(n)) {
        labels[i] = true;
    }
    Ok(labels)
}
