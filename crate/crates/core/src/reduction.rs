//! Feature standardization, PCA via Jacobi eigendecomposition, and ingestion
//! of externally produced embeddings.
//!
//! Sample (1/(n-1)) variance is used throughout. The external-embedding path
//! lets stochastic reducers run outside the pipeline and hand in their
//! output as headerless CSV, keeping this artifact deterministic.

use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("input matrix is empty")]
    EmptyInput,
    #[error("PCA needs more samples than components: n={n}, k={k}")]
    InsufficientSamples { n: usize, k: usize },
    #[error("{path}: expected {expected} rows, found {found}")]
    RowCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: {message}")]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid reduction config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    Pca,
    External,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub method: ReductionMethod,
    pub target_dim: usize,
    pub standardize: bool,
    pub embedding_path: Option<PathBuf>,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            method: ReductionMethod::Pca,
            target_dim: 2,
            standardize: true,
            embedding_path: None,
        }
    }
}

/// Centers each column and scales it to unit sample standard deviation;
/// constant columns map to all-zeros.
pub fn standardize(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ReductionError> {
    let n = matrix.len();
    if n == 0 || matrix[0].is_empty() {
        return Err(ReductionError::EmptyInput);
    }
    let f = matrix[0].len();
    let mut out = matrix.to_vec();
    for j in 0..f {
        let mean = matrix.iter().map(|row| row[j]).sum::<f64>() / n as f64;
        let var = if n > 1 {
            matrix
                .iter()
                .map(|row| (row[j] - mean) * (row[j] - mean))
                .sum::<f64>()
                / (n - 1) as f64
        } else {
            0.0
        };
        let std = var.sqrt();
        for row in out.iter_mut() {
            row[j] = if std > 0.0 {
                (row[j] - mean) / std
            } else {
                0.0
            };
        }
    }
    Ok(out)
}

/// A fitted principal-component basis.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Column means of the training matrix.
    pub mean: Vec<f64>,
    /// Top-k eigenvectors of the sample covariance, one per row, ordered by
    /// descending eigenvalue. Each component's largest-magnitude loading is
    /// positive.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues matching `components`.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn transform(&self, matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
        matrix
            .iter()
            .map(|row| {
                self.components
                    .iter()
                    .map(|comp| {
                        comp.iter()
                            .zip(row.iter().zip(&self.mean))
                            .map(|(c, (x, m))| c * (x - m))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Fits PCA on the sample covariance of `matrix`.
pub fn pca_fit(matrix: &[Vec<f64>], k: usize) -> Result<PcaModel, ReductionError> {
    let n = matrix.len();
    if n == 0 || matrix[0].is_empty() {
        return Err(ReductionError::EmptyInput);
    }
    if n <= k {
        return Err(ReductionError::InsufficientSamples { n, k });
    }
    let f = matrix[0].len();
    let k = k.min(f);

    let mean: Vec<f64> = (0..f)
        .map(|j| matrix.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; f]; f];
    for row in matrix {
        for a in 0..f {
            let da = row[a] - mean[a];
            for b in a..f {
                cov[a][b] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..f {
        for b in a..f {
            cov[a][b] /= (n - 1) as f64;
            cov[b][a] = cov[a][b];
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(k);
    let mut top_values = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut comp: Vec<f64> = (0..f).map(|row| eigenvectors[row][idx]).collect();
        // Sign convention: the largest-magnitude loading is positive.
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|(ai, a), (bi, b)| a.abs().total_cmp(&b.abs()).then(bi.cmp(ai)))
            .map(|(i, _)| i)
            .unwrap();
        if comp[lead] < 0.0 {
            for c in comp.iter_mut() {
                *c = -*c;
            }
        }
        components.push(comp);
        top_values.push(eigenvalues[idx]);
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues: top_values,
    })
}

/// Projects `matrix` onto its top-k principal components.
pub fn pca_fit_transform(matrix: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>, ReductionError> {
    Ok(pca_fit(matrix, k)?.transform(matrix))
}

/// Cyclic Jacobi rotations on a symmetric matrix. Returns (eigenvalues,
/// eigenvectors-as-columns). Deterministic and ample for the few dozen
/// features seen here.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n <= 1 {
        return (a.iter().enumerate().map(|(i, r)| r[i]).collect(), v);
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Reads a headerless CSV of reals, one row per dataset row.
pub fn load_external_embedding(
    path: &Path,
    expected_rows: usize,
) -> Result<Vec<Vec<f64>>, ReductionError> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| ReductionError::ParseError {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("'{}' is not a number", field.trim()),
                })?;
            row.push(value);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(ReductionError::ParseError {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected {w} columns, found {}", row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.len() != expected_rows {
        return Err(ReductionError::RowCountMismatch {
            path: path.to_path_buf(),
            expected: expected_rows,
            found: rows.len(),
        });
    }
    Ok(rows)
}

/// Runs the configured preprocessing: optional standardization followed by
/// PCA, an external embedding, or a pass-through.
pub fn apply(
    config: &ReductionConfig,
    matrix: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, ReductionError> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Err(ReductionError::EmptyInput);
    }
    match config.method {
        ReductionMethod::External => {
            let path = config.embedding_path.as_ref().ok_or_else(|| {
                ReductionError::InvalidConfig("method 'external' requires an embedding path".into())
            })?;
            load_external_embedding(path, matrix.len())
        }
        ReductionMethod::Pca => {
            if config.target_dim < 2 || config.target_dim > matrix[0].len() {
                return Err(ReductionError::InvalidConfig(format!(
                    "target_dim must be in [2, {}], got {}",
                    matrix[0].len(),
                    config.target_dim
                )));
            }
            let prepared = if config.standardize {
                standardize(matrix)?
            } else {
                matrix.to_vec()
            };
            pca_fit_transform(&prepared, config.target_dim)
        }
        ReductionMethod::None => {
            if config.standardize {
                standardize(matrix)
            } else {
                Ok(matrix.to_vec())
            }
        }
    }
}
