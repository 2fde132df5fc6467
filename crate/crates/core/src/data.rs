//! Dataset ingestion and the synthetic fixtures: torus, circle-with-noise,
//! unnormalized Gaussians, a small demo blob with two planted anomalies,
//! and a per-feature Gaussian noise injector for robustness sweeps.

use crate::geometry::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("label column '{0}' not found")]
    MissingLabelColumn(String),
    #[error("line {line}: label '{value}' is not binary (expected 0 or 1)")]
    NonBinaryLabel { line: usize, value: String },
    #[error("bad radii: need 0 < inner < outer")]
    BadRadii,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A numeric feature matrix with optional ground-truth anomaly labels
/// (anomaly = true).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Option<Vec<bool>>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.features.iter().cloned().map(Point::new).collect()
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels
            .as_ref()
            .map_or(0, |l| l.iter().filter(|&&a| a).count())
    }
}

/// Builds points from any row-major matrix.
pub fn matrix_to_points(matrix: &[Vec<f64>]) -> Vec<Point> {
    matrix.iter().cloned().map(Point::new).collect()
}

/// Loads a CSV dataset. The label column, selected by header name or by
/// 0-based index, is removed from the features and parsed as binary.
pub fn load_csv(
    path: &Path,
    label_column: Option<&str>,
    has_header: bool,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(e, 0))?;

    let headers: Option<Vec<String>> = if has_header {
        Some(
            reader
                .headers()
                .map_err(|e| csv_error(e, 1))?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let label_idx: Option<usize> = match label_column {
        None => None,
        Some(selector) => {
            let by_name = headers
                .as_ref()
                .and_then(|h| h.iter().position(|name| name == selector));
            match by_name.or_else(|| selector.parse::<usize>().ok()) {
                Some(idx) => Some(idx),
                None => return Err(DataError::MissingLabelColumn(selector.to_string())),
            }
        }
    };

    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(features.len() + 1);
        if let Some(w) = width {
            if record.len() != w {
                return Err(DataError::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                });
            }
        } else {
            if let Some(idx) = label_idx {
                if idx >= record.len() {
                    return Err(DataError::MissingLabelColumn(
                        label_column.unwrap_or_default().to_string(),
                    ));
                }
            }
            width = Some(record.len());
        }

        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(parse_label(field, line)?);
            } else {
                let value: f64 = field.parse().map_err(|_| DataError::Parse {
                    line,
                    message: format!("'{field}' is not a number"),
                })?;
                row.push(value);
            }
        }
        features.push(row);
    }

    let feature_names = headers.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, name)| name)
            .collect()
    });
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Ok(Dataset {
        name,
        features,
        labels: label_idx.map(|_| labels),
        feature_names,
    })
}

fn parse_label(field: &str, line: usize) -> Result<bool, DataError> {
    match field.parse::<f64>() {
        Ok(v) if v == 0.0 => Ok(false),
        Ok(v) if v == 1.0 => Ok(true),
        _ => Err(DataError::NonBinaryLabel {
            line,
            value: field.to_string(),
        }),
    }
}

fn csv_error(e: csv::Error, fallback_line: usize) -> DataError {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    DataError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Writes header then rows; the label column, when present, comes last and
/// is named "label". Floats round-trip exactly.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let names: Vec<String> = match &dataset.feature_names {
        Some(names) => names.clone(),
        None => (0..dataset.n_features()).map(|j| format!("f{j}")).collect(),
    };
    let mut header = names.join(",");
    if dataset.labels.is_some() {
        header.push_str(",label");
    }
    writeln!(out, "{header}")?;
    for (i, row) in dataset.features.iter().enumerate() {
        let mut line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if let Some(labels) = &dataset.labels {
            line.push_str(if labels[i] { ",1" } else { ",0" });
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Ring band of normals with a small cluster of anomalies at its center:
/// hull-invisible anomalies, the detector's worst case.
///
/// Normal radii concentrate toward `r_outer` (`r = r_outer - span * u^4`),
/// so the majority of points sit on or near the hull boundary the way the
/// torus renders; the band still covers `[r_inner, r_outer]`.
pub fn gen_torus(
    n_normal: usize,
    n_anomaly: usize,
    r_inner: f64,
    r_outer: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(DataError::BadRadii);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_normal + n_anomaly);
    for _ in 0..n_normal {
        let u: f64 = rng.random();
        let r = r_outer - (r_outer - r_inner) * u.powi(4);
        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        features.push(vec![r * theta.cos(), r * theta.sin()]);
    }
    let anomaly_radius = 0.25 * r_inner;
    for _ in 0..n_anomaly {
        let r = anomaly_radius * rng.random::<f64>().sqrt();
        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        features.push(vec![r * theta.cos(), r * theta.sin()]);
    }
    let labels = (0..n_normal)
        .map(|_| false)
        .chain((0..n_anomaly).map(|_| true))
        .collect();
    Ok(Dataset {
        name: "torus".into(),
        features,
        labels: Some(labels),
        feature_names: None,
    })
}

/// Jittered circle of normals; anomalies sampled uniformly in the enclosing
/// box up to 1.5 x radius but kept out of the band radius +- 3 noise_std.
/// Nearly every normal point sits on or near the hull boundary.
pub fn gen_circle_noise(
    n_normal: usize,
    n_anomaly: usize,
    radius: f64,
    noise_std: f64,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_normal + n_anomaly);
    for _ in 0..n_normal {
        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        features.push(vec![
            radius * theta.cos() + noise_std * normal(&mut rng),
            radius * theta.sin() + noise_std * normal(&mut rng),
        ]);
    }
    let band = 3.0 * noise_std;
    for _ in 0..n_anomaly {
        loop {
            let x = (rng.random::<f64>() * 2.0 - 1.0) * 1.5 * radius;
            let y = (rng.random::<f64>() * 2.0 - 1.0) * 1.5 * radius;
            let r = (x * x + y * y).sqrt();
            if r < radius - band || r > radius + band {
                features.push(vec![x, y]);
                break;
            }
        }
    }
    let labels = (0..n_normal)
        .map(|_| false)
        .chain((0..n_anomaly).map(|_| true))
        .collect();
    Dataset {
        name: "circle".into(),
        features,
        labels: Some(labels),
        feature_names: None,
    }
}

/// Gaussian cloud stretched by unequal per-axis scales. Anomalies sit at
/// moderate Mahalanobis distance near the long axis, inside the raw hull,
/// so they are invisible to volume peeling until the data is standardized.
pub fn gen_unnormalized(
    n_normal: usize,
    n_anomaly: usize,
    scale_x: f64,
    scale_y: f64,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_normal + n_anomaly);
    for _ in 0..n_normal {
        features.push(vec![scale_x * normal(&mut rng), scale_y * normal(&mut rng)]);
    }
    // Anomalies go near the long axis at 70-80% of the observed extreme:
    // moderate Mahalanobis distance, comfortably inside the raw hull.
    let along_x = scale_x >= scale_y;
    let (long_idx, long_scale) = if along_x { (0, scale_x) } else { (1, scale_y) };
    let max_along = features
        .iter()
        .map(|row| (row[long_idx] / long_scale).abs())
        .fold(2.5, f64::max);
    for i in 0..n_anomaly {
        let m = (0.7 + 0.1 * rng.random::<f64>()) * max_along;
        let wobble = 0.2 * (rng.random::<f64>() - 0.5);
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        let (nx, ny) = if along_x {
            (side * m, wobble)
        } else {
            (wobble, side * m)
        };
        features.push(vec![scale_x * nx, scale_y * ny]);
    }
    let labels = (0..n_normal)
        .map(|_| false)
        .chain((0..n_anomaly).map(|_| true))
        .collect();
    Dataset {
        name: "unnormalized".into(),
        features,
        labels: Some(labels),
        feature_names: None,
    }
}

/// Fixed small 2-D demo: a dense blob (a 20-point ring plus interior
/// points) and two distant anomalies that inflate the hull volume by well
/// over 40%. The anomalies occupy the last two rows.
pub fn gen_square_demo() -> Dataset {
    let mut features: Vec<Vec<f64>> = Vec::with_capacity(28);
    for i in 0..20 {
        let t = i as f64 / 20.0 * std::f64::consts::TAU;
        features.push(vec![0.5 + 0.5 * t.cos(), 0.5 + 0.5 * t.sin()]);
    }
    for c in [
        [0.5, 0.5],
        [0.3, 0.4],
        [0.7, 0.62],
        [0.42, 0.68],
        [0.6, 0.35],
        [0.35, 0.58],
    ] {
        features.push(c.to_vec());
    }
    features.push(vec![3.0, 2.4]);
    features.push(vec![-1.6, -1.1]);
    let mut labels = vec![false; 26];
    labels.extend([true, true]);
    Dataset {
        name: "square-demo".into(),
        features,
        labels: Some(labels),
        feature_names: None,
    }
}

/// Adds zero-mean Gaussian noise with per-feature variance `level` times the
/// feature's sample variance. Level 0 returns the input unchanged; constant
/// features are never perturbed.
pub fn add_gaussian_noise(dataset: &Dataset, level: f64, seed: u64) -> Dataset {
    if level <= 0.0 || dataset.n_rows() < 2 {
        return dataset.clone();
    }
    let n = dataset.n_rows();
    let f = dataset.n_features();
    let mut stds = Vec::with_capacity(f);
    for j in 0..f {
        let mean = dataset.features.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = dataset
            .features
            .iter()
            .map(|r| (r[j] - mean) * (r[j] - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        stds.push((level * var).sqrt());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = dataset
        .features
        .iter()
        .map(|row| {
            row.iter()
                .zip(&stds)
                .map(|(&v, &std)| {
                    if std > 0.0 {
                        v + std * normal(&mut rng)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Dataset {
        name: dataset.name.clone(),
        features,
        labels: dataset.labels.clone(),
        feature_names: dataset.feature_names.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;

    #[test]
    fn load_csv_with_named_label() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        writeln!(std::fs::File::create(&path).unwrap(), "a,b,y\n1,2,0\n3,4,1").unwrap();
        let ds = load_csv(&path, Some("y"), true).unwrap();
        assert_eq!(ds.features, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(ds.labels, Some(vec![false, true]));
        assert_eq!(ds.feature_names, Some(vec!["a".into(), "b".into()]));
    }

    #[test]
    fn load_csv_with_label_by_index_and_no_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        writeln!(std::fs::File::create(&path).unwrap(), "1,2,0\n3,4,1").unwrap();
        let ds = load_csv(&path, Some("2"), false).unwrap();
        assert_eq!(ds.features, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(ds.labels, Some(vec![false, true]));
    }

    #[test]
    fn ragged_row_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        writeln!(
            std::fs::File::create(&path).unwrap(),
            "a,b\n1,2\n3,4,5\n6,7"
        )
        .unwrap();
        match load_csv(&path, None, true) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected Parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_binary_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        writeln!(std::fs::File::create(&path).unwrap(), "a,y\n1,0\n2,2").unwrap();
        assert!(matches!(
            load_csv(&path, Some("y"), true),
            Err(DataError::NonBinaryLabel { value, .. }) if value == "2"
        ));
    }

    #[test]
    fn missing_label_column_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        writeln!(std::fs::File::create(&path).unwrap(), "a,b\n1,2").unwrap();
        assert!(matches!(
            load_csv(&path, Some("nope"), true),
            Err(DataError::MissingLabelColumn(_))
        ));
    }

    #[test]
    fn csv_round_trip_preserves_content() {
        let ds = gen_torus(40, 4, 2.0, 3.0, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, Some("label"), true).unwrap();
        assert_eq!(back.labels, ds.labels);
        for (a, b) in back
            .features
            .iter()
            .flatten()
            .zip(ds.features.iter().flatten())
        {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn torus_respects_radii_and_center_anomalies() {
        let ds = gen_torus(300, 5, 2.0, 3.0, 7).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        for (row, &anomalous) in ds.features.iter().zip(labels) {
            let r = (row[0] * row[0] + row[1] * row[1]).sqrt();
            if anomalous {
                assert!(r <= 0.25 * 2.0 + 1e-12);
            } else {
                assert!((2.0..=3.0).contains(&r));
            }
        }
        assert!(matches!(
            gen_torus(10, 1, 3.0, 2.0, 0),
            Err(DataError::BadRadii)
        ));
    }

    #[test]
    fn central_anomalies_cannot_expand_the_torus_hull() {
        let ds = gen_torus(500, 5, 2.0, 3.0, 7).unwrap();
        let all = ds.to_points();
        let normals: Vec<_> = all[..500].to_vec();
        let hull_all = crate::geometry::compute_hull(&all, 2).unwrap();
        let hull_normals = crate::geometry::compute_hull(&normals, 2).unwrap();
        let ratio = hull_all.volume() / hull_normals.volume();
        assert!((ratio - 1.0).abs() <= 0.02, "ratio {ratio}");
    }

    #[test]
    fn circle_noise_respects_the_exclusion_band() {
        let ds = gen_circle_noise(100, 20, 1.0, 0.03, 5);
        let labels = ds.labels.as_ref().unwrap();
        for (row, &anomalous) in ds.features.iter().zip(labels) {
            let r = (row[0] * row[0] + row[1] * row[1]).sqrt();
            if anomalous {
                assert!(r < 1.0 - 0.09 || r > 1.0 + 0.09);
                assert!(row[0].abs() <= 1.5 && row[1].abs() <= 1.5);
            }
        }

        let exact = gen_circle_noise(50, 0, 2.0, 0.0, 5);
        for row in &exact.features {
            let r = (row[0] * row[0] + row[1] * row[1]).sqrt();
            assert!((r - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn most_circle_normals_hug_the_hull_boundary() {
        let ds = gen_circle_noise(200, 0, 1.0, 0.03, 7);
        let points = ds.to_points();
        let ring = oracles::brute_force_hull_ring_2d(&points).unwrap();
        let near = points
            .iter()
            .filter(|p| {
                let q = [p.coords[0], p.coords[1]];
                let mut min_dist = f64::INFINITY;
                for i in 0..ring.len() {
                    let a = ring[i];
                    let b = ring[(i + 1) % ring.len()];
                    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                    let len = (ex * ex + ey * ey).sqrt();
                    let dist = ((q[0] - a[0]) * ey - (q[1] - a[1]) * ex).abs() / len;
                    min_dist = min_dist.min(dist);
                }
                min_dist <= 3.0 * 0.03
            })
            .count();
        assert!(
            near as f64 >= 0.6 * points.len() as f64,
            "only {near} of {} near the boundary",
            points.len()
        );
    }

    #[test]
    fn unnormalized_variances_scale_with_the_axes() {
        let ds = gen_unnormalized(800, 8, 100.0, 1.0, 3);
        let n = ds.n_rows() as f64;
        let var = |j: usize| {
            let mean = ds.features.iter().map(|r| r[j]).sum::<f64>() / n;
            ds.features
                .iter()
                .map(|r| (r[j] - mean) * (r[j] - mean))
                .sum::<f64>()
                / (n - 1.0)
        };
        let ratio = var(0) / var(1);
        let expected = 100.0 * 100.0;
        assert!(
            (ratio / expected - 1.0).abs() < 0.35,
            "variance ratio {ratio} vs {expected}"
        );
        assert_eq!(ds.anomaly_count(), 8);

        let standardized = crate::reduction::standardize(&ds.features).unwrap();
        let var_std = |j: usize| {
            let mean = standardized.iter().map(|r| r[j]).sum::<f64>() / n;
            standardized
                .iter()
                .map(|r| (r[j] - mean) * (r[j] - mean))
                .sum::<f64>()
                / (n - 1.0)
        };
        assert!((var_std(0) - 1.0).abs() < 1e-9);
        assert!((var_std(1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unnormalized_anomalies_hide_inside_the_normal_hull() {
        let ds = gen_unnormalized(500, 6, 100.0, 1.0, 3);
        let normals: Vec<_> = ds.to_points()[..500].to_vec();
        let hull = crate::geometry::compute_hull(&normals, 2).unwrap();
        let eps = crate::geometry::epsilon_for(&normals);
        for row in &ds.features[500..] {
            let inside =
                crate::geometry::contains(&hull, &normals, &Point::new(row.clone()), eps).unwrap();
            assert!(inside, "anomaly {row:?} outside the normal hull");
        }
    }

    #[test]
    fn square_demo_inflates_the_hull_by_forty_percent() {
        let ds = gen_square_demo();
        assert_eq!(ds.anomaly_count(), 2);
        let points = ds.to_points();
        let with = crate::geometry::compute_hull(&points, 2).unwrap().volume();
        let without = crate::geometry::compute_hull(&points[..26], 2)
            .unwrap()
            .volume();
        assert!(with >= 1.4 * without, "ratio {}", with / without);
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        assert_eq!(
            gen_torus(50, 5, 2.0, 3.0, 11).unwrap(),
            gen_torus(50, 5, 2.0, 3.0, 11).unwrap()
        );
        assert_eq!(
            gen_circle_noise(50, 5, 1.0, 0.05, 11),
            gen_circle_noise(50, 5, 1.0, 0.05, 11)
        );
        assert_eq!(
            gen_unnormalized(50, 5, 10.0, 1.0, 11),
            gen_unnormalized(50, 5, 10.0, 1.0, 11)
        );
        assert_ne!(
            gen_torus(50, 5, 2.0, 3.0, 11).unwrap().features,
            gen_torus(50, 5, 2.0, 3.0, 12).unwrap().features
        );
    }

    #[test]
    fn noise_level_zero_is_the_identity() {
        let ds = gen_torus(30, 3, 2.0, 3.0, 4).unwrap();
        let noisy = add_gaussian_noise(&ds, 0.0, 99);
        assert_eq!(ds, noisy);
    }

    #[test]
    fn constant_features_survive_noise() {
        let ds = Dataset {
            name: "const".into(),
            features: (0..20).map(|i| vec![i as f64, 7.0]).collect(),
            labels: None,
            feature_names: None,
        };
        let noisy = add_gaussian_noise(&ds, 0.05, 1);
        assert!(noisy.features.iter().all(|r| r[1] == 7.0));
        assert!(noisy
            .features
            .iter()
            .zip(&ds.features)
            .any(|(a, b)| a[0] != b[0]));
    }

    #[test]
    fn injected_noise_variance_tracks_the_requested_level() {
        let mut rng_ds = Vec::new();
        for i in 0..4000 {
            let t = i as f64 * 0.01;
            rng_ds.push(vec![3.0 * t.sin() + t, 40.0 * (t * 0.7).cos()]);
        }
        let ds = Dataset {
            name: "big".into(),
            features: rng_ds,
            labels: None,
            feature_names: None,
        };
        let level = 0.05;
        let noisy = add_gaussian_noise(&ds, level, 13);
        for j in 0..2 {
            let n = ds.n_rows() as f64;
            let mean = ds.features.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = ds
                .features
                .iter()
                .map(|r| (r[j] - mean) * (r[j] - mean))
                .sum::<f64>()
                / (n - 1.0);
            let diff_var = noisy
                .features
                .iter()
                .zip(&ds.features)
                .map(|(a, b)| (a[j] - b[j]) * (a[j] - b[j]))
                .sum::<f64>()
                / (n - 1.0);
            let target = level * var;
            assert!(
                (diff_var / target - 1.0).abs() <= 0.2,
                "feature {j}: injected {diff_var} vs target {target}"
            );
        }
    }
}
