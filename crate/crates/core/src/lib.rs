//! Convex-hull volume-peeling anomaly detection.
//!
//! The detector greedily removes the hull vertex whose deletion most shrinks
//! the hull's hyper-volume, stops by a configurable rule (naive, elbow, or
//! optimal-k), and scores removed points by their relative volume drop. The
//! crate also ships an isolation-forest baseline, PCA/standardization
//! preprocessing, synthetic adversarial geometries, and the metric suite
//! used to compare detectors.
//!
//! With the default `parallel` feature, the per-iteration candidate sweep
//! and tree fitting run on rayon; `HULLPEEL_THREADS=1` (or building without
//! the feature) forces the sequential fallback. Results are identical
//! either way.

pub mod data;
pub mod detector;
pub mod evaluation;
pub mod geometry;
pub mod iforest;
pub mod oracles;
pub mod parallelism;
pub mod reduction;

pub use data::Dataset;
pub use detector::{DetectionResult, DetectorConfig, StoppingRule, VolumeProfile};
pub use geometry::{ConvexHull, Point};
pub use iforest::{ForestParams, IsolationForestModel};
