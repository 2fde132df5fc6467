//! JSON report schema. One document per run, `schema_version: 1`.
//!
//! Deterministic payload and measurement metadata are kept in separate
//! fields: everything except `timestamp` and the timing values is
//! bit-reproducible for a fixed `--seed`.

use hullpeel::detector::{StopReason, VolumeProfile};
use hullpeel::evaluation::EvalReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChFriendly {
    pub friendly: bool,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub steps: usize,
    pub volume_initial: f64,
    pub volume_final: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StopInfo {
    pub step: usize,
    pub reason: StopReason,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Timing {
    pub load_s: f64,
    pub reduce_s: f64,
    pub detect_s: f64,
    pub total_s: f64,
}

/// One detector run on one dataset; the row format behind every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub detector: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub timestamp: u64,
    pub eval: Option<EvalReport>,
    pub ch_friendly: Option<ChFriendly>,
    pub profile_summary: Option<ProfileSummary>,
    pub stop: Option<StopInfo>,
    pub anomalies: Vec<usize>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectReport {
    pub schema_version: u32,
    pub command: String,
    pub record: RunRecord,
    /// Full volume profile so downstream plotting needs nothing else.
    pub profile: VolumeProfile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanRow {
    pub detector: String,
    pub datasets: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub records: Vec<RunRecord>,
    /// Unweighted per-detector means across the labeled datasets.
    pub unweighted_mean: Vec<MeanRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRow {
    pub level: f64,
    pub repetitions: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub detect_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSweepReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub dataset: String,
    pub detector: String,
    pub levels: Vec<NoiseRow>,
}

pub fn now_unix_seconds() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
