//! Greedy volume-based hull peeling.
//!
//! Each outer iteration fully recomputes the hull of the remaining set with
//! every current hull vertex removed in turn, then drops the vertex whose
//! removal shrinks the volume the most. The volume profile drives three
//! stopping strategies (naive, elbow, optimal) plus a diagnostic
//! objective-maximizing rule, and anomaly scores are the per-step relative
//! volume drops.

use crate::geometry::{self, ConvexHull, GeometryError, Point};
use crate::parallelism;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default fraction of the first volume drop below which the naive rule
/// stops.
pub const DEFAULT_NAIVE_FRACTION: f64 = 0.01;

/// Number of peeling steps inspected by the hull-friendliness test.
pub const CH_FRIENDLY_WINDOW: usize = 10;

/// Relative volume reduction over the window that counts as hull-friendly.
pub const CH_FRIENDLY_THRESHOLD: f64 = 0.5;

/// Additive epsilon that breaks score ties in favour of earlier removals.
pub const SCORE_TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("peeling needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("profile has {got} steps; at least {needed} required")]
    InsufficientProfile { needed: usize, got: usize },
}

/// When to stop removing hull vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop once a step's volume drop falls below `fraction` of the first
    /// step's drop.
    Naive { fraction: f64 },
    /// Peel the full profile, then cut at the elbow of the volume curve.
    Elbow,
    /// Remove exactly `k` points; an oracle bound, not deployable.
    Optimal { k: usize },
    /// Diagnostic rule outside the evaluated strategies: peel the full
    /// profile, then cut at the step with the largest recorded objective.
    MaxObjective,
}

impl StoppingRule {
    pub fn naive_default() -> Self {
        StoppingRule::Naive {
            fraction: DEFAULT_NAIVE_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub stopping: StoppingRule,
    /// Sensitivity weight of the recorded objective; peeling itself never
    /// consults it.
    pub lambda: f64,
    /// Smallest number of points allowed to remain; clamped up to d+1.
    pub min_points: Option<usize>,
    /// Record the objective value per profile step.
    pub record_objective: bool,
}

impl DetectorConfig {
    pub fn new(stopping: StoppingRule) -> Self {
        Self {
            stopping,
            lambda: 1.0,
            min_points: None,
            record_objective: true,
        }
    }

    pub fn optimal(k: usize) -> Self {
        Self::new(StoppingRule::Optimal { k })
    }

    pub fn naive(fraction: f64) -> Self {
        Self::new(StoppingRule::Naive { fraction })
    }

    pub fn elbow() -> Self {
        Self::new(StoppingRule::Elbow)
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::new(StoppingRule::naive_default())
    }
}

/// One peeling step: the removed point (absent at step 0) and the hull
/// volume of the set that remains afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileStep {
    pub step: usize,
    pub removed: Option<usize>,
    pub volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

/// Ordered record of hull volumes across removals; the signal every stopping
/// rule operates on.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub steps: Vec<ProfileStep>,
}

impl VolumeProfile {
    /// Profile over a bare volume sequence, for evaluating stopping rules on
    /// synthetic curves. Removed indices are filled with placeholders.
    pub fn from_volumes(volumes: &[f64]) -> Self {
        let steps = volumes
            .iter()
            .enumerate()
            .map(|(i, &v)| ProfileStep {
                step: i,
                removed: (i > 0).then(|| i - 1),
                volume: v,
                objective: None,
            })
            .collect();
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn initial_volume(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.volume)
    }

    pub fn final_volume(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.volume)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CriterionMet,
    Exhausted,
    OptimalKReached,
}

/// Outcome of a peeling run. `anomalies` is the removal sequence truncated at
/// `stop_step`; retained points score exactly zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub anomalies: Vec<usize>,
    pub scores: Vec<f64>,
    pub profile: VolumeProfile,
    pub stop_step: usize,
    pub stop_reason: StopReason,
}

/// The trade-off objective `remaining_count - lambda * volume`.
pub fn objective(remaining_count: usize, volume: f64, lambda: f64) -> f64 {
    remaining_count as f64 - lambda * volume
}

/// Peels hull vertices off `points` until the configured rule fires.
///
/// Honors the `parallel` feature and the `HULLPEEL_THREADS` cap for the
/// per-iteration candidate sweep; results are identical either way.
pub fn peel(points: &[Point], config: &DetectorConfig) -> Result<DetectionResult, DetectorError> {
    peel_impl(points, config, parallelism::parallel_enabled())
}

/// Same as [`peel`] but always evaluates candidates on the calling thread.
pub fn peel_sequential(
    points: &[Point],
    config: &DetectorConfig,
) -> Result<DetectionResult, DetectorError> {
    peel_impl(points, config, false)
}

fn peel_impl(
    points: &[Point],
    config: &DetectorConfig,
    parallel: bool,
) -> Result<DetectionResult, DetectorError> {
    let n = points.len();
    if n == 0 {
        return Err(DetectorError::TooFewPoints { needed: 3, got: 0 });
    }
    let dim = points[0].dim();
    if n < dim + 2 {
        return Err(DetectorError::TooFewPoints {
            needed: dim + 2,
            got: n,
        });
    }

    let record_objective =
        config.record_objective || matches!(config.stopping, StoppingRule::MaxObjective);
    let floor = config.min_points.unwrap_or(dim + 1).max(dim + 1).max(3);
    let optimal_k = match config.stopping {
        StoppingRule::Optimal { k } => Some(k),
        _ => None,
    };

    let mut alive: Vec<usize> = (0..n).collect();
    let mut hull = geometry::compute_hull(points, dim)?;
    let mut current_volume = hull.volume();

    let mut profile = VolumeProfile::default();
    profile.steps.push(ProfileStep {
        step: 0,
        removed: None,
        volume: current_volume,
        objective: record_objective.then(|| objective(n, current_volume, config.lambda)),
    });

    let mut stop_step: Option<usize> = None;
    let mut stop_reason = StopReason::Exhausted;

    loop {
        let removed_so_far = profile.len() - 1;
        if let Some(k) = optimal_k {
            if removed_so_far >= k {
                stop_step = Some(removed_so_far);
                stop_reason = StopReason::OptimalKReached;
                break;
            }
        }
        if alive.len() <= floor {
            break;
        }

        let Some(best) = best_removal(points, &alive, &hull, dim, parallel) else {
            break;
        };
        // Removing a hull vertex cannot grow the hull; tolerate recomputation
        // round-off and keep the recorded profile monotone.
        if best.volume > current_volume * (1.0 + 1e-12) {
            break;
        }
        let new_volume = best.volume.min(current_volume);

        alive.retain(|&i| i != best.index);
        let subset: Vec<Point> = alive.iter().map(|&i| points[i].clone()).collect();
        hull = geometry::compute_hull(&subset, dim)?.map_indices(|i| alive[i]);
        current_volume = new_volume;

        let step = profile.len();
        profile.steps.push(ProfileStep {
            step,
            removed: Some(best.index),
            volume: new_volume,
            objective: record_objective.then(|| objective(alive.len(), new_volume, config.lambda)),
        });

        if let StoppingRule::Naive { fraction } = config.stopping {
            if stop_naive(&profile, fraction)? {
                // The drop that fired the rule is insignificant; the point it
                // removed stays classified as normal.
                stop_step = Some(step - 1);
                stop_reason = StopReason::CriterionMet;
                break;
            }
        }
    }

    let stop_step = match (stop_step, &config.stopping) {
        (Some(s), _) => s,
        (None, StoppingRule::Elbow) => {
            stop_reason = StopReason::CriterionMet;
            stop_elbow(&profile)?
        }
        (None, StoppingRule::MaxObjective) => {
            stop_reason = StopReason::CriterionMet;
            max_objective_step(&profile)
        }
        (None, _) => profile.len() - 1,
    };

    let scores = anomaly_scores(&profile, stop_step, n);
    let anomalies = profile.steps[1..=stop_step]
        .iter()
        .map(|s| s.removed.expect("steps past 0 record a removal"))
        .collect();

    Ok(DetectionResult {
        anomalies,
        scores,
        profile,
        stop_step,
        stop_reason,
    })
}

struct Removal {
    volume: f64,
    index: usize,
}

/// Evaluates every current hull vertex by full hull recomputation on the
/// remaining set without it, returning the removal with the smallest new
/// volume. Ties go to the lowest dataset index so runs are reproducible
/// under any evaluation order.
fn best_removal(
    points: &[Point],
    alive: &[usize],
    hull: &ConvexHull,
    dim: usize,
    parallel: bool,
) -> Option<Removal> {
    let candidates = hull.vertex_indices();
    let eval = |&cand: &usize| -> Option<Removal> {
        let subset: Vec<Point> = alive
            .iter()
            .filter(|&&i| i != cand)
            .map(|&i| points[i].clone())
            .collect();
        match geometry::compute_hull(&subset, dim) {
            Ok(h) => Some(Removal {
                volume: h.volume(),
                index: cand,
            }),
            Err(_) => None,
        }
    };

    let evaluated: Vec<Option<Removal>> = run_sweep(candidates, eval, parallel);
    evaluated
        .into_iter()
        .flatten()
        .min_by(|a, b| a.volume.total_cmp(&b.volume).then(a.index.cmp(&b.index)))
}

#[cfg(feature = "parallel")]
fn run_sweep<F>(candidates: &[usize], eval: F, parallel: bool) -> Vec<Option<Removal>>
where
    F: Fn(&usize) -> Option<Removal> + Sync + Send,
{
    if parallel {
        candidates.par_iter().map(eval).collect()
    } else {
        candidates.iter().map(eval).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_sweep<F>(candidates: &[usize], eval: F, _parallel: bool) -> Vec<Option<Removal>>
where
    F: Fn(&usize) -> Option<Removal>,
{
    candidates.iter().map(eval).collect()
}

/// True once the latest drop falls below `fraction` of the first step's drop
/// (zero first drop fires immediately).
pub fn stop_naive(profile: &VolumeProfile, fraction: f64) -> Result<bool, DetectorError> {
    if profile.len() < 2 {
        return Err(DetectorError::InsufficientProfile {
            needed: 2,
            got: profile.len(),
        });
    }
    let v = &profile.steps;
    let original = v[0].volume - v[1].volume;
    if original <= 0.0 {
        return Ok(true);
    }
    let latest = v[v.len() - 2].volume - v[v.len() - 1].volume;
    Ok(latest < fraction * original)
}

/// Elbow of the volume profile: the interior step where the min-max
/// normalized curve dips farthest below the chord joining its endpoints.
/// Ties break toward the smaller step index.
pub fn stop_elbow(profile: &VolumeProfile) -> Result<usize, DetectorError> {
    if profile.len() < 3 {
        return Err(DetectorError::InsufficientProfile {
            needed: 3,
            got: profile.len(),
        });
    }
    let volumes: Vec<f64> = profile.steps.iter().map(|s| s.volume).collect();
    let last = volumes.len() - 1;
    let v_min = volumes.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = volumes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = v_max - v_min;
    if span == 0.0 {
        return Ok(1);
    }
    let norm_y = |v: f64| (v - v_min) / span;
    let y0 = norm_y(volumes[0]);
    let y_last = norm_y(volumes[last]);
    let mut best_step = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for i in 1..last {
        let x = i as f64 / last as f64;
        let chord_y = y0 + (y_last - y0) * x;
        let gap = chord_y - norm_y(volumes[i]);
        if gap > best_gap {
            best_gap = gap;
            best_step = i;
        }
    }
    Ok(best_step)
}

fn max_objective_step(profile: &VolumeProfile) -> usize {
    let mut best_step = 0;
    let mut best = f64::NEG_INFINITY;
    for s in &profile.steps {
        let obj = s.objective.unwrap_or(f64::NEG_INFINITY);
        if obj > best {
            best = obj;
            best_step = s.step;
        }
    }
    best_step
}

/// Per-point anomaly scores: the point removed at step `t <= stop_step`
/// scores its relative volume drop plus a removal-order tie epsilon;
/// retained points score zero. Higher scores mean more anomalous.
pub fn anomaly_scores(profile: &VolumeProfile, stop_step: usize, n: usize) -> Vec<f64> {
    let mut scores = vec![0.0; n];
    if profile.is_empty() || stop_step == 0 {
        return scores;
    }
    let v0 = profile.steps[0].volume;
    for t in 1..=stop_step.min(profile.len() - 1) {
        let drop = profile.steps[t - 1].volume - profile.steps[t].volume;
        if let Some(idx) = profile.steps[t].removed {
            scores[idx] = drop / v0 + SCORE_TIE_EPSILON * (stop_step - t) as f64;
        }
    }
    scores
}

/// Relative volume reduction over the first `window` steps (clamped to the
/// profile length) and whether it clears `threshold`.
pub fn ch_friendly(profile: &VolumeProfile, window: usize, threshold: f64) -> (bool, f64) {
    if profile.len() < 2 {
        return (false, 0.0);
    }
    let v0 = profile.steps[0].volume;
    if v0 <= 0.0 {
        return (false, 0.0);
    }
    let at = window.min(profile.len() - 1);
    let ratio = (v0 - profile.steps[at].volume) / v0;
    (ratio >= threshold, ratio)
}
