//! Cross-module integration: peeling on the synthetic fixtures, verified
//! against brute-force volume oracles, plus rigid-motion equivariance and
//! the detector/baseline contrast on the adversarial geometries.

use hullpeel::data;
use hullpeel::detector::{peel, DetectorConfig, StopReason};
use hullpeel::evaluation;
use hullpeel::geometry::Point;
use hullpeel::iforest;
use hullpeel::oracles;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussians_with_planted(n_normal: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point> = (0..n_normal)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            Point::from([x, y])
        })
        .collect();
    points.push(Point::from([8.0, 8.0]));
    points.push(Point::from([-8.0, -8.0]));
    points
}

#[test]
fn planted_outliers_peel_first_and_dominate_the_drops() {
    let points = gaussians_with_planted(100, 412);
    let result = peel(&points, &DetectorConfig::naive(0.01)).unwrap();

    assert!(result.anomalies.len() >= 2);
    let mut first_two = result.anomalies[..2].to_vec();
    first_two.sort_unstable();
    assert_eq!(
        first_two,
        vec![100, 101],
        "both planted points must be removed before any Gaussian point"
    );

    let volumes: Vec<f64> = result.profile.steps.iter().map(|s| s.volume).collect();
    let drops: Vec<f64> = volumes.windows(2).map(|w| w[0] - w[1]).collect();
    for later in &drops[2..] {
        assert!(drops[0] > *later && drops[1] > *later);
    }

    // Every recorded volume matches the brute-force shoelace oracle over the
    // surviving subset.
    let mut alive: Vec<usize> = (0..points.len()).collect();
    for step in &result.profile.steps {
        if let Some(removed) = step.removed {
            alive.retain(|&i| i != removed);
        }
        let subset: Vec<Point> = alive.iter().map(|&i| points[i].clone()).collect();
        let oracle = oracles::brute_force_hull_area_2d(&subset).unwrap();
        assert!(
            (step.volume - oracle).abs() <= 1e-9 * oracle.max(1.0),
            "step {}: {} vs oracle {}",
            step.step,
            step.volume,
            oracle
        );
    }
}

#[test]
fn removal_order_is_invariant_under_rigid_motion_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..10 {
        let points = gaussians_with_planted(40, 1000 + trial);
        let config = DetectorConfig::optimal(10);
        let base = peel(&points, &config).unwrap();

        let angle: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let (sin, cos) = angle.sin_cos();
        let scale: f64 = 0.5 + 2.0 * rng.random::<f64>();
        let (tx, ty) = (
            rng.random::<f64>() * 20.0 - 10.0,
            rng.random::<f64>() * 20.0 - 10.0,
        );
        let moved: Vec<Point> = points
            .iter()
            .map(|p| {
                let x = p.coords[0];
                let y = p.coords[1];
                Point::from([
                    scale * (cos * x - sin * y) + tx,
                    scale * (sin * x + cos * y) + ty,
                ])
            })
            .collect();
        let transformed = peel(&moved, &config).unwrap();

        assert_eq!(base.anomalies, transformed.anomalies, "trial {trial}");
        for (a, b) in base.profile.steps.iter().zip(&transformed.profile.steps) {
            let expected = a.volume * scale * scale;
            assert!(
                (b.volume - expected).abs() <= 1e-9 * expected.max(1e-9),
                "trial {trial} step {}",
                a.step
            );
        }
    }
}

#[test]
fn demo_fixture_yields_perfect_detection_under_every_strategy() {
    let demo = data::gen_square_demo();
    let points = demo.to_points();
    let truth = demo.labels.clone().unwrap();

    for config in [
        DetectorConfig::optimal(2),
        DetectorConfig::naive(0.01),
        DetectorConfig::elbow(),
    ] {
        let result = peel(&points, &config).unwrap();
        let mut found = result.anomalies.clone();
        found.sort_unstable();
        assert_eq!(found, vec![26, 27], "config {config:?}");

        let predicted: Vec<bool> = (0..points.len()).map(|i| found.contains(&i)).collect();
        let metrics = evaluation::metrics(&evaluation::confusion(&predicted, &truth).unwrap());
        assert_eq!(metrics.f1, 1.0);

        // Scores rank the planted anomalies above every normal point.
        let min_planted = result.scores[26].min(result.scores[27]);
        for i in 0..26 {
            assert!(result.scores[i] < min_planted);
        }
    }
}

#[test]
fn torus_blinds_the_peeler_but_not_the_forest() {
    let ds = data::gen_torus(300, 5, 2.0, 3.0, 7).unwrap();
    let points = ds.to_points();
    let truth = ds.labels.clone().unwrap();

    let ch = peel(&points, &DetectorConfig::optimal(5)).unwrap();
    let ch_pred: Vec<bool> = (0..points.len())
        .map(|i| ch.anomalies.contains(&i))
        .collect();
    let ch_f1 = evaluation::metrics(&evaluation::confusion(&ch_pred, &truth).unwrap()).f1;
    assert_eq!(ch_f1, 0.0, "center anomalies are invisible to hull peeling");

    let model = iforest::iforest_fit(&points, &iforest::ForestParams::default()).unwrap();
    let contamination = 5.0 / points.len() as f64;
    let if_pred = iforest::iforest_predict(&model, &points, contamination).unwrap();
    let if_f1 = evaluation::metrics(&evaluation::confusion(&if_pred, &truth).unwrap()).f1;
    assert!(
        if_f1 >= 0.9,
        "isolation forest should isolate the center, f1={if_f1}"
    );

    // Mirrors the contrast table: the center points are the top scorers.
    let scores = iforest::iforest_score_all(&model, &points).unwrap();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut top: Vec<usize> = order[..5].to_vec();
    top.sort_unstable();
    assert_eq!(top, vec![300, 301, 302, 303, 304]);
}

#[test]
fn exhausted_runs_report_their_stop_reason() {
    let points: Vec<Point> = [
        [0.0, 0.0],
        [4.0, 0.2],
        [3.1, 3.9],
        [-0.6, 2.8],
        [1.5, 1.1],
        [2.2, 2.0],
    ]
    .iter()
    .map(|&c| Point::from(c))
    .collect();
    // Naive with an impossible fraction never fires; the run exhausts at the
    // floor.
    let result = peel(&points, &DetectorConfig::naive(0.0)).unwrap();
    assert_eq!(result.stop_reason, StopReason::Exhausted);
    assert_eq!(result.stop_step, result.profile.len() - 1);
}
