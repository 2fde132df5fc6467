//! Implementations of the four subcommands.

use crate::report::{
    self, BenchReport, ChFriendly, DetectReport, MeanRow, NoiseRow, NoiseSweepReport,
    ProfileSummary, RunRecord, StopInfo, Timing, SCHEMA_VERSION,
};
use crate::{
    BenchArgs, CliError, DetectArgs, Generator, NoiseSweepArgs, ReduceArg, ReduceArgs, StopArg,
    StopArgs, SynthArgs,
};
use anyhow::Context;
use hullpeel::data::{self, Dataset};
use hullpeel::detector::{
    self, ch_friendly, DetectionResult, DetectorConfig, StoppingRule, CH_FRIENDLY_THRESHOLD,
    CH_FRIENDLY_WINDOW,
};
use hullpeel::evaluation::{self, EvalReport};
use hullpeel::geometry::Point;
use hullpeel::iforest::{self, ForestParams};
use hullpeel::reduction::{self, ReductionConfig, ReductionMethod};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Seed offset between noise levels; repetitions index within a level.
const NOISE_LEVEL_SEED_STRIDE: u64 = 1000;

fn load_dataset(args: &crate::DatasetArgs) -> Result<(Dataset, f64), CliError> {
    let start = Instant::now();
    let dataset = data::load_csv(&args.input, args.label_col.as_deref(), !args.no_header)
        .with_context(|| format!("loading {}", args.input.display()))?;
    Ok((dataset, start.elapsed().as_secs_f64()))
}

fn reduction_config(args: &ReduceArgs, method: ReduceArg) -> ReductionConfig {
    ReductionConfig {
        method: match method {
            ReduceArg::Pca => ReductionMethod::Pca,
            ReduceArg::External => ReductionMethod::External,
            ReduceArg::None => ReductionMethod::None,
        },
        target_dim: args.dim,
        standardize: !args.no_standardize,
        embedding_path: args.embedding.clone(),
    }
}

fn reduce_name(method: ReduceArg) -> &'static str {
    match method {
        ReduceArg::Pca => "pca",
        ReduceArg::External => "external",
        ReduceArg::None => "none",
    }
}

fn stop_name(rule: &StoppingRule) -> &'static str {
    match rule {
        StoppingRule::Naive { .. } => "naive",
        StoppingRule::Elbow => "elbow",
        StoppingRule::Optimal { .. } => "optimal",
        StoppingRule::MaxObjective => "max-objective",
    }
}

/// Resolves the stopping rule; `optimal` takes `--k` or falls back to the
/// labeled anomaly count.
fn resolve_stopping(args: &StopArgs, dataset: &Dataset) -> Result<StoppingRule, CliError> {
    Ok(match args.stop {
        StopArg::Naive => StoppingRule::Naive {
            fraction: args.naive_fraction,
        },
        StopArg::Elbow => StoppingRule::Elbow,
        StopArg::MaxObjective => StoppingRule::MaxObjective,
        StopArg::Optimal => {
            let k = match (args.k, &dataset.labels) {
                (Some(k), _) => k,
                (None, Some(_)) => dataset.anomaly_count(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "--stop optimal needs --k or a labeled dataset".into(),
                    ))
                }
            };
            StoppingRule::Optimal { k }
        }
    })
}

fn evaluate(
    anomalies: &[usize],
    scores: &[f64],
    labels: Option<&Vec<bool>>,
    detect_s: f64,
) -> Option<EvalReport> {
    let truth = labels?;
    let n = truth.len();
    let predicted: Vec<bool> = {
        let mut p = vec![false; n];
        for &i in anomalies {
            p[i] = true;
        }
        p
    };
    let counts = evaluation::confusion(&predicted, truth).ok()?;
    let metrics = evaluation::metrics(&counts);
    let auc = evaluation::roc_auc(scores, truth).ok()?;
    Some(EvalReport {
        accuracy: metrics.accuracy,
        precision: metrics.precision,
        recall: metrics.recall,
        f1: metrics.f1,
        auc,
        computation_time_s: detect_s,
    })
}

struct ChRun {
    result: DetectionResult,
    detect_s: f64,
    reduce_s: f64,
}

fn run_ch(
    dataset: &Dataset,
    reduce_cfg: &ReductionConfig,
    config: &DetectorConfig,
) -> Result<ChRun, CliError> {
    let reduce_start = Instant::now();
    let matrix = reduction::apply(reduce_cfg, &dataset.features)?;
    let reduce_s = reduce_start.elapsed().as_secs_f64();
    let points: Vec<Point> = data::matrix_to_points(&matrix);
    let detect_start = Instant::now();
    let result = detector::peel(&points, config)?;
    let detect_s = detect_start.elapsed().as_secs_f64();
    Ok(ChRun {
        result,
        detect_s,
        reduce_s,
    })
}

fn ch_record(
    dataset: &Dataset,
    detector_id: String,
    config_snapshot: serde_json::Value,
    run: &ChRun,
    seed: u64,
    load_s: f64,
) -> RunRecord {
    let (friendly, ratio) = ch_friendly(
        &run.result.profile,
        CH_FRIENDLY_WINDOW,
        CH_FRIENDLY_THRESHOLD,
    );
    RunRecord {
        dataset: dataset.name.clone(),
        detector: detector_id,
        config: config_snapshot,
        seed,
        timestamp: report::now_unix_seconds(),
        eval: evaluate(
            &run.result.anomalies,
            &run.result.scores,
            dataset.labels.as_ref(),
            run.detect_s,
        ),
        ch_friendly: Some(ChFriendly { friendly, ratio }),
        profile_summary: Some(ProfileSummary {
            steps: run.result.profile.len(),
            volume_initial: run.result.profile.initial_volume(),
            volume_final: run.result.profile.final_volume(),
        }),
        stop: Some(StopInfo {
            step: run.result.stop_step,
            reason: run.result.stop_reason,
        }),
        anomalies: run.result.anomalies.clone(),
        timing: Timing {
            load_s,
            reduce_s: run.reduce_s,
            detect_s: run.detect_s,
            total_s: load_s + run.reduce_s + run.detect_s,
        },
    }
}

fn write_json<T: Serialize>(doc: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).context("serializing report")?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_scores_csv(path: &Path, scores: &[f64], anomalies: &[usize]) -> Result<(), CliError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?,
    );
    writeln!(out, "index,score,anomaly").context("writing scores")?;
    for (i, s) in scores.iter().enumerate() {
        let flag = if anomalies.contains(&i) { 1 } else { 0 };
        writeln!(out, "{i},{s},{flag}").context("writing scores")?;
    }
    Ok(())
}

pub fn detect(args: &DetectArgs) -> Result<(), CliError> {
    let (dataset, load_s) = load_dataset(&args.dataset)?;
    let stopping = resolve_stopping(&args.stop, &dataset)?;
    let reduce_cfg = reduction_config(&args.reduce, args.reduce.reduce);
    let config = DetectorConfig {
        stopping: stopping.clone(),
        lambda: args.stop.lambda,
        min_points: args.stop.min_points,
        record_objective: true,
    };
    let run = run_ch(&dataset, &reduce_cfg, &config)?;

    let snapshot = serde_json::json!({
        "input": args.dataset.input.display().to_string(),
        "reduce": reduce_name(args.reduce.reduce),
        "dim": args.reduce.dim,
        "standardize": !args.reduce.no_standardize,
        "stopping": stopping,
        "lambda": args.stop.lambda,
        "min_points": args.stop.min_points,
        "seed": args.seed,
    });
    let detector_id = format!(
        "ch-{}+{}",
        stop_name(&stopping),
        reduce_name(args.reduce.reduce)
    );
    let record = ch_record(&dataset, detector_id, snapshot, &run, args.seed, load_s);

    if let Some(path) = &args.scores_out {
        write_scores_csv(path, &run.result.scores, &run.result.anomalies)?;
    }
    let doc = DetectReport {
        schema_version: SCHEMA_VERSION,
        command: "detect".into(),
        record,
        profile: run.result.profile,
    };
    write_json(&doc, args.out.as_ref())
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.embedding.is_some() && args.input.len() != 1 {
        return Err(CliError::Usage(
            "--embedding applies to a single --input".into(),
        ));
    }
    let mut records: Vec<RunRecord> = Vec::new();

    for input in &args.input {
        let dataset_args = crate::DatasetArgs {
            input: input.clone(),
            label_col: args.label_col.clone(),
            no_header: args.no_header,
        };
        let (dataset, load_s) = load_dataset(&dataset_args)?;

        let mut reductions = vec![ReduceArg::Pca, ReduceArg::None];
        if args.embedding.is_some() {
            reductions.push(ReduceArg::External);
        }
        let mut stoppings = vec![
            StoppingRule::Naive {
                fraction: args.naive_fraction,
            },
            StoppingRule::Elbow,
        ];
        if dataset.labels.is_some() {
            stoppings.push(StoppingRule::Optimal {
                k: dataset.anomaly_count(),
            });
        }

        let reduce_args = ReduceArgs {
            reduce: ReduceArg::Pca,
            embedding: args.embedding.clone(),
            dim: args.dim,
            no_standardize: args.no_standardize,
        };
        for &reduce in &reductions {
            for stopping in &stoppings {
                let reduce_cfg = reduction_config(&reduce_args, reduce);
                let config = DetectorConfig {
                    stopping: stopping.clone(),
                    lambda: args.lambda,
                    min_points: None,
                    record_objective: true,
                };
                let run = run_ch(&dataset, &reduce_cfg, &config)?;
                let id = format!("ch-{}+{}", stop_name(stopping), reduce_name(reduce));
                let snapshot = serde_json::json!({
                    "reduce": reduce_name(reduce),
                    "dim": args.dim,
                    "standardize": !args.no_standardize,
                    "stopping": stopping,
                    "lambda": args.lambda,
                    "seed": args.seed,
                });
                records.push(ch_record(&dataset, id, snapshot, &run, args.seed, load_s));
            }
        }

        // Isolation-forest contrast row on the raw features.
        let contamination = args.contamination.unwrap_or_else(|| {
            if dataset.labels.is_some() && dataset.anomaly_count() > 0 {
                dataset.anomaly_count() as f64 / dataset.n_rows() as f64
            } else {
                ForestParams::default().contamination
            }
        });
        let params = ForestParams {
            n_trees: args.trees,
            subsample_size: args.subsample,
            contamination,
            seed: args.seed,
        };
        let points = dataset.to_points();
        let fit_start = Instant::now();
        let model = iforest::iforest_fit(&points, &params)?;
        let scores = iforest::iforest_score_all(&model, &points)?;
        let labels = iforest::iforest_predict(&model, &points, contamination)?;
        let detect_s = fit_start.elapsed().as_secs_f64();
        let anomalies: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i)
            .collect();
        records.push(RunRecord {
            dataset: dataset.name.clone(),
            detector: "iforest".into(),
            config: serde_json::json!({
                "trees": args.trees,
                "subsample": args.subsample,
                "contamination": contamination,
                "seed": args.seed,
            }),
            seed: args.seed,
            timestamp: report::now_unix_seconds(),
            eval: evaluate(&anomalies, &scores, dataset.labels.as_ref(), detect_s),
            ch_friendly: None,
            profile_summary: None,
            stop: None,
            anomalies,
            timing: Timing {
                load_s,
                reduce_s: 0.0,
                detect_s,
                total_s: load_s + detect_s,
            },
        });
    }

    records.sort_by(|a, b| a.dataset.cmp(&b.dataset).then(a.detector.cmp(&b.detector)));

    let mut detectors: Vec<String> = records.iter().map(|r| r.detector.clone()).collect();
    detectors.sort();
    detectors.dedup();
    let unweighted_mean = detectors
        .into_iter()
        .filter_map(|detector| {
            let evals: Vec<&EvalReport> = records
                .iter()
                .filter(|r| r.detector == detector)
                .filter_map(|r| r.eval.as_ref())
                .collect();
            if evals.is_empty() {
                return None;
            }
            let n = evals.len() as f64;
            Some(MeanRow {
                detector,
                datasets: evals.len(),
                accuracy: evals.iter().map(|e| e.accuracy).sum::<f64>() / n,
                precision: evals.iter().map(|e| e.precision).sum::<f64>() / n,
                recall: evals.iter().map(|e| e.recall).sum::<f64>() / n,
                f1: evals.iter().map(|e| e.f1).sum::<f64>() / n,
                auc: evals.iter().map(|e| e.auc).sum::<f64>() / n,
            })
        })
        .collect();

    let doc = BenchReport {
        schema_version: SCHEMA_VERSION,
        command: "bench".into(),
        seed: args.seed,
        records,
        unweighted_mean,
    };
    write_json(&doc, args.out.as_ref())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let (dataset, out) = match &args.generator {
        Generator::Torus {
            n_normal,
            n_anomaly,
            r_inner,
            r_outer,
            seed,
            out,
        } => (
            data::gen_torus(*n_normal, *n_anomaly, *r_inner, *r_outer, *seed)?,
            out,
        ),
        Generator::Circle {
            n_normal,
            n_anomaly,
            radius,
            noise_std,
            seed,
            out,
        } => (
            data::gen_circle_noise(*n_normal, *n_anomaly, *radius, *noise_std, *seed),
            out,
        ),
        Generator::Unnormalized {
            n_normal,
            n_anomaly,
            scale_x,
            scale_y,
            seed,
            out,
        } => (
            data::gen_unnormalized(*n_normal, *n_anomaly, *scale_x, *scale_y, *seed),
            out,
        ),
        Generator::SquareDemo { out } => (data::gen_square_demo(), out),
    };
    data::write_csv(&dataset, out)?;
    Ok(())
}

pub fn noise_sweep(args: &NoiseSweepArgs) -> Result<(), CliError> {
    let (dataset, _load_s) = load_dataset(&args.dataset)?;
    if dataset.labels.is_none() {
        return Err(CliError::Usage(
            "noise-sweep needs a labeled dataset (--label-col)".into(),
        ));
    }
    let stopping = resolve_stopping(&args.stop, &dataset)?;
    let reduce_cfg = reduction_config(&args.reduce, args.reduce.reduce);
    let config = DetectorConfig {
        stopping: stopping.clone(),
        lambda: args.stop.lambda,
        min_points: args.stop.min_points,
        record_objective: true,
    };
    let reps = args.reps.max(1);

    let mut rows = Vec::with_capacity(args.levels.len());
    for (level_idx, &level) in args.levels.iter().enumerate() {
        let mut evals: Vec<EvalReport> = Vec::with_capacity(reps);
        for rep in 0..reps {
            let noise_seed = args
                .seed
                .wrapping_add(NOISE_LEVEL_SEED_STRIDE * level_idx as u64)
                .wrapping_add(rep as u64);
            let noisy = data::add_gaussian_noise(&dataset, level, noise_seed);
            let run = run_ch(&noisy, &reduce_cfg, &config)?;
            let eval = evaluate(
                &run.result.anomalies,
                &run.result.scores,
                noisy.labels.as_ref(),
                run.detect_s,
            )
            .ok_or_else(|| {
                CliError::Runtime(anyhow::anyhow!(
                    "metrics undefined: labels must contain both classes"
                ))
            })?;
            evals.push(eval);
        }
        let n = evals.len() as f64;
        rows.push(NoiseRow {
            level,
            repetitions: reps,
            accuracy: evals.iter().map(|e| e.accuracy).sum::<f64>() / n,
            precision: evals.iter().map(|e| e.precision).sum::<f64>() / n,
            recall: evals.iter().map(|e| e.recall).sum::<f64>() / n,
            f1: evals.iter().map(|e| e.f1).sum::<f64>() / n,
            auc: evals.iter().map(|e| e.auc).sum::<f64>() / n,
            detect_s: evals.iter().map(|e| e.computation_time_s).sum::<f64>() / n,
        });
    }

    let doc = NoiseSweepReport {
        schema_version: SCHEMA_VERSION,
        command: "noise-sweep".into(),
        seed: args.seed,
        dataset: dataset.name,
        detector: format!(
            "ch-{}+{}",
            stop_name(&stopping),
            reduce_name(args.reduce.reduce)
        ),
        levels: rows,
    };
    write_json(&doc, args.out.as_ref())
}
