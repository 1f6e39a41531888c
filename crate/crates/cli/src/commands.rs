//! The five pipeline commands. Each run writes artifacts whose first header
//! line names the tool version and the resolved configuration hash, and
//! logs the full configuration so results can be reproduced.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cscd_core::boost::{
    emit_weight_maps, mine_hard_negatives, train_adaboost_with_stats, FeatureMatrix,
    StrongClassifier,
};
use cscd_core::config::PipelineConfig;
use cscd_core::detect::{detect, Box2D};
use cscd_core::evaluation::{
    curve_and_lamr, curve_to_csv, filter_detections, filter_ground_truth, format_detection,
    match_image, parse_annotations, parse_detections, EvalCurve, EvalParams, ImageMatch,
    ScoredBox,
};
use cscd_core::imaging::{compute_channels, smooth_binomial, RasterImage};
use cscd_core::integrals::IntegralStack;
use cscd_core::model::{load_model, save_model};
use cscd_core::pyramid::{build_layout, contrast_map, extract_features, FeatureLayout};
use cscd_core::TOOL_VERSION;

use crate::dataset;

/// `# cscd <version> config <hash>`, the first line of every artifact.
pub fn file_header(cfg: &PipelineConfig) -> String {
    format!("cscd {TOOL_VERSION} config {}", cfg.hash())
}

fn log_config(cfg: &PipelineConfig) {
    eprintln!("resolved configuration (hash {}):", cfg.hash());
    for line in cfg.to_text().lines() {
        eprintln!("  {line}");
    }
}

fn build_stack(img: &RasterImage, layout: &FeatureLayout) -> cscd_core::Result<IntegralStack> {
    let stack = compute_channels(&smooth_binomial(img));
    match layout.descriptor().histogram_bins() {
        Some(bins) => IntegralStack::build_with_histograms(&stack, bins),
        None => Ok(IntegralStack::build(&stack)),
    }
}

/// Extract the full feature matrix for a set of model windows.
pub fn extract_matrix(
    samples: &[RasterImage],
    layout: &FeatureLayout,
) -> cscd_core::Result<FeatureMatrix> {
    FeatureMatrix::par_from_fn(samples.len(), layout.feature_len(), |i| {
        let istack = build_stack(&samples[i], layout)?;
        Ok(extract_features(&istack, layout)?.values)
    })
}

// ---------------------------------------------------------------------------
// avgmap

/// Per-class average contrast maps (sum of the per-scale maps, averaged
/// over samples), written as CSV matrices.
pub fn cmd_avgmap(
    cfg: &PipelineConfig,
    pos_dir: &Path,
    neg_dir: &Path,
    scales: &[usize],
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    if scales.is_empty() {
        bail!("avgmap needs at least one scale");
    }
    log_config(cfg);
    std::fs::create_dir_all(out_dir)?;
    let header = file_header(cfg);

    let write_class = |dir: &Path, name: &str| -> Result<PathBuf> {
        let samples = dataset::load_positives(dir, false)
            .with_context(|| format!("loading samples from {}", dir.display()))?;
        let maps: Vec<_> = samples
            .par_iter()
            .map(|img| {
                let gray = img.to_gray();
                let mut acc = contrast_map(&gray, scales[0]);
                for &s in &scales[1..] {
                    let m = contrast_map(&gray, s);
                    for y in 0..acc.height() {
                        for x in 0..acc.width() {
                            acc.set(x, y, acc.get(x, y) + m.get(x, y));
                        }
                    }
                }
                acc
            })
            .collect();
        let mut mean = cscd_core::imaging::Plane::zeros(maps[0].width(), maps[0].height());
        for m in &maps {
            for y in 0..mean.height() {
                for x in 0..mean.width() {
                    mean.set(x, y, mean.get(x, y) + m.get(x, y) / maps.len() as f64);
                }
            }
        }
        let path = out_dir.join(format!("avgmap_{name}.csv"));
        let mut csv = format!("# {header}\n# class {name} samples {}\n", maps.len());
        csv.push_str(&mean.to_csv());
        std::fs::write(&path, csv)?;
        Ok(path)
    };

    let pos_path = write_class(pos_dir, "positive")?;
    let neg_path = write_class(neg_dir, "negative")?;
    Ok((pos_path, neg_path))
}

// ---------------------------------------------------------------------------
// extract

/// Feature matrix file: one labeled sample per line.
pub fn cmd_extract(
    cfg: &PipelineConfig,
    pos_dir: &Path,
    neg_dir: &Path,
    out: &Path,
) -> Result<(usize, usize)> {
    log_config(cfg);
    let layout = build_layout(&cfg.layout_spec()?)?;
    let positives = dataset::load_positives(pos_dir, cfg.mirror_positives)?;
    let negatives = dataset::load_positives(neg_dir, false)?;
    let pos = extract_matrix(&positives, &layout)?;
    let neg = extract_matrix(&negatives, &layout)?;

    let mut text = format!("# {}\n", file_header(cfg));
    let _ = writeln!(
        text,
        "# samples {} features {} (label then values)",
        pos.rows() + neg.rows(),
        layout.feature_len()
    );
    for (matrix, label) in [(&pos, 1i32), (&neg, -1i32)] {
        for i in 0..matrix.rows() {
            let _ = write!(text, "{label}");
            for v in matrix.row(i) {
                let _ = write!(text, " {v}");
            }
            text.push('\n');
        }
    }
    std::fs::write(out, text)?;
    Ok((pos.rows(), neg.rows()))
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug)]
pub struct TrainOutcome {
    pub model_path: PathBuf,
    /// (positives, negatives) pool sizes per round.
    pub pool_sizes: Vec<(usize, usize)>,
    /// Final-round ensemble training error.
    pub final_training_error: f64,
}

/// Multi-round training: round 0 on random negative crops, later rounds
/// retrain on the pool grown by hard-negative mining. Saves the model file
/// and the weight-map CSVs next to it.
pub fn cmd_train(
    cfg: &PipelineConfig,
    pos_dir: &Path,
    neg_dir: &Path,
    model_path: &Path,
) -> Result<TrainOutcome> {
    log_config(cfg);
    let layout = build_layout(&cfg.layout_spec()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let positives = dataset::load_positives(pos_dir, cfg.mirror_positives)?;
    eprintln!("positives: {} samples from {}", positives.len(), pos_dir.display());
    let pos = extract_matrix(&positives, &layout)?;
    drop(positives);

    let neg_images = dataset::load_images(neg_dir)?;
    eprintln!("negative images: {}", neg_images.len());
    let crops = dataset::random_negative_crops(&neg_images, cfg.negatives_per_round, &mut rng)?;
    let mut neg = extract_matrix(&crops, &layout)?;
    drop(crops);

    let mut pool_sizes = Vec::new();
    let mut clf: Option<StrongClassifier> = None;
    let mut final_training_error = 1.0;
    for round in 0..cfg.rounds {
        if round > 0 {
            let images: Vec<RasterImage> =
                neg_images.iter().map(|(_, img)| img.clone()).collect();
            let mined = mine_hard_negatives(
                clf.as_ref().expect("previous round trained"),
                &images,
                cfg.negatives_per_round,
                cfg,
            )?;
            eprintln!("round {round}: mined {} hard negatives", mined.rows());
            if mined.rows() == 0 {
                eprintln!("round {round}: no hard negatives left, stopping early");
                break;
            }
            neg.append(&mined)?;
        }
        pool_sizes.push((pos.rows(), neg.rows()));
        let (trained, stats) =
            train_adaboost_with_stats(&pos, &neg, &layout, cfg.trees, cfg.tree_depth)?;
        final_training_error = stats.training_errors.last().copied().unwrap_or(1.0);
        eprintln!(
            "round {round}: {} trees on {}+{} samples, training error {final_training_error:.5}",
            trained.trees.len(),
            pos.rows(),
            neg.rows(),
        );
        clf = Some(trained);
    }
    let clf = clf.expect("at least one round");

    if let Some(dir) = model_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    save_model(model_path, &clf, cfg)?;
    let map_path = model_path.with_extension("weights.csv");
    let totals_path = model_path.with_extension("channels.csv");
    emit_weight_maps(&clf, &map_path, &totals_path, &file_header(cfg))?;

    Ok(TrainOutcome { model_path: model_path.to_path_buf(), pool_sizes, final_training_error })
}

// ---------------------------------------------------------------------------
// detect

/// Detect over every image of a directory; one record per detection,
/// `image_id x y w h score`.
pub fn cmd_detect(
    cfg: &PipelineConfig,
    model_path: &Path,
    images_dir: &Path,
    out: &Path,
) -> Result<usize> {
    let (clf, model_cfg) = load_model(model_path)?;
    // layout-defining keys come from the model; runtime keys from the caller
    let mut cfg = cfg.clone();
    cfg.scales = model_cfg.scales.clone();
    cfg.pattern = model_cfg.pattern;
    cfg.descriptor = model_cfg.descriptor.clone();
    cfg.histogram_bins = model_cfg.histogram_bins;
    cfg.measure = model_cfg.measure;
    log_config(&cfg);

    let images = dataset::load_images(images_dir)?;
    let per_image: Vec<Vec<ScoredBox>> = images
        .par_iter()
        .map(|(id, img)| -> cscd_core::Result<Vec<ScoredBox>> {
            let dets = detect(img, &clf, &cfg)?;
            Ok(dets
                .into_iter()
                .map(|d| ScoredBox { image_id: id.clone(), bbox: d.bbox, score: d.score })
                .collect())
        })
        .collect::<cscd_core::Result<_>>()?;

    let mut text = format!("# {}\n# images {}\n", file_header(&cfg), images.len());
    let mut count = 0;
    for dets in &per_image {
        for d in dets {
            text.push_str(&format_detection(d));
            text.push('\n');
            count += 1;
        }
    }
    std::fs::write(out, text)?;
    eprintln!("{count} detections over {} images -> {}", images.len(), out.display());
    Ok(count)
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug)]
pub struct EvalOutcome {
    pub curve: EvalCurve,
    pub image_count: usize,
}

/// Evaluate a detection file against an annotation file; writes the curve
/// CSV and returns the log-average miss rate.
pub fn cmd_eval(
    cfg: &PipelineConfig,
    params: &EvalParams,
    detections_path: &Path,
    annotations_path: &Path,
    out: &Path,
    image_count_override: Option<usize>,
) -> Result<EvalOutcome> {
    log_config(cfg);
    let det_text = std::fs::read_to_string(detections_path)
        .with_context(|| format!("cannot read {}", detections_path.display()))?;
    let anno_text = std::fs::read_to_string(annotations_path)
        .with_context(|| format!("cannot read {}", annotations_path.display()))?;

    let mut dets = parse_detections(&det_text)?;
    let mut annos = parse_annotations(&anno_text)?;

    // image universe: explicit override, the detection-file header, or the
    // union of ids seen in both files
    let header_count = det_text.lines().find_map(|l| {
        l.strip_prefix("# images ").and_then(|v| v.trim().parse::<usize>().ok())
    });
    let mut ids: std::collections::BTreeSet<String> = Default::default();
    for d in &dets {
        ids.insert(d.image_id.clone());
    }
    for a in &annos {
        ids.insert(a.image_id.clone());
    }
    let image_count = image_count_override.or(header_count).unwrap_or(ids.len());
    if image_count == 0 {
        bail!("no images to evaluate");
    }

    filter_ground_truth(&mut annos, params);
    filter_detections(&mut dets, params);

    let mut by_image: BTreeMap<String, (Vec<ScoredBox>, Vec<cscd_core::evaluation::Annotation>)> =
        BTreeMap::new();
    for id in &ids {
        by_image.insert(id.clone(), (Vec::new(), Vec::new()));
    }
    for d in dets {
        by_image.get_mut(&d.image_id).expect("id indexed").0.push(d);
    }
    for a in annos {
        by_image.get_mut(&a.image_id).expect("id indexed").1.push(a);
    }

    let matches: Vec<ImageMatch> = by_image
        .values()
        .map(|(dets, annos)| match_image(dets, annos, params))
        .collect();
    let curve = curve_and_lamr(&matches, image_count)?;

    let csv = curve_to_csv(&curve, &format!("{}\nimages {image_count}", file_header(cfg)));
    std::fs::write(out, csv)?;
    eprintln!("lamr = {:.6} over {image_count} images -> {}", curve.lamr, out.display());
    Ok(EvalOutcome { curve, image_count })
}

// ---------------------------------------------------------------------------

/// Seeded chance-level detector: uniform random boxes with random scores,
/// the reference point for sanity-checking a trained detector.
pub fn random_baseline_detections(
    images: &[(String, usize, usize)],
    per_image: usize,
    seed: u64,
) -> Vec<ScoredBox> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (id, w, h) in images {
        for _ in 0..per_image {
            let bw = rng.gen_range(30.0..(*w as f64).max(31.0));
            let bh = 2.0 * bw;
            let x = rng.gen_range(0.0..(*w as f64 - bw).max(1.0));
            let y = rng.gen_range(0.0..(*h as f64 - bh).max(1.0));
            out.push(ScoredBox {
                image_id: id.clone(),
                bbox: Box2D::new(x, y, bw, bh),
                score: rng.gen_range(0.0..1.0),
            });
        }
    }
    out
}
