//! Multi-scale sliding-window detection with greedy non-maximal suppression.
//!
//! The input image is resized per pyramid level (channels and integral
//! structures are recomputed from the resized pixels), the model window
//! slides with the configured stride, and windows over the score threshold
//! map back to original coordinates by dividing by the level's resize
//! factor. NMS suppresses a detection when its overlap with a kept one
//! exceeds the threshold, measured as intersection over the smaller area.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::StrongClassifier;
use crate::config::PipelineConfig;
use crate::imaging::{compute_channels, smooth_binomial, RasterImage};
use crate::integrals::IntegralStack;
use crate::{Result, MODEL_HEIGHT, MODEL_WIDTH};

/// Axis-aligned box in original-image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Box2D {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Box2D { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn intersection_area(&self, other: &Box2D) -> f64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        (x1 - x0).max(0.0) * (y1 - y0).max(0.0)
    }

    /// Intersection over union.
    pub fn iou(&self, other: &Box2D) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    /// Intersection over the smaller area (the NMS overlap measure).
    pub fn overlap_min(&self, other: &Box2D) -> f64 {
        let min_area = self.area().min(other.area());
        if min_area > 0.0 {
            self.intersection_area(other) / min_area
        } else {
            0.0
        }
    }
}

/// One scored detection in original-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: Box2D,
    pub score: f64,
    /// Pyramid resize factor the window was found at.
    pub scale: f64,
}

/// One pyramid level: resize factor and resized dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidLevel {
    pub factor: f64,
    pub width: usize,
    pub height: usize,
}

/// Geometric image pyramid with a fixed step between consecutive levels
/// (step 1.09 gives 8 levels per octave).
#[derive(Debug, Clone)]
pub struct ScalePyramid {
    pub levels: Vec<PyramidLevel>,
}

impl ScalePyramid {
    /// Levels from `scale_max` downward by `scale_step` while the model
    /// window still fits; `scale_min > 0` caps the descent.
    pub fn build(img_w: usize, img_h: usize, cfg: &PipelineConfig) -> Self {
        let mut levels = Vec::new();
        let mut factor = cfg.scale_max;
        loop {
            if cfg.scale_min > 0.0 && factor < cfg.scale_min - 1e-12 {
                break;
            }
            let w = (img_w as f64 * factor).round() as usize;
            let h = (img_h as f64 * factor).round() as usize;
            if w < MODEL_WIDTH || h < MODEL_HEIGHT {
                break;
            }
            levels.push(PyramidLevel { factor, width: w, height: h });
            factor /= cfg.scale_step;
        }
        ScalePyramid { levels }
    }
}

/// Post-NMS record of where a detection's window sat in the pyramid; used
/// to re-extract training vectors during hard-negative mining.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScoredWindow {
    pub level: usize,
    pub level_width: usize,
    pub level_height: usize,
    /// Window top-left in level coordinates.
    pub x: usize,
    pub y: usize,
    pub score: f64,
    /// Global enumeration index (level, then row-major window): the NMS
    /// tie-breaker.
    pub order: usize,
}

pub(crate) fn resize_for_level(img: &RasterImage, w: usize, h: usize) -> RasterImage {
    if img.width() == w && img.height() == h {
        img.clone()
    } else {
        img.resize(w, h)
    }
}

/// Window top-left positions for one level, row-major.
fn level_windows(w: usize, h: usize, stride: usize) -> impl Iterator<Item = (usize, usize)> {
    let xs: Vec<usize> = (0..=w.saturating_sub(MODEL_WIDTH)).step_by(stride).collect();
    let ys: Vec<usize> = (0..=h.saturating_sub(MODEL_HEIGHT)).step_by(stride).collect();
    ys.into_iter().flat_map(move |y| xs.clone().into_iter().map(move |x| (x, y)))
}

/// Multi-scale detection: returns NMS-filtered detections in original-image
/// coordinates. An image smaller than the model window at every scale
/// yields an empty list.
pub fn detect(
    img: &RasterImage,
    clf: &StrongClassifier,
    cfg: &PipelineConfig,
) -> Result<Vec<Detection>> {
    detect_scored(img, clf, cfg).map(|(dets, _)| dets)
}

pub(crate) fn detect_scored(
    img: &RasterImage,
    clf: &StrongClassifier,
    cfg: &PipelineConfig,
) -> Result<(Vec<Detection>, Vec<ScoredWindow>)> {
    let pyramid = ScalePyramid::build(img.width(), img.height(), cfg);
    let needs_hist = clf.layout.descriptor().histogram_bins();

    // per level: windows over threshold, in row-major order
    let per_level: Vec<Vec<(usize, usize, f64)>> = pyramid
        .levels
        .par_iter()
        .map(|level| -> Result<Vec<(usize, usize, f64)>> {
            let resized = resize_for_level(img, level.width, level.height);
            let stack = compute_channels(&smooth_binomial(&resized));
            let istack = match needs_hist {
                Some(bins) => IntegralStack::build_with_histograms(&stack, bins)?,
                None => IntegralStack::build(&stack),
            };
            let windows: Vec<(usize, usize)> =
                level_windows(level.width, level.height, cfg.stride).collect();
            let scored: Vec<Option<(usize, usize, f64)>> = windows
                .par_iter()
                .map(|&(x, y)| -> Result<Option<(usize, usize, f64)>> {
                    let score = clf.score_window(&istack, x, y)?;
                    Ok((score > cfg.threshold).then_some((x, y, score)))
                })
                .collect::<Result<_>>()?;
            Ok(scored.into_iter().flatten().collect())
        })
        .collect::<Result<_>>()?;

    // merge in deterministic enumeration order
    let mut boxes = Vec::new();
    let mut windows = Vec::new();
    let mut order = 0usize;
    for (li, level) in pyramid.levels.iter().enumerate() {
        for &(x, y, score) in &per_level[li] {
            let f = level.factor;
            boxes.push(Box2D::new(
                x as f64 / f,
                y as f64 / f,
                MODEL_WIDTH as f64 / f,
                MODEL_HEIGHT as f64 / f,
            ));
            windows.push(ScoredWindow {
                level: li,
                level_width: level.width,
                level_height: level.height,
                x,
                y,
                score,
                order,
            });
            order += 1;
        }
    }

    let scores: Vec<f64> = windows.iter().map(|w| w.score).collect();
    let keep = nms_indices(&boxes, &scores, cfg.nms_overlap);

    let dets = keep
        .iter()
        .map(|&i| Detection { bbox: boxes[i], score: scores[i], scale: pyramid.levels[windows[i].level].factor })
        .collect();
    let kept_windows = keep.iter().map(|&i| windows[i]).collect();
    Ok((dets, kept_windows))
}

/// Greedy NMS: process score-descending (ties by input order); suppress a
/// box whose intersection-over-min-area with any kept box exceeds
/// `overlap_thr`.
pub fn nms(dets: Vec<Detection>, overlap_thr: f64) -> Vec<Detection> {
    let boxes: Vec<Box2D> = dets.iter().map(|d| d.bbox).collect();
    let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
    nms_indices(&boxes, &scores, overlap_thr).into_iter().map(|i| dets[i]).collect()
}

fn nms_indices(boxes: &[Box2D], scores: &[f64], overlap_thr: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let suppressed =
            kept.iter().any(|&k| boxes[i].overlap_min(&boxes[k]) > overlap_thr);
        if !suppressed {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}
