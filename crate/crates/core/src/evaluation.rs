//! Full-image evaluation: ground-truth filtering, greedy matching with
//! ignore handling, miss-rate vs. FPPI curves and the log-average miss rate
//! over nine FPPI points log-spaced in [1e-2, 1e0].

use std::fmt::Write as _;

use crate::detect::Box2D;
use crate::{Error, Result};

/// Ground-truth box with visibility/ignore metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_id: String,
    pub label: String,
    pub bbox: Box2D,
    /// Visible sub-box for partially occluded people; `None` = fully visible.
    pub visible: Option<Box2D>,
    pub ignore: bool,
}

impl Annotation {
    pub fn height(&self) -> f64 {
        self.bbox.h
    }

    /// area(visible) / area(full), 1 when no visible box is present.
    pub fn visibility(&self) -> f64 {
        match self.visible {
            Some(v) => {
                let full = self.bbox.area();
                if full > 0.0 {
                    (v.area() / full).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
            None => 1.0,
        }
    }
}

/// Scored detection attributed to one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBox {
    pub image_id: String,
    pub bbox: Box2D,
    pub score: f64,
}

/// Ground-truth filtering thresholds (the "reasonable" subset). Occlusion
/// sub-ranges are expressed by narrowing the visibility window.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalParams {
    /// Required annotations must be strictly taller than this.
    pub min_height: f64,
    /// Required annotations must be strictly more visible than this.
    pub min_visibility: f64,
    /// Upper visibility bound (inclusive); 1.0 disables it.
    pub max_visibility: f64,
    /// Expanded-filtering factor for detections.
    pub xi: f64,
    /// Matching IoU threshold.
    pub iou: f64,
    /// Label counted as a pedestrian; all others are ignored.
    pub pedestrian_label: String,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            min_height: 50.0,
            min_visibility: 0.65,
            max_visibility: 1.0,
            xi: 1.25,
            iou: 0.5,
            pedestrian_label: "person".into(),
        }
    }
}

/// Flag annotations outside the evaluated subset as ignore: height at or
/// under the bound, visibility outside the window, non-pedestrian labels,
/// and anything already marked ignore.
pub fn filter_ground_truth(annos: &mut [Annotation], params: &EvalParams) {
    for a in annos {
        if a.label != params.pedestrian_label
            || a.height() <= params.min_height
            || a.visibility() <= params.min_visibility
            || a.visibility() > params.max_visibility
        {
            a.ignore = true;
        }
    }
}

/// Expanded detection filtering: drop detections shorter than
/// `min_height / xi` (the bound itself is kept).
pub fn filter_detections(dets: &mut Vec<ScoredBox>, params: &EvalParams) {
    let bound = params.min_height / params.xi;
    dets.retain(|d| d.bbox.h >= bound);
}

/// Matching outcome for one image.
#[derive(Debug, Clone, Default)]
pub struct ImageMatch {
    /// Scores of detections matched to required annotations.
    pub tp_scores: Vec<f64>,
    /// Scores of unmatched detections.
    pub fp_scores: Vec<f64>,
    /// Scores of detections absorbed by ignore regions (neither TP nor FP).
    pub ignored_scores: Vec<f64>,
    /// Number of required (non-ignore) annotations.
    pub required: usize,
}

/// Greedy matching for one image: detections in score-descending order each
/// take the unmatched required annotation of highest IoU when it exceeds
/// the threshold; otherwise they may fall into an ignore region (which can
/// absorb any number of detections); otherwise they are false positives.
pub fn match_image(dets: &[ScoredBox], annos: &[Annotation], params: &EvalParams) -> ImageMatch {
    let mut out = ImageMatch {
        required: annos.iter().filter(|a| !a.ignore).count(),
        ..ImageMatch::default()
    };
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b].score.partial_cmp(&dets[a].score).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut taken = vec![false; annos.len()];

    for &di in &order {
        let d = &dets[di];
        let mut best: Option<(usize, f64)> = None;
        for (ai, a) in annos.iter().enumerate() {
            if a.ignore || taken[ai] {
                continue;
            }
            let iou = d.bbox.iou(&a.bbox);
            if iou > params.iou && best.map_or(true, |(_, b)| iou > b) {
                best = Some((ai, iou));
            }
        }
        if let Some((ai, _)) = best {
            taken[ai] = true;
            out.tp_scores.push(d.score);
            continue;
        }
        let ignored = annos
            .iter()
            .any(|a| a.ignore && d.bbox.iou(&a.bbox) > params.iou);
        if ignored {
            out.ignored_scores.push(d.score);
        } else {
            out.fp_scores.push(d.score);
        }
    }
    out
}

/// One threshold sample of the detection trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub fppi: f64,
    pub miss_rate: f64,
}

/// Miss-rate vs. FPPI curve with its log-average miss rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    /// Sorted by descending threshold, so FPPI is non-decreasing.
    pub points: Vec<CurvePoint>,
    pub lamr: f64,
}

const MISS_FLOOR: f64 = 1e-10;

/// Sweep the score threshold over all distinct detection scores and compute
/// the log-average miss rate over nine log-spaced FPPI reference points.
pub fn curve_and_lamr(matches: &[ImageMatch], image_count: usize) -> Result<EvalCurve> {
    let required: usize = matches.iter().map(|m| m.required).sum();
    if required == 0 {
        return Err(Error::Eval("no required ground-truth annotations".into()));
    }
    if image_count == 0 {
        return Err(Error::Eval("image count is zero".into()));
    }

    let mut tp: Vec<f64> = matches.iter().flat_map(|m| m.tp_scores.iter().copied()).collect();
    let mut fp: Vec<f64> = matches.iter().flat_map(|m| m.fp_scores.iter().copied()).collect();
    tp.sort_by(|a, b| b.partial_cmp(a).unwrap());
    fp.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // every distinct detection score is a sample point, including scores of
    // detections absorbed by ignore regions
    let mut thresholds: Vec<f64> = matches
        .iter()
        .flat_map(|m| {
            m.tp_scores.iter().chain(&m.fp_scores).chain(&m.ignored_scores).copied()
        })
        .collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut points = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        // count of scores >= t in descending-sorted lists
        let tp_count = tp.partition_point(|&s| s >= t);
        let fp_count = fp.partition_point(|&s| s >= t);
        points.push(CurvePoint {
            threshold: t,
            fppi: fp_count as f64 / image_count as f64,
            miss_rate: (required - tp_count.min(required)) as f64 / required as f64,
        });
    }

    let lamr = log_average_miss_rate(&points);
    Ok(EvalCurve { points, lamr })
}

/// Geometric mean of the miss rate sampled at nine FPPI values log-spaced
/// in [1e-2, 1e0]; each sample takes the miss rate of the curve point with
/// the largest FPPI at or below the reference (the first point when none
/// qualifies), with zero miss rates floored before the log.
pub fn log_average_miss_rate(points: &[CurvePoint]) -> f64 {
    let mut acc = 0.0;
    for k in 0..9 {
        let reference = 10f64.powf(-2.0 + k as f64 / 4.0);
        let miss = match points.iter().rev().find(|p| p.fppi <= reference) {
            Some(p) => p.miss_rate,
            None => points.first().map_or(1.0, |p| p.miss_rate),
        };
        acc += miss.max(MISS_FLOOR).ln();
    }
    (acc / 9.0).exp()
}

// ---------------------------------------------------------------------------
// file formats

/// Parse annotation records: `image_id label x y w h vx vy vw vh ignore`,
/// one per line, `-1` sentinels when the visible box is absent. Lines
/// starting with `#` are comments.
pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 11 {
            return Err(Error::parse(format!(
                "annotation line {}: expected 11 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::parse(format!("annotation line {}: bad number '{s}'", lineno + 1))
            })
        };
        let bbox = Box2D::new(num(fields[2])?, num(fields[3])?, num(fields[4])?, num(fields[5])?);
        let vraw = [num(fields[6])?, num(fields[7])?, num(fields[8])?, num(fields[9])?];
        let visible = if vraw.iter().all(|&v| v < 0.0) {
            None
        } else {
            Some(Box2D::new(vraw[0], vraw[1], vraw[2], vraw[3]))
        };
        let ignore = match fields[10] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(format!(
                    "annotation line {}: ignore flag must be 0 or 1, got '{other}'",
                    lineno + 1
                )))
            }
        };
        out.push(Annotation {
            image_id: fields[0].to_string(),
            label: fields[1].to_string(),
            bbox,
            visible,
            ignore,
        });
    }
    Ok(out)
}

pub fn format_annotation(a: &Annotation) -> String {
    let v = a.visible.unwrap_or(Box2D::new(-1.0, -1.0, -1.0, -1.0));
    format!(
        "{} {} {} {} {} {} {} {} {} {} {}",
        a.image_id,
        a.label,
        a.bbox.x,
        a.bbox.y,
        a.bbox.w,
        a.bbox.h,
        v.x,
        v.y,
        v.w,
        v.h,
        u8::from(a.ignore)
    )
}

/// Parse detection records: `image_id x y w h score`, one per line.
pub fn parse_detections(text: &str) -> Result<Vec<ScoredBox>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(format!(
                "detection line {}: expected 6 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(format!("detection line {}: bad number '{s}'", lineno + 1)))
        };
        out.push(ScoredBox {
            image_id: fields[0].to_string(),
            bbox: Box2D::new(num(fields[1])?, num(fields[2])?, num(fields[3])?, num(fields[4])?),
            score: num(fields[5])?,
        });
    }
    Ok(out)
}

/// Detection record with pixel coordinates at two decimals.
pub fn format_detection(d: &ScoredBox) -> String {
    format!(
        "{} {:.2} {:.2} {:.2} {:.2} {}",
        d.image_id, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h, d.score
    )
}

/// Curve CSV: `threshold,fppi,miss_rate` rows plus a lamr summary line.
pub fn curve_to_csv(curve: &EvalCurve, header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("threshold,fppi,miss_rate\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fppi, p.miss_rate);
    }
    let _ = writeln!(out, "# lamr = {}", curve.lamr);
    out
}
