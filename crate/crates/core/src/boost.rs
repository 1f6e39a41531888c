//! AdaBoost over the contrast feature pool with depth-2 decision trees.
//!
//! Split search is exhaustive over features but quantized to at most 256
//! per-feature quantile bins, which keeps one boosting round at a single
//! cache-friendly pass over a column-major u8 code matrix. Thresholds are
//! mapped back to real feature values so trained models evaluate raw
//! (unbinned) feature vectors.
//!
//! Discrete AdaBoost: each round fits the weighted-error-minimizing tree,
//! weighs it by 0.5*ln((1-eps)/eps) and reweights samples exponentially.
//! Training stops early on a perfect tree or when no tree beats chance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::detect;
use crate::imaging::{Plane, RasterImage, NUM_CHANNELS};
use crate::integrals::IntegralStack;
use crate::pyramid::{extract_features_at, FeatureLayout, FeatureVector};
use crate::{Error, Result};

const MAX_BINS: usize = 256;
/// Weighted-error floor for a perfect weak learner.
const EPS_MIN: f64 = 1e-12;

/// Row-major f32 sample-by-feature matrix. Feature values are computed in
/// f64 and stored in f32; the training pool dominates memory.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    cols: usize,
    rows: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(cols: usize) -> Self {
        FeatureMatrix { cols, rows: 0, data: Vec::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix { cols, rows, data: vec![0.0; rows * cols] }
    }

    /// Build row-by-row in parallel; `f` produces the f64 feature vector of
    /// one row. Rows land at their own index, so the result does not depend
    /// on scheduling.
    pub fn par_from_fn(
        rows: usize,
        cols: usize,
        f: impl Fn(usize) -> Result<Vec<f64>> + Sync,
    ) -> Result<Self> {
        let mut m = FeatureMatrix::zeros(rows, cols);
        m.data
            .par_chunks_mut(cols)
            .enumerate()
            .map(|(i, row)| {
                let values = f(i)?;
                if values.len() != cols {
                    return Err(Error::shape(format!(
                        "row {i} has {} values, expected {cols}",
                        values.len()
                    )));
                }
                for (slot, &v) in row.iter_mut().zip(&values) {
                    *slot = v as f32;
                }
                Ok(())
            })
            .collect::<Result<()>>()?;
        Ok(m)
    }

    pub fn set_row(&mut self, i: usize, values: &[f64]) -> Result<()> {
        if values.len() != self.cols {
            return Err(Error::shape(format!(
                "row has {} values, expected {}",
                values.len(),
                self.cols
            )));
        }
        for (slot, &v) in self.data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(values) {
            *slot = v as f32;
        }
        Ok(())
    }

    pub fn push(&mut self, v: &FeatureVector) -> Result<()> {
        self.push_slice(&v.values)
    }

    pub fn push_slice(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.cols {
            return Err(Error::shape(format!(
                "feature vector length {} does not match matrix width {}",
                v.len(),
                self.cols
            )));
        }
        self.data.extend(v.iter().map(|&x| x as f32));
        self.rows += 1;
        Ok(())
    }

    pub fn append(&mut self, other: &FeatureMatrix) -> Result<()> {
        if other.cols != self.cols {
            return Err(Error::shape("feature matrix widths differ"));
        }
        self.data.extend_from_slice(&other.data);
        self.rows += other.rows;
        Ok(())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }
}

/// One decision node: route left when `value <= threshold` (for positive
/// polarity; negative polarity flips the comparison).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: u32,
    pub threshold: f64,
    pub polarity: i8,
}

impl Split {
    #[inline]
    pub fn goes_left(&self, value: f64) -> bool {
        (value <= self.threshold) == (self.polarity >= 0)
    }
}

/// Depth-2 binary decision tree: a root split, optional child splits, and
/// four leaf scores in {-1, +1} (leaf order LL, LR, RL, RR). A missing
/// child split routes to the first leaf of its side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTree {
    pub root: Split,
    pub left: Option<Split>,
    pub right: Option<Split>,
    pub leaves: [f64; 4],
}

impl WeakTree {
    /// Evaluate against a feature lookup; only the features on the routed
    /// path are fetched.
    pub fn evaluate(&self, mut feature: impl FnMut(u32) -> f64) -> f64 {
        if self.root.goes_left(feature(self.root.feature)) {
            match &self.left {
                Some(s) if !s.goes_left(feature(s.feature)) => self.leaves[1],
                _ => self.leaves[0],
            }
        } else {
            match &self.right {
                Some(s) if !s.goes_left(feature(s.feature)) => self.leaves[3],
                _ => self.leaves[2],
            }
        }
    }

    /// Feature indices used by this tree's split nodes.
    pub fn features(&self) -> impl Iterator<Item = u32> + '_ {
        std::iter::once(self.root.feature)
            .chain(self.left.iter().map(|s| s.feature))
            .chain(self.right.iter().map(|s| s.feature))
    }
}

/// Boosted ensemble plus the feature layout it was trained against.
#[derive(Debug, Clone)]
pub struct StrongClassifier {
    pub trees: Vec<WeakTree>,
    pub weights: Vec<f64>,
    pub layout: FeatureLayout,
    pub score_offset: f64,
}

impl StrongClassifier {
    /// Classifier margin for a full feature vector.
    pub fn classify(&self, features: &FeatureVector) -> Result<f64> {
        if features.len() != self.layout.feature_len() {
            return Err(Error::shape(format!(
                "feature vector length {} does not match layout length {}",
                features.len(),
                self.layout.feature_len()
            )));
        }
        Ok(self.score_values(|f| features.values[f as usize]))
    }

    /// Margin for one row of a training [`FeatureMatrix`].
    pub fn score_row(&self, row: &[f32]) -> f64 {
        self.score_values(|f| f64::from(row[f as usize]))
    }

    /// Margin for the model window at `(ox, oy)`; computes only the features
    /// the trees actually touch.
    pub fn score_window(&self, istack: &IntegralStack, ox: usize, oy: usize) -> Result<f64> {
        if ox + self.layout.model_width() > istack.width()
            || oy + self.layout.model_height() > istack.height()
        {
            return Err(Error::Bounds {
                what: "score window",
                x: ox,
                y: oy,
                w: self.layout.model_width(),
                h: self.layout.model_height(),
                plane_w: istack.width(),
                plane_h: istack.height(),
            });
        }
        let mut err = None;
        let score = self.score_values(|f| {
            match self.layout.feature_value(istack, f as usize, ox, oy) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(score),
        }
    }

    fn score_values(&self, mut feature: impl FnMut(u32) -> f64) -> f64 {
        let mut score = self.score_offset;
        for (tree, &w) in self.trees.iter().zip(&self.weights) {
            score += w * tree.evaluate(&mut feature);
        }
        score
    }
}

/// Per-round bookkeeping from a training run.
#[derive(Debug, Clone, Default)]
pub struct TrainingStats {
    /// Weighted error of each accepted weak learner.
    pub weak_errors: Vec<f64>,
    /// 0/1 training error of the ensemble after each round.
    pub training_errors: Vec<f64>,
}

/// Train with default bookkeeping discarded.
pub fn train_adaboost(
    pos: &FeatureMatrix,
    neg: &FeatureMatrix,
    layout: &FeatureLayout,
    trees: usize,
    depth: usize,
) -> Result<StrongClassifier> {
    train_adaboost_with_stats(pos, neg, layout, trees, depth).map(|(clf, _)| clf)
}

pub fn train_adaboost_with_stats(
    pos: &FeatureMatrix,
    neg: &FeatureMatrix,
    layout: &FeatureLayout,
    trees: usize,
    depth: usize,
) -> Result<(StrongClassifier, TrainingStats)> {
    if pos.rows() == 0 || neg.rows() == 0 {
        return Err(Error::Training(format!(
            "need samples from both classes, got {} positive and {} negative",
            pos.rows(),
            neg.rows()
        )));
    }
    if pos.cols() != neg.cols() {
        return Err(Error::shape("positive and negative feature widths differ"));
    }
    if pos.cols() != layout.feature_len() {
        return Err(Error::shape(format!(
            "feature width {} does not match layout length {}",
            pos.cols(),
            layout.feature_len()
        )));
    }
    if !(1..=2).contains(&depth) {
        return Err(Error::Training(format!("unsupported tree depth {depth}")));
    }

    let n = pos.rows() + neg.rows();
    let labels: Vec<bool> =
        (0..n).map(|i| i < pos.rows()).collect(); // true = positive
    let binned = BinnedMatrix::build(pos, neg);

    let mut weights = vec![1.0 / n as f64; n];
    let mut margins = vec![0.0f64; n];
    let mut out_trees: Vec<WeakTree> = Vec::new();
    let mut out_weights: Vec<f64> = Vec::new();
    let mut stats = TrainingStats::default();

    for _round in 0..trees {
        let Some(fit) = fit_tree(&binned, &labels, &weights, depth) else {
            break; // no splittable feature left
        };
        let eps = fit.weighted_error;
        if eps >= 0.5 {
            break;
        }
        let eps_c = eps.max(EPS_MIN);
        let alpha = 0.5 * ((1.0 - eps_c) / eps_c).ln();

        for i in 0..n {
            let h = fit.outputs[i];
            margins[i] += alpha * h;
        }
        stats.weak_errors.push(eps);
        out_trees.push(fit.tree);
        out_weights.push(alpha);

        let training_error = margins
            .iter()
            .zip(&labels)
            .filter(|(&m, &y)| (m > 0.0) != y)
            .count() as f64
            / n as f64;
        stats.training_errors.push(training_error);

        if eps <= EPS_MIN {
            break; // perfect weak learner; further reweighting is degenerate
        }

        let mut total = 0.0;
        for i in 0..n {
            let y = if labels[i] { 1.0 } else { -1.0 };
            weights[i] *= (-alpha * y * fit.outputs[i]).exp();
            total += weights[i];
        }
        for w in &mut weights {
            *w /= total;
        }
    }

    if out_trees.is_empty() {
        return Err(Error::Training("no weak learner beat chance on the pool".into()));
    }

    let clf = StrongClassifier {
        trees: out_trees,
        weights: out_weights,
        layout: layout.clone(),
        score_offset: 0.0,
    };
    Ok((clf, stats))
}

// ---------------------------------------------------------------------------
// quantile binning

struct BinnedMatrix {
    rows: usize,
    cols: usize,
    /// column-major codes, `codes[f * rows + i]`
    codes: Vec<u8>,
    /// per feature, ascending cut thresholds (midpoints between adjacent
    /// quantile boundary values); bin(x) = #cuts with x > cut
    cuts: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    fn build(pos: &FeatureMatrix, neg: &FeatureMatrix) -> Self {
        let rows = pos.rows() + neg.rows();
        let cols = pos.cols();
        let value_at = |i: usize, f: usize| -> f32 {
            if i < pos.rows() {
                pos.at(i, f)
            } else {
                neg.at(i - pos.rows(), f)
            }
        };

        let per_feature: Vec<(Vec<f64>, Vec<u8>)> = (0..cols)
            .into_par_iter()
            .map(|f| {
                let mut vals: Vec<f32> = (0..rows).map(|i| value_at(i, f)).collect();
                let mut sorted = vals.clone();
                sorted.sort_unstable_by(f32::total_cmp);

                let mut cuts: Vec<f64> = Vec::new();
                let mut last_pos = 0usize;
                for k in 1..MAX_BINS {
                    let p = k * rows / MAX_BINS;
                    if p <= last_pos || p == 0 || p >= rows {
                        continue;
                    }
                    let lower = sorted[p - 1];
                    let upper = sorted[p];
                    if lower < upper {
                        cuts.push((f64::from(lower) + f64::from(upper)) * 0.5);
                        last_pos = p;
                    }
                }

                let codes: Vec<u8> = vals
                    .drain(..)
                    .map(|v| {
                        let x = f64::from(v);
                        cuts.partition_point(|&c| x > c) as u8
                    })
                    .collect();
                (cuts, codes)
            })
            .collect();

        let mut codes = vec![0u8; rows * cols];
        let mut cuts = Vec::with_capacity(cols);
        for (f, (c, col_codes)) in per_feature.into_iter().enumerate() {
            codes[f * rows..(f + 1) * rows].copy_from_slice(&col_codes);
            cuts.push(c);
        }
        BinnedMatrix { rows, cols, codes, cuts }
    }
}

// ---------------------------------------------------------------------------
// tree fitting

struct FittedTree {
    tree: WeakTree,
    weighted_error: f64,
    /// h(x_i) in {-1, +1} for every training sample
    outputs: Vec<f64>,
}

#[derive(Clone, Copy)]
struct NodeSplit {
    feature: usize,
    cut: usize,
    /// weighted error of the stump with optimal leaf polarity
    error: f64,
}

fn better(a: Option<NodeSplit>, b: Option<NodeSplit>) -> Option<NodeSplit> {
    // total order: error, then feature, then cut
    match (a, b) {
        (Some(x), Some(y)) => {
            if (y.error, y.feature, y.cut) < (x.error, x.feature, x.cut) {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, None) => x,
        (None, y) => y,
    }
}

/// Exhaustive (feature, quantile-cut) search minimizing the weighted stump
/// error, run for up to two tree nodes in one pass over the code matrix.
/// `assign` routes each sample to node 0 or 1. Ties break deterministically
/// on (error, feature, cut).
fn best_splits(
    binned: &BinnedMatrix,
    weights: &[f64],
    signed_weights: &[f64],
    assign: &[u8],
    nodes: usize,
) -> Vec<Option<NodeSplit>> {
    debug_assert!(nodes <= 2);
    let rows = binned.rows;
    (0..binned.cols)
        .into_par_iter()
        .map(|f| {
            let ncuts = binned.cuts[f].len();
            if ncuts == 0 {
                return vec![None; nodes];
            }
            // per node: total weight and signed (pos - neg) weight per bin
            let mut hw = [[0.0f64; MAX_BINS]; 2];
            let mut hs = [[0.0f64; MAX_BINS]; 2];
            let col = &binned.codes[f * rows..(f + 1) * rows];
            for i in 0..rows {
                let b = col[i] as usize;
                let n = assign[i] as usize;
                hw[n][b] += weights[i];
                hs[n][b] += signed_weights[i];
            }
            (0..nodes)
                .map(|n| {
                    let (tot_w, tot_s) = hw[n][..=ncuts]
                        .iter()
                        .zip(&hs[n][..=ncuts])
                        .fold((0.0, 0.0), |acc, (&w, &s)| (acc.0 + w, acc.1 + s));
                    let tot_pos = 0.5 * (tot_w + tot_s);
                    let tot_neg = 0.5 * (tot_w - tot_s);
                    let mut best: Option<NodeSplit> = None;
                    let mut lw = 0.0;
                    let mut ls = 0.0;
                    for c in 0..ncuts {
                        lw += hw[n][c];
                        ls += hs[n][c];
                        let lpos = 0.5 * (lw + ls);
                        let lneg = 0.5 * (lw - ls);
                        // left positive / right negative, or flipped
                        let e1 = lneg + (tot_pos - lpos);
                        let e2 = lpos + (tot_neg - lneg);
                        let e = e1.min(e2);
                        if best.map_or(true, |b| e < b.error) {
                            best = Some(NodeSplit { feature: f, cut: c, error: e });
                        }
                    }
                    best
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![None; nodes],
            |a, b| (0..nodes).map(|n| better(a[n], b[n])).collect(),
        )
}

fn fit_tree(
    binned: &BinnedMatrix,
    labels: &[bool],
    weights: &[f64],
    depth: usize,
) -> Option<FittedTree> {
    let rows = binned.rows;
    let signed: Vec<f64> =
        weights.iter().zip(labels).map(|(&w, &y)| if y { w } else { -w }).collect();

    let root = best_splits(binned, weights, &signed, &vec![0u8; rows], 1)[0]?;
    let root_col = &binned.codes[root.feature * rows..(root.feature + 1) * rows];
    let assign: Vec<u8> = root_col.iter().map(|&b| u8::from(b as usize > root.cut)).collect();

    // node class weights after the root partition
    let mut node_pos = [0.0f64; 2];
    let mut node_neg = [0.0f64; 2];
    for i in 0..rows {
        if labels[i] {
            node_pos[assign[i] as usize] += weights[i];
        } else {
            node_neg[assign[i] as usize] += weights[i];
        }
    }

    let child_candidates = if depth >= 2 {
        best_splits(binned, weights, &signed, &assign, 2)
    } else {
        vec![None, None]
    };

    let mut splits: [Option<Split>; 2] = [None, None];
    let mut leaves = [0.0f64; 4];
    let mut outputs = vec![0.0f64; rows];

    for side in 0..2 {
        let majority = if node_pos[side] >= node_neg[side] { 1.0 } else { -1.0 };
        let leaf_err = node_pos[side].min(node_neg[side]);
        // keep the child split only when it strictly beats the plain leaf
        let candidate = child_candidates[side].filter(|s| s.error < leaf_err);
        match candidate {
            Some(s) => {
                // majorities of the two grandchild leaves
                let col = &binned.codes[s.feature * rows..(s.feature + 1) * rows];
                let mut leaf_pos = [0.0f64; 2];
                let mut leaf_neg = [0.0f64; 2];
                for i in 0..rows {
                    if assign[i] as usize != side {
                        continue;
                    }
                    let leaf = usize::from(col[i] as usize > s.cut);
                    if labels[i] {
                        leaf_pos[leaf] += weights[i];
                    } else {
                        leaf_neg[leaf] += weights[i];
                    }
                }
                for leaf in 0..2 {
                    leaves[side * 2 + leaf] = if leaf_pos[leaf] + leaf_neg[leaf] == 0.0 {
                        majority // empty leaf inherits the node majority
                    } else if leaf_pos[leaf] >= leaf_neg[leaf] {
                        1.0
                    } else {
                        -1.0
                    };
                }
                for i in 0..rows {
                    if assign[i] as usize == side {
                        let leaf = usize::from(col[i] as usize > s.cut);
                        outputs[i] = leaves[side * 2 + leaf];
                    }
                }
                splits[side] = Some(Split {
                    feature: s.feature as u32,
                    threshold: binned.cuts[s.feature][s.cut],
                    polarity: 1,
                });
            }
            None => {
                leaves[side * 2] = majority;
                leaves[side * 2 + 1] = majority;
                for i in 0..rows {
                    if assign[i] as usize == side {
                        outputs[i] = majority;
                    }
                }
            }
        }
    }

    let tree = WeakTree {
        root: Split {
            feature: root.feature as u32,
            threshold: binned.cuts[root.feature][root.cut],
            polarity: 1,
        },
        left: splits[0].take(),
        right: splits[1].take(),
        leaves,
    };

    let weighted_error = outputs
        .iter()
        .zip(labels)
        .zip(weights)
        .filter(|((&h, &y), _)| (h > 0.0) != y)
        .map(|(_, &w)| w)
        .sum();

    Some(FittedTree { tree, weighted_error, outputs })
}

// ---------------------------------------------------------------------------
// hard-negative mining

/// Run full multi-scale detection over pedestrian-free images and return the
/// `quota` highest-scoring false positives as training feature vectors.
pub fn mine_hard_negatives(
    clf: &StrongClassifier,
    neg_images: &[RasterImage],
    quota: usize,
    cfg: &PipelineConfig,
) -> Result<FeatureMatrix> {
    if neg_images.is_empty() {
        return Err(Error::Training("hard-negative mining needs at least one image".into()));
    }

    // (score, image, window) for every post-NMS detection
    let mut hits: Vec<(f64, usize, detect::ScoredWindow)> = Vec::new();
    let per_image: Vec<Vec<detect::ScoredWindow>> = neg_images
        .par_iter()
        .map(|img| detect::detect_scored(img, clf, cfg).map(|(_, wins)| wins))
        .collect::<Result<_>>()?;
    for (img_idx, wins) in per_image.into_iter().enumerate() {
        for w in wins {
            hits.push((w.score, img_idx, w));
        }
    }
    hits.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.order.cmp(&b.2.order))
    });
    hits.truncate(quota);

    // group by (image, level) so each pyramid level is rebuilt once
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by_key(|&k| (hits[k].1, hits[k].2.level));

    let needs_hist = clf.layout.descriptor().histogram_bins();
    let mut out = FeatureMatrix::zeros(hits.len(), clf.layout.feature_len());
    let mut current: Option<(usize, usize, IntegralStack)> = None;
    for &k in &order {
        let (_, img_idx, ref win) = hits[k];
        let rebuild = match &current {
            Some((ci, cl, _)) => *ci != img_idx || *cl != win.level,
            None => true,
        };
        if rebuild {
            let level =
                detect::resize_for_level(&neg_images[img_idx], win.level_width, win.level_height);
            let stack = crate::imaging::compute_channels(&crate::imaging::smooth_binomial(&level));
            let istack = match needs_hist {
                Some(bins) => IntegralStack::build_with_histograms(&stack, bins)?,
                None => IntegralStack::build(&stack),
            };
            current = Some((img_idx, win.level, istack));
        }
        let istack = &current.as_ref().unwrap().2;
        let features = extract_features_at(istack, &clf.layout, win.x, win.y)?;
        // row index = score rank
        out.set_row(k, &features.values)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// weight maps

/// Accumulated weights of the 100 strongest features painted over the cells
/// they cover, plus the per-channel totals of the same features.
#[derive(Debug, Clone)]
pub struct WeightMaps {
    pub cell_weights: Plane,
    pub channel_totals: [f64; NUM_CHANNELS],
}

pub fn weight_maps(clf: &StrongClassifier) -> WeightMaps {
    // accumulate tree weight per flat feature
    let mut acc: Vec<f64> = vec![0.0; clf.layout.feature_len()];
    for (tree, &w) in clf.trees.iter().zip(&clf.weights) {
        for f in tree.features() {
            acc[f as usize] += w;
        }
    }
    let mut ranked: Vec<usize> = (0..acc.len()).filter(|&f| acc[f] > 0.0).collect();
    ranked.sort_by(|&a, &b| acc[b].partial_cmp(&acc[a]).unwrap().then(a.cmp(&b)));
    ranked.truncate(100);

    let mut cell_weights = Plane::zeros(clf.layout.model_width(), clf.layout.model_height());
    let mut channel_totals = [0.0f64; NUM_CHANNELS];
    for &f in &ranked {
        let (entry_idx, _) = clf.layout.entry_of_feature(f);
        let entry = &clf.layout.entries()[entry_idx];
        let w = acc[f];
        channel_totals[entry.channel] += w;

        let mut cells = vec![entry.center];
        match entry.direction {
            Some(dir) => cells.push(entry.neighbor(dir)),
            None => cells.extend(entry.surround_cells()),
        }
        for cell in cells {
            for y in cell.y..cell.y + cell.size {
                for x in cell.x..cell.x + cell.size {
                    cell_weights.set(x, y, cell_weights.get(x, y) + w);
                }
            }
        }
    }
    WeightMaps { cell_weights, channel_totals }
}

/// Write the weight map and channel totals as CSV files.
pub fn emit_weight_maps(
    clf: &StrongClassifier,
    map_path: &std::path::Path,
    totals_path: &std::path::Path,
    header: &str,
) -> Result<WeightMaps> {
    let maps = weight_maps(clf);
    let mut map_csv = String::new();
    for line in header.lines() {
        map_csv.push_str("# ");
        map_csv.push_str(line);
        map_csv.push('\n');
    }
    map_csv.push_str(&maps.cell_weights.to_csv());
    std::fs::write(map_path, map_csv)?;

    let mut totals_csv = String::new();
    for line in header.lines() {
        totals_csv.push_str("# ");
        totals_csv.push_str(line);
        totals_csv.push('\n');
    }
    totals_csv.push_str("channel,weight\n");
    for (ch, w) in maps.channel_totals.iter().enumerate() {
        totals_csv.push_str(&format!("{},{}\n", crate::imaging::CHANNEL_NAMES[ch], w));
    }
    std::fs::write(totals_path, totals_csv)?;
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrasts::Measure;
    use crate::pyramid::{build_layout, DescriptorKind, LayoutSpec, Pattern};
    use crate::{MODEL_HEIGHT, MODEL_WIDTH};

    // Tiny layouts are impossible (the model window is fixed), so tests
    // train on matrices whose width matches a small real layout and place
    // the informative features at the front.
    fn small_layout() -> FeatureLayout {
        build_layout(&LayoutSpec {
            scales: vec![10],
            pattern: Pattern::C1S8,
            descriptor: DescriptorKind::Gaussian,
            measure: Measure::W2,
        })
        .unwrap()
    }

    fn matrix_from(rows: &[Vec<f64>], cols: usize) -> FeatureMatrix {
        let mut m = FeatureMatrix::new(cols);
        for r in rows {
            let mut padded = r.clone();
            padded.resize(cols, 0.0);
            m.push_slice(&padded).unwrap();
        }
        m
    }

    #[test]
    fn separable_feature_needs_one_tree() {
        let layout = small_layout();
        let cols = layout.feature_len();
        let pos = matrix_from(&[vec![2.0], vec![3.0], vec![2.5]], cols);
        let neg = matrix_from(&[vec![-1.0], vec![0.0], vec![0.5]], cols);
        let (clf, stats) = train_adaboost_with_stats(&pos, &neg, &layout, 16, 2).unwrap();
        assert_eq!(clf.trees.len(), 1, "separable data should stop after one perfect tree");
        assert_eq!(stats.training_errors.last().copied(), Some(0.0));
        for i in 0..pos.rows() {
            assert!(clf.score_row(pos.row(i)) > 0.0);
        }
        for i in 0..neg.rows() {
            assert!(clf.score_row(neg.row(i)) < 0.0);
        }
    }

    #[test]
    fn xor_needs_depth_two() {
        let layout = small_layout();
        let cols = layout.feature_len();
        // XOR on the first two features
        let pos = matrix_from(&[vec![0.0, 0.0], vec![1.0, 1.0]], cols);
        let neg = matrix_from(&[vec![0.0, 1.0], vec![1.0, 0.0]], cols);

        // brute-force stump oracle: every (feature, threshold, polarity)
        // misclassifies at least one of the four points
        let pts = [
            (vec![0.0, 0.0], true),
            (vec![1.0, 1.0], true),
            (vec![0.0, 1.0], false),
            (vec![1.0, 0.0], false),
        ];
        let mut best_stump = f64::INFINITY;
        for f in 0..2 {
            for thr in [-0.5, 0.0, 0.5, 1.0] {
                for pol in [1.0, -1.0] {
                    let err = pts
                        .iter()
                        .filter(|(x, y)| ((x[f] <= thr) == (pol > 0.0)) != *y)
                        .count() as f64
                        / 4.0;
                    best_stump = best_stump.min(err);
                }
            }
        }
        assert!(best_stump > 0.25, "a stump should not solve XOR, got {best_stump}");

        let (clf, stats) = train_adaboost_with_stats(&pos, &neg, &layout, 8, 2).unwrap();
        assert_eq!(stats.training_errors.last().copied(), Some(0.0));
        for (x, y) in &pts {
            let mut padded = x.clone();
            padded.resize(cols, 0.0);
            let score = clf.score_values(|f| padded[f as usize]);
            assert_eq!(score > 0.0, *y, "point {x:?}");
        }
    }

    #[test]
    fn weak_learners_beat_chance_on_noise() {
        let layout = small_layout();
        let cols = layout.feature_len();
        let mut state = 0x8BADF00Du64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..6).map(|_| rnd()).collect()).collect();
        let pos = matrix_from(&rows[..20], cols);
        let neg = matrix_from(&rows[20..], cols);
        let (_, stats) = train_adaboost_with_stats(&pos, &neg, &layout, 24, 2).unwrap();
        assert!(!stats.weak_errors.is_empty());
        for &e in &stats.weak_errors {
            assert!(e < 0.5, "accepted weak learner with error {e}");
        }
    }

    #[test]
    fn training_error_non_increasing() {
        let layout = small_layout();
        let cols = layout.feature_len();
        for seed in 0..10u64 {
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
            let mut rnd = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            // informative features + noise
            let make = |label: f64, rnd: &mut dyn FnMut() -> f64| -> Vec<f64> {
                (0..8)
                    .map(|k| if k < 3 { rnd() + 0.5 * label } else { rnd() })
                    .collect()
            };
            let pos_rows: Vec<Vec<f64>> = (0..30).map(|_| make(1.0, &mut rnd)).collect();
            let neg_rows: Vec<Vec<f64>> = (0..30).map(|_| make(-1.0, &mut rnd)).collect();
            let pos = matrix_from(&pos_rows, cols);
            let neg = matrix_from(&neg_rows, cols);
            let (_, stats) = train_adaboost_with_stats(&pos, &neg, &layout, 32, 2).unwrap();
            for w in stats.training_errors.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-12,
                    "seed {seed}: training error rose {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn single_class_input_rejected() {
        let layout = small_layout();
        let cols = layout.feature_len();
        let pos = matrix_from(&[vec![1.0]], cols);
        let empty = FeatureMatrix::new(cols);
        assert!(matches!(
            train_adaboost(&pos, &empty, &layout, 4, 2),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn retraining_is_bit_reproducible() {
        let layout = small_layout();
        let cols = layout.feature_len();
        let mut state = 0xFEEDFACEu64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let rows: Vec<Vec<f64>> =
            (0..30).map(|i| (0..5).map(|_| rnd() + if i < 15 { 0.3 } else { 0.0 }).collect()).collect();
        let pos = matrix_from(&rows[..15], cols);
        let neg = matrix_from(&rows[15..], cols);
        let a = train_adaboost(&pos, &neg, &layout, 12, 2).unwrap();
        let b = train_adaboost(&pos, &neg, &layout, 12, 2).unwrap();
        assert_eq!(a.trees, b.trees);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn rejecting_classifier_mines_nothing() {
        let layout = small_layout();
        let clf = StrongClassifier {
            trees: vec![WeakTree {
                root: Split { feature: 0, threshold: 1e30, polarity: 1 },
                left: None,
                right: None,
                leaves: [-1.0, -1.0, -1.0, -1.0],
            }],
            weights: vec![1.0],
            layout,
            score_offset: 0.0,
        };
        let cfg = crate::config::PipelineConfig::default();
        let img = RasterImage::constant(90, 150, [0.4, 0.4, 0.4]);
        let mined = mine_hard_negatives(&clf, &[img], 100, &cfg).unwrap();
        assert_eq!(mined.rows(), 0);
        assert!(matches!(
            mine_hard_negatives(&clf, &[], 100, &cfg),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn weight_map_covers_selected_cells_only() {
        let layout = small_layout();
        let entry = &layout.entries()[40];
        let feature = layout.feature_of_entry(40, 0);
        let clf = StrongClassifier {
            trees: vec![WeakTree {
                root: Split { feature: feature as u32, threshold: 0.0, polarity: 1 },
                left: None,
                right: None,
                leaves: [1.0, 1.0, -1.0, -1.0],
            }],
            weights: vec![0.7],
            layout: layout.clone(),
            score_offset: 0.0,
        };
        let maps = weight_maps(&clf);
        // nonzero exactly on center + neighbor cells
        let mut expected = Plane::zeros(MODEL_WIDTH, MODEL_HEIGHT);
        let cells = [entry.center, entry.neighbor(entry.direction.unwrap())];
        for c in cells {
            for y in c.y..c.y + c.size {
                for x in c.x..c.x + c.size {
                    expected.set(x, y, 0.7);
                }
            }
        }
        assert_eq!(maps.cell_weights.data(), expected.data());

        // channel totals conserve the accumulated weights
        let total: f64 = maps.channel_totals.iter().sum();
        assert!((total - 0.7).abs() < 1e-12);
        assert!((maps.channel_totals[entry.channel] - 0.7).abs() < 1e-12);

        // deterministic
        let again = weight_maps(&clf);
        assert_eq!(again.cell_weights.data(), maps.cell_weights.data());
        assert_eq!(again.channel_totals, maps.channel_totals);
    }
}
