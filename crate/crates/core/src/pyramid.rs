//! Center-surround feature layout and window feature extraction.
//!
//! A layout enumerates, for a 60x120 model window, every (scale, layer,
//! center cell, direction, channel) combination produced by composing:
//!
//! - the C1S8 pattern (one center against each of its eight neighbors) or
//!   the pooled C1S1 baseline,
//! - the sparse pattern (center cells subsampled with a step of 2 cells,
//!   starting at the first interior cell),
//! - the shift pattern (a second cell grid offset by half a cell size),
//! - the multi-scale pattern (one grid pair per configured cell size).
//!
//! Enumeration order is fixed (scale, layer, row-major center, direction
//! N clockwise through NW, channel), so a flat feature index identifies
//! one entry component everywhere (training, model files, detection).

use serde::{Deserialize, Serialize};

use crate::contrasts::{gaussian_contrast, histogram_contrast, ContrastVector, Measure};
use crate::descriptors::{
    gaussian_descriptor, histogram_descriptor, pooled_gaussian_descriptor,
    pooled_histogram_descriptor, Cell,
};
use crate::imaging::{Plane, NUM_CHANNELS};
use crate::integrals::{IntegralPlane, IntegralStack, Rect};
use crate::{Error, Result, MODEL_HEIGHT, MODEL_WIDTH};

/// Center-surround neighborhood pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Eight directed center-neighbor pairs per center cell.
    C1S8,
    /// One pair per center cell against the pooled union of the eight
    /// neighbors.
    C1S1,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1s8" => Ok(Pattern::C1S8),
            "c1s1" => Ok(Pattern::C1S1),
            other => Err(Error::config(format!("unknown pattern '{other}'"))),
        }
    }
}

/// Cell descriptor family used by a layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    Gaussian,
    Histogram { bins: usize },
}

impl DescriptorKind {
    pub fn histogram_bins(self) -> Option<usize> {
        match self {
            DescriptorKind::Histogram { bins } => Some(bins),
            DescriptorKind::Gaussian => None,
        }
    }
}

/// Neighbor direction, clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::NE,
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
    ];

    /// Offset to the neighbor cell in grid units.
    pub fn grid_offset(self) -> (i32, i32) {
        match self {
            Direction::N => (0, -1),
            Direction::NE => (1, -1),
            Direction::E => (1, 0),
            Direction::SE => (1, 1),
            Direction::S => (0, 1),
            Direction::SW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::NW => (-1, -1),
        }
    }
}

/// Cell grid layer: base grid anchored at the window origin, or the grid
/// shifted by half a cell size in both axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Base,
    Shifted,
}

/// One enumerated center-surround pair on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutEntry {
    pub scale: usize,
    pub layer: Layer,
    /// Center cell in model-window pixel coordinates.
    pub center: Cell,
    /// `None` for the pooled C1S1 surround.
    pub direction: Option<Direction>,
    pub channel: usize,
}

impl LayoutEntry {
    /// Neighbor cell in the given direction (model-window coordinates).
    pub fn neighbor(&self, dir: Direction) -> Cell {
        let (dx, dy) = dir.grid_offset();
        let step = self.scale as i64;
        Cell::new(
            (self.center.x as i64 + dx as i64 * step) as usize,
            (self.center.y as i64 + dy as i64 * step) as usize,
            self.scale,
        )
    }

    /// All eight surrounding cells, N clockwise through NW.
    pub fn surround_cells(&self) -> [Cell; 8] {
        let mut out = [self.center; 8];
        for (i, d) in Direction::ALL.iter().enumerate() {
            out[i] = self.neighbor(*d);
        }
        out
    }
}

/// Layout construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub scales: Vec<usize>,
    pub pattern: Pattern,
    pub descriptor: DescriptorKind,
    pub measure: Measure,
}

impl LayoutSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::config("layout needs at least one scale"));
        }
        for &c in &self.scales {
            if c == 0 || c > MODEL_WIDTH.min(MODEL_HEIGHT) {
                return Err(Error::config(format!(
                    "cell size {c} does not fit the {MODEL_WIDTH}x{MODEL_HEIGHT} model window"
                )));
            }
        }
        match (self.descriptor, self.measure.is_gaussian()) {
            (DescriptorKind::Gaussian, false) => Err(Error::config(format!(
                "measure {} requires the histogram descriptor",
                self.measure.name()
            ))),
            (DescriptorKind::Histogram { .. }, true) => Err(Error::config(format!(
                "measure {} requires the gaussian descriptor",
                self.measure.name()
            ))),
            (DescriptorKind::Histogram { bins }, _) if bins < 2 => {
                Err(Error::config("histogram descriptor needs >= 2 bins"))
            }
            _ => Ok(()),
        }
    }
}

/// Deterministic enumeration of all center-surround features for the
/// 60x120 model window.
#[derive(Debug, Clone)]
pub struct FeatureLayout {
    model_width: usize,
    model_height: usize,
    spec: LayoutSpec,
    entries: Vec<LayoutEntry>,
}

/// Enumerate the feature layout for a configuration.
pub fn build_layout(spec: &LayoutSpec) -> Result<FeatureLayout> {
    FeatureLayout::build(spec.clone())
}

impl FeatureLayout {
    pub fn build(spec: LayoutSpec) -> Result<Self> {
        let (model_w, model_h) = (MODEL_WIDTH, MODEL_HEIGHT);
        spec.validate()?;

        let mut entries = Vec::new();
        for &scale in &spec.scales {
            for layer in [Layer::Base, Layer::Shifted] {
                let (ax, ay) = match layer {
                    Layer::Base => (0, 0),
                    Layer::Shifted => (scale / 2, scale / 2),
                };
                let cols = (model_w - ax) / scale;
                let rows = (model_h - ay) / scale;
                if cols < 3 || rows < 3 {
                    continue; // no interior cells in this grid
                }
                // interior cells, subsampled with step 2 from the first
                // interior index
                for j in (1..=rows - 2).step_by(2) {
                    for i in (1..=cols - 2).step_by(2) {
                        let center = Cell::new(ax + i * scale, ay + j * scale, scale);
                        match spec.pattern {
                            Pattern::C1S8 => {
                                for dir in Direction::ALL {
                                    for channel in 0..NUM_CHANNELS {
                                        entries.push(LayoutEntry {
                                            scale,
                                            layer,
                                            center,
                                            direction: Some(dir),
                                            channel,
                                        });
                                    }
                                }
                            }
                            Pattern::C1S1 => {
                                for channel in 0..NUM_CHANNELS {
                                    entries.push(LayoutEntry {
                                        scale,
                                        layer,
                                        center,
                                        direction: None,
                                        channel,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }

        Ok(FeatureLayout { model_width: model_w, model_height: model_h, spec, entries })
    }

    #[inline]
    pub fn model_width(&self) -> usize {
        self.model_width
    }

    #[inline]
    pub fn model_height(&self) -> usize {
        self.model_height
    }

    pub fn spec(&self) -> &LayoutSpec {
        &self.spec
    }

    pub fn measure(&self) -> Measure {
        self.spec.measure
    }

    pub fn descriptor(&self) -> DescriptorKind {
        self.spec.descriptor
    }

    pub fn entries(&self) -> &[LayoutEntry] {
        &self.entries
    }

    /// Flat feature vector length: entries x measure dimension.
    pub fn feature_len(&self) -> usize {
        self.entries.len() * self.spec.measure.dim()
    }

    /// Map a flat feature index to its (entry index, component) pair.
    #[inline]
    pub fn entry_of_feature(&self, feature: usize) -> (usize, usize) {
        let dim = self.spec.measure.dim();
        (feature / dim, feature % dim)
    }

    /// Inverse of [`entry_of_feature`](Self::entry_of_feature).
    #[inline]
    pub fn feature_of_entry(&self, entry: usize, component: usize) -> usize {
        entry * self.spec.measure.dim() + component
    }

    /// Contrast vector of one entry for a window whose top-left corner sits
    /// at `(ox, oy)` in the integral stack.
    pub fn entry_contrast(
        &self,
        istack: &IntegralStack,
        entry_idx: usize,
        ox: usize,
        oy: usize,
    ) -> Result<ContrastVector> {
        let entry = &self.entries[entry_idx];
        let at = |c: Cell| Cell::new(c.x + ox, c.y + oy, c.size);
        match self.spec.descriptor {
            DescriptorKind::Gaussian => {
                let center = gaussian_descriptor(istack, entry.channel, at(entry.center))?;
                let surround = match entry.direction {
                    Some(dir) => gaussian_descriptor(istack, entry.channel, at(entry.neighbor(dir)))?,
                    None => {
                        let cells = entry.surround_cells().map(at);
                        pooled_gaussian_descriptor(istack, entry.channel, &cells)?
                    }
                };
                Ok(gaussian_contrast(center, surround, self.spec.measure))
            }
            DescriptorKind::Histogram { .. } => {
                let ihist = istack.histogram(entry.channel)?;
                let center = histogram_descriptor(ihist, at(entry.center))?;
                let surround = match entry.direction {
                    Some(dir) => histogram_descriptor(ihist, at(entry.neighbor(dir)))?,
                    None => {
                        let cells = entry.surround_cells().map(at);
                        pooled_histogram_descriptor(ihist, &cells)?
                    }
                };
                histogram_contrast(&center, &surround, self.spec.measure)
            }
        }
    }

    /// Value of one flat feature for a window at `(ox, oy)`.
    pub fn feature_value(
        &self,
        istack: &IntegralStack,
        feature: usize,
        ox: usize,
        oy: usize,
    ) -> Result<f64> {
        let (entry, component) = self.entry_of_feature(feature);
        Ok(self.entry_contrast(istack, entry, ox, oy)?.components()[component])
    }
}

/// Flat feature values aligned with a layout's enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Extract the full feature vector for a model-sized window.
pub fn extract_features(istack: &IntegralStack, layout: &FeatureLayout) -> Result<FeatureVector> {
    if istack.width() != layout.model_width() || istack.height() != layout.model_height() {
        return Err(Error::shape(format!(
            "window is {}x{}, model expects {}x{}",
            istack.width(),
            istack.height(),
            layout.model_width(),
            layout.model_height()
        )));
    }
    extract_features_at(istack, layout, 0, 0)
}

/// Extract the full feature vector for the model window at `(ox, oy)`
/// inside a larger integral stack.
pub fn extract_features_at(
    istack: &IntegralStack,
    layout: &FeatureLayout,
    ox: usize,
    oy: usize,
) -> Result<FeatureVector> {
    if ox + layout.model_width() > istack.width() || oy + layout.model_height() > istack.height() {
        return Err(Error::Bounds {
            what: "window",
            x: ox,
            y: oy,
            w: layout.model_width(),
            h: layout.model_height(),
            plane_w: istack.width(),
            plane_h: istack.height(),
        });
    }
    let mut values = Vec::with_capacity(layout.feature_len());
    for idx in 0..layout.entries().len() {
        let cst = layout.entry_contrast(istack, idx, ox, oy)?;
        values.extend_from_slice(cst.components());
    }
    Ok(FeatureVector { values })
}

/// Mean-contrast map of a grayscale plane: per interior cell the absolute
/// difference between the cell mean and the pooled mean of its eight
/// neighbors, painted into the cell's pixels. Cells without a full
/// surround, and pixels outside the cell grid, stay 0.
pub fn contrast_map(gray: &Plane, cell_size: usize) -> Plane {
    let mut out = Plane::zeros(gray.width(), gray.height());
    if cell_size == 0 {
        return out;
    }
    let cols = gray.width() / cell_size;
    let rows = gray.height() / cell_size;
    if cols < 3 || rows < 3 {
        return out;
    }
    let integral = IntegralPlane::build(gray);
    let area = (cell_size * cell_size) as f64;
    let cell_sum = |i: usize, j: usize| {
        integral.rect_sum_unchecked(Rect::new(i * cell_size, j * cell_size, cell_size, cell_size))
    };
    for j in 1..rows - 1 {
        for i in 1..cols - 1 {
            let center_mean = cell_sum(i, j) / area;
            // 3x3 block sum minus the center = pooled surround
            let block = integral.rect_sum_unchecked(Rect::new(
                (i - 1) * cell_size,
                (j - 1) * cell_size,
                3 * cell_size,
                3 * cell_size,
            ));
            let surround_mean = (block - cell_sum(i, j)) / (8.0 * area);
            let v = (center_mean - surround_mean).abs();
            for y in j * cell_size..(j + 1) * cell_size {
                for x in i * cell_size..(i + 1) * cell_size {
                    out.set(x, y, v);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ChannelStack;
    use approx::assert_relative_eq;

    fn spec(scales: &[usize], pattern: Pattern) -> LayoutSpec {
        LayoutSpec {
            scales: scales.to_vec(),
            pattern,
            descriptor: DescriptorKind::Gaussian,
            measure: Measure::W2,
        }
    }

    #[test]
    fn feature_pool_sizes_match_published_totals() {
        for (scales, expected) in [
            (vec![4usize, 6], 20_320usize),
            (vec![4, 6, 8], 23_440),
            (vec![4, 6, 8, 10], 25_040),
        ] {
            let layout = build_layout(&spec(&scales, Pattern::C1S8)).unwrap();
            assert_eq!(layout.entries().len(), expected, "scales {scales:?}");
        }
    }

    #[test]
    fn per_scale_entry_counts() {
        for (scale, expected) in [(4usize, 14_560usize), (6, 5_760), (8, 3_120), (10, 1_600)] {
            let layout = build_layout(&spec(&[scale], Pattern::C1S8)).unwrap();
            assert_eq!(layout.entries().len(), expected, "scale {scale}");
        }
    }

    #[test]
    fn sgrd_doubles_components_not_entries() {
        let mut s = spec(&[4, 6, 8, 10], Pattern::C1S8);
        s.measure = Measure::SGrd;
        let layout = build_layout(&s).unwrap();
        assert_eq!(layout.entries().len(), 25_040);
        assert_eq!(layout.feature_len(), 50_080);
    }

    #[test]
    fn layout_is_deterministic() {
        let a = build_layout(&spec(&[4, 6, 8, 10], Pattern::C1S8)).unwrap();
        let b = build_layout(&spec(&[4, 6, 8, 10], Pattern::C1S8)).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn neighbors_stay_inside_model_window() {
        let layout = build_layout(&spec(&[4, 6, 8, 10], Pattern::C1S8)).unwrap();
        for e in layout.entries() {
            for cell in e.surround_cells() {
                assert!(cell.x + cell.size <= MODEL_WIDTH);
                assert!(cell.y + cell.size <= MODEL_HEIGHT);
            }
        }
    }

    #[test]
    fn c1s1_structurally_contained_in_c1s8() {
        let pooled = build_layout(&spec(&[4, 6], Pattern::C1S1)).unwrap();
        let directed = build_layout(&spec(&[4, 6], Pattern::C1S8)).unwrap();
        assert_eq!(directed.entries().len(), pooled.entries().len() * 8);
        for p in pooled.entries() {
            let covering: Vec<_> = directed
                .entries()
                .iter()
                .filter(|d| {
                    d.scale == p.scale
                        && d.layer == p.layer
                        && d.center == p.center
                        && d.channel == p.channel
                })
                .collect();
            assert_eq!(covering.len(), 8);
            let mut dirs: Vec<_> = covering.iter().map(|d| d.direction.unwrap()).collect();
            dirs.dedup();
            assert_eq!(dirs.len(), 8);
        }
    }

    #[test]
    fn feature_index_roundtrip() {
        let mut s = spec(&[8, 10], Pattern::C1S8);
        s.measure = Measure::SGrd;
        let layout = build_layout(&s).unwrap();
        for f in 0..layout.feature_len() {
            let (e, c) = layout.entry_of_feature(f);
            assert_eq!(layout.feature_of_entry(e, c), f);
        }
    }

    #[test]
    fn oversized_scale_rejected() {
        assert!(matches!(build_layout(&spec(&[64], Pattern::C1S8)), Err(Error::Config(_))));
    }

    #[test]
    fn incompatible_measure_descriptor_rejected() {
        let mut s = spec(&[4], Pattern::C1S8);
        s.measure = Measure::Hellinger;
        assert!(matches!(build_layout(&s), Err(Error::Config(_))));
        s.descriptor = DescriptorKind::Histogram { bins: 15 };
        s.measure = Measure::W2;
        assert!(matches!(build_layout(&s), Err(Error::Config(_))));
    }

    fn random_stack(seed: u64) -> ChannelStack {
        let mut state = seed | 1;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let planes =
            (0..NUM_CHANNELS).map(|_| Plane::from_fn(MODEL_WIDTH, MODEL_HEIGHT, |_, _| rnd())).collect();
        ChannelStack::from_planes(planes).unwrap()
    }

    // Naive extractor: per-pixel loops, no integral structures. Oracle for
    // the integral-backed path.
    fn naive_extract(stack: &ChannelStack, layout: &FeatureLayout) -> Vec<f64> {
        let plane_vals = |cell: Cell, ch: usize| -> Vec<f64> {
            let mut v = Vec::with_capacity(cell.area());
            for y in cell.y..cell.y + cell.size {
                for x in cell.x..cell.x + cell.size {
                    v.push(stack.plane(ch).get(x, y));
                }
            }
            v
        };
        let gauss = |vals: &[f64]| {
            let p = vals.len() as f64;
            let mu = vals.iter().sum::<f64>() / p;
            let var = (vals.iter().map(|v| v * v).sum::<f64>() / p - mu * mu).max(0.0);
            crate::descriptors::GaussianDescriptor { mu, sigma2: var }
        };
        let mut out = Vec::new();
        for e in layout.entries() {
            let center = gauss(&plane_vals(e.center, e.channel));
            let surround = match e.direction {
                Some(d) => gauss(&plane_vals(e.neighbor(d), e.channel)),
                None => {
                    let mut all = Vec::new();
                    for c in e.surround_cells() {
                        all.extend(plane_vals(c, e.channel));
                    }
                    gauss(&all)
                }
            };
            out.extend_from_slice(
                gaussian_contrast(center, surround, layout.measure()).components(),
            );
        }
        out
    }

    #[test]
    fn extraction_matches_naive_oracle() {
        let stack = random_stack(0x5EED);
        let layout = build_layout(&spec(&[4, 6, 8, 10], Pattern::C1S8)).unwrap();
        let istack = IntegralStack::build(&stack);
        let fast = extract_features(&istack, &layout).unwrap();
        let slow = naive_extract(&stack, &layout);
        assert_eq!(fast.len(), slow.len());
        for (i, (a, b)) in fast.values.iter().zip(&slow).enumerate() {
            assert!((a - b).abs() <= 1e-6, "feature {i}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_window_vector_is_degenerate() {
        let planes =
            (0..NUM_CHANNELS).map(|_| Plane::from_fn(MODEL_WIDTH, MODEL_HEIGHT, |_, _| 0.4)).collect();
        let stack = ChannelStack::from_planes(planes).unwrap();
        let istack = IntegralStack::build_with_histograms(&stack, 15).unwrap();

        // all cells carry identical descriptors up to integral-image
        // cancellation noise; W2's square root amplifies ~1e-14 variance
        // residue to ~1e-7
        for measure in [Measure::W2, Measure::L2, Measure::SGrd] {
            let mut s = spec(&[4, 6], Pattern::C1S8);
            s.measure = measure;
            let layout = build_layout(&s).unwrap();
            let v = extract_features(&istack, &layout).unwrap();
            assert!(v.values.iter().all(|&x| x.abs() < 1e-5), "{measure:?}");
        }
        for measure in [Measure::Kld, Measure::Hellinger, Measure::HistIntersect] {
            let mut s = spec(&[4, 6], Pattern::C1S8);
            s.descriptor = DescriptorKind::Histogram { bins: 15 };
            s.measure = measure;
            let layout = build_layout(&s).unwrap();
            let v = extract_features(&istack, &layout).unwrap();
            let expect = if measure == Measure::HistIntersect { 1.0 } else { 0.0 };
            assert!(
                v.values.iter().all(|&x| (x - expect).abs() < 1e-7),
                "{measure:?}"
            );
        }
    }

    #[test]
    fn lazy_feature_values_match_full_extraction() {
        let stack = random_stack(0xFACE);
        let mut s = spec(&[6, 8], Pattern::C1S8);
        s.measure = Measure::SGrd;
        let layout = build_layout(&s).unwrap();
        let istack = IntegralStack::build(&stack);
        let full = extract_features(&istack, &layout).unwrap();
        for f in (0..layout.feature_len()).step_by(97) {
            let lazy = layout.feature_value(&istack, f, 0, 0).unwrap();
            assert_eq!(lazy, full.values[f]);
        }
    }

    #[test]
    fn contrast_map_constant_plane_is_zero() {
        // integral-image subtraction leaves ~1e-16 cancellation residue
        let map = contrast_map(&Plane::from_fn(24, 36, |_, _| 0.7), 4);
        assert!(map.data().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn contrast_map_bright_cell_localized() {
        // one bright 4px cell at grid position (2,2) on a dark plane
        let plane = Plane::from_fn(24, 24, |x, y| {
            if (8..12).contains(&x) && (8..12).contains(&y) {
                1.0
            } else {
                0.0
            }
        });
        let map = contrast_map(&plane, 4);
        for y in 8..12 {
            for x in 8..12 {
                assert_relative_eq!(map.get(x, y), 1.0, epsilon = 1e-12);
            }
        }
        // neighbors see the bright cell with 1/8 weight
        assert_relative_eq!(map.get(4, 8), 0.125, epsilon = 1e-12);
        // far corner cell sees nothing
        assert_eq!(map.get(20, 20), 0.0);
    }

    #[test]
    fn contrast_map_matches_brute_force() {
        let mut state = 0x77AA11u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let plane = Plane::from_fn(30, 26, |_, _| rnd());
        let c = 6usize;
        let map = contrast_map(&plane, c);
        let cols = 30 / c;
        let rows = 26 / c;
        let mean_of = |i: usize, j: usize| {
            let mut s = 0.0;
            for y in j * c..(j + 1) * c {
                for x in i * c..(i + 1) * c {
                    s += plane.get(x, y);
                }
            }
            s / (c * c) as f64
        };
        for j in 0..rows {
            for i in 0..cols {
                let expected = if i >= 1 && j >= 1 && i < cols - 1 && j < rows - 1 {
                    let center = mean_of(i, j);
                    let mut surround = 0.0;
                    for dj in -1i32..=1 {
                        for di in -1i32..=1 {
                            if di != 0 || dj != 0 {
                                surround +=
                                    mean_of((i as i32 + di) as usize, (j as i32 + dj) as usize);
                            }
                        }
                    }
                    (center - surround / 8.0).abs()
                } else {
                    0.0
                };
                assert_relative_eq!(map.get(i * c, j * c), expected, epsilon = 1e-9);
            }
        }
    }
}
