//! Integral images and integral histograms for O(1) rectangle statistics.
//!
//! Every channel gets two integral images (values and squared values) so cell
//! means and variances come out of eight corner lookups. Histogram
//! descriptors additionally use a stack of per-bin integral planes. All
//! accumulation runs in f64; the squared-sum cancellation in the variance is
//! the dominant numerical hazard.

use rayon::prelude::*;

use crate::imaging::{ChannelStack, Plane, NUM_CHANNELS};
use crate::{Error, Result};

/// Axis-aligned pixel rectangle, `x,y` top-left, half-open extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }
}

/// Cumulative 2-D sums over a plane; row 0 and column 0 are zero.
#[derive(Debug, Clone)]
pub struct IntegralPlane {
    width: usize,  // source plane width
    height: usize, // source plane height
    cumsum: Vec<f64>,
}

impl IntegralPlane {
    /// cumsum[i][j] = sum of the plane over rows < i, cols < j.
    pub fn build(plane: &Plane) -> Self {
        Self::build_mapped(plane, |v| v)
    }

    /// Integral of `f(value)`; used for squared integrals.
    pub fn build_mapped(plane: &Plane, f: impl Fn(f64) -> f64) -> Self {
        let (w, h) = (plane.width(), plane.height());
        let stride = w + 1;
        let mut cumsum = vec![0.0f64; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0.0;
            for x in 0..w {
                row_sum += f(plane.get(x, y));
                cumsum[(y + 1) * stride + (x + 1)] = cumsum[y * stride + (x + 1)] + row_sum;
            }
        }
        IntegralPlane { width: w, height: h, cumsum }
    }

    /// Integral over weights produced per pixel (used by integral histograms).
    fn build_weights(width: usize, height: usize, weight: impl Fn(usize, usize) -> f64) -> Self {
        let stride = width + 1;
        let mut cumsum = vec![0.0f64; (width + 1) * (height + 1)];
        for y in 0..height {
            let mut row_sum = 0.0;
            for x in 0..width {
                row_sum += weight(x, y);
                cumsum[(y + 1) * stride + (x + 1)] = cumsum[y * stride + (x + 1)] + row_sum;
            }
        }
        IntegralPlane { width, height, cumsum }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn cumsum(&self, row: usize, col: usize) -> f64 {
        self.cumsum[row * (self.width + 1) + col]
    }

    /// Exact sum of the pixels covered by `rect`.
    pub fn rect_sum(&self, rect: Rect) -> Result<f64> {
        if rect.x + rect.w > self.width || rect.y + rect.h > self.height {
            return Err(Error::Bounds {
                what: "rect_sum",
                x: rect.x,
                y: rect.y,
                w: rect.w,
                h: rect.h,
                plane_w: self.width,
                plane_h: self.height,
            });
        }
        Ok(self.rect_sum_unchecked(rect))
    }

    /// Four-corner query without a bounds check; callers validate once per cell.
    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, rect: Rect) -> f64 {
        let stride = self.width + 1;
        let top = rect.y * stride;
        let bot = (rect.y + rect.h) * stride;
        debug_assert!(rect.x + rect.w <= self.width && rect.y + rect.h <= self.height);
        self.cumsum[bot + rect.x + rect.w] - self.cumsum[top + rect.x + rect.w]
            - self.cumsum[bot + rect.x]
            + self.cumsum[top + rect.x]
    }
}

/// Stack of per-bin integral planes; plane k holds the interpolated bin-k
/// mass of each pixel.
#[derive(Debug, Clone)]
pub struct IntegralHistogram {
    bins: usize,
    planes: Vec<IntegralPlane>,
}

impl IntegralHistogram {
    /// Each pixel distributes unit weight between the two bin centers nearest
    /// its value; centers sit at `lo + (k+0.5)(hi-lo)/bins`. Values at or
    /// below the first center load bin 0 entirely, at or above the last
    /// center bin `bins-1`; out-of-range values clamp to the end bins.
    pub fn build(plane: &Plane, bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins < 2 {
            return Err(Error::config(format!("integral histogram needs >= 2 bins, got {bins}")));
        }
        if !(hi > lo) {
            return Err(Error::config(format!("invalid histogram range [{lo}, {hi}]")));
        }
        let bin_width = (hi - lo) / bins as f64;
        let planes = (0..bins)
            .map(|k| {
                IntegralPlane::build_weights(plane.width(), plane.height(), |x, y| {
                    let t = (plane.get(x, y) - lo) / bin_width - 0.5;
                    if t <= 0.0 {
                        if k == 0 { 1.0 } else { 0.0 }
                    } else if t >= (bins - 1) as f64 {
                        if k == bins - 1 { 1.0 } else { 0.0 }
                    } else {
                        let k0 = t.floor() as usize;
                        let w1 = t - k0 as f64;
                        if k == k0 {
                            1.0 - w1
                        } else if k == k0 + 1 {
                            w1
                        } else {
                            0.0
                        }
                    }
                })
            })
            .collect();
        Ok(IntegralHistogram { bins, planes })
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    /// Interpolated bin-k mass inside `rect`.
    pub fn rect_bin_mass(&self, k: usize, rect: Rect) -> Result<f64> {
        self.planes[k].rect_sum(rect)
    }

    #[inline]
    pub(crate) fn rect_bin_mass_unchecked(&self, k: usize, rect: Rect) -> f64 {
        self.planes[k].rect_sum_unchecked(rect)
    }
}

/// All integral structures for one channel stack: per channel the value
/// integral, the squared-value integral, and optionally a value histogram.
#[derive(Debug)]
pub struct IntegralStack {
    width: usize,
    height: usize,
    sums: Vec<IntegralPlane>,
    sqsums: Vec<IntegralPlane>,
    hists: Option<Vec<IntegralHistogram>>,
}

impl IntegralStack {
    /// Value and squared-value integrals only (Gaussian descriptors).
    pub fn build(stack: &ChannelStack) -> Self {
        let sums: Vec<_> = stack.planes().par_iter().map(IntegralPlane::build).collect();
        let sqsums: Vec<_> =
            stack.planes().par_iter().map(|p| IntegralPlane::build_mapped(p, |v| v * v)).collect();
        IntegralStack { width: stack.width(), height: stack.height(), sums, sqsums, hists: None }
    }

    /// Additionally build per-channel integral histograms over the fixed
    /// [0,1] channel value range (histogram descriptors).
    pub fn build_with_histograms(stack: &ChannelStack, bins: usize) -> Result<Self> {
        let mut out = Self::build(stack);
        let hists = stack
            .planes()
            .par_iter()
            .map(|p| IntegralHistogram::build(p, bins, 0.0, 1.0))
            .collect::<Result<Vec<_>>>()?;
        out.hists = Some(hists);
        Ok(out)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn sum_plane(&self, channel: usize) -> &IntegralPlane {
        &self.sums[channel]
    }

    #[inline]
    pub fn sq_plane(&self, channel: usize) -> &IntegralPlane {
        &self.sqsums[channel]
    }

    pub fn histogram(&self, channel: usize) -> Result<&IntegralHistogram> {
        debug_assert!(channel < NUM_CHANNELS);
        self.hists
            .as_ref()
            .map(|h| &h[channel])
            .ok_or_else(|| Error::config("integral stack was built without histograms"))
    }

    pub fn has_histograms(&self) -> bool {
        self.hists.is_some()
    }
}
