//! Statistical cell descriptors: Gaussian (mean, variance) and normalized
//! interpolated histograms, both answered from integral structures.

use crate::integrals::{IntegralHistogram, IntegralStack, Rect};
use crate::{Error, Result};

/// Square pixel cell, `x,y` top-left, `size` side length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize, size: usize) -> Self {
        Cell { x, y, size }
    }

    #[inline]
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.size, self.size)
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.size * self.size
    }

    fn check_bounds(&self, plane_w: usize, plane_h: usize) -> Result<()> {
        if self.size == 0 || self.x + self.size > plane_w || self.y + self.size > plane_h {
            return Err(Error::Bounds {
                what: "cell",
                x: self.x,
                y: self.y,
                w: self.size,
                h: self.size,
                plane_w,
                plane_h,
            });
        }
        Ok(())
    }
}

/// Maximum-likelihood Gaussian fit of a cell's channel values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDescriptor {
    pub mu: f64,
    /// Population variance (1/p normalization); clamped at 0 against
    /// floating cancellation in the sum-of-squares form.
    pub sigma2: f64,
}

/// Normalized interpolated histogram of a cell's channel values.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDescriptor {
    pub bins: Vec<f64>,
}

impl HistogramDescriptor {
    fn normalized(mut raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            for v in &mut raw {
                *v /= total;
            }
        } else {
            // zero-mass cell: fall back to the uniform histogram so the
            // divergence measures stay defined
            let u = 1.0 / raw.len() as f64;
            raw.fill(u);
        }
        HistogramDescriptor { bins: raw }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Mean/variance of one cell on one channel from the integral stack.
pub fn gaussian_descriptor(
    istack: &IntegralStack,
    channel: usize,
    cell: Cell,
) -> Result<GaussianDescriptor> {
    cell.check_bounds(istack.width(), istack.height())?;
    let p = cell.area() as f64;
    let s = istack.sum_plane(channel).rect_sum_unchecked(cell.rect());
    let s2 = istack.sq_plane(channel).rect_sum_unchecked(cell.rect());
    let mu = s / p;
    let sigma2 = (s2 / p - mu * mu).max(0.0);
    Ok(GaussianDescriptor { mu, sigma2 })
}

/// Normalized per-bin rectangle query of one cell.
pub fn histogram_descriptor(ihist: &IntegralHistogram, cell: Cell) -> Result<HistogramDescriptor> {
    cell.check_bounds(ihist.width(), ihist.height())?;
    let raw = (0..ihist.bins()).map(|k| ihist.rect_bin_mass_unchecked(k, cell.rect())).collect();
    Ok(HistogramDescriptor::normalized(raw))
}

/// Gaussian over the union of the surrounding cells (sums of sums).
pub fn pooled_gaussian_descriptor(
    istack: &IntegralStack,
    channel: usize,
    cells: &[Cell],
) -> Result<GaussianDescriptor> {
    check_pool(cells)?;
    let mut s = 0.0;
    let mut s2 = 0.0;
    let mut p = 0.0;
    for cell in cells {
        cell.check_bounds(istack.width(), istack.height())?;
        s += istack.sum_plane(channel).rect_sum_unchecked(cell.rect());
        s2 += istack.sq_plane(channel).rect_sum_unchecked(cell.rect());
        p += cell.area() as f64;
    }
    let mu = s / p;
    let sigma2 = (s2 / p - mu * mu).max(0.0);
    Ok(GaussianDescriptor { mu, sigma2 })
}

/// Histogram over the union of the surrounding cells, renormalized.
pub fn pooled_histogram_descriptor(
    ihist: &IntegralHistogram,
    cells: &[Cell],
) -> Result<HistogramDescriptor> {
    check_pool(cells)?;
    let mut raw = vec![0.0f64; ihist.bins()];
    for cell in cells {
        cell.check_bounds(ihist.width(), ihist.height())?;
        for (k, slot) in raw.iter_mut().enumerate() {
            *slot += ihist.rect_bin_mass_unchecked(k, cell.rect());
        }
    }
    Ok(HistogramDescriptor::normalized(raw))
}

fn check_pool(cells: &[Cell]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::shape("pooled descriptor needs at least one cell"));
    }
    if cells.iter().any(|c| c.size != cells[0].size) {
        return Err(Error::shape("pooled descriptor cells must share one size"));
    }
    Ok(())
}
