//! Image decoding, binomial pre-smoothing and the 10-channel representation.
//!
//! The usual integral-channel mix: 3 LUV color planes scaled into [0,1],
//! 1 gradient magnitude plane and 6 unsigned orientation planes over [0, pi).
//! Gradient magnitude is distributed into the two nearest orientation bins by
//! linear interpolation, so the orientation planes sum back to the magnitude
//! plane at every pixel.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Number of channel planes in a [`ChannelStack`].
pub const NUM_CHANNELS: usize = 10;

/// Channel names, index-aligned with [`ChannelStack::planes`].
pub const CHANNEL_NAMES: [&str; NUM_CHANNELS] = [
    "L", "U", "V", "grad_mag", "orient_0", "orient_1", "orient_2", "orient_3", "orient_4",
    "orient_5",
];

const ORIENT_BINS: usize = 6;
/// First orientation plane index within a stack.
pub const ORIENT_BASE: usize = 4;
/// Gradient magnitude plane index.
pub const GRAD_MAG: usize = 3;

/// Row-major scalar grid. Shared by channel planes, contrast maps and
/// weight maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Plane { width, height, data: vec![0.0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::shape(format!(
                "plane data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Plane { width, height, data })
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
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Serialize as CSV, one image row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if x > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(x, y));
            }
            out.push('\n');
        }
        out
    }

    /// Debug dump as plain-text PGM (P2), min/max normalized to 0..255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if x > 0 {
                    out.push(' ');
                }
                let g = ((self.get(x, y) - lo) / span * 255.0).round() as u32;
                let _ = write!(out, "{}", g.min(255));
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Decoded RGB image with components in [0,1], row-major.
#[derive(Debug, Clone)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape("image dimensions must be at least 1x1"));
        }
        if pixels.len() != width * height {
            return Err(Error::shape(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        for p in &pixels {
            for &c in p {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::shape(format!("pixel component {c} outside [0,1]")));
                }
            }
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let p = f(x, y);
                pixels.push([p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0), p[2].clamp(0.0, 1.0)]);
            }
        }
        RasterImage { width, height, pixels }
    }

    pub fn constant(width: usize, height: usize, value: [f64; 3]) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    /// Decode a PNG/JPEG/PPM/PGM file.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let pixels = img
            .pixels()
            .map(|p| {
                [
                    f64::from(p.0[0]) / 255.0,
                    f64::from(p.0[1]) / 255.0,
                    f64::from(p.0[2]) / 255.0,
                ]
            })
            .collect();
        Ok(RasterImage { width: w, height: h, pixels })
    }

    /// Encode as 8-bit PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut buf = image::RgbImage::new(self.width as u32, self.height as u32);
        for (i, px) in self.pixels.iter().enumerate() {
            let x = (i % self.width) as u32;
            let y = (i / self.width) as u32;
            buf.put_pixel(
                x,
                y,
                image::Rgb([
                    (px[0] * 255.0).round() as u8,
                    (px[1] * 255.0).round() as u8,
                    (px[2] * 255.0).round() as u8,
                ]),
            );
        }
        buf.save(path)?;
        Ok(())
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
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, p: [f64; 3]) {
        self.pixels[y * self.width + x] = [
            p[0].clamp(0.0, 1.0),
            p[1].clamp(0.0, 1.0),
            p[2].clamp(0.0, 1.0),
        ];
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::Bounds {
                what: "crop",
                x,
                y,
                w,
                h,
                plane_w: self.width,
                plane_h: self.height,
            });
        }
        Ok(Self::from_fn(w, h, |cx, cy| self.pixel(x + cx, y + cy)))
    }

    pub fn mirror_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.pixel(self.width - 1 - x, y))
    }

    /// Bilinear resize with pixel-center alignment.
    pub fn resize(&self, new_w: usize, new_h: usize) -> Self {
        assert!(new_w >= 1 && new_h >= 1);
        let sx = self.width as f64 / new_w as f64;
        let sy = self.height as f64 / new_h as f64;
        Self::from_fn(new_w, new_h, |x, y| {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let x0 = fx.floor() as usize;
            let y0 = fy.floor() as usize;
            let x1 = (x0 + 1).min(self.width - 1);
            let y1 = (y0 + 1).min(self.height - 1);
            let ax = fx - x0 as f64;
            let ay = fy - y0 as f64;
            let mut out = [0.0; 3];
            for c in 0..3 {
                let top = self.pixel(x0, y0)[c] * (1.0 - ax) + self.pixel(x1, y0)[c] * ax;
                let bot = self.pixel(x0, y1)[c] * (1.0 - ax) + self.pixel(x1, y1)[c] * ax;
                out[c] = top * (1.0 - ay) + bot * ay;
            }
            out
        })
    }

    /// Luminance plane (Rec. 601 weights), used by the contrast-map tool.
    pub fn to_gray(&self) -> Plane {
        Plane::from_fn(self.width, self.height, |x, y| {
            let p = self.pixel(x, y);
            0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
        })
    }
}

/// Per-pixel 10-channel representation of one image.
#[derive(Debug, Clone)]
pub struct ChannelStack {
    width: usize,
    height: usize,
    planes: Vec<Plane>,
}

impl ChannelStack {
    /// Assemble a stack from explicit planes (10 planes, equal dimensions).
    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        if planes.len() != NUM_CHANNELS {
            return Err(Error::shape(format!(
                "channel stack needs {NUM_CHANNELS} planes, got {}",
                planes.len()
            )));
        }
        let (w, h) = (planes[0].width(), planes[0].height());
        if planes.iter().any(|p| p.width() != w || p.height() != h) {
            return Err(Error::shape("channel planes must share dimensions"));
        }
        Ok(ChannelStack { width: w, height: h, planes })
    }

    #[cfg(test)]
    pub(crate) fn from_planes_for_tests(plane: Plane) -> Self {
        let (w, h) = (plane.width(), plane.height());
        let mut planes = vec![plane];
        planes.extend((1..NUM_CHANNELS).map(|_| Plane::zeros(w, h)));
        ChannelStack { width: w, height: h, planes }
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
    pub fn plane(&self, channel: usize) -> &Plane {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }
}

/// Separable binomial filter (1,2,1)/4 per axis, radius 1 (sigma ~ 0.87),
/// borders replicated. Applied to the input image only; channel planes are
/// never re-smoothed.
pub fn smooth_binomial(img: &RasterImage) -> RasterImage {
    let (w, h) = (img.width, img.height);
    // horizontal pass
    let mut tmp = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let l = img.pixel(x.saturating_sub(1), y);
            let c = img.pixel(x, y);
            let r = img.pixel((x + 1).min(w - 1), y);
            for k in 0..3 {
                tmp[y * w + x][k] = (l[k] + 2.0 * c[k] + r[k]) * 0.25;
            }
        }
    }
    // vertical pass
    let mut out = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        let yu = y.saturating_sub(1);
        let yd = (y + 1).min(h - 1);
        for x in 0..w {
            let u = tmp[yu * w + x];
            let c = tmp[y * w + x];
            let d = tmp[yd * w + x];
            for k in 0..3 {
                out[y * w + x][k] = (u[k] + 2.0 * c[k] + d[k]) * 0.25;
            }
        }
    }
    RasterImage { width: w, height: h, pixels: out }
}

// CIE LUV with D65 white point; constants as in the common channel-features
// implementations. Scaled ranges: L in [0,100], u in [-134,220], v in [-140,122].
const XN: f64 = 0.950456;
const ZN: f64 = 1.088754;

fn rgb_to_luv_scaled(r: f64, g: f64, b: f64) -> [f64; 3] {
    let x = 0.412453 * r + 0.357580 * g + 0.180423 * b;
    let y = 0.212671 * r + 0.715160 * g + 0.072169 * b;
    let z = 0.019334 * r + 0.119193 * g + 0.950227 * b;

    let l = if y > 0.008856 { 116.0 * y.cbrt() - 16.0 } else { 903.3 * y };
    let denom = x + 15.0 * y + 3.0 * z;
    let denom_n = XN + 15.0 + 3.0 * ZN;
    let (up, vp) = if denom > 0.0 { (4.0 * x / denom, 9.0 * y / denom) } else { (0.0, 0.0) };
    let (upn, vpn) = (4.0 * XN / denom_n, 9.0 / denom_n);
    let u = 13.0 * l * (up - upn);
    let v = 13.0 * l * (vp - vpn);

    [
        (l / 100.0).clamp(0.0, 1.0),
        ((u + 134.0) / 354.0).clamp(0.0, 1.0),
        ((v + 140.0) / 262.0).clamp(0.0, 1.0),
    ]
}

/// Compute the 10-channel stack for a (pre-smoothed) image.
///
/// The gradient is taken per pixel by central differences on each scaled LUV
/// plane, keeping the plane with maximal magnitude. The magnitude is split
/// between the two orientation bins nearest the unsigned gradient angle; bin
/// centers sit at (k+0.5)*pi/6 over [0, pi), wrapping between bins 5 and 0.
pub fn compute_channels(img: &RasterImage) -> ChannelStack {
    let (w, h) = (img.width, img.height);
    let mut luv = [Plane::zeros(w, h), Plane::zeros(w, h), Plane::zeros(w, h)];
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            let c = rgb_to_luv_scaled(p[0], p[1], p[2]);
            for k in 0..3 {
                luv[k].set(x, y, c[k]);
            }
        }
    }

    let mut mag = Plane::zeros(w, h);
    let mut orient = vec![Plane::zeros(w, h); ORIENT_BINS];
    let bin_width = PI / ORIENT_BINS as f64;

    for y in 0..h {
        let yu = y.saturating_sub(1);
        let yd = (y + 1).min(h - 1);
        for x in 0..w {
            let xl = x.saturating_sub(1);
            let xr = (x + 1).min(w - 1);
            // strongest gradient over the three color planes
            let mut best = (0.0f64, 0.0f64, 0.0f64); // (mag2, gx, gy)
            for plane in &luv {
                let gx = (plane.get(xr, y) - plane.get(xl, y)) * 0.5;
                let gy = (plane.get(x, yd) - plane.get(x, yu)) * 0.5;
                let m2 = gx * gx + gy * gy;
                if m2 > best.0 {
                    best = (m2, gx, gy);
                }
            }
            let m = best.0.sqrt();
            mag.set(x, y, m);
            if m == 0.0 {
                continue;
            }
            let mut theta = best.2.atan2(best.1);
            if theta < 0.0 {
                theta += PI;
            }
            if theta >= PI {
                theta -= PI;
            }
            let t = theta / bin_width - 0.5;
            let k0 = t.floor();
            let w1 = t - k0;
            let b0 = (k0 as isize).rem_euclid(ORIENT_BINS as isize) as usize;
            let b1 = (b0 + 1) % ORIENT_BINS;
            let v0 = orient[b0].get(x, y) + m * (1.0 - w1);
            orient[b0].set(x, y, v0);
            let v1 = orient[b1].get(x, y) + m * w1;
            orient[b1].set(x, y, v1);
        }
    }

    let mut planes = Vec::with_capacity(NUM_CHANNELS);
    planes.extend(luv);
    planes.push(mag);
    planes.extend(orient);
    ChannelStack { width: w, height: h, planes }
}
