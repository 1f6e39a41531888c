#![allow(dead_code)]
//! Seeded synthetic pedestrian corpus for end-to-end tests.
//!
//! Scenes are textured backgrounds (gradients, random rectangles, stripes,
//! pixel noise). Pedestrians are articulated figures (head, torso, arms,
//! legs) drawn with jittered geometry and randomized clothing colors, so
//! positives share structure but not pixels. Test images plant figures
//! directly onto scene backgrounds and record the enclosing model window as
//! ground truth.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cscd_core::evaluation::{format_annotation, Annotation};
use cscd_core::detect::Box2D;
use cscd_core::imaging::RasterImage;
use cscd_core::{MODEL_HEIGHT, MODEL_WIDTH};

pub struct SynthParams {
    pub seed: u64,
    /// Positive sample files (ingestion mirroring may double them).
    pub positives: usize,
    /// Pedestrian-free scene images.
    pub negatives: usize,
    pub neg_size: (usize, usize),
    /// Annotated test scenes.
    pub test_images: usize,
    pub test_size: (usize, usize),
    pub max_pedestrians: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1234,
            positives: 40,
            negatives: 12,
            neg_size: (260, 320),
            test_images: 10,
            test_size: (320, 240),
            max_pedestrians: 2,
        }
    }
}

pub struct SynthCorpus {
    pub pos_dir: PathBuf,
    pub neg_dir: PathBuf,
    pub test_dir: PathBuf,
    pub annotations: PathBuf,
    pub test_image_sizes: Vec<(String, usize, usize)>,
}

fn rand_color(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)]
}

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] * (1.0 - t) + b[0] * t, a[1] * (1.0 - t) + b[1] * t, a[2] * (1.0 - t) + b[2] * t]
}

/// Textured scene: two-corner gradient, random translucent rectangles,
/// a few vertical stripes, per-pixel noise.
pub fn textured_scene(w: usize, h: usize, rng: &mut ChaCha8Rng) -> RasterImage {
    let c0 = rand_color(rng);
    let c1 = rand_color(rng);
    let mut img = RasterImage::from_fn(w, h, |x, y| {
        let t = (x as f64 / w as f64 + y as f64 / h as f64) / 2.0;
        mix(c0, c1, t)
    });
    for _ in 0..rng.gen_range(6..14) {
        let rw = rng.gen_range(10..w.max(11) / 2);
        let rh = rng.gen_range(10..h.max(11) / 2);
        let rx = rng.gen_range(0..w - rw);
        let ry = rng.gen_range(0..h - rh);
        let color = rand_color(rng);
        let alpha = rng.gen_range(0.3..0.9);
        for y in ry..ry + rh {
            for x in rx..rx + rw {
                img.set_pixel(x, y, mix(img.pixel(x, y), color, alpha));
            }
        }
    }
    for _ in 0..rng.gen_range(2..6) {
        let sw = rng.gen_range(3..12);
        let sx = rng.gen_range(0..w.saturating_sub(sw).max(1));
        let color = rand_color(rng);
        for y in 0..h {
            for x in sx..(sx + sw).min(w) {
                img.set_pixel(x, y, mix(img.pixel(x, y), color, 0.5));
            }
        }
    }
    let noise = rng.gen_range(0.01..0.04);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            let d = rng.gen_range(-noise..noise);
            out.set_pixel(x, y, [p[0] + d, p[1] + d, p[2] + d]);
        }
    }
    out
}

/// Draw a pedestrian figure into the model window anchored at `(ox, oy)`.
/// Only figure pixels are painted; the surrounding background shows through.
pub fn draw_pedestrian(img: &mut RasterImage, ox: usize, oy: usize, rng: &mut ChaCha8Rng) {
    let skin = mix([0.85, 0.65, 0.5], rand_color(rng), 0.15);
    let shirt = rand_color(rng);
    let pants = rand_color(rng);
    let shoes = [0.12, 0.1, 0.1];

    let jx = rng.gen_range(-2i32..=2);
    let jy = rng.gen_range(-2i32..=2);
    let noise = rng.gen_range(0.01..0.03);

    // head (blocky ellipse)
    let hx = 30 + jx;
    let hy = 16 + jy;
    let hr = rng.gen_range(7..9);
    for y in hy - hr - 1..hy + hr + 1 {
        for x in hx - hr..hx + hr {
            let dx = f64::from(x - hx) / f64::from(hr);
            let dy = f64::from(y - hy) / (f64::from(hr) * 1.15);
            if dx * dx + dy * dy <= 1.0 && (0..MODEL_WIDTH as i32).contains(&x) && y >= 0 {
                let d = rng.gen_range(-noise..noise);
                img.set_pixel(
                    ox + x as usize,
                    oy + y as usize,
                    [skin[0] + d, skin[1] + d, skin[2] + d],
                );
            }
        }
    }

    let mut paint = |x0: i32, y0: i32, x1: i32, y1: i32, color: [f64; 3], rng: &mut ChaCha8Rng| {
        for y in y0.max(0)..y1.min(MODEL_HEIGHT as i32) {
            for x in x0.max(0)..x1.min(MODEL_WIDTH as i32) {
                let d = rng.gen_range(-noise..noise);
                img.set_pixel(
                    ox + x as usize,
                    oy + y as usize,
                    [color[0] + d, color[1] + d, color[2] + d],
                );
            }
        }
    };

    // torso and arms
    paint(17 + jx, 27 + jy, 43 + jx, 66 + jy, shirt, rng);
    paint(11 + jx, 29 + jy, 17 + jx, 58 + jy, shirt, rng);
    paint(43 + jx, 29 + jy, 49 + jx, 58 + jy, shirt, rng);
    // hands
    paint(11 + jx, 58 + jy, 17 + jx, 64 + jy, skin, rng);
    paint(43 + jx, 58 + jy, 49 + jx, 64 + jy, skin, rng);
    // legs
    let gap = rng.gen_range(3..6);
    paint(30 - gap - 7 + jx, 66 + jy, 30 - gap + jx, 106 + jy, pants, rng);
    paint(30 + gap + jx, 66 + jy, 30 + gap + 7 + jx, 106 + jy, pants, rng);
    // feet
    paint(30 - gap - 9 + jx, 106 + jy, 30 - gap + 1 + jx, 112 + jy, shoes, rng);
    paint(30 + gap - 1 + jx, 106 + jy, 30 + gap + 9 + jx, 112 + jy, shoes, rng);
}

/// One standalone positive sample: textured window with a centered figure.
pub fn render_positive(rng: &mut ChaCha8Rng) -> RasterImage {
    let mut img = textured_scene(MODEL_WIDTH, MODEL_HEIGHT, rng);
    draw_pedestrian(&mut img, 0, 0, rng);
    img
}

pub fn generate(root: &Path, p: &SynthParams) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pos_dir = root.join("pos");
    let neg_dir = root.join("neg");
    let test_dir = root.join("test");
    std::fs::create_dir_all(&pos_dir).unwrap();
    std::fs::create_dir_all(&neg_dir).unwrap();
    std::fs::create_dir_all(&test_dir).unwrap();

    for i in 0..p.positives {
        render_positive(&mut rng).save_png(&pos_dir.join(format!("pos_{i:04}.png"))).unwrap();
    }
    for i in 0..p.negatives {
        let (w, h) = p.neg_size;
        textured_scene(w, h, &mut rng).save_png(&neg_dir.join(format!("neg_{i:04}.png"))).unwrap();
    }

    let mut annotations = String::new();
    let mut sizes = Vec::new();
    for i in 0..p.test_images {
        let (w, h) = p.test_size;
        let id = format!("test_{i:04}");
        let mut img = textured_scene(w, h, &mut rng);
        let count = rng.gen_range(1..=p.max_pedestrians);
        let mut placed: Vec<(usize, usize)> = Vec::new();
        for _ in 0..count {
            for _attempt in 0..20 {
                let x = rng.gen_range(0..=w - MODEL_WIDTH);
                let y = rng.gen_range(0..=h - MODEL_HEIGHT);
                let clear = placed
                    .iter()
                    .all(|&(px, py)| x.abs_diff(px) >= MODEL_WIDTH || y.abs_diff(py) >= 64);
                if clear {
                    draw_pedestrian(&mut img, x, y, &mut rng);
                    placed.push((x, y));
                    break;
                }
            }
        }
        for &(x, y) in &placed {
            let a = Annotation {
                image_id: id.clone(),
                label: "person".into(),
                bbox: Box2D::new(x as f64, y as f64, MODEL_WIDTH as f64, MODEL_HEIGHT as f64),
                visible: None,
                ignore: false,
            };
            annotations.push_str(&format_annotation(&a));
            annotations.push('\n');
        }
        img.save_png(&test_dir.join(format!("{id}.png"))).unwrap();
        sizes.push((id, w, h));
    }
    let annotations_path = root.join("annotations.txt");
    std::fs::write(&annotations_path, annotations).unwrap();

    SynthCorpus {
        pos_dir,
        neg_dir,
        test_dir,
        annotations: annotations_path,
        test_image_sizes: sizes,
    }
}
