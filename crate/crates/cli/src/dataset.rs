//! Dataset ingestion.
//!
//! Directory conventions: a positive directory of model-window crops, a
//! negative directory of pedestrian-free images, and for evaluation an
//! image directory plus one plain-text annotation file. Image files are
//! listed in sorted name order so runs are reproducible.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cscd_core::imaging::RasterImage;
use cscd_core::{MODEL_HEIGHT, MODEL_WIDTH};

const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "ppm", "pgm", "pnm"];

/// Image files in `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries =
        std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some(e) if IMAGE_EXTENSIONS.contains(&e)) {
            out.push(path);
        }
    }
    if out.is_empty() {
        bail!("no images found in {}", dir.display());
    }
    out.sort();
    Ok(out)
}

/// File stem used as the image identifier in detection/annotation records.
pub fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Normalize a positive sample to the 60x120 model window: windows at least
/// model-sized are center-cropped (the 64x128 crop convention); smaller
/// ones are resized to cover the window first.
pub fn to_model_window(img: &RasterImage) -> Result<RasterImage> {
    let img = if img.width() >= MODEL_WIDTH && img.height() >= MODEL_HEIGHT {
        img.clone()
    } else {
        let s = (MODEL_WIDTH as f64 / img.width() as f64)
            .max(MODEL_HEIGHT as f64 / img.height() as f64);
        img.resize(
            (img.width() as f64 * s).ceil() as usize,
            (img.height() as f64 * s).ceil() as usize,
        )
    };
    let x = (img.width() - MODEL_WIDTH) / 2;
    let y = (img.height() - MODEL_HEIGHT) / 2;
    Ok(img.crop(x, y, MODEL_WIDTH, MODEL_HEIGHT)?)
}

/// Load positive samples, optionally appending mirrored copies.
pub fn load_positives(dir: &Path, mirror: bool) -> Result<Vec<RasterImage>> {
    let mut out = Vec::new();
    for path in list_images(dir)? {
        let img = RasterImage::load(&path)
            .with_context(|| format!("cannot decode {}", path.display()))?;
        out.push(to_model_window(&img)?);
    }
    if mirror {
        let mirrored: Vec<RasterImage> = out.iter().map(RasterImage::mirror_horizontal).collect();
        out.extend(mirrored);
    }
    Ok(out)
}

/// Load every image of a directory (negative images, test images).
pub fn load_images(dir: &Path) -> Result<Vec<(String, RasterImage)>> {
    let mut out = Vec::new();
    for path in list_images(dir)? {
        let img = RasterImage::load(&path)
            .with_context(|| format!("cannot decode {}", path.display()))?;
        out.push((image_id(&path), img));
    }
    Ok(out)
}

/// Uniform random model-aspect crops at random scales at least the model
/// size, resized to the model window.
pub fn random_negative_crops(
    images: &[(String, RasterImage)],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<RasterImage>> {
    let usable: Vec<&RasterImage> = images
        .iter()
        .map(|(_, img)| img)
        .filter(|img| img.width() >= MODEL_WIDTH && img.height() >= MODEL_HEIGHT)
        .collect();
    if usable.is_empty() {
        bail!("no negative image is at least {}x{}", MODEL_WIDTH, MODEL_HEIGHT);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let img = usable[rng.gen_range(0..usable.len())];
        // largest crop width keeping the 1:2 aspect inside the image
        let max_w = img.width().min(img.height() / 2);
        let w = rng.gen_range(MODEL_WIDTH..=max_w);
        let h = 2 * w;
        let x = rng.gen_range(0..=img.width() - w);
        let y = rng.gen_range(0..=img.height() - h);
        let crop = img.crop(x, y, w, h)?;
        out.push(if w == MODEL_WIDTH && h == MODEL_HEIGHT {
            crop
        } else {
            crop.resize(MODEL_WIDTH, MODEL_HEIGHT)
        });
    }
    Ok(out)
}
