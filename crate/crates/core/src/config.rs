//! Pipeline configuration: a flat key-value text format whose defaults are
//! the optimal operating point (Gaussian descriptor + W2 contrast, scales
//! 4-6-8-10, C1S8, 4096 depth-2 trees, 4 rounds of 5000 negatives, scale
//! step 1.09).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrasts::Measure;
use crate::pyramid::{DescriptorKind, LayoutSpec, Pattern};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Cell sizes of the contrast pyramid.
    pub scales: Vec<usize>,
    pub pattern: Pattern,
    /// `gaussian` or `histogram`; histogram uses `histogram_bins`.
    pub descriptor: String,
    pub histogram_bins: usize,
    pub measure: Measure,
    /// Number of boosted trees.
    pub trees: usize,
    pub tree_depth: usize,
    /// Training rounds: 1 initial + (rounds-1) hard-negative mining rounds.
    pub rounds: usize,
    pub negatives_per_round: usize,
    /// Greedy NMS overlap threshold, intersection over min area.
    pub nms_overlap: f64,
    /// Pyramid step between consecutive scales (8 levels per octave).
    pub scale_step: f64,
    /// Sliding-window stride in pixels at model scale.
    pub stride: usize,
    /// Detection score threshold (classifier margin).
    pub threshold: f64,
    /// Smallest pyramid resize factor; 0 = descend until the model window
    /// no longer fits.
    pub scale_min: f64,
    /// Largest pyramid resize factor (>1 upscales to find small people).
    pub scale_max: f64,
    pub seed: u64,
    /// Add horizontally mirrored copies of the positive samples.
    pub mirror_positives: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scales: vec![4, 6, 8, 10],
            pattern: Pattern::C1S8,
            descriptor: "gaussian".into(),
            histogram_bins: 15,
            measure: Measure::W2,
            trees: 4096,
            tree_depth: 2,
            rounds: 4,
            negatives_per_round: 5000,
            nms_overlap: 0.65,
            scale_step: 1.09,
            stride: 4,
            threshold: 0.0,
            scale_min: 0.0,
            scale_max: 1.0,
            seed: 42,
            mirror_positives: true,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Set one configuration key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::parse(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "scales" => {
                self.scales = value
                    .split(',')
                    .map(|s| num::<usize>("scales", s.trim()))
                    .collect::<Result<_>>()?;
            }
            "pattern" => self.pattern = value.parse()?,
            "descriptor" => match value.to_ascii_lowercase().as_str() {
                "gaussian" | "histogram" => self.descriptor = value.to_ascii_lowercase(),
                other => return Err(Error::config(format!("unknown descriptor '{other}'"))),
            },
            "histogram_bins" => self.histogram_bins = num(key, value)?,
            "measure" => self.measure = value.parse()?,
            "trees" => self.trees = num(key, value)?,
            "tree_depth" => self.tree_depth = num(key, value)?,
            "rounds" => self.rounds = num(key, value)?,
            "negatives_per_round" => self.negatives_per_round = num(key, value)?,
            "nms_overlap" => self.nms_overlap = num(key, value)?,
            "scale_step" => self.scale_step = num(key, value)?,
            "stride" => self.stride = num(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "scale_min" => self.scale_min = num(key, value)?,
            "scale_max" => self.scale_max = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mirror_positives" => {
                self.mirror_positives = match value {
                    "true" | "1" | "yes" | "on" => true,
                    "false" | "0" | "no" | "off" => false,
                    other => {
                        return Err(Error::parse(format!("invalid boolean '{other}' for {key}")))
                    }
                }
            }
            other => return Err(Error::config(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::config("trees must be >= 1"));
        }
        if !(1..=2).contains(&self.tree_depth) {
            return Err(Error::config("tree_depth must be 1 or 2"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds must be >= 1"));
        }
        if self.stride == 0 {
            return Err(Error::config("stride must be >= 1"));
        }
        if !(self.scale_step > 1.0) {
            return Err(Error::config("scale_step must be > 1"));
        }
        if !(0.0..=1.0).contains(&self.nms_overlap) {
            return Err(Error::config("nms_overlap must lie in [0, 1]"));
        }
        if self.scale_max <= 0.0 || (self.scale_min > 0.0 && self.scale_min > self.scale_max) {
            return Err(Error::config("invalid pyramid scale range"));
        }
        self.layout_spec()?.validate() // scales + descriptor/measure pairing
    }

    /// Layout parameters implied by this configuration.
    pub fn layout_spec(&self) -> Result<LayoutSpec> {
        let descriptor = match self.descriptor.as_str() {
            "gaussian" => DescriptorKind::Gaussian,
            "histogram" => DescriptorKind::Histogram { bins: self.histogram_bins },
            other => return Err(Error::config(format!("unknown descriptor '{other}'"))),
        };
        Ok(LayoutSpec {
            scales: self.scales.clone(),
            pattern: self.pattern,
            descriptor,
            measure: self.measure,
        })
    }

    /// Canonical text form: every key, fixed order. Round-trips through
    /// [`apply_text`](Self::apply_text) and feeds the config hash.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let scales =
            self.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "scales = {scales}");
        let _ = writeln!(
            out,
            "pattern = {}",
            match self.pattern {
                Pattern::C1S8 => "c1s8",
                Pattern::C1S1 => "c1s1",
            }
        );
        let _ = writeln!(out, "descriptor = {}", self.descriptor);
        let _ = writeln!(out, "histogram_bins = {}", self.histogram_bins);
        let _ = writeln!(out, "measure = {}", self.measure.name());
        let _ = writeln!(out, "trees = {}", self.trees);
        let _ = writeln!(out, "tree_depth = {}", self.tree_depth);
        let _ = writeln!(out, "rounds = {}", self.rounds);
        let _ = writeln!(out, "negatives_per_round = {}", self.negatives_per_round);
        let _ = writeln!(out, "nms_overlap = {}", self.nms_overlap);
        let _ = writeln!(out, "scale_step = {}", self.scale_step);
        let _ = writeln!(out, "stride = {}", self.stride);
        let _ = writeln!(out, "threshold = {}", self.threshold);
        let _ = writeln!(out, "scale_min = {}", self.scale_min);
        let _ = writeln!(out, "scale_max = {}", self.scale_max);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "mirror_positives = {}", self.mirror_positives);
        out
    }

    /// FNV-1a hash of the canonical text, hex; stamps emitted files.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_text().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}
