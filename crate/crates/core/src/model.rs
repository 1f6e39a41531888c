//! Versioned model file: a JSON document holding the resolved
//! configuration, the layout parameters (entries are rebuilt on load and
//! verified against the recorded count), and the boosted trees.
//!
//! Readers accept any file with the same format name and major version;
//! unknown fields are ignored so minor additions stay readable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::{StrongClassifier, WeakTree};
use crate::config::PipelineConfig;
use crate::pyramid::{build_layout, LayoutSpec};
use crate::{Error, Result, TOOL_VERSION};

const FORMAT: &str = "center-surround-boost";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    tool_version: String,
    config_hash: String,
    config: PipelineConfig,
    layout: LayoutSpec,
    entry_count: usize,
    feature_len: usize,
    score_offset: f64,
    weights: Vec<f64>,
    trees: Vec<WeakTree>,
}

pub fn save_model(path: &Path, clf: &StrongClassifier, cfg: &PipelineConfig) -> Result<()> {
    let file = ModelFile {
        format: FORMAT.into(),
        version: VERSION,
        tool_version: TOOL_VERSION.into(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        layout: clf.layout.spec().clone(),
        entry_count: clf.layout.entries().len(),
        feature_len: clf.layout.feature_len(),
        score_offset: clf.score_offset,
        weights: clf.weights.clone(),
        trees: clf.trees.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Model(format!("serialize: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(StrongClassifier, PipelineConfig)> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::Model(format!("parse: {e}")))?;
    if file.format != FORMAT {
        return Err(Error::Model(format!("unknown format '{}'", file.format)));
    }
    if file.version != VERSION {
        return Err(Error::Model(format!(
            "unsupported version {} (this build reads version {VERSION})",
            file.version
        )));
    }
    if file.weights.len() != file.trees.len() {
        return Err(Error::Model("tree/weight count mismatch".into()));
    }
    let layout = build_layout(&file.layout)?;
    if layout.entries().len() != file.entry_count || layout.feature_len() != file.feature_len {
        return Err(Error::Model(format!(
            "layout rebuild mismatch: {} entries / {} features, file records {} / {}",
            layout.entries().len(),
            layout.feature_len(),
            file.entry_count,
            file.feature_len
        )));
    }
    let feature_len = layout.feature_len() as u32;
    for tree in &file.trees {
        if tree.features().any(|f| f >= feature_len) {
            return Err(Error::Model("tree references a feature outside the layout".into()));
        }
    }
    Ok((
        StrongClassifier {
            trees: file.trees,
            weights: file.weights,
            layout,
            score_offset: file.score_offset,
        },
        file.config,
    ))
}
