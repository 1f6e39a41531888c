//! Center-surround contrast features for pedestrian detection.
//!
//! The pipeline turns an input image into ten per-pixel channels (LUV colors,
//! gradient magnitude, six orientation-binned gradient planes), summarizes
//! square cells of each channel by a statistical descriptor (Gaussian or
//! interpolated histogram), and measures the contrast between every center
//! cell and its eight neighbors with one of six distances. The resulting
//! feature pool over a 60x120 model window feeds an AdaBoost classifier of
//! depth-2 decision trees with multi-round hard-negative mining. Detection
//! slides the model window over an image pyramid and applies greedy
//! non-maximal suppression; evaluation implements the standard full-image
//! miss-rate vs. FPPI protocol with ignore-region handling.
//!
//! Module map:
//!
//! - [`imaging`]: decoding, binomial smoothing, 10-channel computation
//! - [`integrals`]: integral images, squared integrals, integral histograms
//! - [`descriptors`]: Gaussian and histogram cell descriptors
//! - [`contrasts`]: the six contrast measures
//! - [`pyramid`]: feature layout enumeration and window extraction
//! - [`boost`]: AdaBoost training, hard-negative mining, weight maps
//! - [`detect`]: multi-scale sliding-window detection and NMS
//! - [`evaluation`]: ground-truth filtering, matching, curves, lamr
//! - [`config`]: pipeline configuration (flat key-value format)
//! - [`model`]: versioned model file (JSON schema)

pub mod boost;
pub mod config;
pub mod contrasts;
pub mod descriptors;
pub mod detect;
mod error;
pub mod evaluation;
pub mod imaging;
pub mod integrals;
pub mod model;
pub mod pyramid;

pub use error::{Error, Result};

/// Model window width in pixels.
pub const MODEL_WIDTH: usize = 60;
/// Model window height in pixels.
pub const MODEL_HEIGHT: usize = 120;

/// Tool version stamped into emitted files.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
