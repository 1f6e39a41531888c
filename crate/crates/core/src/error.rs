use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A rectangle or cell query reached outside its plane.
    #[error("out of bounds: {what} (x={x}, y={y}, w={w}, h={h}) on {plane_w}x{plane_h} plane")]
    Bounds {
        what: &'static str,
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        plane_w: usize,
        plane_h: usize,
    },

    /// Mismatched dimensions between two structures (bin counts, vector
    /// lengths, window sizes).
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model file error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image decode error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
