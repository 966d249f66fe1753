use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty cloud")]
    EmptyCloud,

    #[error("invalid coordinate at point {index}")]
    InvalidCoordinate { index: usize },

    #[error("k exceeds cloud size (k = {k}, points = {points})")]
    KExceedsCloudSize { k: usize, points: usize },

    #[error("query index {index} out of range for {points} points")]
    IndexOutOfRange { index: usize, points: usize },

    #[error("degenerate extent: all points coincide")]
    DegenerateExtent,

    #[error("too few ground-truth points: need at least {needed}, got {got}")]
    TooFewGroundTruthPoints { needed: usize, got: usize },

    #[error("normals length {normals} does not match points length {points}")]
    LengthMismatch { points: usize, normals: usize },

    #[error("normal at index {index} has zero length")]
    ZeroNormal { index: usize },

    #[error("cloud has no normals")]
    MissingNormals,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown shape kind '{0}'")]
    UnknownShape(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
