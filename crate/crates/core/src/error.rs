use thiserror::Error;

use crate::partitions::Frame;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} outside supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("weight mismatch: frame {frame} has weight {frame_weight}, class is in S_{class_r}")]
    WeightMismatch {
        frame: Frame,
        frame_weight: usize,
        class_r: usize,
    },

    /// `t_[m](c) = 0` for the named frame.
    #[error("pole: t_{frame}(c) vanishes at c = {c}")]
    Pole { frame: Frame, c: String },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("dimension cap exceeded: {dim} > {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Ill-conditioning or non-convergence in floating point routines.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
