use std::path::PathBuf;

use thiserror::Error;

use crate::transform::SchemeKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid has {got} values but shape {shape:?} needs {expected}")]
    ShapeMismatch {
        shape: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("grids have different shapes: {left:?} vs {right:?}")]
    IncompatibleShapes { left: Vec<usize>, right: Vec<usize> },
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("padding width {width} must be smaller than every axis extent (shape {shape:?})")]
    InvalidPadding { width: usize, shape: Vec<usize> },
    #[error("crop width {width} removes the whole grid (shape {shape:?})")]
    InvalidCrop { width: usize, shape: Vec<usize> },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("input is empty")]
    EmptyDomain,
    #[error("set is empty")]
    EmptySet,
    #[error("no sample cells remain")]
    EmptySample,
    #[error("sample has {values} values for {cells} marked cells")]
    SampleCount { cells: usize, values: usize },
    #[error("level M = {level} must exceed the largest sample magnitude {max_abs}")]
    LevelTooSmall { level: f64, max_abs: f64 },
    #[error("slopes are not strictly increasing at index {index}")]
    NotConvex { index: usize },
    #[error("dual range [{lo}, {hi}] on axis {axis} does not cover slopes [{need_lo}, {need_hi}]")]
    DualCoverage {
        axis: usize,
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },
    #[error("degenerate parameters: lambda = {lambda} must exceed tau = {tau}")]
    DegenerateParameters { lambda: f64, tau: f64 },
    #[error(
        "{scheme:?} scheme did not converge after {iterations} iterations (last change {change:e})"
    )]
    NotConverged {
        scheme: SchemeKind,
        iterations: usize,
        change: f64,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical scheme.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NotConverged { .. })
    }

    pub(crate) fn format(path: &std::path::Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}
