//! Compensated convex transforms on regular grids.
//!
//! The crate provides grid types ([`ScalarGrid`], [`MaskGrid`],
//! [`SampleField`]), exact Moreau envelopes and distance transforms, two
//! convex-envelope engines, the lower/upper/mixed compensated convex
//! transforms built on them, and the feature, interpolation and restoration
//! maps derived from those transforms.

pub mod convex;
pub mod error;
pub mod exec;
pub mod features;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod moreau;
pub mod restore;
pub mod transform;

pub use error::{Error, Result};
pub use exec::{execution, set_execution, Execution};
pub use features::{FeatureKind, FeatureMap};
pub use grid::{crop, pad_mirror, Geometry, MaskGrid, SampleField, ScalarGrid};
pub use metrics::Psnr;
pub use transform::{
    char_grid, lower_transform, mixed_lu, mixed_ul, upper_transform, Padding, PaddingMode, Scheme,
    SchemeKind, TransformParams,
};
