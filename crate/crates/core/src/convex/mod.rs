//! Convex envelopes of grid functions.

mod biconjugate;
mod oberman;
pub mod pwa;

pub use biconjugate::{
    biconjugate_envelope, biconjugate_envelope_with, slope_ranges, BiconjugateOptions,
    MAX_DUAL_CELLS,
};
pub use oberman::{
    oberman_convex_envelope, oberman_with, ObermanOptions, ObermanOutcome, StencilSpec,
};
pub use pwa::{convex_minorant, lf_transform_pa, lower_hull, PiecewiseAffine1D};
