//! Error measures between grids and between sets.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::features::support;
use crate::grid::{MaskGrid, ScalarGrid};
use crate::moreau::squared_distance_transform;

/// Peak signal-to-noise ratio; identical inputs have no finite value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psnr {
    Exact,
    Db(f64),
}

impl Psnr {
    /// The dB value, `None` for identical grids.
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Exact => None,
            Psnr::Db(v) => Some(v),
        }
    }
}

impl std::fmt::Display for Psnr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psnr::Exact => write!(f, "exact"),
            Psnr::Db(v) => write!(f, "{v:.3} dB"),
        }
    }
}

fn same_shape(a: &ScalarGrid, b: &ScalarGrid) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::IncompatibleShapes {
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    Ok(())
}

/// `10·log₁₀(peak² / MSE)`.
pub fn psnr(reference: &ScalarGrid, candidate: &ScalarGrid, peak: f64) -> Result<Psnr> {
    same_shape(reference, candidate)?;
    require_positive("peak", peak)?;
    let sse: f64 = reference
        .values()
        .iter()
        .zip(candidate.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sse == 0.0 {
        return Ok(Psnr::Exact);
    }
    let mse = sse / reference.len() as f64;
    Ok(Psnr::Db(10.0 * (peak * peak / mse).log10()))
}

/// `‖ref − cand‖₂ / ‖ref‖₂`, over the marked cells when a mask is given.
pub fn rel_l2(
    reference: &ScalarGrid,
    candidate: &ScalarGrid,
    mask: Option<&MaskGrid>,
) -> Result<f64> {
    same_shape(reference, candidate)?;
    if let Some(m) = mask {
        if m.shape() != reference.shape() {
            return Err(Error::IncompatibleShapes {
                left: reference.shape().to_vec(),
                right: m.shape().to_vec(),
            });
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (a, b)) in reference
        .values()
        .iter()
        .zip(candidate.values())
        .enumerate()
    {
        if mask.is_none_or(|m| m.flags()[i]) {
            num += (a - b) * (a - b);
            den += a * a;
        }
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter {
            name: "reference norm",
            value: 0.0,
            reason: "relative error needs a non-zero reference",
        });
    }
    Ok((num / den).sqrt())
}

/// Largest absolute difference.
pub fn sup_norm_diff(a: &ScalarGrid, b: &ScalarGrid) -> Result<f64> {
    a.max_abs_diff(b)
}

/// Hausdorff distance between two non-empty sets on the same lattice, in
/// world units.
pub fn hausdorff(e: &MaskGrid, f: &MaskGrid) -> Result<f64> {
    if e.geometry() != f.geometry() {
        return Err(Error::IncompatibleShapes {
            left: e.shape().to_vec(),
            right: f.shape().to_vec(),
        });
    }
    e.ensure_nonempty()?;
    f.ensure_nonempty()?;
    let to_e = squared_distance_transform(e)?;
    let to_f = squared_distance_transform(f)?;
    let directed = |dist2: &ScalarGrid, cells: &MaskGrid| {
        cells
            .indices()
            .map(|i| dist2.values()[i])
            .fold(0.0, f64::max)
    };
    Ok(directed(&to_f, e).max(directed(&to_e, f)).sqrt())
}

/// Hausdorff distance between `exact_support` and the cells of `map` above
/// `level · max(map)`.
pub fn support_hausdorff_error(
    exact_support: &MaskGrid,
    map: &ScalarGrid,
    level: f64,
) -> Result<f64> {
    hausdorff(exact_support, &support(map, level))
}
