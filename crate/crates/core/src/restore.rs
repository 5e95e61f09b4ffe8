//! Scattered-data approximation and image restoration with the average
//! compensated convex approximation.

use serde::{Deserialize, Serialize};

use crate::convex::ObermanOptions;
use crate::error::{require_positive, Error, Result};
use crate::grid::{MaskGrid, SampleField, ScalarGrid};
use crate::transform::{lower_unpadded, upper_unpadded, Scheme, TransformParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// The sample values on the marked cells and `±level` elsewhere.
pub fn extend_with_level(sample: &SampleField, sign: Sign, level: f64) -> Result<ScalarGrid> {
    require_positive("level_m", level)?;
    let max_abs = sample.max_abs();
    if level <= max_abs {
        return Err(Error::LevelTooSmall { level, max_abs });
    }
    Ok(sample.scatter(match sign {
        Sign::Plus => level,
        Sign::Minus => -level,
    }))
}

/// The iterative envelope's default tolerance scales with the input norm,
/// which the `±M` extension dominates; tie it to the samples instead.
fn sample_scheme(scheme: &Scheme, sample: &SampleField) -> Scheme {
    match scheme {
        Scheme::Oberman(opts) if opts.tol.is_none() => {
            let norm = sample
                .sample_values()
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            Scheme::Oberman(ObermanOptions {
                tol: Some(1e-7 * norm.max(1.0)),
                ..opts.clone()
            })
        }
        other => other.clone(),
    }
}

fn padded_sample<F>(sample: &SampleField, params: &TransformParams, f: F) -> Result<ScalarGrid>
where
    F: Fn(&SampleField, &Scheme) -> Result<ScalarGrid>,
{
    params.validate()?;
    if sample.mask().is_empty_set() {
        return Err(Error::EmptySample);
    }
    let scheme = sample_scheme(&params.scheme, sample);
    let width = match params.padding.mode {
        crate::transform::PaddingMode::None => 0,
        crate::transform::PaddingMode::Mirror => params.padding.width,
    };
    if width == 0 {
        return f(sample, &scheme);
    }
    let full = sample.scatter(0.0).pad_mirror(width)?;
    let mask = sample.mask().pad_mirror(width)?;
    let padded = SampleField::from_grid(&full, &mask)?;
    f(&padded, &scheme)?.crop(width)
}

/// `A^M_λ(f_K) = ½(C^l_λ(f^M_K) + C^u_λ(f^{−M}_K))` with `M = params.level_m`.
pub fn average_transform(sample: &SampleField, params: &TransformParams) -> Result<ScalarGrid> {
    padded_sample(sample, params, |s, scheme| {
        let plus = extend_with_level(s, Sign::Plus, params.level_m)?;
        let minus = extend_with_level(s, Sign::Minus, params.level_m)?;
        let low = lower_unpadded(&plus, params.lambda, scheme)?;
        let up = upper_unpadded(&minus, params.lambda, scheme)?;
        low.zip_map(&up, |a, b| 0.5 * (a + b))
    })
}

/// `½(C^u_τ(C^l_λ(f^M_K)) + C^l_τ(C^u_λ(f^{−M}_K)))`, within `16Mλ/τ` of
/// the average transform.
pub fn smooth_average_transform(
    sample: &SampleField,
    params: &TransformParams,
) -> Result<ScalarGrid> {
    padded_sample(sample, params, |s, scheme| {
        let plus = extend_with_level(s, Sign::Plus, params.level_m)?;
        let minus = extend_with_level(s, Sign::Minus, params.level_m)?;
        let low = upper_unpadded(
            &lower_unpadded(&plus, params.lambda, scheme)?,
            params.tau,
            scheme,
        )?;
        let up = lower_unpadded(
            &upper_unpadded(&minus, params.lambda, scheme)?,
            params.tau,
            scheme,
        )?;
        low.zip_map(&up, |a, b| 0.5 * (a + b))
    })
}

/// Cells equal to `low` or `high`, the two values salt-and-pepper noise
/// writes.
pub fn detect_extreme_values(image: &ScalarGrid, low: f64, high: f64) -> MaskGrid {
    MaskGrid::new(
        image.geometry().clone(),
        image
            .values()
            .iter()
            .map(|&v| v == low || v == high)
            .collect(),
    )
    .expect("mask built on the image geometry")
}

/// λ is read against intensities of unit peak magnitude, so 8- and 16-bit
/// images restore alike. A power of two keeps the rescaling exact.
pub fn intensity_scale(image: &ScalarGrid) -> f64 {
    let peak = image.max_abs();
    if peak == 0.0 || !peak.is_finite() {
        1.0
    } else {
        2f64.powi(peak.log2().ceil() as i32)
    }
}

fn restore_from_kept(
    image: &ScalarGrid,
    damaged: &MaskGrid,
    params: &TransformParams,
) -> Result<ScalarGrid> {
    if image.shape() != damaged.shape() {
        return Err(Error::IncompatibleShapes {
            left: image.shape().to_vec(),
            right: damaged.shape().to_vec(),
        });
    }
    let kept = damaged.complement();
    if kept.is_empty_set() {
        return Err(Error::EmptySample);
    }
    if damaged.is_empty_set() {
        return Ok(image.clone());
    }
    let scale = intensity_scale(image);
    let sample = SampleField::from_grid(&image.map(|v| v / scale), &kept)?;
    Ok(average_transform(&sample, params)?.map(|v| v * scale))
}

/// Reconstructs the cells flagged in `noise_mask` from the remaining ones,
/// with intensities divided by [`intensity_scale`] during the transform.
/// The image and mask are mirror padded by `pad_width` before the
/// transform and cropped afterwards; `params.padding` is ignored.
pub fn denoise_salt_pepper(
    image: &ScalarGrid,
    noise_mask: &MaskGrid,
    params: &TransformParams,
    pad_width: usize,
) -> Result<ScalarGrid> {
    let params = params
        .clone()
        .with_padding(crate::transform::Padding::mirror(pad_width));
    restore_from_kept(image, noise_mask, &params)
}

/// Fills the cells of `damage_mask` from the rest of the image and leaves
/// every other cell untouched.
pub fn inpaint(
    image: &ScalarGrid,
    damage_mask: &MaskGrid,
    params: &TransformParams,
) -> Result<ScalarGrid> {
    let filled = restore_from_kept(image, damage_mask, params)?;
    let values = image
        .values()
        .iter()
        .zip(filled.values())
        .zip(damage_mask.flags())
        .map(|((&orig, &new), &damaged)| if damaged { new } else { orig })
        .collect();
    ScalarGrid::new(image.geometry().clone(), values)
}
