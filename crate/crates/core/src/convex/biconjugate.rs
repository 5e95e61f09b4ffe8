//! Convex envelope as the biconjugate `(f*)*`, with each n-D conjugate
//! factored into 1-D conjugates along the axes.

use super::pwa::convex_minorant;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::exec;
use crate::grid::ScalarGrid;

/// Cap on the dual working array, about 1 GiB of f64.
pub const MAX_DUAL_CELLS: usize = 1 << 27;

/// Dual-grid settings for [`biconjugate_envelope_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiconjugateOptions {
    /// Spacing of the uniform dual (slope) grid.
    pub dual_spacing: f64,
    /// Explicit dual range per axis. When absent the range is fitted to the
    /// extreme finite-difference slopes of the input.
    pub dual_bounds: Option<Vec<(f64, f64)>>,
}

impl Default for BiconjugateOptions {
    fn default() -> Self {
        Self {
            dual_spacing: 1e-3,
            dual_bounds: None,
        }
    }
}

/// `(f*)*` sampled on the primal lattice, with the dual grid fitted to the
/// input slopes.
pub fn biconjugate_envelope(g: &ScalarGrid, dual_spacing: f64) -> Result<ScalarGrid> {
    biconjugate_envelope_with(
        g,
        &BiconjugateOptions {
            dual_spacing,
            dual_bounds: None,
        },
    )
}

pub fn biconjugate_envelope_with(g: &ScalarGrid, opts: &BiconjugateOptions) -> Result<ScalarGrid> {
    let hd = opts.dual_spacing;
    require_positive("dual_spacing", hd)?;
    let geom = g.geometry();
    let n = geom.ndim();
    let primal: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..geom.shape()[a])
                .map(|k| geom.origin()[a] + k as f64 * geom.spacing()[a])
                .collect()
        })
        .collect();

    let slopes = slope_ranges(g);
    let mut ranges = Vec::with_capacity(n);
    for (axis, &(need_lo, need_hi)) in slopes.iter().enumerate() {
        let (lo, hi) = match &opts.dual_bounds {
            Some(bounds) => {
                let (lo, hi) = *bounds.get(axis).ok_or_else(|| {
                    Error::InvalidGeometry(format!("no dual bounds given for axis {axis}"))
                })?;
                if !(lo <= need_lo && hi >= need_hi) {
                    return Err(Error::DualCoverage {
                        axis,
                        lo,
                        hi,
                        need_lo,
                        need_hi,
                    });
                }
                (lo, hi)
            }
            None => (
                ((need_lo / hd).floor() - 1.0) * hd,
                ((need_hi / hd).ceil() + 1.0) * hd,
            ),
        };
        let count = ((hi - lo) / hd).round();
        let count = if count < MAX_DUAL_CELLS as f64 {
            count as usize + 1
        } else {
            usize::MAX
        };
        ranges.push((lo, count));
    }

    // the largest intermediate array holds the dual axes done so far times
    // the primal axes still to go
    let mut largest = 0usize;
    for axis in 0..n {
        let cells = ranges[..=axis]
            .iter()
            .map(|r| r.1)
            .chain(primal[axis + 1..].iter().map(Vec::len))
            .try_fold(1usize, |acc, len| acc.checked_mul(len));
        largest = largest.max(cells.unwrap_or(usize::MAX));
    }
    if largest > MAX_DUAL_CELLS {
        return Err(Error::InvalidParameter {
            name: "dual_spacing",
            value: hd,
            reason: "dual grid too large for the slope range; use a coarser spacing",
        });
    }
    let dual: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&(lo, count)| (0..count).map(|j| lo + j as f64 * hd).collect())
        .collect();

    // forward: G_{k+1} = -conj_k(G_k), so f* = -G_n
    let mut shape = geom.shape().to_vec();
    let mut values = g.values().to_vec();
    for axis in 0..n {
        values = conjugate_axis(&shape, &values, axis, &primal[axis], &dual[axis]);
        shape[axis] = dual[axis].len();
    }
    // backward from H_0 = f* = -G_n, with f** = -H_n
    values.iter_mut().for_each(|v| *v = -*v);
    for axis in 0..n {
        values = conjugate_axis(&shape, &values, axis, &dual[axis], &primal[axis]);
        shape[axis] = primal[axis].len();
    }
    values.iter_mut().for_each(|v| *v = -*v);
    ScalarGrid::new(geom.clone(), values)
}

/// Extreme finite-difference slopes of `g` along each axis.
pub fn slope_ranges(g: &ScalarGrid) -> Vec<(f64, f64)> {
    let geom = g.geometry();
    let strides = geom.strides();
    let vals = g.values();
    (0..geom.ndim())
        .map(|axis| {
            let h = geom.spacing()[axis];
            let s = strides[axis];
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for flat in 0..vals.len() {
                let k = (flat / s) % geom.shape()[axis];
                if k + 1 < geom.shape()[axis] {
                    let d = (vals[flat + s] - vals[flat]) / h;
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            if lo > hi {
                (0.0, 0.0)
            } else {
                (lo, hi)
            }
        })
        .collect()
}

/// `out(ξ) = −sup_x {xξ − v(x)}` along `axis`, via the lower hull of each
/// line and the closed-form conjugate of the hull.
fn conjugate_axis(
    shape: &[usize],
    values: &[f64],
    axis: usize,
    from: &[f64],
    to: &[f64],
) -> Vec<f64> {
    exec::map_lines(shape, values, axis, to.len(), |line, out| {
        let hull = convex_minorant(from, line).expect("hull of finite samples is convex");
        let conj = hull.conjugate();
        let mut evaluated = vec![None; to.len()];
        conj.eval_sorted(to, &mut evaluated);
        for (o, v) in out.iter_mut().zip(evaluated) {
            // bounded primal domain: the conjugate is finite everywhere
            *o = -v.expect("conjugate of a bounded function is finite");
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_1d() {
        let g = ScalarGrid::from_shape_vec(&[5], vec![1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let env = biconjugate_envelope(&g, 1e-3).unwrap();
        let want = [1.0, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in env.values().iter().zip(want) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn affine_input_reproduced() {
        let g = ScalarGrid::from_fn(crate::grid::Geometry::unit(&[4, 5]).unwrap(), |x| {
            0.5 * x[0] - 0.25 * x[1] + 2.0
        })
        .unwrap();
        let env = biconjugate_envelope(&g, 0.25).unwrap();
        assert!(env.max_abs_diff(&g).unwrap() < 1e-12);
    }

    #[test]
    fn narrow_dual_range_is_rejected() {
        let g = ScalarGrid::from_shape_vec(&[3], vec![0.0, 2.0, 6.0]).unwrap();
        let opts = BiconjugateOptions {
            dual_spacing: 0.1,
            dual_bounds: Some(vec![(-1.0, 1.0)]),
        };
        match biconjugate_envelope_with(&g, &opts) {
            Err(Error::DualCoverage { axis, .. }) => assert_eq!(axis, 0),
            other => panic!("expected dual coverage error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_dual_grid_is_rejected() {
        let g = ScalarGrid::from_fn(crate::grid::Geometry::unit(&[40, 40]).unwrap(), |x| {
            50.0 * (x[0] * x[0] + x[1] * x[1])
        })
        .unwrap();
        assert!(matches!(
            biconjugate_envelope(&g, 1e-4),
            Err(Error::InvalidParameter {
                name: "dual_spacing",
                ..
            })
        ));
    }
}
