//! Singularity extraction built on the compensated convex transforms.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::grid::{MaskGrid, ScalarGrid};
use crate::moreau::{squared_distance_transform, unravel3, Stencil3};
use crate::transform::{lower_transform, upper_transform, TransformParams};

/// Relative level used to extract the support of a map.
pub const DEFAULT_SUPPORT_LEVEL: f64 = 1e-8;

/// Fraction of the global maximum an intersection marker must exceed.
pub const DEFAULT_MARKER_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Ridge,
    Valley,
    Edge,
    StableRidge,
    StableValley,
    StableEdge,
    D2,
    InteriorCorner,
    Intersection,
    Mma,
}

/// A feature map together with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub grid: ScalarGrid,
    pub kind: FeatureKind,
    pub params: TransformParams,
}

impl FeatureMap {
    fn new(grid: ScalarGrid, kind: FeatureKind, params: &TransformParams) -> Self {
        Self {
            grid,
            kind,
            params: params.clone(),
        }
    }

    pub fn max(&self) -> f64 {
        self.grid.max()
    }

    /// Cells where the map is at least `alpha`.
    pub fn suplevel(&self, alpha: f64) -> MaskGrid {
        suplevel_grid(&self.grid, alpha)
    }

    /// Cells above `level · max`, the numerical support for level 1e-8.
    pub fn support(&self, level: f64) -> MaskGrid {
        support(&self.grid, level)
    }
}

/// `R_λ(g) = g − C^l_λ(g)`.
pub fn ridge(g: &ScalarGrid, params: &TransformParams) -> Result<FeatureMap> {
    let low = lower_transform(g, params)?;
    Ok(FeatureMap::new(g.sub(&low)?, FeatureKind::Ridge, params))
}

/// `V_λ(g) = g − C^u_λ(g)`, non-positive.
pub fn valley(g: &ScalarGrid, params: &TransformParams) -> Result<FeatureMap> {
    let up = upper_transform(g, params)?;
    Ok(FeatureMap::new(g.sub(&up)?, FeatureKind::Valley, params))
}

/// `E_λ(g) = C^u_λ(g) − C^l_λ(g)`.
pub fn edge(g: &ScalarGrid, params: &TransformParams) -> Result<FeatureMap> {
    let up = upper_transform(g, params)?;
    let low = lower_transform(g, params)?;
    Ok(FeatureMap::new(up.sub(&low)?, FeatureKind::Edge, params))
}

fn unit_char(mask: &MaskGrid) -> Result<ScalarGrid> {
    mask.ensure_nonempty()?;
    Ok(mask.to_grid(1.0))
}

/// `SR_{λ,τ} = C^u_λ(χ) − C^l_τ(C^u_λ(χ))` with `λ = params.lambda`,
/// `τ = params.tau`.
pub fn stable_ridge(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    let up = upper_transform(&unit_char(mask)?, params)?;
    let low = lower_transform(&up, &params.with_lambda(params.tau))?;
    Ok(FeatureMap::new(
        up.sub(&low)?,
        FeatureKind::StableRidge,
        params,
    ))
}

fn require_lambda_above_tau(params: &TransformParams) -> Result<()> {
    require_positive("lambda", params.lambda)?;
    require_positive("tau", params.tau)?;
    if params.lambda <= params.tau {
        return Err(Error::DegenerateParameters {
            lambda: params.lambda,
            tau: params.tau,
        });
    }
    Ok(())
}

/// `SV = V_τ(C^u_λ(χ))`; needs `λ > τ`.
pub fn stable_valley(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    require_lambda_above_tau(params)?;
    let up = upper_transform(&unit_char(mask)?, params)?;
    let outer = upper_transform(&up, &params.with_lambda(params.tau))?;
    Ok(FeatureMap::new(
        up.sub(&outer)?,
        FeatureKind::StableValley,
        params,
    ))
}

/// `SE = E_τ(C^u_λ(χ))`; needs `λ > τ`.
pub fn stable_edge(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    require_lambda_above_tau(params)?;
    let up = upper_transform(&unit_char(mask)?, params)?;
    let at_tau = params.with_lambda(params.tau);
    let outer = upper_transform(&up, &at_tau)?;
    let inner = lower_transform(&up, &at_tau)?;
    Ok(FeatureMap::new(
        outer.sub(&inner)?,
        FeatureKind::StableEdge,
        params,
    ))
}

/// Stable-ridge height at a regular boundary point,
/// `(√(λ+τ) − √τ)² / λ`.
pub fn mu1(lambda: f64, tau: f64) -> f64 {
    ((lambda + tau).sqrt() - tau.sqrt()).powi(2) / lambda
}

/// Stable-ridge height at the tip of an exterior corner whose sides have
/// slope `±a`.
pub fn mu2(a: f64, lambda: f64, tau: f64) -> f64 {
    let a2 = a * a;
    if a2 <= ((lambda + tau) / tau).sqrt() {
        lambda / (lambda + (1.0 + a2) * tau)
    } else {
        (1.0 + a2) / a2 * mu1(lambda, tau)
    }
}

/// `D²_λ(x; K) = (max{0, 1 − √λ·dist(x, K)})²`.
pub fn d2_lambda(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    Ok(FeatureMap::new(
        d2_grid(mask, params.lambda)?,
        FeatureKind::D2,
        params,
    ))
}

fn d2_grid(mask: &MaskGrid, lambda: f64) -> Result<ScalarGrid> {
    require_positive("lambda", lambda)?;
    let dist2 = squared_distance_transform(mask)?;
    let s = lambda.sqrt();
    Ok(dist2.map(|d2| (1.0 - s * d2.sqrt()).max(0.0).powi(2)))
}

/// `C^u_λ(D²_λ) − D²_λ`, positive near interior corners and intersections.
pub fn interior_corner_map(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    let d2 = d2_grid(mask, params.lambda)?;
    let up = upper_transform(&d2, params)?;
    Ok(FeatureMap::new(
        up.sub(&d2)?,
        FeatureKind::InteriorCorner,
        params,
    ))
}

/// `|C^u_{4λ}(χ) − 2·SR_{λ,λ}(χ)|`.
pub fn intersection_transform(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    let chi = unit_char(mask)?;
    let up = upper_transform(&chi, params)?;
    let opened = lower_transform(&up, params)?;
    let up4 = upper_transform(&chi, &params.with_lambda(4.0 * params.lambda))?;
    let values = up4
        .values()
        .iter()
        .zip(up.values().iter().zip(opened.values()))
        .map(|(u4, (u, o))| (u4 - 2.0 * (u - o)).abs())
        .collect();
    let grid = ScalarGrid::new(chi.geometry().clone(), values)?;
    Ok(FeatureMap::new(grid, FeatureKind::Intersection, params))
}

/// Multiscale medial axis map `(1 + λ)(dist² − C^l_λ(dist²))`.
pub fn mma(mask: &MaskGrid, params: &TransformParams) -> Result<FeatureMap> {
    let dist2 = squared_distance_transform(mask)?;
    let low = lower_transform(&dist2, params)?;
    let scale = 1.0 + params.lambda;
    let grid = dist2.zip_map(&low, |d, l| scale * (d - l))?;
    Ok(FeatureMap::new(grid, FeatureKind::Mma, params))
}

/// `{x : g(x) ≥ alpha}`.
pub fn suplevel(map: &FeatureMap, alpha: f64) -> MaskGrid {
    map.suplevel(alpha)
}

pub fn suplevel_grid(g: &ScalarGrid, alpha: f64) -> MaskGrid {
    MaskGrid::new(
        g.geometry().clone(),
        g.values().iter().map(|&v| v >= alpha).collect(),
    )
    .expect("mask built on the grid's own geometry")
}

/// Cells strictly above `level · max(g)`; empty when `g` has no positive
/// values.
pub fn support(g: &ScalarGrid, level: f64) -> MaskGrid {
    let max = g.max();
    if max <= 0.0 {
        return MaskGrid::empty(g.geometry().clone());
    }
    let alpha = level * max;
    MaskGrid::new(
        g.geometry().clone(),
        g.values().iter().map(|&v| v > alpha).collect(),
    )
    .expect("mask built on the grid's own geometry")
}

/// Lattice indices of cells that attain the maximum over their `3ⁿ`
/// neighbourhood and exceed `ratio · max`.
pub fn intersection_markers(map: &FeatureMap, ratio: f64) -> Vec<Vec<usize>> {
    local_maxima(&map.grid, ratio)
}

pub fn local_maxima(g: &ScalarGrid, ratio: f64) -> Vec<Vec<usize>> {
    let geom = g.geometry();
    let shape = geom.shape();
    let stencil = Stencil3::new(geom.spacing(), &geom.strides());
    let values = g.values();
    let max = g.max();
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = ratio * max;
    (0..values.len())
        .filter(|&flat| {
            let v = values[flat];
            if v <= floor {
                return false;
            }
            let index = unravel3(flat, shape);
            stencil
                .offsets
                .iter()
                .filter_map(|off| off.neighbour(flat, &index, shape))
                .all(|nb| values[nb] <= v)
        })
        .map(|flat| geom.unravel(flat))
        .collect()
}
