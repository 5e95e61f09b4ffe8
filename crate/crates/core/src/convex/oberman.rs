//! Iterative convex envelope on a grid stencil.
//!
//! Each sweep replaces `u(x)` by the minimum of `f(x)` and the convex
//! combinations of the previous iterate along every stencil line through
//! `x`. Sweeps are Jacobi-style, so the result does not depend on the cell
//! visiting order.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::exec;
use crate::grid::ScalarGrid;
use crate::moreau::unravel3;

/// Directions used by the iterative scheme: all lattice vectors with
/// `|r|_∞ ≤ radius`, reduced to primitive antipodal pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StencilSpec {
    radius: usize,
    ndim: usize,
    directions: Vec<[i32; 3]>,
}

impl StencilSpec {
    pub fn new(ndim: usize, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter {
                name: "stencil radius",
                value: 0.0,
                reason: "must be at least one cell",
            });
        }
        if !(1..=3).contains(&ndim) {
            return Err(Error::InvalidGeometry(format!(
                "unsupported dimension {ndim}"
            )));
        }
        let r = radius as i32;
        let mut directions = Vec::new();
        let range = -r..=r;
        for x in range.clone() {
            for y in if ndim >= 2 { range.clone() } else { 0..=0 } {
                for z in if ndim >= 3 { range.clone() } else { 0..=0 } {
                    let d = [x, y, z];
                    if d == [0, 0, 0] || !is_canonical(&d) || gcd3(&d) != 1 {
                        continue;
                    }
                    directions.push(d);
                }
            }
        }
        Ok(Self {
            radius,
            ndim,
            directions,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    /// One representative per antipodal pair of primitive directions.
    pub fn directions(&self) -> &[[i32; 3]] {
        &self.directions
    }
}

fn is_canonical(d: &[i32; 3]) -> bool {
    // first non-zero component positive
    d.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

fn gcd3(d: &[i32; 3]) -> i32 {
    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    gcd(gcd(d[0], d[1]), d[2])
}

/// Iterative-scheme settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObermanOptions {
    /// Absolute L² tolerance on the change between sweeps; `None` means
    /// `1e-7·‖f‖₂` of the function being convexified.
    pub tol: Option<f64>,
    pub stencil_radius: usize,
    pub max_iters: usize,
}

impl Default for ObermanOptions {
    fn default() -> Self {
        Self {
            tol: None,
            stencil_radius: 1,
            max_iters: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObermanOutcome {
    pub grid: ScalarGrid,
    pub iterations: usize,
    pub converged: bool,
    /// L² change of the last sweep.
    pub last_change: f64,
}

struct Pair {
    plus: [i32; 3],
    minus: [i32; 3],
    w_plus: f64,
    w_minus: f64,
}

/// Convex combinations along each direction `d`: the points `x + a·d` and
/// `x − b·d` weighted so that the combination sits at `x`.
fn pairs(stencil: &StencilSpec) -> Vec<Pair> {
    let mut out = Vec::new();
    for d in stencil.directions() {
        let reach = d
            .iter()
            .map(|c| c.unsigned_abs() as usize)
            .max()
            .unwrap_or(1);
        let steps = stencil.radius() / reach;
        for a in 1..=steps as i32 {
            for b in 1..=steps as i32 {
                let s = (a + b) as f64;
                out.push(Pair {
                    plus: [a * d[0], a * d[1], a * d[2]],
                    minus: [-b * d[0], -b * d[1], -b * d[2]],
                    w_plus: b as f64 / s,
                    w_minus: a as f64 / s,
                });
            }
        }
    }
    out
}

pub fn oberman_convex_envelope(
    g: &ScalarGrid,
    tol: f64,
    stencil: &StencilSpec,
    max_iters: usize,
) -> Result<ObermanOutcome> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be non-negative",
        });
    }
    if stencil.ndim() != g.ndim() {
        return Err(Error::InvalidGeometry(format!(
            "stencil is {}-D but the grid is {}-D",
            stencil.ndim(),
            g.ndim()
        )));
    }
    let geom = g.geometry();
    let shape = geom.shape().to_vec();
    let strides = geom.strides();
    let f = g.values();
    let pairs = pairs(stencil);
    let offset = |d: &[i32; 3]| -> isize {
        (0..shape.len())
            .map(|a| d[a] as isize * strides[a] as isize)
            .sum()
    };
    let flat_pairs: Vec<(isize, isize)> = pairs
        .iter()
        .map(|p| (offset(&p.plus), offset(&p.minus)))
        .collect();
    let inside = |index: &[usize; 3], d: &[i32; 3]| -> bool {
        (0..shape.len()).all(|a| {
            let j = index[a] as i64 + d[a] as i64;
            j >= 0 && j < shape[a] as i64
        })
    };

    // Which pairs stay on the grid never changes between sweeps.
    let fits = |flat: usize| -> Vec<usize> {
        let index = unravel3(flat, &shape);
        (0..pairs.len())
            .filter(|&k| inside(&index, &pairs[k].plus) && inside(&index, &pairs[k].minus))
            .collect()
    };
    let valid: Option<Vec<u64>> = (pairs.len() <= 64).then(|| {
        (0..f.len())
            .map(|flat| fits(flat).into_iter().fold(0u64, |m, k| m | 1 << k))
            .collect()
    });
    let combine = |prev: &[f64], flat: usize, k: usize| {
        let (op, om) = flat_pairs[k];
        pairs[k].w_plus * prev[(flat as isize + op) as usize]
            + pairs[k].w_minus * prev[(flat as isize + om) as usize]
    };

    let mut current = f.to_vec();
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < max_iters {
        let prev = &current;
        let next = exec::map_indexed(prev.len(), |flat| {
            let mut best = f[flat];
            match &valid {
                Some(valid) => {
                    let mut bits = valid[flat];
                    while bits != 0 {
                        let k = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        best = best.min(combine(prev, flat, k));
                    }
                }
                None => {
                    for k in fits(flat) {
                        best = best.min(combine(prev, flat, k));
                    }
                }
            }
            best
        });
        change = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        current = next;
        iterations += 1;
        if change <= tol {
            break;
        }
    }
    Ok(ObermanOutcome {
        grid: ScalarGrid::from_parts(geom.clone(), current),
        iterations,
        converged: change <= tol,
        last_change: change,
    })
}

/// Runs the scheme with [`ObermanOptions`], resolving the default tolerance.
pub fn oberman_with(g: &ScalarGrid, opts: &ObermanOptions) -> Result<ObermanOutcome> {
    let tol = match opts.tol {
        Some(t) => t,
        None => 1e-7 * g.l2_norm(),
    };
    if let Some(t) = opts.tol {
        require_positive("tol", t)?;
    }
    let stencil = StencilSpec::new(g.ndim(), opts.stencil_radius)?;
    oberman_convex_envelope(g, tol, &stencil, opts.max_iters)
}
