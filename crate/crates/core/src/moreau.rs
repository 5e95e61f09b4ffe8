//! Discrete Moreau envelopes with quadratic weight `λ|x−y|²`.
//!
//! The lower envelope `M_λ(f)(x) = min_y f(y) + λ|x−y|²` is separable in the
//! squared Euclidean weight, so the n-D envelope is a sequence of 1-D lower
//! envelopes of parabolas, one pass per axis. The local iterative scheme is
//! kept as an independent route for cross-validation.

use crate::error::{require_positive, Error, Result};
use crate::exec;
use crate::grid::{MaskGrid, ScalarGrid};

/// Lower envelope of the parabolas `p_j(x) = v_j + w·(x − j)²` over integer
/// vertices `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolaEnvelope1D {
    /// Vertices of the parabolas that attain the envelope, ascending.
    pub vertex_indices: Vec<usize>,
    /// Abscissae (in index units) where consecutive envelope parabolas cross.
    pub boundaries: Vec<f64>,
}

impl ParabolaEnvelope1D {
    /// Builds the envelope of `values` with curvature `weight` in index units.
    pub fn build(values: &[f64], weight: f64) -> Self {
        let mut vertices: Vec<usize> = Vec::with_capacity(values.len());
        let mut boundaries: Vec<f64> = Vec::with_capacity(values.len());
        for (q, &vq) in values.iter().enumerate() {
            loop {
                let Some(&p) = vertices.last() else {
                    vertices.push(q);
                    break;
                };
                let s = crossing(p, values[p], q, vq, weight);
                match boundaries.last() {
                    // the last parabola is never strictly below the new one
                    Some(&z) if s <= z => {
                        vertices.pop();
                        boundaries.pop();
                    }
                    _ => {
                        vertices.push(q);
                        boundaries.push(s);
                        break;
                    }
                }
            }
        }
        Self {
            vertex_indices: vertices,
            boundaries,
        }
    }

    /// Envelope values at the integer abscissae `0..out.len()`.
    pub fn evaluate_into(&self, values: &[f64], weight: f64, out: &mut [f64]) {
        let mut k = 0;
        for (i, o) in out.iter_mut().enumerate() {
            let x = i as f64;
            // ties stay with the earlier vertex
            while k < self.boundaries.len() && self.boundaries[k] < x {
                k += 1;
            }
            let j = self.vertex_indices[k];
            let d = i as f64 - j as f64;
            *o = values[j] + weight * d * d;
        }
    }
}

fn crossing(p: usize, vp: f64, q: usize, vq: f64, weight: f64) -> f64 {
    let (p, q) = (p as f64, q as f64);
    ((vq + weight * q * q) - (vp + weight * p * p)) / (2.0 * weight * (q - p))
}

fn envelope_line(values: &[f64], weight: f64, out: &mut [f64]) {
    ParabolaEnvelope1D::build(values, weight).evaluate_into(values, weight, out);
}

/// `out[i] = min_j values[j] + λ·h²·(i−j)²` in linear time.
pub fn lower_envelope_1d(values: &[f64], lambda: f64, spacing: f64) -> Result<Vec<f64>> {
    require_positive("lambda", lambda)?;
    require_positive("spacing", spacing)?;
    if values.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut out = vec![0.0; values.len()];
    envelope_line(values, lambda * spacing * spacing, &mut out);
    Ok(out)
}

/// Lower Moreau envelope `M_λ(g)` on the lattice of `g`.
pub fn lower_moreau(g: &ScalarGrid, lambda: f64) -> Result<ScalarGrid> {
    require_positive("lambda", lambda)?;
    let shape = g.shape().to_vec();
    let mut values = g.values().to_vec();
    for (axis, &h) in g.spacing().iter().enumerate() {
        let weight = lambda * h * h;
        values = exec::map_lines(&shape, &values, axis, shape[axis], |line, out| {
            envelope_line(line, weight, out)
        });
    }
    Ok(ScalarGrid::from_parts(g.geometry().clone(), values))
}

/// Upper Moreau envelope `M^λ(g) = −M_λ(−g)`.
pub fn upper_moreau(g: &ScalarGrid, lambda: f64) -> Result<ScalarGrid> {
    Ok(lower_moreau(&g.neg(), lambda)?.neg())
}

/// Local min-plus relaxation over the `3ⁿ` neighbourhood with weights
/// `λ·|h∘r|²·(2i−1)` at step `i`.
///
/// After `m` steps each cell holds the exact discrete envelope restricted to
/// offsets with `|r|_∞ ≤ m`, so `m` at least the largest axis extent gives
/// `lower_moreau`. Stops early once a step leaves every cell unchanged.
pub fn iterative_moreau(g: &ScalarGrid, lambda: f64, max_iters: usize) -> Result<ScalarGrid> {
    Ok(iterative_moreau_counted(g, lambda, max_iters)?.0)
}

/// As [`iterative_moreau`], also returning the number of steps taken.
pub fn iterative_moreau_counted(
    g: &ScalarGrid,
    lambda: f64,
    max_iters: usize,
) -> Result<(ScalarGrid, usize)> {
    require_positive("lambda", lambda)?;
    if max_iters == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iters",
            value: 0.0,
            reason: "at least one iteration is required",
        });
    }
    let geom = g.geometry();
    let shape = geom.shape().to_vec();
    let strides = geom.strides();
    let stencil = Stencil3::new(geom.spacing(), &strides);

    let mut current = g.values().to_vec();
    let mut steps = 0;
    for i in 1..=max_iters {
        let tau = (2 * i - 1) as f64;
        let prev = &current;
        let next = exec::map_indexed(prev.len(), |flat| {
            let index = unravel3(flat, &shape);
            let mut best = prev[flat];
            for off in &stencil.offsets {
                if let Some(nb) = off.neighbour(flat, &index, &shape) {
                    let candidate = prev[nb] + lambda * off.length2 * tau;
                    if candidate < best {
                        best = candidate;
                    }
                }
            }
            best
        });
        steps = i;
        let unchanged = next == current;
        current = next;
        if unchanged {
            break;
        }
    }
    Ok((ScalarGrid::from_parts(geom.clone(), current), steps))
}

/// Squared Euclidean distance to the marked cells, exact on the lattice.
pub fn squared_distance_transform(mask: &MaskGrid) -> Result<ScalarGrid> {
    mask.ensure_nonempty()?;
    let geom = mask.geometry();
    // larger than any squared distance inside the domain
    let large = geom.diameter().powi(2) + 1.0;
    let indicator = ScalarGrid::from_parts(
        geom.clone(),
        mask.flags()
            .iter()
            .map(|&f| if f { 0.0 } else { large })
            .collect(),
    );
    lower_moreau(&indicator, 1.0)
}

/// One non-zero offset of the `3ⁿ` stencil.
pub(crate) struct Offset {
    pub delta: [i8; 3],
    pub flat: isize,
    /// `Σ (h_a r_a)²`
    pub length2: f64,
}

impl Offset {
    #[inline]
    pub fn neighbour(&self, flat: usize, index: &[usize; 3], shape: &[usize]) -> Option<usize> {
        for (a, &n) in shape.iter().enumerate() {
            let j = index[a] as isize + self.delta[a] as isize;
            if j < 0 || j >= n as isize {
                return None;
            }
        }
        Some((flat as isize + self.flat) as usize)
    }
}

pub(crate) struct Stencil3 {
    pub offsets: Vec<Offset>,
}

impl Stencil3 {
    pub fn new(spacing: &[f64], strides: &[usize]) -> Self {
        let n = spacing.len();
        let mut offsets = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let mut delta = [0i8; 3];
            let mut c = code;
            for d in delta.iter_mut().take(n) {
                *d = (c % 3) as i8 - 1;
                c /= 3;
            }
            if delta.iter().all(|&d| d == 0) {
                continue;
            }
            let flat = (0..n)
                .map(|a| delta[a] as isize * strides[a] as isize)
                .sum();
            let length2 = (0..n).map(|a| (delta[a] as f64 * spacing[a]).powi(2)).sum();
            offsets.push(Offset {
                delta,
                flat,
                length2,
            });
        }
        Self { offsets }
    }
}

#[inline]
pub(crate) fn unravel3(mut flat: usize, shape: &[usize]) -> [usize; 3] {
    let mut index = [0; 3];
    for a in (0..shape.len()).rev() {
        index[a] = flat % shape[a];
        flat /= shape[a];
    }
    index
}
