//! Brute-force oracles and random inputs shared by the integration tests.

#![allow(dead_code)]

use cct_core::{Geometry, MaskGrid, ScalarGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `min_y g(y) + λ|x − y|²` by direct search over every pair of cells.
pub fn brute_lower_moreau(g: &ScalarGrid, lambda: f64) -> ScalarGrid {
    let geom = g.geometry();
    let coords: Vec<Vec<f64>> = (0..g.len()).map(|i| geom.coord(i)).collect();
    let values = (0..g.len())
        .map(|i| {
            (0..g.len())
                .map(|j| g.values()[j] + lambda * dist2(&coords[i], &coords[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    ScalarGrid::new(geom.clone(), values).unwrap()
}

/// `max_y g(y) − λ|x − y|²` by direct search.
pub fn brute_upper_moreau(g: &ScalarGrid, lambda: f64) -> ScalarGrid {
    brute_lower_moreau(&g.neg(), lambda).neg()
}

/// Squared distance to the nearest marked cell by direct search.
pub fn brute_sq_distance(mask: &MaskGrid) -> ScalarGrid {
    let geom = mask.geometry();
    let sites: Vec<Vec<f64>> = mask.indices().map(|i| geom.coord(i)).collect();
    let values = (0..mask.len())
        .map(|i| {
            let x = geom.coord(i);
            sites
                .iter()
                .map(|s| dist2(&x, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    ScalarGrid::new(geom.clone(), values).unwrap()
}

/// Directed-distance Hausdorff by direct search over marked cells.
pub fn brute_hausdorff(e: &MaskGrid, f: &MaskGrid) -> f64 {
    let geom = e.geometry();
    let pe: Vec<Vec<f64>> = e.indices().map(|i| geom.coord(i)).collect();
    let pf: Vec<Vec<f64>> = f.indices().map(|i| geom.coord(i)).collect();
    let directed = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .map(|x| b.iter().map(|y| dist2(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(&pe, &pf).max(directed(&pf, &pe)).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Random shape with at most `max_cells` cells in 1 to 3 dimensions,
/// random spacing per axis.
pub fn random_geometry(rng: &mut ChaCha8Rng, ndim: usize, max_extent: usize) -> Geometry {
    let shape: Vec<usize> = (0..ndim).map(|_| rng.gen_range(2..=max_extent)).collect();
    let spacing: Vec<f64> = (0..ndim).map(|_| rng.gen_range(0.2..1.5)).collect();
    let origin: Vec<f64> = (0..ndim).map(|_| rng.gen_range(-5.0..5.0)).collect();
    Geometry::new(shape, spacing, origin).unwrap()
}

pub fn random_grid(rng: &mut ChaCha8Rng, geom: Geometry, amplitude: f64) -> ScalarGrid {
    let values = (0..geom.len())
        .map(|_| rng.gen_range(-amplitude..amplitude))
        .collect();
    ScalarGrid::new(geom, values).unwrap()
}

/// Non-empty random mask with roughly `density` of the cells marked.
pub fn random_mask(rng: &mut ChaCha8Rng, geom: Geometry, density: f64) -> MaskGrid {
    let mut flags: Vec<bool> = (0..geom.len()).map(|_| rng.gen_bool(density)).collect();
    if !flags.iter().any(|&b| b) {
        let k = rng.gen_range(0..flags.len());
        flags[k] = true;
    }
    MaskGrid::new(geom, flags).unwrap()
}

/// Sum of a few random plane waves, a cheap band-limited field.
pub fn smooth_grid(
    rng: &mut ChaCha8Rng,
    geom: Geometry,
    waves: usize,
    max_freq: f64,
    amplitude: f64,
) -> ScalarGrid {
    let terms: Vec<([f64; 3], f64, f64)> = (0..waves)
        .map(|_| {
            let k = [
                rng.gen_range(-max_freq..max_freq),
                rng.gen_range(-max_freq..max_freq),
                rng.gen_range(-max_freq..max_freq),
            ];
            (
                k,
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-amplitude..amplitude),
            )
        })
        .collect();
    ScalarGrid::from_fn(geom, |x| {
        terms
            .iter()
            .map(|(k, phase, a)| {
                a * (x.iter().zip(k).map(|(xi, ki)| xi * ki).sum::<f64>() + phase).cos()
            })
            .sum()
    })
    .unwrap()
}

/// Largest relative deviation `|a − b| / max(|b|, 1)`.
pub fn max_rel_diff(a: &ScalarGrid, b: &ScalarGrid) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}
