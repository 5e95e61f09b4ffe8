//! Regular-grid value types shared by every transform.
//!
//! Storage is row-major with the last axis contiguous. Every grid carries a
//! per-axis spacing and a world-space origin so that padded or cropped grids
//! keep their coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of axes a grid may have.
pub const MAX_DIMS: usize = 3;

/// Lattice shape plus its embedding in world coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl Geometry {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > MAX_DIMS {
            return Err(Error::InvalidGeometry(format!(
                "expected 1 to {MAX_DIMS} axes, got {}",
                shape.len()
            )));
        }
        if spacing.len() != shape.len() || origin.len() != shape.len() {
            return Err(Error::InvalidGeometry(
                "shape, spacing and origin must have one entry per axis".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidGeometry(format!(
                "every axis needs at least one cell, got {shape:?}"
            )));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(Error::InvalidGeometry(format!(
                "spacing must be finite and positive, got {spacing:?}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "origin must be finite, got {origin:?}"
            )));
        }
        Ok(Self {
            shape,
            spacing,
            origin,
        })
    }

    /// Unit spacing, zero origin.
    pub fn unit(shape: &[usize]) -> Result<Self> {
        Self::new(
            shape.to_vec(),
            vec![1.0; shape.len()],
            vec![0.0; shape.len()],
        )
    }

    /// Uniform spacing `h` with the lattice centred on the world origin.
    pub fn centered(shape: &[usize], h: f64) -> Result<Self> {
        let origin = shape.iter().map(|&n| -0.5 * (n as f64 - 1.0) * h).collect();
        Self::new(shape.to_vec(), vec![h; shape.len()], origin)
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.ndim()];
        for a in (0..self.ndim().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.ndim());
        index.iter().zip(self.strides()).map(|(&i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            index[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        index
    }

    /// World coordinate of the cell at `flat`.
    pub fn coord(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .into_iter()
            .enumerate()
            .map(|(a, i)| self.origin[a] + i as f64 * self.spacing[a])
            .collect()
    }

    /// World coordinate of the lattice centre.
    pub fn center(&self) -> Vec<f64> {
        (0..self.ndim())
            .map(|a| self.origin[a] + 0.5 * (self.shape[a] as f64 - 1.0) * self.spacing[a])
            .collect()
    }

    /// Euclidean length of the lattice bounding box.
    pub fn diameter(&self) -> f64 {
        (0..self.ndim())
            .map(|a| ((self.shape[a] - 1) as f64 * self.spacing[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Length of a cell diagonal, `h·√n` for uniform spacing.
    pub fn cell_diagonal(&self) -> f64 {
        self.spacing.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    pub fn same_lattice(&self, other: &Geometry) -> bool {
        self.shape == other.shape
    }

    fn check_same(&self, other: &Geometry) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleShapes {
                left: self.shape.clone(),
                right: other.shape.clone(),
            })
        }
    }

    fn padded(&self, width: usize) -> Self {
        Self {
            shape: self.shape.iter().map(|n| n + 2 * width).collect(),
            spacing: self.spacing.clone(),
            origin: self
                .origin
                .iter()
                .zip(&self.spacing)
                .map(|(o, h)| o - width as f64 * h)
                .collect(),
        }
    }

    fn cropped(&self, width: usize) -> Self {
        Self {
            shape: self.shape.iter().map(|n| n - 2 * width).collect(),
            spacing: self.spacing.clone(),
            origin: self
                .origin
                .iter()
                .zip(&self.spacing)
                .map(|(o, h)| o + width as f64 * h)
                .collect(),
        }
    }

    /// Index map for a mirror padding of `width` cells: for each padded flat
    /// index, the flat index of the source cell it copies.
    fn mirror_sources(&self, width: usize) -> Result<(Self, Vec<usize>)> {
        if self.shape.iter().any(|&n| width >= n) {
            return Err(Error::InvalidPadding {
                width,
                shape: self.shape.clone(),
            });
        }
        let padded = self.padded(width);
        let sources = (0..padded.len())
            .map(|flat| {
                let index: Vec<usize> = padded
                    .unravel(flat)
                    .into_iter()
                    .zip(&self.shape)
                    .map(|(i, &n)| reflect(i as isize - width as isize, n))
                    .collect();
                self.flat_index(&index)
            })
            .collect();
        Ok((padded, sources))
    }

    fn crop_sources(&self, width: usize) -> Result<(Self, Vec<usize>)> {
        if self.shape.iter().any(|&n| 2 * width >= n) {
            return Err(Error::InvalidCrop {
                width,
                shape: self.shape.clone(),
            });
        }
        let cropped = self.cropped(width);
        let sources = (0..cropped.len())
            .map(|flat| {
                let index: Vec<usize> = cropped.unravel(flat).iter().map(|i| i + width).collect();
                self.flat_index(&index)
            })
            .collect();
        Ok((cropped, sources))
    }
}

/// Reflects `i` into `0..n` about the end cells, which are not repeated.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

/// Finite real values on a regular lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    geometry: Geometry,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(geometry: Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::ShapeMismatch {
                shape: geometry.shape.clone(),
                expected: geometry.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { geometry, values })
    }

    /// Grid on the unit lattice (spacing 1, origin 0).
    pub fn from_shape_vec(shape: &[usize], values: Vec<f64>) -> Result<Self> {
        Self::new(Geometry::unit(shape)?, values)
    }

    pub fn constant(geometry: Geometry, value: f64) -> Result<Self> {
        let values = vec![value; geometry.len()];
        Self::new(geometry, values)
    }

    /// Samples `f` at every cell's world coordinate.
    pub fn from_fn(geometry: Geometry, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..geometry.len())
            .map(|flat| f(&geometry.coord(flat)))
            .collect();
        Self::new(geometry, values)
    }

    /// Internal constructor for values produced by finite arithmetic on a
    /// valid grid.
    pub(crate) fn from_parts(geometry: Geometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { geometry, values }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn shape(&self) -> &[usize] {
        self.geometry.shape()
    }

    pub fn spacing(&self) -> &[f64] {
        self.geometry.spacing()
    }

    pub fn ndim(&self) -> usize {
        self.geometry.ndim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.geometry.flat_index(index)]
    }

    /// Applies `f` to every value. Panics if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "map produced a non-finite value"
        );
        Self::from_parts(self.geometry.clone(), values)
    }

    pub fn zip_map(&self, other: &ScalarGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.geometry.check_same(&other.geometry)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.geometry.clone(), values)
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn sub(&self, other: &ScalarGrid) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ScalarGrid) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sup-norm of the difference with `other`.
    pub fn max_abs_diff(&self, other: &ScalarGrid) -> Result<f64> {
        self.geometry.check_same(&other.geometry)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn pad_mirror(&self, width: usize) -> Result<Self> {
        pad_mirror(self, width)
    }

    pub fn crop(&self, width: usize) -> Result<Self> {
        crop(self, width)
    }
}

/// Grows every axis by `2·width` cells, filling new cells with mirror
/// reflections across the boundary cell (the boundary cell is not repeated).
pub fn pad_mirror(grid: &ScalarGrid, width: usize) -> Result<ScalarGrid> {
    if width == 0 {
        return Ok(grid.clone());
    }
    let (geometry, sources) = grid.geometry.mirror_sources(width)?;
    let values = sources.into_iter().map(|s| grid.values[s]).collect();
    Ok(ScalarGrid::from_parts(geometry, values))
}

/// Removes `width` cells from both ends of every axis.
pub fn crop(grid: &ScalarGrid, width: usize) -> Result<ScalarGrid> {
    if width == 0 {
        return Ok(grid.clone());
    }
    let (geometry, sources) = grid.geometry.crop_sources(width)?;
    let values = sources.into_iter().map(|s| grid.values[s]).collect();
    Ok(ScalarGrid::from_parts(geometry, values))
}

/// Boolean membership grid describing a set on the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskGrid {
    geometry: Geometry,
    flags: Vec<bool>,
}

impl MaskGrid {
    pub fn new(geometry: Geometry, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != geometry.len() {
            return Err(Error::ShapeMismatch {
                shape: geometry.shape.clone(),
                expected: geometry.len(),
                got: flags.len(),
            });
        }
        Ok(Self { geometry, flags })
    }

    pub fn from_fn(geometry: Geometry, f: impl Fn(&[f64]) -> bool) -> Self {
        let flags = (0..geometry.len()).map(|i| f(&geometry.coord(i))).collect();
        Self { geometry, flags }
    }

    /// Mask of the cells with `f(index)` true, addressed by lattice index.
    pub fn from_index_fn(geometry: Geometry, f: impl Fn(&[usize]) -> bool) -> Self {
        let flags = (0..geometry.len())
            .map(|i| f(&geometry.unravel(i)))
            .collect();
        Self { geometry, flags }
    }

    pub fn empty(geometry: Geometry) -> Self {
        let flags = vec![false; geometry.len()];
        Self { geometry, flags }
    }

    /// Cells where `grid` is nonzero.
    pub fn nonzero(grid: &ScalarGrid) -> Self {
        Self {
            geometry: grid.geometry.clone(),
            flags: grid.values.iter().map(|&v| v != 0.0).collect(),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn shape(&self) -> &[usize] {
        self.geometry.shape()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> bool {
        self.flags[self.geometry.flat_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: bool) {
        let flat = self.geometry.flat_index(index);
        self.flags[flat] = value;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// True when no cell is marked.
    pub fn is_empty_set(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty_set() {
            Err(Error::EmptySet)
        } else {
            Ok(())
        }
    }

    /// Flat indices of the marked cells, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    pub fn complement(&self) -> Self {
        Self {
            geometry: self.geometry.clone(),
            flags: self.flags.iter().map(|f| !f).collect(),
        }
    }

    pub fn union(&self, other: &MaskGrid) -> Result<Self> {
        self.geometry.check_same(&other.geometry)?;
        Ok(Self {
            geometry: self.geometry.clone(),
            flags: self
                .flags
                .iter()
                .zip(&other.flags)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    /// `amplitude` on the set, zero elsewhere.
    pub fn to_grid(&self, amplitude: f64) -> ScalarGrid {
        ScalarGrid::from_parts(
            self.geometry.clone(),
            self.flags
                .iter()
                .map(|&f| if f { amplitude } else { 0.0 })
                .collect(),
        )
    }

    pub fn pad_mirror(&self, width: usize) -> Result<Self> {
        if width == 0 {
            return Ok(self.clone());
        }
        let (geometry, sources) = self.geometry.mirror_sources(width)?;
        let flags = sources.into_iter().map(|s| self.flags[s]).collect();
        Ok(Self { geometry, flags })
    }

    pub fn crop(&self, width: usize) -> Result<Self> {
        if width == 0 {
            return Ok(self.clone());
        }
        let (geometry, sources) = self.geometry.crop_sources(width)?;
        let flags = sources.into_iter().map(|s| self.flags[s]).collect();
        Ok(Self { geometry, flags })
    }
}

/// A function known only on the marked cells of a mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleField {
    mask: MaskGrid,
    values: Vec<f64>,
}

impl SampleField {
    /// `values` lists the sample for each marked cell in row-major order.
    pub fn new(mask: MaskGrid, values: Vec<f64>) -> Result<Self> {
        let cells = mask.count();
        if cells != values.len() {
            return Err(Error::SampleCount {
                cells,
                values: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { mask, values })
    }

    /// Restricts `grid` to the cells of `mask`.
    pub fn from_grid(grid: &ScalarGrid, mask: &MaskGrid) -> Result<Self> {
        grid.geometry.check_same(&mask.geometry)?;
        let values = mask.indices().map(|i| grid.values[i]).collect();
        Ok(Self {
            mask: mask.clone(),
            values,
        })
    }

    pub fn mask(&self) -> &MaskGrid {
        &self.mask
    }

    pub fn sample_values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sample values scattered onto the lattice with `fill` off the mask.
    pub fn scatter(&self, fill: f64) -> ScalarGrid {
        let mut values = vec![fill; self.mask.len()];
        for (i, v) in self.mask.indices().zip(&self.values) {
            values[i] = *v;
        }
        ScalarGrid::from_parts(self.mask.geometry.clone(), values)
    }
}
