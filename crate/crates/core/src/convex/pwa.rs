//! Convex piecewise-affine functions of one variable and their closed-form
//! Legendre-Fenchel conjugate.

use crate::error::{Error, Result};

/// A convex piecewise-affine function on the real line.
///
/// Between consecutive breakpoints the function interpolates `values`
/// linearly. Left of the first breakpoint it continues with `left_slope`, or
/// is `+∞` when that is `None`; likewise to the right.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffine1D {
    xs: Vec<f64>,
    gs: Vec<f64>,
    left_slope: Option<f64>,
    right_slope: Option<f64>,
}

impl PiecewiseAffine1D {
    pub fn new(
        xs: Vec<f64>,
        gs: Vec<f64>,
        left_slope: Option<f64>,
        right_slope: Option<f64>,
    ) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if xs.len() != gs.len() {
            return Err(Error::SampleCount {
                cells: xs.len(),
                values: gs.len(),
            });
        }
        if let Some((index, &value)) = xs
            .iter()
            .chain(&gs)
            .chain(left_slope.iter())
            .chain(right_slope.iter())
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite { index, value });
        }
        if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGeometry(format!(
                "breakpoints must be strictly increasing (index {})",
                i + 1
            )));
        }
        let pa = Self {
            xs,
            gs,
            left_slope,
            right_slope,
        };
        pa.check_convex()?;
        Ok(pa)
    }

    /// Restriction of a convex polyline to `[x_1, x_N]`, `+∞` outside.
    pub fn bounded(xs: Vec<f64>, gs: Vec<f64>) -> Result<Self> {
        Self::new(xs, gs, None, None)
    }

    /// Breakpoint-and-slope form: breakpoints `x_i`, values `g_i`, and
    /// slopes `c_i` of the piece to the right of `x_i`; `+∞` left of `x_1`.
    pub fn from_slopes(xs: Vec<f64>, gs: Vec<f64>, cs: Vec<f64>) -> Result<Self> {
        if cs.len() != xs.len() {
            return Err(Error::SampleCount {
                cells: xs.len(),
                values: cs.len(),
            });
        }
        for i in 0..xs.len().saturating_sub(1) {
            let implied = gs[i] + cs[i] * (xs[i + 1] - xs[i]);
            if (implied - gs[i + 1]).abs() > 1e-9 * (1.0 + gs[i + 1].abs()) {
                return Err(Error::InvalidGeometry(format!(
                    "slope {} does not join breakpoints {} and {}",
                    i,
                    i,
                    i + 1
                )));
            }
        }
        let right = cs.last().copied();
        Self::new(xs, gs, None, right)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.gs
    }

    pub fn left_slope(&self) -> Option<f64> {
        self.left_slope
    }

    pub fn right_slope(&self) -> Option<f64> {
        self.right_slope
    }

    /// All finite slopes from left to right, including the unbounded ends.
    pub fn slopes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.xs.len() + 1);
        out.extend(self.left_slope);
        out.extend(
            self.xs
                .windows(2)
                .zip(self.gs.windows(2))
                .map(|(x, g)| (g[1] - g[0]) / (x[1] - x[0])),
        );
        out.extend(self.right_slope);
        out
    }

    fn check_convex(&self) -> Result<()> {
        let slopes = self.slopes();
        // an affine function has a single breakpoint with equal end slopes
        if self.xs.len() == 1 {
            if let (Some(l), Some(r)) = (self.left_slope, self.right_slope) {
                return if l <= r {
                    Ok(())
                } else {
                    Err(Error::NotConvex { index: 1 })
                };
            }
            return Ok(());
        }
        match slopes.windows(2).position(|w| w[0] >= w[1]) {
            Some(i) => Err(Error::NotConvex { index: i + 1 }),
            None => Ok(()),
        }
    }

    /// Value at `x`; `None` stands for `+∞`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.xs.len();
        if x < self.xs[0] {
            return self.left_slope.map(|s| self.gs[0] + s * (x - self.xs[0]));
        }
        if x > self.xs[n - 1] {
            return self
                .right_slope
                .map(|s| self.gs[n - 1] + s * (x - self.xs[n - 1]));
        }
        let k = self.xs.partition_point(|&b| b <= x).clamp(1, n) - 1;
        if k + 1 == n {
            return Some(self.gs[k]);
        }
        let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        Some(self.gs[k] + t * (self.gs[k + 1] - self.gs[k]))
    }

    /// Values at ascending abscissae in one linear sweep.
    pub fn eval_sorted(&self, points: &[f64], out: &mut [Option<f64>]) {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]));
        let n = self.xs.len();
        let mut k = 0;
        for (x, o) in points.iter().zip(out.iter_mut()) {
            let x = *x;
            *o = if x < self.xs[0] {
                self.left_slope.map(|s| self.gs[0] + s * (x - self.xs[0]))
            } else if x > self.xs[n - 1] {
                self.right_slope
                    .map(|s| self.gs[n - 1] + s * (x - self.xs[n - 1]))
            } else {
                while k + 2 < n && self.xs[k + 1] <= x {
                    k += 1;
                }
                if n == 1 {
                    Some(self.gs[0])
                } else {
                    let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                    Some(self.gs[k] + t * (self.gs[k + 1] - self.gs[k]))
                }
            };
        }
    }

    /// Legendre-Fenchel conjugate `g*(ξ) = sup_x ξx − g(x)`, in closed form.
    ///
    /// On the slope interval between consecutive kinks the supremum is attained
    /// at the shared breakpoint, so `g*` is affine there with slope equal to that
    /// breakpoint. Bounded ends of the domain become unbounded ends of `g*` and
    /// vice versa.
    pub fn conjugate(&self) -> PiecewiseAffine1D {
        let n = self.xs.len();
        let interior: Vec<f64> = self
            .xs
            .windows(2)
            .zip(self.gs.windows(2))
            .map(|(x, g)| (g[1] - g[0]) / (x[1] - x[0]))
            .collect();

        let mut xi = Vec::with_capacity(n + 1);
        let mut vals = Vec::with_capacity(n + 1);
        let mut push = |s: f64, v: f64| {
            if xi.last().is_some_and(|&last: &f64| last >= s) {
                return;
            }
            xi.push(s);
            vals.push(v);
        };
        if let Some(l) = self.left_slope {
            push(l, self.xs[0] * l - self.gs[0]);
        }
        for (i, &s) in interior.iter().enumerate() {
            push(s, self.xs[i] * s - self.gs[i]);
        }
        if let Some(r) = self.right_slope {
            push(r, self.xs[n - 1] * r - self.gs[n - 1]);
        }

        let left = match self.left_slope {
            Some(_) => None,
            None => Some(self.xs[0]),
        };
        let right = match self.right_slope {
            Some(_) => None,
            None => Some(self.xs[n - 1]),
        };
        if xi.is_empty() {
            // a single point conjugates to an affine function
            return PiecewiseAffine1D {
                xs: vec![0.0],
                gs: vec![-self.gs[0]],
                left_slope: left,
                right_slope: right,
            };
        }
        PiecewiseAffine1D {
            xs: xi,
            gs: vals,
            left_slope: left,
            right_slope: right,
        }
    }
}

/// Closed-form conjugate of a convex piecewise-affine function.
pub fn lf_transform_pa(g: &PiecewiseAffine1D) -> PiecewiseAffine1D {
    g.conjugate()
}

/// Lower convex hull of the points `(xs[i], ys[i])` with `xs` strictly
/// increasing, by the monotone chain. Returns the indices of the hull
/// vertices; collinear interior points are dropped.
pub fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b unless the slope strictly increases there; slopes are
            // compared exactly as the convexity check computes them
            let left = (ys[b] - ys[a]) / (xs[b] - xs[a]);
            let right = (ys[i] - ys[b]) / (xs[i] - xs[b]);
            if left >= right {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// The convex envelope of sampled values, as a bounded piecewise-affine
/// function (`+∞` outside `[xs[0], xs[N-1]]`).
pub fn convex_minorant(xs: &[f64], ys: &[f64]) -> Result<PiecewiseAffine1D> {
    let hull = lower_hull(xs, ys);
    let hx = hull.iter().map(|&i| xs[i]).collect();
    let hy = hull.iter().map(|&i| ys[i]).collect();
    PiecewiseAffine1D::bounded(hx, hy)
}
