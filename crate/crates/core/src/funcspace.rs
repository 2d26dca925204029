//! Discretized `L²([a, b])`: uniform grids, sampled curves and trapezoidal
//! inner products.
//!
//! Every curve is stored as its raw samples on a uniform grid that includes
//! both endpoints. Integrals are trapezoidal sums over those samples; no
//! basis representation or smoothing is involved.

use crate::error::{FplmError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Default number of sample points on `[0, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Uniform grid over `[start, end]` with `num_points` samples including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    start: f64,
    end: f64,
    num_points: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, num_points: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || end <= start {
            return Err(FplmError::Domain(format!(
                "grid endpoints must be finite with end > start, got [{start}, {end}]"
            )));
        }
        if num_points < 2 {
            return Err(FplmError::Domain(format!(
                "grid needs at least 2 points, got {num_points}"
            )));
        }
        let dx = (end - start) / (num_points - 1) as f64;
        if !dx.is_finite() || start + dx <= start {
            return Err(FplmError::Domain(format!(
                "grid spacing of [{start}, {end}] with {num_points} points is not representable"
            )));
        }
        Ok(Self {
            start,
            end,
            num_points,
        })
    }

    /// `[0, 1]` with `num_points` samples.
    pub fn unit(num_points: usize) -> Result<Self> {
        Self::new(0.0, 1.0, num_points)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.num_points - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.num_points {
            self.end
        } else {
            self.start + k as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|k| self.point(k)).collect()
    }

    /// Trapezoidal quadrature weights: half a cell at each endpoint.
    pub fn weights(&self) -> Vec<f64> {
        let dx = self.spacing();
        let mut w = vec![dx; self.num_points];
        w[0] = 0.5 * dx;
        w[self.num_points - 1] = 0.5 * dx;
        w
    }

    pub fn is_unit_interval(&self) -> bool {
        self.start == 0.0 && self.end == 1.0
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FplmError::GridMismatch(format!(
                "[{}, {}] with {} points vs [{}, {}] with {} points",
                self.start, self.end, self.num_points, other.start, other.end, other.num_points
            )))
        }
    }

    pub(crate) fn ensure_unit(&self) -> Result<()> {
        if self.is_unit_interval() {
            Ok(())
        } else {
            Err(FplmError::Domain(format!(
                "expected a grid on [0, 1], got [{}, {}]",
                self.start, self.end
            )))
        }
    }

    /// Trapezoidal integral of a sampled function.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.num_points);
        let last = values.len() - 1;
        let interior: f64 = values[1..last].iter().sum();
        self.spacing() * (interior + 0.5 * (values[0] + values[last]))
    }
}

/// A function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Grid,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FplmError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FplmError::Domain(format!(
                "curve value at index {k} is not finite"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            values: vec![c; grid.len()],
            grid,
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    // Internal constructor for values already known to be finite and sized.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scale(&self, a: f64) -> Curve {
        Curve::from_parts(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn add(&self, other: &Curve) -> Result<Curve> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Curve) -> Result<Curve> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Curve) -> Result<Curve> {
        self.zip_with(other, |x, y| x + a * y)
    }

    fn zip_with(&self, other: &Curve, op: impl Fn(f64, f64) -> f64) -> Result<Curve> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Curve::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        ))
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }
}

/// Trapezoidal approximation of `∫ f g` over the shared grid.
pub fn inner_product(f: &Curve, g: &Curve) -> Result<f64> {
    f.grid.ensure_same(&g.grid)?;
    Ok(weighted_dot(&f.grid, &f.values, &g.values))
}

pub(crate) fn weighted_dot(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let last = a.len() - 1;
    let interior: f64 = a[1..last].iter().zip(&b[1..last]).map(|(x, y)| x * y).sum();
    grid.spacing() * (interior + 0.5 * (a[0] * b[0] + a[last] * b[last]))
}

pub fn l2_norm(f: &Curve) -> f64 {
    weighted_dot(&f.grid, &f.values, &f.values).max(0.0).sqrt()
}

pub fn l2_distance(f: &Curve, g: &Curve) -> Result<f64> {
    f.grid.ensure_same(&g.grid)?;
    Ok(sample_distance(&f.grid, &f.values, &g.values))
}

// Symmetric in its arguments bit for bit: (a - b)^2 == (b - a)^2.
pub(crate) fn sample_distance(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let last = a.len() - 1;
    let sq = |k: usize| {
        let d = a[k] - b[k];
        d * d
    };
    let interior: f64 = (1..last).map(sq).sum();
    (grid.spacing() * (interior + 0.5 * (sq(0) + sq(last))))
        .max(0.0)
        .sqrt()
}

/// Cosine basis on `[0, 1]`: `φ₁ = 1`, `φⱼ(s) = √2 cos((j − 1)πs)` for `j ≥ 2`.
pub fn fourier_basis(j: usize, grid: &Grid) -> Result<Curve> {
    if j == 0 {
        return Err(FplmError::Domain("basis index starts at 1".into()));
    }
    grid.ensure_unit()?;
    Ok(Curve::from_parts(
        *grid,
        grid.points()
            .into_iter()
            .map(|s| fourier_value(j, s))
            .collect(),
    ))
}

pub(crate) fn fourier_value(j: usize, s: f64) -> f64 {
    if j == 1 {
        1.0
    } else {
        SQRT_2 * ((j - 1) as f64 * PI * s).cos()
    }
}

/// Joins two curves on `[0, 1]` into one curve on `[0, 2]`.
///
/// The result has `2G − 1` samples; the shared sample at `s = 1` holds the
/// mean of `f(1)` and `g(0)`.
pub fn concat(f: &Curve, g: &Curve) -> Result<Curve> {
    f.grid.ensure_unit()?;
    g.grid.ensure_unit()?;
    f.grid.ensure_same(&g.grid)?;
    let n = f.grid.len();
    let grid = Grid::new(0.0, 2.0, 2 * n - 1)?;
    let mut values = Vec::with_capacity(2 * n - 1);
    values.extend_from_slice(&f.values[..n - 1]);
    values.push(0.5 * (f.values[n - 1] + g.values[0]));
    values.extend_from_slice(&g.values[1..]);
    Ok(Curve::from_parts(grid, values))
}

/// Aligned triplets `(Xᵢ, Tᵢ, Yᵢ)`: a functional covariate entering
/// linearly, a functional covariate entering nonparametrically, and a
/// scalar response.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    x: Vec<Curve>,
    t: Vec<Curve>,
    y: Vec<f64>,
}

impl FunctionalDataset {
    pub fn new(x: Vec<Curve>, t: Vec<Curve>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(FplmError::InvalidConfig(format!(
                "a dataset needs at least 2 observations, got {n}"
            )));
        }
        for len in [x.len(), t.len()] {
            if len != n {
                return Err(FplmError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        check_shared_grid(&x)?;
        check_shared_grid(&t)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(FplmError::Domain("responses must be finite".into()));
        }
        Ok(Self { x, t, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[Curve] {
        &self.x
    }

    pub fn t(&self) -> &[Curve] {
        &self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn grid_x(&self) -> &Grid {
        self.x[0].grid()
    }

    pub fn grid_t(&self) -> &Grid {
        self.t[0].grid()
    }

    /// Subset by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(
            idx.iter().map(|&i| self.x[i].clone()).collect(),
            idx.iter().map(|&i| self.t[i].clone()).collect(),
            idx.iter().map(|&i| self.y[i]).collect(),
        )
    }

    /// `Xᵢ` and `Tᵢ` joined on `[0, 2]`, the covariate used by the
    /// fully linear and fully nonparametric comparison fits.
    pub fn concatenated(&self) -> Result<Vec<Curve>> {
        self.x
            .iter()
            .zip(&self.t)
            .map(|(x, t)| concat(x, t))
            .collect()
    }
}

pub(crate) fn check_shared_grid(curves: &[Curve]) -> Result<()> {
    if let Some((first, rest)) = curves.split_first() {
        for c in rest {
            first.grid.ensure_same(&c.grid)?;
        }
    }
    Ok(())
}
