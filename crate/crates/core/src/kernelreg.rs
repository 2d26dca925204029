//! Nadaraya–Watson smoothing over functional covariates.
//!
//! Kernels act on `‖t − Tⱼ‖ / h` and have support `[0, 1]`. The training
//! weight matrix keeps the self term `j = i` in both numerator and
//! denominator, so every row is well defined and a bandwidth below the
//! smallest positive distance gives the identity.

use crate::error::{FplmError, Result};
use crate::funcspace::{check_shared_grid, sample_distance, Curve};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    /// `K(u) = 1 − u²` on `[0, 1]`.
    Quadratic,
    /// `K(u) = 1` on `[0, 1]`.
    Uniform,
    /// `K(u) = 1 − u` on `[0, 1]`.
    Triangular,
}

impl KernelSpec {
    /// Kernel value for a nonnegative argument. Arguments past the support give 0.
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        if u > 1.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Quadratic => 1.0 - u * u,
            KernelSpec::Uniform => 1.0,
            KernelSpec::Triangular => 1.0 - u,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelSpec::Quadratic => "quadratic",
            KernelSpec::Uniform => "uniform",
            KernelSpec::Triangular => "triangular",
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelSpec {
    type Err = FplmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quadratic" => Ok(KernelSpec::Quadratic),
            "uniform" => Ok(KernelSpec::Uniform),
            "triangular" => Ok(KernelSpec::Triangular),
            other => Err(FplmError::InvalidConfig(format!(
                "unknown kernel '{other}'"
            ))),
        }
    }
}

pub fn eval_kernel(spec: KernelSpec, u: f64) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(FplmError::Domain(format!(
            "kernel argument must be nonnegative, got {u}"
        )));
    }
    Ok(spec.value(u))
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(FplmError::InvalidConfig(format!(
            "bandwidth must be finite and positive, got {h}"
        )))
    }
}

/// Symmetric matrix of pairwise `L²` distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Strict upper triangle, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest strictly positive off-diagonal distance, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.upper_triangle()
            .into_iter()
            .filter(|&v| v > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Median of the strict upper triangle; the mean of the two middle
    /// order statistics when the pair count is even.
    pub fn median(&self) -> Result<f64> {
        let mut upper = self.upper_triangle();
        if upper.is_empty() {
            return Err(FplmError::InvalidConfig(
                "median bandwidth needs at least 2 curves".into(),
            ));
        }
        if upper.iter().all(|&v| v == 0.0) {
            return Err(FplmError::DegenerateData(
                "all pairwise distances are zero".into(),
            ));
        }
        upper.sort_by(f64::total_cmp);
        let k = upper.len();
        Ok(if k % 2 == 1 {
            upper[k / 2]
        } else {
            0.5 * (upper[k / 2 - 1] + upper[k / 2])
        })
    }
}

pub fn pairwise_distances(curves: &[Curve]) -> Result<DistanceMatrix> {
    if curves.len() < 2 {
        return Err(FplmError::InvalidConfig(format!(
            "pairwise distances need at least 2 curves, got {}",
            curves.len()
        )));
    }
    check_shared_grid(curves)?;
    let n = curves.len();
    let grid = *curves[0].grid();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = sample_distance(&grid, curves[i].values(), curves[j].values());
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { n, d })
}

/// Median of all pairwise distances among the curves.
pub fn median_bandwidth(curves: &[Curve]) -> Result<f64> {
    pairwise_distances(curves)?.median()
}

/// Normalized kernel weights from distances to each training curve.
fn weights_from_distances(dist: &[f64], h: f64, spec: KernelSpec) -> Result<Vec<f64>> {
    let mut w: Vec<f64> = dist.iter().map(|&d| spec.value(d / h)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        let nearest = dist.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(FplmError::EmptyNeighborhood {
            nearest,
            bandwidth: h,
        });
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

pub(crate) fn distances_to(train: &[Curve], t: &Curve) -> Result<Vec<f64>> {
    let grid = *t.grid();
    train
        .iter()
        .map(|c| {
            grid_check(c, t)?;
            Ok(sample_distance(&grid, c.values(), t.values()))
        })
        .collect()
}

fn grid_check(a: &Curve, b: &Curve) -> Result<()> {
    if a.grid() == b.grid() {
        Ok(())
    } else {
        Err(FplmError::GridMismatch(
            "query curve grid differs from the training grid".into(),
        ))
    }
}

/// Weights `w(t, Tⱼ) = K(‖t − Tⱼ‖/h) / Σₖ K(‖t − Tₖ‖/h)`.
pub fn nw_weights(train: &[Curve], t: &Curve, h: f64, spec: KernelSpec) -> Result<Vec<f64>> {
    check_bandwidth(h)?;
    if train.is_empty() {
        return Err(FplmError::InvalidConfig("no training curves".into()));
    }
    weights_from_distances(&distances_to(train, t)?, h, spec)
}

/// Kernel-weighted average of `targets` at the query curve `t`.
pub fn nw_regress(
    train: &[Curve],
    targets: &[f64],
    t: &Curve,
    h: f64,
    spec: KernelSpec,
) -> Result<f64> {
    if targets.len() != train.len() {
        return Err(FplmError::DimensionMismatch {
            expected: train.len(),
            got: targets.len(),
        });
    }
    let w = nw_weights(train, t, h, spec)?;
    Ok(weighted_sum(&w, targets))
}

// Zero weights are skipped so that exact interpolation stays exact.
pub(crate) fn weighted_sum(w: &[f64], targets: &[f64]) -> f64 {
    w.iter()
        .zip(targets)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, y)| w * y)
        .sum()
}

/// Row-stochastic `n × n` smoothing matrix over the training covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
    h: f64,
    kernel: KernelSpec,
}

impl WeightMatrix {
    pub fn from_distances(dist: &DistanceMatrix, h: f64, kernel: KernelSpec) -> Result<Self> {
        check_bandwidth(h)?;
        let n = dist.len();
        let mut w = Vec::with_capacity(n * n);
        for i in 0..n {
            // K(0) > 0 on the diagonal keeps every denominator positive.
            w.extend(weights_from_distances(dist.row(i), h, kernel)?);
        }
        Ok(Self { n, w, h, kernel })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    /// Smoothed values `Σⱼ wᵢⱼ yⱼ` for each row.
    pub fn smooth(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok((0..self.n).map(|i| weighted_sum(self.row(i), y)).collect())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.n {
            Ok(())
        } else {
            Err(FplmError::DimensionMismatch {
                expected: self.n,
                got,
            })
        }
    }
}

pub fn training_weight_matrix(curves: &[Curve], h: f64, spec: KernelSpec) -> Result<WeightMatrix> {
    check_bandwidth(h)?;
    WeightMatrix::from_distances(&pairwise_distances(curves)?, h, spec)
}

/// `Ỹᵢ = Yᵢ − Σⱼ wᵢⱼ Yⱼ`.
pub fn residualize_scalar(w: &WeightMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let smooth = w.smooth(y)?;
    Ok(y.iter().zip(smooth).map(|(a, b)| a - b).collect())
}

/// `X̃ᵢ = Xᵢ − Σⱼ wᵢⱼ Xⱼ`, pointwise on the grid.
pub fn residualize_curves(w: &WeightMatrix, curves: &[Curve]) -> Result<Vec<Curve>> {
    w.check_len(curves.len())?;
    check_shared_grid(curves)?;
    let grid = *curves[0].grid();
    let g = grid.len();
    let mut out = Vec::with_capacity(curves.len());
    for (i, xi) in curves.iter().enumerate() {
        let mut acc = vec![0.0; g];
        for (wij, xj) in w.row(i).iter().zip(curves) {
            if *wij == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(xj.values()) {
                *a += wij * v;
            }
        }
        let values = xi.values().iter().zip(acc).map(|(x, s)| x - s).collect();
        out.push(Curve::from_parts(grid, values));
    }
    Ok(out)
}
