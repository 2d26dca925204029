//! Empirical second-moment operator `Ŝ = n⁻¹ Σ X̃ᵢ ⊗ X̃ᵢ`, its eigensystem,
//! and the cross moment `Δ̂ = n⁻¹ Σ Ỹᵢ X̃ᵢ`.
//!
//! The eigensystem is obtained from whichever of the two equivalent
//! symmetric problems is smaller: the `n × n` Gram matrix of quadrature
//! inner products `⟨X̃ᵢ, X̃ₖ⟩ / n`, or the `G × G` matrix of the operator
//! symmetrized by the square roots of the trapezoidal weights. Both have the
//! same nonzero spectrum.

use crate::error::{FplmError, Result};
use crate::funcspace::{check_shared_grid, inner_product, weighted_dot, Curve, Grid};
use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues below `RELATIVE_EIGEN_FLOOR * λ̂₁` count as zero.
pub const RELATIVE_EIGEN_FLOOR: f64 = 1e-10;

/// Absolute floor so that round-off residue of an all-zero sample has rank 0.
pub const ABSOLUTE_EIGEN_FLOOR: f64 = 1e-24;

/// Leading eigenpairs of `Ŝ`, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Curve>,
    rank: usize,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[Curve] {
        &self.eigenfunctions
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of eigenvalues above the floor, which may exceed [`Self::len`].
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True when fewer pairs are stored than were requested.
    pub fn is_truncated(&self, requested: usize) -> bool {
        self.len() < requested
    }

    /// The same system with eigenfunction `j` negated.
    pub fn with_flipped_sign(&self, j: usize) -> EigenSystem {
        let mut out = self.clone();
        out.eigenfunctions[j] = out.eigenfunctions[j].scale(-1.0);
        out
    }

    /// Keeps up to `max_components` leading pairs without failing when the
    /// rank is smaller; the caller checks [`Self::rank`].
    pub fn decompose(residuals: &[Curve], max_components: usize) -> Result<EigenSystem> {
        if residuals.is_empty() {
            return Err(FplmError::InvalidConfig("no curves to decompose".into()));
        }
        check_shared_grid(residuals)?;
        let grid = *residuals[0].grid();
        if residuals.len() <= grid.len() {
            dual_route(residuals, &grid, max_components)
        } else {
            primal_route(residuals, &grid, max_components)
        }
    }
}

/// Top `m_max` eigenpairs of the empirical operator of the given curves.
pub fn gram_eigensystem(residuals: &[Curve], m_max: usize) -> Result<EigenSystem> {
    if m_max == 0 || m_max > residuals.len() {
        return Err(FplmError::InvalidConfig(format!(
            "requested {m_max} components from {} curves",
            residuals.len()
        )));
    }
    let system = EigenSystem::decompose(residuals, m_max)?;
    if system.rank < m_max {
        return Err(FplmError::RankDeficient {
            requested: m_max,
            rank: system.rank,
        });
    }
    Ok(system)
}

/// Scores `⟨f, φ̂ⱼ⟩` for every stored eigenfunction.
pub fn pc_scores(system: &EigenSystem, f: &Curve) -> Result<Vec<f64>> {
    system
        .eigenfunctions
        .iter()
        .map(|phi| inner_product(f, phi))
        .collect()
}

/// Sample cross moment `Δ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMoment {
    pub delta: Curve,
}

pub fn cross_moment(residuals: &[Curve], responses: &[f64]) -> Result<CrossMoment> {
    if residuals.len() != responses.len() {
        return Err(FplmError::DimensionMismatch {
            expected: residuals.len(),
            got: responses.len(),
        });
    }
    if residuals.is_empty() {
        return Err(FplmError::InvalidConfig("empty sample".into()));
    }
    check_shared_grid(residuals)?;
    let grid = *residuals[0].grid();
    let n = residuals.len() as f64;
    let mut acc = vec![0.0; grid.len()];
    for (x, &y) in residuals.iter().zip(responses) {
        for (a, v) in acc.iter_mut().zip(x.values()) {
            *a += y * v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(CrossMoment {
        delta: Curve::from_parts(grid, acc),
    })
}

fn sorted_pairs(eig: SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<(f64, Vec<f64>)> {
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

fn count_rank(eigenvalues: impl Iterator<Item = f64> + Clone) -> usize {
    let top = eigenvalues.clone().next().unwrap_or(0.0);
    if top.is_nan() || top <= ABSOLUTE_EIGEN_FLOOR {
        return 0;
    }
    let floor = (RELATIVE_EIGEN_FLOOR * top).max(ABSOLUTE_EIGEN_FLOOR);
    eigenvalues.take_while(|&l| l > floor).count()
}

// Largest-magnitude sample positive; first index wins ties.
fn normalize_sign(values: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &v in values.iter() {
        if v.abs() > best {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        values.iter_mut().for_each(|v| *v = -*v);
    }
}

fn scaled_samples(residuals: &[Curve], sqrt_w: &[f64]) -> DMatrix<f64> {
    let n = residuals.len();
    let g = sqrt_w.len();
    DMatrix::from_fn(n, g, |i, k| residuals[i].values()[k] * sqrt_w[k])
}

/// `n × n` route: `M = A Aᵀ / n` with `A[i, k] = X̃ᵢ(sₖ) √wₖ`.
pub(crate) fn dual_route(residuals: &[Curve], grid: &Grid, max: usize) -> Result<EigenSystem> {
    let n = residuals.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let a = scaled_samples(residuals, &sqrt_w);
    let mut m = &a * a.transpose();
    m /= n as f64;
    let m = symmetrize(m);
    let pairs = sorted_pairs(m.symmetric_eigen());
    let rank = count_rank(pairs.iter().map(|p| p.0));
    let keep = rank.min(max);
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut eigenfunctions = Vec::with_capacity(keep);
    for (lambda, v) in pairs.into_iter().take(keep) {
        let scale = 1.0 / (n as f64 * lambda).sqrt();
        let mut values = vec![0.0; grid.len()];
        for (vi, x) in v.iter().zip(residuals) {
            for (acc, xv) in values.iter_mut().zip(x.values()) {
                *acc += vi * xv;
            }
        }
        values.iter_mut().for_each(|x| *x *= scale);
        normalize_sign(&mut values);
        eigenvalues.push(lambda);
        eigenfunctions.push(Curve::from_parts(*grid, values));
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenfunctions,
        rank,
    })
}

/// `G × G` route: `C = Aᵀ A / n`; eigenvectors are mapped back through `1/√wₖ`.
pub(crate) fn primal_route(residuals: &[Curve], grid: &Grid, max: usize) -> Result<EigenSystem> {
    let n = residuals.len();
    let weights = grid.weights();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let a = scaled_samples(residuals, &sqrt_w);
    let mut c = a.transpose() * &a;
    c /= n as f64;
    let c = symmetrize(c);
    let pairs = sorted_pairs(c.symmetric_eigen());
    let rank = count_rank(pairs.iter().map(|p| p.0));
    let keep = rank.min(max);
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut eigenfunctions = Vec::with_capacity(keep);
    for (lambda, u) in pairs.into_iter().take(keep) {
        let mut values: Vec<f64> = u.iter().zip(&sqrt_w).map(|(u, s)| u / s).collect();
        // renormalize under the quadrature weights
        let norm = weighted_dot(grid, &values, &values).sqrt();
        values.iter_mut().for_each(|v| *v /= norm);
        normalize_sign(&mut values);
        eigenvalues.push(lambda);
        eigenfunctions.push(Curve::from_parts(*grid, values));
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenfunctions,
        rank,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{fourier_basis, l2_norm};

    fn unit() -> Grid {
        Grid::unit(201).unwrap()
    }

    fn phi(j: usize) -> Curve {
        fourier_basis(j, &unit()).unwrap()
    }

    fn assert_curve_close(a: &Curve, b: &Curve, tol: f64) {
        let d = l2_norm(&a.sub(b).unwrap());
        assert!(d < tol, "curves differ by {d}");
    }

    #[test]
    fn antipodal_pair() {
        let xs = [phi(1), phi(1).scale(-1.0)];
        let sys = gram_eigensystem(&xs, 1).unwrap();
        assert!((sys.eigenvalues()[0] - 1.0).abs() < 1e-6);
        assert_curve_close(&sys.eigenfunctions()[0], &phi(1), 1e-8);
        assert_eq!(
            gram_eigensystem(&xs, 2),
            Err(FplmError::RankDeficient {
                requested: 2,
                rank: 1
            })
        );
    }

    #[test]
    fn diagonal_gram() {
        let xs = [phi(1).scale(2.0), phi(2)];
        let sys = gram_eigensystem(&xs, 2).unwrap();
        assert!((sys.eigenvalues()[0] - 2.0).abs() < 1e-6);
        assert!((sys.eigenvalues()[1] - 0.5).abs() < 1e-6);
        assert_curve_close(&sys.eigenfunctions()[0], &phi(1), 1e-6);
        // sign convention: largest entry positive; φ₂ peaks at +√2 at s = 0
        assert_curve_close(&sys.eigenfunctions()[1], &phi(2), 1e-6);
    }

    #[test]
    fn zero_sample_has_rank_zero() {
        let xs = vec![Curve::zeros(unit()); 3];
        assert_eq!(
            gram_eigensystem(&xs, 1),
            Err(FplmError::RankDeficient {
                requested: 1,
                rank: 0
            })
        );
    }

    #[test]
    fn invalid_requests() {
        let xs = [phi(1), phi(2)];
        assert!(matches!(
            gram_eigensystem(&xs, 0),
            Err(FplmError::InvalidConfig(_))
        ));
        assert!(matches!(
            gram_eigensystem(&xs, 3),
            Err(FplmError::InvalidConfig(_))
        ));
    }

    #[test]
    fn scores() {
        let xs = [phi(1).scale(2.0), phi(2), phi(3).scale(0.5)];
        let sys = gram_eigensystem(&xs, 3).unwrap();
        let s = pc_scores(&sys, &sys.eigenfunctions()[0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-8 && s[1].abs() < 1e-8 && s[2].abs() < 1e-8);
        assert!(pc_scores(&sys, &Curve::zeros(unit()))
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let f = sys.eigenfunctions()[0]
            .scale(3.0)
            .axpy(4.0, &sys.eigenfunctions()[1])
            .unwrap();
        let s = pc_scores(&sys, &f).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-6 && (s[1] - 4.0).abs() < 1e-6 && s[2].abs() < 1e-6);
        assert!(pc_scores(&sys, &Curve::zeros(Grid::unit(11).unwrap())).is_err());
    }

    #[test]
    fn cross_moment_cases() {
        let z = cross_moment(&[phi(1), phi(2)], &[0.0, 0.0]).unwrap();
        assert!(z.delta.values().iter().all(|&v| v == 0.0));
        let single = cross_moment(&[phi(1)], &[2.0]).unwrap();
        assert_curve_close(&single.delta, &phi(1).scale(2.0), 1e-15);
        let two = cross_moment(&[phi(1), phi(2)], &[2.0, 4.0]).unwrap();
        assert_curve_close(&two.delta, &phi(1).axpy(2.0, &phi(2)).unwrap(), 1e-14);
        assert!(cross_moment(&[phi(1)], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn dual_and_primal_routes_agree() {
        // 12 curves on a 9-point grid exercises both routes on the same data
        let grid = Grid::unit(9).unwrap();
        let xs: Vec<Curve> = (0..12)
            .map(|i| {
                Curve::from_fn(grid, |s| {
                    let a = (i as f64 * 0.7).sin();
                    let b = (i as f64 * 1.3).cos();
                    a * s + b * (3.0 * s).sin() + 0.1 * i as f64 * s * s
                })
                .unwrap()
            })
            .collect();
        let dual = dual_route(&xs, &grid, 3).unwrap();
        let primal = primal_route(&xs, &grid, 3).unwrap();
        assert_eq!(dual.rank(), primal.rank());
        for j in 0..3 {
            assert!((dual.eigenvalues()[j] - primal.eigenvalues()[j]).abs() < 1e-10);
            assert_curve_close(&dual.eigenfunctions()[j], &primal.eigenfunctions()[j], 1e-8);
        }
    }
}
