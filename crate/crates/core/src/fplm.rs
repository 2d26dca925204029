//! The functional partial linear estimator and its two comparison fits.
//!
//! `Y = ⟨b, X⟩ + g(T) + ε` is reduced to a functional linear model by
//! subtracting Nadaraya–Watson estimates of `E(Y | T)` and `E(X | T)`.
//! `b` is then estimated by truncated principal components of the
//! residualized covariates, and `g` by smoothing the partial residuals
//! `Yⱼ − ⟨b̂, Xⱼ⟩` over `T`.

use crate::error::{FplmError, Result};
use crate::fpca::{cross_moment, CrossMoment, EigenSystem};
use crate::funcspace::{check_shared_grid, inner_product, Curve, FunctionalDataset};
use crate::kernelreg::{
    distances_to, nw_regress, pairwise_distances, residualize_curves, residualize_scalar,
    DistanceMatrix, KernelSpec, WeightMatrix,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Absolute bandwidth, or a multiple of the median pairwise `T` distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Absolute(f64),
    Multiplier(f64),
}

impl Bandwidth {
    /// Resolves against the training distances; the median is only computed
    /// for multipliers.
    pub fn resolve(self, dist: &DistanceMatrix) -> Result<f64> {
        let h = match self {
            Bandwidth::Absolute(h) => h,
            Bandwidth::Multiplier(c) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(FplmError::InvalidConfig(format!(
                        "bandwidth multiplier must be positive, got {c}"
                    )));
                }
                c * dist.median()?
            }
        };
        if h.is_finite() && h > 0.0 {
            Ok(h)
        } else {
            Err(FplmError::InvalidConfig(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub m: usize,
    pub bandwidth: Bandwidth,
    pub kernel: KernelSpec,
}

impl FitConfig {
    pub fn new(m: usize, bandwidth: Bandwidth, kernel: KernelSpec) -> Self {
        Self {
            m,
            bandwidth,
            kernel,
        }
    }
}

/// A fitted partial linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub b_hat: Curve,
    pub m: usize,
    pub h: f64,
    pub kernel: KernelSpec,
    pub t_train: Vec<Curve>,
    /// `rⱼ = Yⱼ − ⟨b̂, Xⱼ⟩`.
    pub partial_residuals: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub eigenvalues_used: Vec<f64>,
    /// `ĝ(Tᵢ)` at the training points.
    pub fitted_g: Vec<f64>,
}

impl FittedModel {
    pub fn n(&self) -> usize {
        self.t_train.len()
    }

    /// `ĝ(t) = Σⱼ w(t, Tⱼ) rⱼ`.
    pub fn predict_g(&self, t: &Curve) -> Result<f64> {
        nw_regress(
            &self.t_train,
            &self.partial_residuals,
            t,
            self.h,
            self.kernel,
        )
    }

    /// Linear part `⟨b̂, x⟩` and nonparametric part `ĝ(t)`.
    pub fn predict_parts(&self, x: &Curve, t: &Curve) -> Result<(f64, f64)> {
        let linear = inner_product(&self.b_hat, x)?;
        Ok((linear, self.predict_g(t)?))
    }

    pub fn predict(&self, x: &Curve, t: &Curve) -> Result<f64> {
        let (linear, g) = self.predict_parts(x, t)?;
        Ok(linear + g)
    }

    /// Like [`Self::predict_g`], but an empty neighborhood falls back to the
    /// partial residual of the nearest training curve.
    pub fn predict_g_or_nearest(&self, t: &Curve) -> Result<f64> {
        match self.predict_g(t) {
            Err(FplmError::EmptyNeighborhood { .. }) => {
                let d = distances_to(&self.t_train, t)?;
                let nearest = argmin(&d);
                Ok(self.partial_residuals[nearest])
            }
            other => other,
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    best
}

pub fn predict_g(model: &FittedModel, t: &Curve) -> Result<f64> {
    model.predict_g(t)
}

pub fn predict(model: &FittedModel, x: &Curve, t: &Curve) -> Result<f64> {
    model.predict(x, t)
}

/// Coefficients `b̂ⱼ = ⟨Δ̂, φ̂ⱼ⟩ / λ̂ⱼ` for the first `m` pairs and the curve
/// `Σⱼ b̂ⱼ φ̂ⱼ`.
pub fn coefficient_curve(
    system: &EigenSystem,
    delta: &CrossMoment,
    m: usize,
) -> Result<(Vec<f64>, Curve)> {
    if m == 0 {
        return Err(FplmError::InvalidConfig(
            "truncation level must be ≥ 1".into(),
        ));
    }
    if m > system.len() {
        return Err(FplmError::RankDeficient {
            requested: m,
            rank: system.len(),
        });
    }
    let mut coefficients = Vec::with_capacity(m);
    let mut b_hat = Curve::zeros(*delta.delta.grid());
    for (lambda, phi) in system.eigenvalues()[..m]
        .iter()
        .zip(&system.eigenfunctions()[..m])
    {
        let bj = inner_product(&delta.delta, phi)? / lambda;
        b_hat = b_hat.axpy(bj, phi)?;
        coefficients.push(bj);
    }
    Ok((coefficients, b_hat))
}

fn check_truncation(system: &EigenSystem, m: usize) -> Result<()> {
    if m > system.rank() {
        Err(FplmError::RankDeficient {
            requested: m,
            rank: system.rank(),
        })
    } else if m > system.len() {
        Err(FplmError::InvalidConfig(format!(
            "only {} components were retained, {m} requested",
            system.len()
        )))
    } else {
        Ok(())
    }
}

/// Everything in a fit that does not depend on the truncation level, so that
/// several `m` can share one residualization and eigendecomposition.
#[derive(Debug, Clone)]
pub struct FplmPath {
    h: f64,
    kernel: KernelSpec,
    weights: WeightMatrix,
    system: EigenSystem,
    delta: CrossMoment,
    x_train: Vec<Curve>,
    t_train: Vec<Curve>,
    y: Vec<f64>,
}

impl FplmPath {
    /// Residualizes at bandwidth `h` and keeps up to `max_m` eigenpairs.
    pub fn new(
        data: &FunctionalDataset,
        dist: &DistanceMatrix,
        h: f64,
        kernel: KernelSpec,
        max_m: usize,
    ) -> Result<Self> {
        if dist.len() != data.len() {
            return Err(FplmError::DimensionMismatch {
                expected: data.len(),
                got: dist.len(),
            });
        }
        if dist.max_distance() == 0.0 {
            return Err(FplmError::DegenerateData(
                "all T curves are identical".into(),
            ));
        }
        let weights = WeightMatrix::from_distances(dist, h, kernel)?;
        let y_res = residualize_scalar(&weights, data.y())?;
        let x_res = residualize_curves(&weights, data.x())?;
        let system = EigenSystem::decompose(&x_res, max_m.max(1))?;
        let delta = cross_moment(&x_res, &y_res)?;
        Ok(Self {
            h,
            kernel,
            weights,
            system,
            delta,
            x_train: data.x().to_vec(),
            t_train: data.t().to_vec(),
            y: data.y().to_vec(),
        })
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.system
    }

    pub fn cross_moment(&self) -> &CrossMoment {
        &self.delta
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// The model truncated at `m` components.
    pub fn model(&self, m: usize) -> Result<FittedModel> {
        self.model_with(&self.system, m)
    }

    /// The model built from a caller-supplied eigensystem of the same
    /// residualized covariates.
    pub fn model_with(&self, system: &EigenSystem, m: usize) -> Result<FittedModel> {
        if m == 0 {
            return Err(FplmError::InvalidConfig(
                "truncation level must be ≥ 1".into(),
            ));
        }
        // Residualization that annihilates every covariate (each Tᵢ alone in
        // its neighborhood) leaves nothing to regress on: b̂ = 0.
        let (coefficients, b_hat, eigenvalues_used) = if system.rank() == 0 {
            (
                vec![0.0; m],
                Curve::zeros(*self.delta.delta.grid()),
                vec![0.0; m],
            )
        } else {
            check_truncation(system, m)?;
            let (c, b) = coefficient_curve(system, &self.delta, m)?;
            (c, b, system.eigenvalues()[..m].to_vec())
        };
        let partial_residuals = self
            .x_train
            .iter()
            .zip(&self.y)
            .map(|(x, y)| Ok(y - inner_product(&b_hat, x)?))
            .collect::<Result<Vec<f64>>>()?;
        let fitted_g = self.weights.smooth(&partial_residuals)?;
        Ok(FittedModel {
            b_hat,
            m,
            h: self.h,
            kernel: self.kernel,
            t_train: self.t_train.clone(),
            partial_residuals,
            coefficients,
            eigenvalues_used,
            fitted_g,
        })
    }
}

/// Fits the partial linear model with a single configuration.
pub fn fit_fplm(data: &FunctionalDataset, cfg: &FitConfig) -> Result<FittedModel> {
    let dist = pairwise_distances(data.t())?;
    if dist.max_distance() == 0.0 {
        return Err(FplmError::DegenerateData(
            "all T curves are identical".into(),
        ));
    }
    let h = cfg.bandwidth.resolve(&dist)?;
    if cfg.m > data.len() {
        return Err(FplmError::RankDeficient {
            requested: cfg.m,
            rank: data.len(),
        });
    }
    FplmPath::new(data, &dist, h, cfg.kernel, cfg.m)?.model(cfg.m)
}

/// Fully linear comparison fit with an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct FlmModel {
    pub b_hat: Curve,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub eigenvalues_used: Vec<f64>,
}

impl FlmModel {
    pub fn predict(&self, z: &Curve) -> Result<f64> {
        Ok(self.intercept + inner_product(&self.b_hat, z)?)
    }
}

/// Shared path of a centered functional linear fit, reusable across `m`.
#[derive(Debug, Clone)]
pub struct FlmPath {
    system: EigenSystem,
    delta: CrossMoment,
    mean_z: Curve,
    mean_y: f64,
}

impl FlmPath {
    pub fn new(z: &[Curve], y: &[f64], max_m: usize) -> Result<Self> {
        if z.len() != y.len() {
            return Err(FplmError::DimensionMismatch {
                expected: z.len(),
                got: y.len(),
            });
        }
        if z.len() < 2 {
            return Err(FplmError::InvalidConfig(
                "linear fit needs at least 2 observations".into(),
            ));
        }
        check_shared_grid(z)?;
        let n = z.len() as f64;
        let grid = *z[0].grid();
        let mut mean = vec![0.0; grid.len()];
        for c in z {
            for (a, v) in mean.iter_mut().zip(c.values()) {
                *a += v;
            }
        }
        mean.iter_mut().for_each(|a| *a /= n);
        let mean_z = Curve::from_parts(grid, mean);
        let mean_y = y.iter().sum::<f64>() / n;
        let z_c = z
            .iter()
            .map(|c| c.sub(&mean_z))
            .collect::<Result<Vec<_>>>()?;
        let y_c: Vec<f64> = y.iter().map(|v| v - mean_y).collect();
        let system = EigenSystem::decompose(&z_c, max_m.max(1))?;
        let delta = cross_moment(&z_c, &y_c)?;
        Ok(Self {
            system,
            delta,
            mean_z,
            mean_y,
        })
    }

    pub fn model(&self, m: usize) -> Result<FlmModel> {
        if m == 0 {
            return Err(FplmError::InvalidConfig(
                "truncation level must be ≥ 1".into(),
            ));
        }
        check_truncation(&self.system, m)?;
        let (coefficients, b_hat) = coefficient_curve(&self.system, &self.delta, m)?;
        let intercept = self.mean_y - inner_product(&b_hat, &self.mean_z)?;
        Ok(FlmModel {
            b_hat,
            intercept,
            coefficients,
            eigenvalues_used: self.system.eigenvalues()[..m].to_vec(),
        })
    }
}

/// Centered functional linear regression of `y` on `z` with `m` components.
pub fn fit_flm(z: &[Curve], y: &[f64], m: usize) -> Result<FlmModel> {
    if m > z.len() {
        return Err(FplmError::RankDeficient {
            requested: m,
            rank: z.len(),
        });
    }
    FlmPath::new(z, y, m)?.model(m)
}

/// Fully nonparametric comparison fit: Nadaraya–Watson regression on the
/// whole covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct NpfrModel {
    z_train: Vec<Curve>,
    y: Vec<f64>,
    h: f64,
    kernel: KernelSpec,
}

impl NpfrModel {
    pub fn predict(&self, z: &Curve) -> Result<f64> {
        nw_regress(&self.z_train, &self.y, z, self.h, self.kernel)
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }
}

pub fn fit_npfr(z: &[Curve], y: &[f64], h: f64, kernel: KernelSpec) -> Result<NpfrModel> {
    if z.len() != y.len() {
        return Err(FplmError::DimensionMismatch {
            expected: z.len(),
            got: y.len(),
        });
    }
    if z.len() < 2 {
        return Err(FplmError::InvalidConfig(
            "nonparametric fit needs at least 2 observations".into(),
        ));
    }
    check_shared_grid(z)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(FplmError::InvalidConfig(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    Ok(NpfrModel {
        z_train: z.to_vec(),
        y: y.to_vec(),
        h,
        kernel,
    })
}

/// Grid and fold settings for K-fold selection of `(m, multiplier)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub m_grid: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCell {
    pub m: usize,
    pub multiplier: f64,
    /// Mean held-out squared error over all observations; `None` when the
    /// candidate could not be fitted on some fold.
    pub mean_error: Option<f64>,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_m: usize,
    pub best_multiplier: f64,
    /// One cell per `(m, multiplier)`, `m` major, in grid order.
    pub table: Vec<CvCell>,
}

/// Fold label of every observation: a seeded shuffle, then position mod `folds`.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

fn validate_cv(n: usize, cfg: &CvConfig) -> Result<()> {
    if cfg.folds < 2 {
        return Err(FplmError::InvalidConfig("need at least 2 folds".into()));
    }
    if n < cfg.folds {
        return Err(FplmError::InvalidConfig(format!(
            "{n} observations cannot fill {} folds",
            cfg.folds
        )));
    }
    if cfg.m_grid.is_empty() || cfg.multipliers.is_empty() {
        return Err(FplmError::InvalidConfig("empty candidate grid".into()));
    }
    if cfg.m_grid.contains(&0) {
        return Err(FplmError::InvalidConfig(
            "truncation levels start at 1".into(),
        ));
    }
    if cfg.multipliers.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(FplmError::InvalidConfig(
            "bandwidth multipliers must be positive".into(),
        ));
    }
    Ok(())
}

/// Squared held-out errors of one fold for every candidate, `m` major.
/// `None` marks a candidate that could not be fitted on this fold.
fn fold_errors(
    data: &FunctionalDataset,
    fold: &[usize],
    k: usize,
    cfg: &CvConfig,
) -> Vec<Option<f64>> {
    let cells = cfg.m_grid.len() * cfg.multipliers.len();
    let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold[i] != k).collect();
    let test_idx: Vec<usize> = (0..data.len()).filter(|&i| fold[i] == k).collect();
    let Ok(train) = data.select(&train_idx) else {
        return vec![None; cells];
    };
    let Ok(dist) = pairwise_distances(train.t()) else {
        return vec![None; cells];
    };
    let max_m = cfg.m_grid.iter().copied().max().unwrap_or(1);
    let mut by_multiplier: Vec<Vec<Option<f64>>> = Vec::with_capacity(cfg.multipliers.len());
    for &c in &cfg.multipliers {
        let path = Bandwidth::Multiplier(c)
            .resolve(&dist)
            .and_then(|h| FplmPath::new(&train, &dist, h, cfg.kernel, max_m));
        let errs = cfg
            .m_grid
            .iter()
            .map(|&m| {
                let model = path.as_ref().ok()?.model(m).ok()?;
                let mut sse = 0.0;
                for &i in &test_idx {
                    let linear = inner_product(&model.b_hat, &data.x()[i]).ok()?;
                    let g = model.predict_g_or_nearest(&data.t()[i]).ok()?;
                    let e = data.y()[i] - linear - g;
                    sse += e * e;
                }
                Some(sse)
            })
            .collect();
        by_multiplier.push(errs);
    }
    let mut out = Vec::with_capacity(cells);
    for mi in 0..cfg.m_grid.len() {
        for errs in &by_multiplier {
            out.push(errs[mi]);
        }
    }
    out
}

/// K-fold cross-validation over `m_grid × multipliers`.
///
/// Ties go to the smaller `m`, then the smaller multiplier. Folds may run in
/// parallel; their errors are summed in fold order.
pub fn cross_validate(data: &FunctionalDataset, cfg: &CvConfig) -> Result<CvResult> {
    validate_cv(data.len(), cfg)?;
    let fold = fold_assignment(data.len(), cfg.folds, cfg.seed);
    let per_fold: Vec<Vec<Option<f64>>> = (0..cfg.folds)
        .into_par_iter()
        .map(|k| fold_errors(data, &fold, k, cfg))
        .collect();

    let n = data.len() as f64;
    let mut table = Vec::new();
    let mut cell = 0;
    for &m in &cfg.m_grid {
        for &multiplier in &cfg.multipliers {
            let mut total = 0.0;
            let mut failed_folds = 0;
            for errs in &per_fold {
                match errs[cell] {
                    Some(e) => total += e,
                    None => failed_folds += 1,
                }
            }
            table.push(CvCell {
                m,
                multiplier,
                mean_error: (failed_folds == 0).then_some(total / n),
                failed_folds,
            });
            cell += 1;
        }
    }

    let mut order: Vec<&CvCell> = table.iter().collect();
    order.sort_by(|a, b| a.m.cmp(&b.m).then(a.multiplier.total_cmp(&b.multiplier)));
    let mut best: Option<(&CvCell, f64)> = None;
    for c in order {
        if let Some(e) = c.mean_error {
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((c, e));
            }
        }
    }
    let (best, _) = best.ok_or_else(|| {
        FplmError::InvalidConfig("no candidate could be fitted on every fold".into())
    })?;
    Ok(CvResult {
        best_m: best.m,
        best_multiplier: best.multiplier,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{fourier_basis, l2_norm, Grid};

    fn unit() -> Grid {
        Grid::unit(101).unwrap()
    }

    fn phi(j: usize) -> Curve {
        fourier_basis(j, &unit()).unwrap()
    }

    fn toy_data(n: usize) -> FunctionalDataset {
        let x: Vec<Curve> = (0..n)
            .map(|i| {
                let a = ((i * 7 % 11) as f64 - 5.0) / 5.0;
                let b = ((i * 3 % 7) as f64 - 3.0) / 3.0;
                phi(1).scale(a).axpy(b, &phi(2)).unwrap()
            })
            .collect();
        let t: Vec<Curve> = (0..n)
            .map(|i| Curve::constant(unit(), (i as f64 * 0.37).sin()))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| inner_product(&phi(2), &x[i]).unwrap() + t[i].values()[0].powi(2))
            .collect();
        FunctionalDataset::new(x, t, y).unwrap()
    }

    #[test]
    fn fit_rejects_identical_t() {
        let x = vec![phi(1), phi(2), phi(3)];
        let t = vec![phi(1); 3];
        let d = FunctionalDataset::new(x, t, vec![1.0, 2.0, 3.0]).unwrap();
        let cfg = FitConfig::new(1, Bandwidth::Absolute(1.0), KernelSpec::Quadratic);
        assert!(matches!(
            fit_fplm(&d, &cfg),
            Err(FplmError::DegenerateData(_))
        ));
    }

    #[test]
    fn rank_error_names_rank() {
        let d = toy_data(20);
        let cfg = FitConfig::new(4, Bandwidth::Multiplier(1.0), KernelSpec::Quadratic);
        match fit_fplm(&d, &cfg) {
            Err(FplmError::RankDeficient { requested: 4, rank }) => assert!(rank <= 2),
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn model_invariants() {
        let d = toy_data(30);
        let cfg = FitConfig::new(2, Bandwidth::Multiplier(2.0), KernelSpec::Quadratic);
        let model = fit_fplm(&d, &cfg).unwrap();
        assert_eq!(model.partial_residuals.len(), 30);
        assert_eq!(model.coefficients.len(), 2);
        // in-sample ĝ agrees with the out-of-sample path bit for bit
        for (i, t) in d.t().iter().enumerate() {
            assert_eq!(model.predict_g(t).unwrap(), model.fitted_g[i]);
        }
    }

    #[test]
    fn constant_response_gives_zero_coefficient() {
        let mut d = toy_data(25);
        d = FunctionalDataset::new(d.x().to_vec(), d.t().to_vec(), vec![4.0; 25]).unwrap();
        let cfg = FitConfig::new(1, Bandwidth::Multiplier(1.0), KernelSpec::Quadratic);
        let model = fit_fplm(&d, &cfg).unwrap();
        assert!(l2_norm(&model.b_hat) < 1e-12);
        let g = model.predict_g(&d.t()[3]).unwrap();
        assert!((g - 4.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_composition() {
        let t_train = vec![Curve::constant(unit(), 0.0), Curve::constant(unit(), 0.5)];
        let model = FittedModel {
            b_hat: phi(1),
            m: 1,
            h: 1.0,
            kernel: KernelSpec::Quadratic,
            t_train: t_train.clone(),
            partial_residuals: vec![7.0, 0.0],
            coefficients: vec![1.0],
            eigenvalues_used: vec![1.0],
            fitted_g: vec![4.0, 3.0],
        };
        assert!((model.predict_g(&t_train[0]).unwrap() - 4.0).abs() < 1e-12);
        let (lin, g) = model
            .predict_parts(&Curve::zeros(unit()), &t_train[0])
            .unwrap();
        assert_eq!(lin, 0.0);
        assert!((g - 4.0).abs() < 1e-12);
        let y = model.predict(&phi(1).scale(3.0), &t_train[0]).unwrap();
        assert!((y - 7.0).abs() < 1e-9);
        let far = Curve::constant(unit(), 5.0);
        assert!(matches!(
            model.predict_g(&far),
            Err(FplmError::EmptyNeighborhood { .. })
        ));
        assert_eq!(model.predict_g_or_nearest(&far).unwrap(), 0.0);
    }

    #[test]
    fn flm_constant_response() {
        let z: Vec<Curve> = (0..10).map(|i| phi(1 + i % 3).scale(i as f64)).collect();
        let fit = fit_flm(&z, &[2.5; 10], 2).unwrap();
        assert!(l2_norm(&fit.b_hat) < 1e-12);
        assert!((fit.intercept - 2.5).abs() < 1e-12);
    }

    #[test]
    fn npfr_cases() {
        let z: Vec<Curve> = (0..5).map(|i| Curve::constant(unit(), i as f64)).collect();
        let fit = fit_npfr(&z, &[3.0; 5], 2.0, KernelSpec::Quadratic).unwrap();
        assert!((fit.predict(&Curve::constant(unit(), 1.5)).unwrap() - 3.0).abs() < 1e-12);
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let fit = fit_npfr(&z, &y, 0.1, KernelSpec::Quadratic).unwrap();
        for (zi, yi) in z.iter().zip(y) {
            assert_eq!(fit.predict(zi).unwrap(), yi);
        }
        assert!(fit_npfr(&z, &y, -1.0, KernelSpec::Quadratic).is_err());
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_assignment(23, 5, 9);
        for k in 0..5 {
            let c = f.iter().filter(|&&v| v == k).count();
            assert!(c == 4 || c == 5);
        }
        assert_eq!(f, fold_assignment(23, 5, 9));
        assert_ne!(f, fold_assignment(23, 5, 10));
    }

    #[test]
    fn cv_validation() {
        let d = toy_data(12);
        let base = CvConfig {
            m_grid: vec![1],
            multipliers: vec![1.0],
            folds: 3,
            seed: 1,
            kernel: KernelSpec::Quadratic,
        };
        let r = cross_validate(&d, &base).unwrap();
        assert_eq!((r.best_m, r.best_multiplier), (1, 1.0));
        assert_eq!(r.table.len(), 1);
        for bad in [
            CvConfig {
                folds: 1,
                ..base.clone()
            },
            CvConfig {
                folds: 13,
                ..base.clone()
            },
            CvConfig {
                m_grid: vec![],
                ..base.clone()
            },
            CvConfig {
                multipliers: vec![0.0],
                ..base.clone()
            },
        ] {
            assert!(matches!(
                cross_validate(&d, &bad),
                Err(FplmError::InvalidConfig(_))
            ));
        }
    }
}
