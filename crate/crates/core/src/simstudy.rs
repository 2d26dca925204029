//! Monte Carlo design for the partial linear model and the benchmark driver.
//!
//! Data follow `Y = ⟨b, X⟩ + g(T) + ε` on `[0, 1]` with
//!
//! * `b = Σ bⱼ φⱼ`, `b₁ = 0.5`, `bⱼ = 4 j⁻²`;
//! * `X = Σ ξⱼ j⁻¹ φⱼ`, `ξⱼ ~ U[−√3, √3]`;
//! * `T(s) = sin(ωs) + (a − π)s + d` with `ω ~ U[0, 2π)` and
//!   `a = ξ₁/(2√3) + 1/2`, `d = ξ₂/(2√3) + 1/2` (or independent `U(0, 1)`
//!   when the X–T dependence is switched off);
//! * `g(t) = ∫ |t(s)| (1 − cos πs) ds`;
//! * `ε ~ N(0, σ²)`.
//!
//! Series are truncated at `J` terms. Each replication draws from its own
//! ChaCha stream keyed by a seed derived from the master seed and the
//! replication index, so results do not depend on scheduling.

use crate::error::{FplmError, Result};
use crate::fplm::{FittedModel, FlmPath, FplmPath};
use crate::funcspace::{fourier_value, inner_product, Curve, FunctionalDataset, Grid};
use crate::kernelreg::{pairwise_distances, KernelSpec, WeightMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use std::f64::consts::PI;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
    pub grid_points: usize,
    pub series_truncation: usize,
    /// Tie `a` and `d` of each `T` to `ξ₁`, `ξ₂` of the matching `X`.
    pub dependence: bool,
    /// Include `g(T)` in the response; off gives an exactly linear model.
    pub include_g: bool,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            noise_sd: 0.5,
            seed,
            grid_points: crate::funcspace::DEFAULT_GRID_POINTS,
            series_truncation: 50,
            dependence: true,
            include_g: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(FplmError::InvalidConfig(format!(
                "n must be ≥ 2, got {}",
                self.n
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(FplmError::InvalidConfig(format!(
                "noise sd must be ≥ 0, got {}",
                self.noise_sd
            )));
        }
        if self.grid_points < 2 {
            return Err(FplmError::InvalidConfig("grid needs ≥ 2 points".into()));
        }
        if self.series_truncation < 3 {
            return Err(FplmError::InvalidConfig(
                "series truncation must be ≥ 3".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::unit(self.grid_points)
    }
}

/// Truth terms behind a simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthBundle {
    pub b_true: Curve,
    /// `g(Tᵢ)`.
    pub g_values: Vec<f64>,
    /// `⟨b, Xᵢ⟩`.
    pub linear_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `‖b̂ − b‖²`.
    pub mse1: f64,
    /// Mean of `(ĝ(Tᵢ) − g(Tᵢ))²`.
    pub mse2: f64,
    /// Mean of `(⟨b̂ − b, Xᵢ⟩ + ĝ(Tᵢ) − g(Tᵢ))²`.
    pub mse3: f64,
}

/// Coefficient of the true slope function on the `j`-th cosine.
pub fn true_coefficient(j: usize) -> f64 {
    if j == 1 {
        0.5
    } else {
        4.0 / (j * j) as f64
    }
}

/// Cosine basis sampled once for a grid, rows `j = 1..=J`.
#[derive(Debug, Clone)]
pub struct SeriesBasis {
    grid: Grid,
    rows: Vec<Vec<f64>>,
}

impl SeriesBasis {
    pub fn new(grid: &Grid, terms: usize) -> Result<Self> {
        grid.ensure_unit()?;
        let points = grid.points();
        let rows = (1..=terms)
            .map(|j| points.iter().map(|&s| fourier_value(j, s)).collect())
            .collect();
        Ok(Self { grid: *grid, rows })
    }

    pub fn terms(&self) -> usize {
        self.rows.len()
    }

    pub fn combine(&self, coef: &[f64]) -> Curve {
        let mut values = vec![0.0; self.grid.len()];
        for (c, row) in coef.iter().zip(&self.rows) {
            for (v, r) in values.iter_mut().zip(row) {
                *v += c * r;
            }
        }
        Curve::from_parts(self.grid, values)
    }

    pub fn true_b(&self) -> Curve {
        let coef: Vec<f64> = (1..=self.terms()).map(true_coefficient).collect();
        self.combine(&coef)
    }

    /// Draws `X = Σ ξⱼ j⁻¹ φⱼ` and returns it with the raw `ξ`.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> (Curve, Vec<f64>) {
        let dist = Uniform::new_inclusive(-SQRT_3, SQRT_3).expect("valid bounds");
        let xi: Vec<f64> = (0..self.terms()).map(|_| dist.sample(rng)).collect();
        (self.x_from_scores(&xi), xi)
    }

    pub fn x_from_scores(&self, xi: &[f64]) -> Curve {
        let coef: Vec<f64> = xi
            .iter()
            .enumerate()
            .map(|(k, x)| x / (k + 1) as f64)
            .collect();
        self.combine(&coef)
    }
}

pub fn true_b(grid: &Grid, terms: usize) -> Result<Curve> {
    Ok(SeriesBasis::new(grid, terms)?.true_b())
}

pub fn sample_x<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Grid,
    terms: usize,
) -> Result<(Curve, Vec<f64>)> {
    Ok(SeriesBasis::new(grid, terms)?.sample_x(rng))
}

/// `T(s) = sin(ωs) + (a − π)s + d`.
pub fn t_curve(grid: &Grid, omega: f64, a: f64, d: f64) -> Result<Curve> {
    grid.ensure_unit()?;
    Curve::from_fn(*grid, |s| (omega * s).sin() + (a - PI) * s + d)
}

/// `(a, d)` as functions of `(ξ₁, ξ₂)`.
pub fn dependent_shift(xi1: f64, xi2: f64) -> (f64, f64) {
    (xi1 / (2.0 * SQRT_3) + 0.5, xi2 / (2.0 * SQRT_3) + 0.5)
}

pub fn sample_t<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Grid,
    xi1: f64,
    xi2: f64,
    dependence: bool,
) -> Result<Curve> {
    let omega = rng.random::<f64>() * 2.0 * PI;
    let (a, d) = if dependence {
        dependent_shift(xi1, xi2)
    } else {
        (rng.random::<f64>(), rng.random::<f64>())
    };
    t_curve(grid, omega, a, d)
}

/// `g(t) = ∫₀¹ |t(s)| (1 − cos πs) ds` by the trapezoidal rule.
pub fn true_g(t: &Curve) -> Result<f64> {
    t.grid().ensure_unit()?;
    let integrand: Vec<f64> = t
        .grid()
        .points()
        .iter()
        .zip(t.values())
        .map(|(s, v)| v.abs() * (1.0 - (PI * s).cos()))
        .collect();
    Ok(t.grid().integrate(&integrand))
}

/// Draws one sample from the design.
pub fn generate(config: &SimConfig) -> Result<(FunctionalDataset, TruthBundle)> {
    config.validate()?;
    let grid = config.grid()?;
    let basis = SeriesBasis::new(&grid, config.series_truncation)?;
    let b_true = basis.true_b();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut xs = Vec::with_capacity(config.n);
    let mut ts = Vec::with_capacity(config.n);
    let mut ys = Vec::with_capacity(config.n);
    let mut g_values = Vec::with_capacity(config.n);
    let mut linear_values = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let (x, xi) = basis.sample_x(&mut rng);
        let t = sample_t(&mut rng, &grid, xi[0], xi[1], config.dependence)?;
        let z: f64 = StandardNormal.sample(&mut rng);
        let linear = inner_product(&b_true, &x)?;
        let g = if config.include_g { true_g(&t)? } else { 0.0 };
        ys.push(linear + g + config.noise_sd * z);
        linear_values.push(linear);
        g_values.push(g);
        xs.push(x);
        ts.push(t);
    }
    Ok((
        FunctionalDataset::new(xs, ts, ys)?,
        TruthBundle {
            b_true,
            g_values,
            linear_values,
        },
    ))
}

/// Error criteria of a partial linear fit against the truth of its own sample.
pub fn error_report(
    model: &FittedModel,
    data: &FunctionalDataset,
    truth: &TruthBundle,
) -> Result<ErrorReport> {
    let n = data.len();
    if truth.g_values.len() != n || truth.linear_values.len() != n {
        return Err(FplmError::DimensionMismatch {
            expected: n,
            got: truth.g_values.len(),
        });
    }
    let diff = model.b_hat.sub(&truth.b_true)?;
    let mse1 = inner_product(&diff, &diff)?;
    let in_sample = model.fitted_g.len() == n && model.t_train.as_slice() == data.t();
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for i in 0..n {
        let g_hat = if in_sample {
            model.fitted_g[i]
        } else {
            model.predict_g(&data.t()[i])?
        };
        let eg = g_hat - truth.g_values[i];
        let el = inner_product(&diff, &data.x()[i])?;
        s2 += eg * eg;
        s3 += (el + eg) * (el + eg);
    }
    Ok(ErrorReport {
        mse1,
        mse2: s2 / n as f64,
        mse3: s3 / n as f64,
    })
}

/// Mean squared error of predictions of the regression function
/// `⟨b, Xᵢ⟩ + g(Tᵢ)`.
pub fn regression_mse(predictions: &[f64], truth: &TruthBundle) -> Result<f64> {
    let n = predictions.len();
    if truth.linear_values.len() != n {
        return Err(FplmError::DimensionMismatch {
            expected: truth.linear_values.len(),
            got: n,
        });
    }
    let sse: f64 = predictions
        .iter()
        .zip(truth.linear_values.iter().zip(&truth.g_values))
        .map(|(p, (l, g))| (p - l - g).powi(2))
        .sum();
    Ok(sse / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkMode {
    /// Partial linear fit on `(X, T)`.
    Fplm,
    /// Functional linear regression on `X` and `T` concatenated over `[0, 2]`.
    Flm,
    /// Nadaraya–Watson regression on the concatenated covariate.
    Npfr,
}

impl BenchmarkMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkMode::Fplm => "fplm",
            BenchmarkMode::Flm => "flm",
            BenchmarkMode::Npfr => "npfr",
        }
    }

    fn uses_m(self) -> bool {
        !matches!(self, BenchmarkMode::Npfr)
    }

    fn uses_multiplier(self) -> bool {
        !matches!(self, BenchmarkMode::Flm)
    }
}

impl std::str::FromStr for BenchmarkMode {
    type Err = FplmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fplm" => Ok(BenchmarkMode::Fplm),
            "flm" => Ok(BenchmarkMode::Flm),
            "npfr" => Ok(BenchmarkMode::Npfr),
            other => Err(FplmError::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub m_grid: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub replications: usize,
    pub mode: BenchmarkMode,
    pub kernel: KernelSpec,
}

impl BenchmarkSpec {
    /// The 5 × 5 layout `m ∈ {1..5}`, multipliers `{1, 2, 4, 8, 16}`.
    pub fn standard(mode: BenchmarkMode, replications: usize) -> Self {
        Self {
            m_grid: vec![1, 2, 3, 4, 5],
            multipliers: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            replications,
            mode,
            kernel: KernelSpec::Quadratic,
        }
    }

    fn cell_keys(&self) -> Vec<(Option<usize>, Option<f64>)> {
        let ms: Vec<Option<usize>> = if self.mode.uses_m() {
            self.m_grid.iter().map(|&m| Some(m)).collect()
        } else {
            vec![None]
        };
        let cs: Vec<Option<f64>> = if self.mode.uses_multiplier() {
            self.multipliers.iter().map(|&c| Some(c)).collect()
        } else {
            vec![None]
        };
        ms.iter()
            .flat_map(|m| cs.iter().map(move |c| (*m, *c)))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(FplmError::InvalidConfig("replications must be ≥ 1".into()));
        }
        if self.mode.uses_m() && (self.m_grid.is_empty() || self.m_grid.contains(&0)) {
            return Err(FplmError::InvalidConfig(
                "truncation grid must be nonempty with m ≥ 1".into(),
            ));
        }
        if self.mode.uses_multiplier()
            && (self.multipliers.is_empty()
                || self
                    .multipliers
                    .iter()
                    .any(|c| !(c.is_finite() && *c > 0.0)))
        {
            return Err(FplmError::InvalidConfig(
                "multipliers must be nonempty and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Errors of one cell in one replication; `mse1`/`mse2` are `None` for the
/// comparison modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellErrors {
    pub mse1: Option<f64>,
    pub mse2: Option<f64>,
    pub mse3: f64,
}

impl From<ErrorReport> for CellErrors {
    fn from(r: ErrorReport) -> Self {
        Self {
            mse1: Some(r.mse1),
            mse2: Some(r.mse2),
            mse3: r.mse3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCell {
    pub m: Option<usize>,
    pub multiplier: Option<f64>,
    pub mse1: Option<f64>,
    pub mse2: Option<f64>,
    pub mse3: Option<f64>,
    pub completed: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub mode: BenchmarkMode,
    pub n: usize,
    pub replications: usize,
    /// `m` major, multipliers minor, in grid order.
    pub cells: Vec<BenchmarkCell>,
}

impl BenchmarkTable {
    pub fn cell(&self, m: Option<usize>, multiplier: Option<f64>) -> Option<&BenchmarkCell> {
        self.cells
            .iter()
            .find(|c| c.m == m && c.multiplier == multiplier)
    }

    /// Cell with the smallest mean of the chosen criterion.
    pub fn best_by(
        &self,
        metric: impl Fn(&BenchmarkCell) -> Option<f64>,
    ) -> Option<&BenchmarkCell> {
        self.cells
            .iter()
            .filter_map(|c| metric(c).map(|v| (c, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }
}

/// Seed of replication `r`, a SplitMix64 mix of the master seed and the index.
pub fn child_seed(master: u64, replication: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master.wrapping_add(mix(replication.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// One replication of the benchmark: every cell's errors, in cell order.
pub fn replicate_once(
    config: &SimConfig,
    spec: &BenchmarkSpec,
    replication: usize,
) -> Result<Vec<Option<CellErrors>>> {
    let child = SimConfig {
        seed: child_seed(config.seed, replication as u64),
        ..*config
    };
    let (data, truth) = generate(&child)?;
    let keys = spec.cell_keys();
    let max_m = spec.m_grid.iter().copied().max().unwrap_or(1);
    let out = match spec.mode {
        BenchmarkMode::Fplm => {
            let dist = pairwise_distances(data.t())?;
            let h0 = dist.median()?;
            let paths: Vec<Result<FplmPath>> = spec
                .multipliers
                .iter()
                .map(|c| FplmPath::new(&data, &dist, c * h0, spec.kernel, max_m))
                .collect();
            keys.iter()
                .map(|(m, c)| {
                    let ci = spec.multipliers.iter().position(|v| Some(*v) == *c)?;
                    let model = paths[ci].as_ref().ok()?.model(m.unwrap_or(1)).ok()?;
                    error_report(&model, &data, &truth)
                        .ok()
                        .map(CellErrors::from)
                })
                .collect()
        }
        BenchmarkMode::Flm => {
            let z = data.concatenated()?;
            let path = FlmPath::new(&z, data.y(), max_m);
            keys.iter()
                .map(|(m, _)| {
                    let fit = path.as_ref().ok()?.model(m.unwrap_or(1)).ok()?;
                    let preds = z
                        .iter()
                        .map(|zi| fit.predict(zi))
                        .collect::<Result<Vec<_>>>()
                        .ok()?;
                    Some(CellErrors {
                        mse1: None,
                        mse2: None,
                        mse3: regression_mse(&preds, &truth).ok()?,
                    })
                })
                .collect()
        }
        BenchmarkMode::Npfr => {
            let z = data.concatenated()?;
            let dist = pairwise_distances(&z)?;
            let h0 = dist.median()?;
            keys.iter()
                .map(|(_, c)| {
                    let w = WeightMatrix::from_distances(&dist, c.unwrap_or(1.0) * h0, spec.kernel)
                        .ok()?;
                    let preds = w.smooth(data.y()).ok()?;
                    Some(CellErrors {
                        mse1: None,
                        mse2: None,
                        mse3: regression_mse(&preds, &truth).ok()?,
                    })
                })
                .collect()
        }
    };
    Ok(out)
}

/// Runs `spec.replications` replications, possibly in parallel, and
/// averages each cell over the replications that completed it.
pub fn run_benchmark(config: &SimConfig, spec: &BenchmarkSpec) -> Result<BenchmarkTable> {
    config.validate()?;
    spec.validate()?;
    let keys = spec.cell_keys();
    let per_rep: Vec<Vec<Option<CellErrors>>> = (0..spec.replications)
        .into_par_iter()
        .map(|r| replicate_once(config, spec, r).unwrap_or_else(|_| vec![None; keys.len()]))
        .collect();

    let cells = keys
        .iter()
        .enumerate()
        .map(|(k, &(m, multiplier))| {
            let done: Vec<CellErrors> = per_rep.iter().filter_map(|rep| rep[k]).collect();
            let completed = done.len();
            let mean = |vals: Vec<f64>| -> Option<f64> {
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            let all_some = |f: fn(&CellErrors) -> Option<f64>| -> Option<Vec<f64>> {
                done.iter().map(f).collect()
            };
            BenchmarkCell {
                m,
                multiplier,
                mse1: all_some(|e| e.mse1).and_then(mean),
                mse2: all_some(|e| e.mse2).and_then(mean),
                mse3: mean(done.iter().map(|e| e.mse3).collect()),
                completed,
                missing: spec.replications - completed,
            }
        })
        .collect();
    Ok(BenchmarkTable {
        mode: spec.mode,
        n: config.n,
        replications: spec.replications,
        cells,
    })
}

/// `(s, b(s), b̂(s))` rows over the grid, for plotting the fitted slope.
pub fn export_bhat(model: &FittedModel, b_true: &Curve) -> Result<Vec<[f64; 3]>> {
    slope_rows(&model.b_hat, b_true)
}

pub fn slope_rows(b_hat: &Curve, b_true: &Curve) -> Result<Vec<[f64; 3]>> {
    if b_hat.grid() != b_true.grid() {
        return Err(FplmError::GridMismatch(
            "fitted and true slope functions live on different grids".into(),
        ));
    }
    Ok(b_true
        .grid()
        .points()
        .into_iter()
        .zip(b_true.values().iter().zip(b_hat.values()))
        .map(|(s, (b, bh))| [s, *b, *bh])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{fourier_basis, l2_norm};

    fn unit() -> Grid {
        Grid::unit(201).unwrap()
    }

    #[test]
    fn true_b_coefficients() {
        let b = true_b(&unit(), 50).unwrap();
        let c1 = inner_product(&b, &fourier_basis(1, &unit()).unwrap()).unwrap();
        let c2 = inner_product(&b, &fourier_basis(2, &unit()).unwrap()).unwrap();
        let c51 = inner_product(&b, &fourier_basis(51, &unit()).unwrap()).unwrap();
        assert!((c1 - 0.5).abs() < 1e-4);
        assert!((c2 - 1.0).abs() < 1e-4);
        assert!(c51.abs() < 1e-4);
        assert!(true_b(&Grid::new(0.0, 2.0, 11).unwrap(), 5).is_err());
    }

    #[test]
    fn x_from_scores_cases() {
        let basis = SeriesBasis::new(&unit(), 10).unwrap();
        let zero = basis.x_from_scores(&[0.0; 10]);
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let mut xi = [0.0; 10];
        xi[0] = SQRT_3;
        let x = basis.x_from_scores(&xi);
        assert!((l2_norm(&x) - SQRT_3).abs() < 1e-4);
    }

    #[test]
    fn xi_draws_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, xi) = sample_x(&mut rng, &unit(), 50).unwrap();
        assert_eq!(xi.len(), 50);
        assert!(xi.iter().all(|v| v.abs() <= SQRT_3));
    }

    #[test]
    fn t_curve_cases() {
        let g = unit();
        let (a, d) = dependent_shift(0.0, 0.0);
        assert_eq!((a, d), (0.5, 0.5));
        let t = t_curve(&g, 0.0, a, d).unwrap();
        for (s, v) in g.points().iter().zip(t.values()) {
            assert!((v - ((0.5 - PI) * s + 0.5)).abs() < 1e-12);
        }
        assert!((dependent_shift(SQRT_3, 0.0).0 - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dep in [true, false] {
            let t = sample_t(&mut rng, &g, 0.3, -1.2, dep).unwrap();
            let d = t.values()[0];
            assert!((0.0..=1.0).contains(&d));
            if dep {
                assert!((d - dependent_shift(0.3, -1.2).1).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn g_cases() {
        let g = unit();
        assert_eq!(true_g(&Curve::zeros(g)).unwrap(), 0.0);
        assert!((true_g(&Curve::constant(g, 1.0)).unwrap() - 1.0).abs() < 1e-4);
        assert!((true_g(&Curve::constant(g, -1.0)).unwrap() - 1.0).abs() < 1e-4);
        let lin = Curve::from_fn(g, |s| s).unwrap();
        let expect = 0.5 + 2.0 / (PI * PI);
        assert!((true_g(&lin).unwrap() - expect).abs() < 1e-4);
    }

    #[test]
    fn generate_contracts() {
        let mut cfg = SimConfig::new(30, 11);
        cfg.noise_sd = 0.0;
        let (d, truth) = generate(&cfg).unwrap();
        for i in 0..30 {
            assert_eq!(d.y()[i], truth.linear_values[i] + truth.g_values[i]);
        }
        let (d2, _) = generate(&cfg).unwrap();
        assert_eq!(d, d2);
        assert!(generate(&SimConfig { n: 1, ..cfg }).is_err());
        assert!(generate(&SimConfig {
            series_truncation: 2,
            ..cfg
        })
        .is_err());
        assert!(generate(&SimConfig {
            noise_sd: -1.0,
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn child_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|r| child_seed(42, r)).collect();
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), 100);
        assert_ne!(child_seed(1, 0), child_seed(2, 0));
    }

    #[test]
    fn export_rows() {
        let b = true_b(&unit(), 50).unwrap();
        let rows = slope_rows(&b, &b).unwrap();
        assert_eq!(rows.len(), 201);
        assert!(rows.iter().all(|r| r[1] == r[2]));
        let at_zero = 0.5
            + (2..=50)
                .map(|j| 4.0 / (j * j) as f64 * 2f64.sqrt())
                .sum::<f64>();
        assert!((rows[0][1] - at_zero).abs() < 1e-12);
        assert!(slope_rows(&Curve::zeros(Grid::unit(11).unwrap()), &b).is_err());
    }

    #[test]
    fn cell_layout() {
        assert_eq!(
            BenchmarkSpec::standard(BenchmarkMode::Fplm, 1)
                .cell_keys()
                .len(),
            25
        );
        let flm = BenchmarkSpec::standard(BenchmarkMode::Flm, 1).cell_keys();
        assert_eq!(flm.len(), 5);
        assert!(flm.iter().all(|(m, c)| m.is_some() && c.is_none()));
        let np = BenchmarkSpec::standard(BenchmarkMode::Npfr, 1).cell_keys();
        assert!(np.iter().all(|(m, c)| m.is_none() && c.is_some()));
    }
}
