//! Functional partial linear regression.
//!
//! The model is `Y = ∫ b(s) X(s) ds + g(T) + ε`, where `X` and `T` are curves.
//! `b` is estimated by principal components of the covariates after
//! kernel-smoothing out their dependence on `T`, and `g` by Nadaraya–Watson
//! smoothing of the partial residuals.
//!
//! Modules, bottom up:
//!
//! * [`funcspace`]: grids, curves and trapezoidal `L²` geometry;
//! * [`kernelreg`]: kernels, bandwidths and Nadaraya–Watson weights;
//! * [`fpca`]: eigensystem of the empirical second-moment operator;
//! * [`fplm`]: the estimator, comparison fits and cross-validation;
//! * [`simstudy`]: simulation design, error criteria and benchmarks;
//! * [`cliio`]: file formats and the command-line front end.

pub mod cliio;
pub mod error;
pub mod fpca;
pub mod fplm;
pub mod funcspace;
pub mod kernelreg;
pub mod simstudy;

pub use error::{FplmError, Result};
pub use fpca::{cross_moment, gram_eigensystem, pc_scores, CrossMoment, EigenSystem};
pub use fplm::{
    cross_validate, fit_flm, fit_fplm, fit_npfr, predict, predict_g, Bandwidth, CvConfig, CvResult,
    FitConfig, FittedModel, FlmModel, NpfrModel,
};
pub use funcspace::{
    concat, fourier_basis, inner_product, l2_distance, l2_norm, Curve, FunctionalDataset, Grid,
};
pub use kernelreg::{
    eval_kernel, median_bandwidth, nw_regress, nw_weights, pairwise_distances, residualize_curves,
    residualize_scalar, training_weight_matrix, KernelSpec, WeightMatrix,
};
pub use simstudy::{
    error_report, generate, run_benchmark, BenchmarkMode, BenchmarkSpec, BenchmarkTable,
    ErrorReport, SimConfig, TruthBundle,
};
