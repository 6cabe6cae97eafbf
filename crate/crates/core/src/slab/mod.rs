//! One-class slab SVM training and prediction, plus the single-hyperplane
//! one-class SVM baseline.
//!
//! The slab classifier solves the dual
//!
//! ```text
//! minimize    0.5 (a - abar)' K (a - abar)
//! subject to  0 <= a_i    <= 1/(nu1 m),    sum a_i    = 1
//!             0 <= abar_i <= eps/(nu2 m),  sum abar_i = eps
//! ```
//!
//! over `z = (a, abar)` and recovers the offsets `rho1`, `rho2` as mean
//! scores over the support vectors whose dual variables are strictly
//! interior to their box, i.e. the samples that sit exactly on the lower
//! and upper hyperplanes. A probe is positive when its score lies strictly
//! inside the slab `(rho1, rho2)`.

mod io;

pub use io::{
    load_model, load_ocsvm_model, load_slab_model, save_ocsvm_model, save_slab_model, AnyModel,
    ModelIoError,
};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::kernels::{self, GramMatrix, KernelError, KernelSpec};
use crate::qp::{self, QpError, QpProblem, QuadTerm, SolveStatus, SolverConfig};

/// Dual coefficients below this magnitude are dropped from the retained
/// support set after the offsets have been computed from the full set.
const PRUNE_TOLERANCE: f64 = 1e-8;

/// `rho2 - rho1` at or below this marks a degenerate (zero-width) slab.
const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training requires at least {required} samples, got {got}")]
    TooFewSamples { got: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Solver(#[from] QpError),
    #[error("gram matrix is {gram} x {gram} but dual vectors have length {duals}")]
    GramMismatch { gram: usize, duals: usize },
}

/// Training parameters for the slab classifier.
#[derive(Debug, Clone)]
pub struct SlabTrainConfig {
    /// Outlier-fraction bound for the lower hyperplane, in (0, 1].
    pub nu1: f64,
    /// Outlier-fraction bound for the upper hyperplane, in (0, 1].
    pub nu2: f64,
    /// Weight of the upper-hyperplane terms; must not equal 1, which would
    /// admit the trivial solution `a = abar`.
    pub epsilon: f64,
    pub kernel: KernelSpec,
    pub solver: SolverConfig,
    /// Band width, relative to each box width, for deciding whether a dual
    /// variable is strictly interior (on-plane) or at a bound.
    pub sv_bound_tolerance: f64,
}

impl SlabTrainConfig {
    /// Defaults: `nu1 = 0.10`, `nu2 = 0.01`, `epsilon = 2/3`.
    pub fn new(kernel: KernelSpec) -> Self {
        Self {
            nu1: 0.10,
            nu2: 0.01,
            epsilon: 2.0 / 3.0,
            kernel,
            solver: SolverConfig::default(),
            sv_bound_tolerance: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        for (name, v) in [("nu1", self.nu1), ("nu2", self.nu2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(TrainError::InvalidParameter(format!(
                    "{name} = {v} must lie in (0, 1]"
                )));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(TrainError::InvalidParameter(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if (self.epsilon - 1.0).abs() < 1e-9 {
            return Err(TrainError::InvalidParameter(
                "epsilon must not equal 1 (trivial solution a = abar)".into(),
            ));
        }
        if !(self.sv_bound_tolerance > 0.0 && self.sv_bound_tolerance < 0.5) {
            return Err(TrainError::InvalidParameter(format!(
                "sv_bound_tolerance = {} must lie in (0, 0.5)",
                self.sv_bound_tolerance
            )));
        }
        Ok(())
    }
}

/// Trained one-class slab SVM.
#[derive(Debug, Clone)]
pub struct SlabModel {
    pub(crate) kernel: KernelSpec,
    pub(crate) nu1: f64,
    pub(crate) nu2: f64,
    pub(crate) epsilon: f64,
    pub(crate) sv_bound_tolerance: f64,
    /// All training rows; serialization and KKT diagnostics need the full
    /// dual vectors, not just the pruned support set.
    pub(crate) samples: FeatureMatrix,
    pub(crate) alpha: Vec<f64>,
    pub(crate) alpha_bar: Vec<f64>,
    pub(crate) rho1: f64,
    pub(crate) rho2: f64,
    pub(crate) n_sv1: usize,
    pub(crate) n_sv2: usize,
    /// Rows with `|alpha - alpha_bar| > PRUNE_TOLERANCE`; the only rows
    /// scoring has to touch.
    pub(crate) retained: Vec<usize>,
    pub(crate) retained_coeffs: Vec<f64>,
    pub(crate) converged: bool,
    pub(crate) offset_fallback: bool,
    pub(crate) degenerate: bool,
    pub(crate) solver_iterations: usize,
}

impl SlabModel {
    pub fn m(&self) -> usize {
        self.samples.rows()
    }

    pub fn dim(&self) -> usize {
        self.samples.cols()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_bar(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// Count of support vectors exactly on the lower / upper hyperplane.
    pub fn n_sv(&self) -> (usize, usize) {
        (self.n_sv1, self.n_sv2)
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// True when an offset had to be recovered without any strictly
    /// interior dual variable for its plane.
    pub fn offset_fallback(&self) -> bool {
        self.offset_fallback
    }

    /// True when the two hyperplanes collapsed onto each other.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn solver_iterations(&self) -> usize {
        self.solver_iterations
    }

    pub fn retained_count(&self) -> usize {
        self.retained.len()
    }

    /// The full training set, one row per dual variable pair.
    pub fn training_rows(&self) -> &FeatureMatrix {
        &self.samples
    }

    /// SVM score `sum_i (alpha_i - alpha_bar_i) k(x, x_i)` over the
    /// retained support vectors.
    pub fn score(&self, x: &[f64]) -> Result<f64, KernelError> {
        let mut s = 0.0;
        for (&idx, &coeff) in self.retained.iter().zip(&self.retained_coeffs) {
            s += coeff * kernels::eval_kernel(&self.kernel, self.samples.row(idx), x)?;
        }
        Ok(s)
    }

    /// `+1` when the score lies strictly inside the slab, else `-1`;
    /// scores exactly on a hyperplane are negative.
    pub fn predict(&self, x: &[f64]) -> Result<i8, KernelError> {
        let s = self.score(x)?;
        Ok(if (s - self.rho1) * (self.rho2 - s) > 0.0 {
            1
        } else {
            -1
        })
    }
}

/// Trained one-class SVM baseline (single hyperplane, single offset).
#[derive(Debug, Clone)]
pub struct OcsvmModel {
    pub(crate) kernel: KernelSpec,
    pub(crate) nu: f64,
    pub(crate) samples: FeatureMatrix,
    pub(crate) alpha: Vec<f64>,
    pub(crate) rho: f64,
    pub(crate) n_sv: usize,
    pub(crate) retained: Vec<usize>,
    pub(crate) retained_coeffs: Vec<f64>,
    pub(crate) converged: bool,
    pub(crate) offset_fallback: bool,
    pub(crate) solver_iterations: usize,
}

impl OcsvmModel {
    pub fn m(&self) -> usize {
        self.samples.rows()
    }

    pub fn dim(&self) -> usize {
        self.samples.cols()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn offset_fallback(&self) -> bool {
        self.offset_fallback
    }

    /// Count of support vectors exactly on the hyperplane.
    pub fn n_sv(&self) -> usize {
        self.n_sv
    }

    pub fn solver_iterations(&self) -> usize {
        self.solver_iterations
    }

    /// The full training set, one row per dual variable.
    pub fn training_rows(&self) -> &FeatureMatrix {
        &self.samples
    }

    pub fn score(&self, x: &[f64]) -> Result<f64, KernelError> {
        let mut s = 0.0;
        for (&idx, &coeff) in self.retained.iter().zip(&self.retained_coeffs) {
            s += coeff * kernels::eval_kernel(&self.kernel, self.samples.row(idx), x)?;
        }
        Ok(s)
    }

    /// `+1` when the score exceeds the offset, else `-1` (boundary is
    /// negative).
    pub fn predict(&self, x: &[f64]) -> Result<i8, KernelError> {
        Ok(if self.score(x)? > self.rho { 1 } else { -1 })
    }
}

/// Offsets recovered from the KKT conditions, with on-plane counts and
/// degeneracy flags.
#[derive(Debug, Clone, Copy)]
pub struct Offsets {
    pub rho1: f64,
    pub rho2: f64,
    pub n_sv1: usize,
    pub n_sv2: usize,
    pub fallback_lower: bool,
    pub fallback_upper: bool,
    pub degenerate: bool,
}

fn dual_scores(gram: &GramMatrix, alpha: &[f64], alpha_bar: &[f64]) -> Vec<f64> {
    let m = gram.m();
    let coeff = DVector::from_fn(m, |j, _| alpha[j] - alpha_bar[j]);
    let s = gram.values() * coeff;
    s.iter().copied().collect()
}

/// `rho1` is the mean score over every sample with `alpha > 0`: the lower
/// plane's full support set. Samples at the `1/(nu1 m)` cap score below the
/// plane, so including them pulls `rho1` under the on-plane level and most
/// of the capped samples end up inside the slab; with an on-plane-only mean
/// the slab excludes the whole `nu1 + nu2` dual budget and the kept
/// fraction cannot exceed `1 - nu1 - nu2`. `rho2` is the mean over
/// `alpha_bar` strictly interior to `[0, eps/(nu2 m)]`, so the upper plane
/// stays where the on-plane samples put it. An empty set falls back to the
/// tightest score among the samples that are not outlier candidates, and
/// is flagged.
pub fn compute_offsets(
    gram: &GramMatrix,
    alpha: &[f64],
    alpha_bar: &[f64],
    config: &SlabTrainConfig,
) -> Result<Offsets, TrainError> {
    let m = gram.m();
    if alpha.len() != m || alpha_bar.len() != m {
        return Err(TrainError::GramMismatch {
            gram: m,
            duals: alpha.len().min(alpha_bar.len()),
        });
    }
    config.validate()?;
    let scores = dual_scores(gram, alpha, alpha_bar);
    let cap1 = 1.0 / (config.nu1 * m as f64);
    let cap2 = config.epsilon / (config.nu2 * m as f64);
    let band1 = config.sv_bound_tolerance * cap1;
    let band2 = config.sv_bound_tolerance * cap2;

    let mean_over = |pred: &dyn Fn(usize) -> bool| -> Option<(f64, usize)> {
        let mut sum = 0.0;
        let mut count = 0;
        for (i, &s) in scores.iter().enumerate() {
            if pred(i) {
                sum += s;
                count += 1;
            }
        }
        (count > 0).then(|| (sum / count as f64, count))
    };

    let lower_support = mean_over(&|i| alpha[i] > band1);
    let upper_interior = mean_over(&|i| alpha_bar[i] > band2 && alpha_bar[i] < cap2 - band2);

    let (rho1, n_sv1, fallback_lower) = match lower_support {
        Some((mean, count)) => (mean, count, false),
        None => {
            let candidates: Vec<f64> = (0..m)
                .filter(|&i| alpha[i] <= band1)
                .map(|i| scores[i])
                .collect();
            let pool = if candidates.is_empty() {
                &scores
            } else {
                &candidates
            };
            let min = pool.iter().copied().fold(f64::INFINITY, f64::min);
            (min, 0, true)
        }
    };
    let (rho2, n_sv2, fallback_upper) = match upper_interior {
        Some((mean, count)) => (mean, count, false),
        None => {
            let candidates: Vec<f64> = (0..m)
                .filter(|&i| alpha_bar[i] <= band2)
                .map(|i| scores[i])
                .collect();
            let pool = if candidates.is_empty() {
                &scores
            } else {
                &candidates
            };
            let max = pool.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (max, 0, true)
        }
    };

    Ok(Offsets {
        rho1,
        rho2,
        n_sv1,
        n_sv2,
        fallback_lower,
        fallback_upper,
        degenerate: rho2 - rho1 <= DEGENERACY_TOLERANCE,
    })
}

fn retained_set(alpha: &[f64], alpha_bar: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut coeffs = Vec::new();
    for i in 0..alpha.len() {
        let c = alpha[i] - alpha_bar[i];
        if c.abs() > PRUNE_TOLERANCE {
            idx.push(i);
            coeffs.push(c);
        }
    }
    (idx, coeffs)
}

/// Trains the slab classifier on the rows of `x`.
///
/// A solver that stops on its iteration budget still yields a model, with
/// `converged()` reporting `false`; hard failures (infeasibility, numeric
/// breakdown) are errors.
pub fn train_slab(x: &FeatureMatrix, config: &SlabTrainConfig) -> Result<SlabModel, TrainError> {
    let m = x.rows();
    // With a single sample both offsets collapse to the same score: a
    // zero-width slab, which the formulation forbids.
    if m < 2 {
        return Err(TrainError::TooFewSamples {
            got: m,
            required: 2,
        });
    }
    config.validate()?;
    let gram = kernels::gram_matrix(&config.kernel, x)?;
    let cap1 = 1.0 / (config.nu1 * m as f64);
    let cap2 = config.epsilon / (config.nu2 * m as f64);

    let mut a = DMatrix::zeros(2, 2 * m);
    for i in 0..m {
        a[(0, i)] = 1.0;
        a[(1, m + i)] = 1.0;
    }
    let mut upper = DVector::zeros(2 * m);
    for i in 0..m {
        upper[i] = cap1;
        upper[m + i] = cap2;
    }
    let problem = QpProblem::new(
        QuadTerm::PairedDifference {
            coupling: gram.values().clone(),
        },
        DVector::zeros(2 * m),
        a,
        DVector::from_vec(vec![1.0, config.epsilon]),
        DVector::zeros(2 * m),
        upper,
    )?;
    let solution = qp::solve(&problem, &config.solver)?;

    let alpha: Vec<f64> = (0..m).map(|i| solution.z[i]).collect();
    let alpha_bar: Vec<f64> = (0..m).map(|i| solution.z[m + i]).collect();
    let offsets = compute_offsets(&gram, &alpha, &alpha_bar, config)?;
    let (retained, retained_coeffs) = retained_set(&alpha, &alpha_bar);

    Ok(SlabModel {
        kernel: config.kernel,
        nu1: config.nu1,
        nu2: config.nu2,
        epsilon: config.epsilon,
        sv_bound_tolerance: config.sv_bound_tolerance,
        samples: x.clone(),
        alpha,
        alpha_bar,
        rho1: offsets.rho1,
        rho2: offsets.rho2,
        n_sv1: offsets.n_sv1,
        n_sv2: offsets.n_sv2,
        retained,
        retained_coeffs,
        converged: solution.status == SolveStatus::Converged,
        offset_fallback: offsets.fallback_lower || offsets.fallback_upper,
        degenerate: offsets.degenerate,
        solver_iterations: solution.iterations,
    })
}

/// Trains the single-hyperplane one-class SVM baseline.
pub fn train_ocsvm(
    x: &FeatureMatrix,
    nu: f64,
    kernel: KernelSpec,
    solver: &SolverConfig,
) -> Result<OcsvmModel, TrainError> {
    let m = x.rows();
    if m < 1 {
        return Err(TrainError::TooFewSamples {
            got: m,
            required: 1,
        });
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(TrainError::InvalidParameter(format!(
            "nu = {nu} must lie in (0, 1]"
        )));
    }
    let gram = kernels::gram_matrix(&kernel, x)?;
    let cap = 1.0 / (nu * m as f64);
    let problem = QpProblem::new(
        QuadTerm::Dense(gram.values().clone()),
        DVector::zeros(m),
        DMatrix::from_element(1, m, 1.0),
        DVector::from_element(1, 1.0),
        DVector::zeros(m),
        DVector::from_element(m, cap),
    )?;
    let solution = qp::solve(&problem, solver)?;
    let alpha: Vec<f64> = solution.z.iter().copied().collect();

    let scores = {
        let coeff = DVector::from_column_slice(&alpha);
        gram.values() * coeff
    };
    let band = 1e-6 * cap;
    let interior: Vec<usize> = (0..m)
        .filter(|&i| alpha[i] > band && alpha[i] < cap - band)
        .collect();
    let (rho, n_sv, offset_fallback) = if interior.is_empty() {
        let candidates: Vec<f64> = (0..m)
            .filter(|&i| alpha[i] <= band)
            .map(|i| scores[i])
            .collect();
        let pool: &[f64] = if candidates.is_empty() {
            scores.as_slice()
        } else {
            &candidates
        };
        let min = pool.iter().copied().fold(f64::INFINITY, f64::min);
        (min, 0, true)
    } else {
        let sum: f64 = interior.iter().map(|&i| scores[i]).sum();
        (sum / interior.len() as f64, interior.len(), false)
    };

    let mut retained = Vec::new();
    let mut retained_coeffs = Vec::new();
    for (i, &a) in alpha.iter().enumerate() {
        if a > PRUNE_TOLERANCE {
            retained.push(i);
            retained_coeffs.push(a);
        }
    }

    Ok(OcsvmModel {
        kernel,
        nu,
        samples: x.clone(),
        alpha,
        rho,
        n_sv,
        retained,
        retained_coeffs,
        converged: solution.status == SolveStatus::Converged,
        offset_fallback,
        solver_iterations: solution.iterations,
    })
}

/// Geometric role of one training sample under the KKT conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktCase {
    /// Both dual variables at zero: score strictly inside the slab.
    InteriorSlab,
    /// `alpha` strictly interior: score on the lower hyperplane.
    OnLowerPlane,
    /// `alpha_bar` strictly interior: score on the upper hyperplane.
    OnUpperPlane,
    /// `alpha` at its cap: outlier below the slab.
    BelowSlabOutlier,
    /// `alpha_bar` at its cap: outlier above the slab.
    AboveSlabOutlier,
    /// Both duals active simultaneously; impossible at a true optimum.
    Invalid,
}

impl KktCase {
    pub fn name(&self) -> &'static str {
        match self {
            KktCase::InteriorSlab => "interior_slab",
            KktCase::OnLowerPlane => "on_lower_plane",
            KktCase::OnUpperPlane => "on_upper_plane",
            KktCase::BelowSlabOutlier => "below_slab_outlier",
            KktCase::AboveSlabOutlier => "above_slab_outlier",
            KktCase::Invalid => "invalid",
        }
    }

    pub const ALL: [KktCase; 6] = [
        KktCase::InteriorSlab,
        KktCase::OnLowerPlane,
        KktCase::OnUpperPlane,
        KktCase::BelowSlabOutlier,
        KktCase::AboveSlabOutlier,
        KktCase::Invalid,
    ];
}

/// Per-sample KKT case labels with reconstructed slack values.
#[derive(Debug, Clone)]
pub struct KktCaseReport {
    pub labels: Vec<KktCase>,
    /// Lower-plane slack `max(0, rho1 - s_i)`.
    pub xi: Vec<f64>,
    /// Upper-plane slack `max(0, s_i - rho2)`.
    pub xi_bar: Vec<f64>,
    pub scores: Vec<f64>,
}

impl KktCaseReport {
    pub fn count(&self, case: KktCase) -> usize {
        self.labels.iter().filter(|&&l| l == case).count()
    }

    pub fn invalid_count(&self) -> usize {
        self.count(KktCase::Invalid)
    }
}

/// Labels every training sample with its KKT case. `gram` must be the Gram
/// matrix of the model's training set.
pub fn classify_kkt_cases(
    model: &SlabModel,
    gram: &GramMatrix,
) -> Result<KktCaseReport, TrainError> {
    let m = model.m();
    if gram.m() != m {
        return Err(TrainError::GramMismatch {
            gram: gram.m(),
            duals: m,
        });
    }
    let scores = dual_scores(gram, &model.alpha, &model.alpha_bar);
    let cap1 = 1.0 / (model.nu1 * m as f64);
    let cap2 = model.epsilon / (model.nu2 * m as f64);
    let band1 = model.sv_bound_tolerance * cap1;
    let band2 = model.sv_bound_tolerance * cap2;

    let mut labels = Vec::with_capacity(m);
    let mut xi = Vec::with_capacity(m);
    let mut xi_bar = Vec::with_capacity(m);
    for (i, &s) in scores.iter().enumerate() {
        let a = model.alpha[i];
        let ab = model.alpha_bar[i];
        let a_zero = a <= band1;
        let a_cap = a >= cap1 - band1;
        let ab_zero = ab <= band2;
        let ab_cap = ab >= cap2 - band2;
        let label = match (a_zero, a_cap, ab_zero, ab_cap) {
            (true, false, true, false) => KktCase::InteriorSlab,
            (false, false, true, false) => KktCase::OnLowerPlane,
            (true, false, false, false) => KktCase::OnUpperPlane,
            (false, true, true, false) => KktCase::BelowSlabOutlier,
            (true, false, false, true) => KktCase::AboveSlabOutlier,
            _ => KktCase::Invalid,
        };
        labels.push(label);
        xi.push((model.rho1 - s).max(0.0));
        xi_bar.push((s - model.rho2).max(0.0));
    }
    Ok(KktCaseReport {
        labels,
        xi,
        xi_bar,
        scores,
    })
}
