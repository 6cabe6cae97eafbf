//! Confusion-matrix metrics, one-vs-rest evaluation, k-fold splits, and
//! grid search.
//!
//! The headline metric is the Matthews correlation coefficient, which
//! stays informative under the heavy class imbalance a one-vs-rest
//! protocol produces (25 negative classes against 1 positive).

use thiserror::Error;

use crate::data::{self, DataError, Dataset, SplitSpec};
use crate::features::FeatureMatrix;
use crate::kernels::{KernelError, KernelSpec};
use crate::qp::SolverConfig;
use crate::rng::SplitMix64;
use crate::slab::{self, OcsvmModel, SlabModel, SlabTrainConfig, TrainError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and truth lists differ in length: {predictions} vs {truths}")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("label {0} at position {1} is not +1 or -1")]
    InvalidLabel(i8, usize),
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Counts with +1 as the positive class.
pub fn confusion(predictions: &[i8], truths: &[i8]) -> Result<ConfusionCounts, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptySet("evaluation"));
    }
    let mut counts = ConfusionCounts::default();
    for (i, (&p, &t)) in predictions.iter().zip(truths).enumerate() {
        for &l in [p, t].iter() {
            if l != 1 && l != -1 {
                return Err(EvalError::InvalidLabel(l, i));
            }
        }
        match (p, t) {
            (1, 1) => counts.true_positives += 1,
            (1, -1) => counts.false_positives += 1,
            (-1, -1) => counts.true_negatives += 1,
            _ => counts.false_negatives += 1,
        }
    }
    Ok(counts)
}

/// Matthews correlation coefficient and whether it is defined. A zero
/// factor in the denominator yields `(0.0, false)`. The numerator and the
/// denominator's factor product are formed in exact integer arithmetic
/// before the single rounding to f64, so perfect agreement and perfect
/// disagreement land exactly on +1 and -1.
pub fn mcc(counts: &ConfusionCounts) -> (f64, bool) {
    let tp = counts.true_positives as i128;
    let fp = counts.false_positives as i128;
    let tn = counts.true_negatives as i128;
    let fn_ = counts.false_negatives as i128;
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0) {
        return (0.0, false);
    }
    let numerator = (tp * tn - fn_ * fp) as f64;
    let product = factors.iter().product::<i128>() as f64;
    (numerator / product.sqrt(), true)
}

/// Precision, recall, and f1; `None` for any with a zero denominator.
pub fn precision_recall_f1(
    counts: &ConfusionCounts,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let tp = counts.true_positives as f64;
    let fp = counts.false_positives as f64;
    let fn_ = counts.false_negatives as f64;
    let precision = (tp + fp > 0.0).then(|| tp / (tp + fp));
    let recall = (tp + fn_ > 0.0).then(|| tp / (tp + fn_));
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    (precision, recall, f1)
}

#[derive(Debug, Clone, Copy)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub mcc: f64,
    pub mcc_defined: bool,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl EvalReport {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let (mcc, mcc_defined) = mcc(&counts);
        let (precision, recall, f1) = precision_recall_f1(&counts);
        Self {
            counts,
            mcc,
            mcc_defined,
            precision,
            recall,
            f1,
        }
    }
}

/// Anything that maps a feature vector to a +1/-1 label.
pub trait OneClassModel {
    fn predict_label(&self, x: &[f64]) -> Result<i8, KernelError>;
}

impl OneClassModel for SlabModel {
    fn predict_label(&self, x: &[f64]) -> Result<i8, KernelError> {
        self.predict(x)
    }
}

impl OneClassModel for OcsvmModel {
    fn predict_label(&self, x: &[f64]) -> Result<i8, KernelError> {
        self.predict(x)
    }
}

/// Evaluates a model against held-out positives and negatives.
pub fn one_vs_rest_eval<M: OneClassModel>(
    model: &M,
    positives: &FeatureMatrix,
    negatives: &FeatureMatrix,
) -> Result<EvalReport, EvalError> {
    if positives.rows() == 0 {
        return Err(EvalError::EmptySet("positive"));
    }
    if negatives.rows() == 0 {
        return Err(EvalError::EmptySet("negative"));
    }
    let mut predictions = Vec::with_capacity(positives.rows() + negatives.rows());
    let mut truths = Vec::with_capacity(predictions.capacity());
    for row in positives.iter_rows() {
        predictions.push(model.predict_label(row)?);
        truths.push(1);
    }
    for row in negatives.iter_rows() {
        predictions.push(model.predict_label(row)?);
        truths.push(-1);
    }
    Ok(EvalReport::from_counts(confusion(&predictions, &truths)?))
}

/// One cross-validation fold: (train indices, validation indices).
pub type FoldIndices = (Vec<usize>, Vec<usize>);

/// Shuffled k-fold split of `0..m`: pairs of (train indices, validation
/// indices), deterministic per seed, folds disjoint with sizes within 1.
pub fn k_fold_split(m: usize, k: usize, seed: u64) -> Result<Vec<FoldIndices>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidSpec(format!("fold count {k} < 2")));
    }
    if m < k {
        return Err(EvalError::InvalidSpec(format!(
            "{m} samples cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let base = m / k;
    let extra = m % k;
    let mut splits = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let mut validation: Vec<usize> = order[start..start + size].to_vec();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        validation.sort_unstable();
        train.sort_unstable();
        splits.push((train, validation));
        start += size;
    }
    Ok(splits)
}

/// Parameter grid for cross-validated selection. Validation folds contain
/// positives only, so the selection metric is recall: the fraction of
/// held-out positives predicted +1.
#[derive(Debug, Clone)]
pub struct GridSearchSpec {
    pub kernels: Vec<KernelSpec>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl GridSearchSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, empty) in [
            ("kernel", self.kernels.is_empty()),
            ("nu1", self.nu1.is_empty()),
            ("nu2", self.nu2.is_empty()),
            ("epsilon", self.epsilon.is_empty()),
        ] {
            if empty {
                return Err(EvalError::InvalidSpec(format!("empty {name} grid")));
            }
        }
        if self.folds < 2 {
            return Err(EvalError::InvalidSpec(format!(
                "fold count {} < 2",
                self.folds
            )));
        }
        Ok(())
    }

    /// All grid cells in deterministic order.
    pub fn configurations(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &kernel in &self.kernels {
            for &nu1 in &self.nu1 {
                for &nu2 in &self.nu2 {
                    for &epsilon in &self.epsilon {
                        out.push(GridPoint {
                            kernel,
                            nu1,
                            nu2,
                            epsilon,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub kernel: KernelSpec,
    pub nu1: f64,
    pub nu2: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub point: GridPoint,
    /// Mean validation recall across folds; `None` when training failed.
    pub mean_recall: Option<f64>,
    pub fold_recalls: Vec<f64>,
    pub error: Option<String>,
}

/// Evaluates one grid cell by k-fold cross-validation on positives only.
pub fn evaluate_grid_point(
    x: &FeatureMatrix,
    point: &GridPoint,
    folds: usize,
    seed: u64,
    solver: &SolverConfig,
) -> GridSearchResult {
    let splits = match k_fold_split(x.rows(), folds, seed) {
        Ok(s) => s,
        Err(e) => {
            return GridSearchResult {
                point: *point,
                mean_recall: None,
                fold_recalls: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };
    let mut fold_recalls = Vec::with_capacity(folds);
    for (train_idx, val_idx) in &splits {
        let config = SlabTrainConfig {
            nu1: point.nu1,
            nu2: point.nu2,
            epsilon: point.epsilon,
            kernel: point.kernel,
            solver: solver.clone(),
            sv_bound_tolerance: 1e-6,
        };
        let result = slab::train_slab(&x.select(train_idx), &config).and_then(|model| {
            let mut hits = 0usize;
            for &i in val_idx {
                if model.predict(x.row(i))? == 1 {
                    hits += 1;
                }
            }
            Ok(hits as f64 / val_idx.len() as f64)
        });
        match result {
            Ok(r) => fold_recalls.push(r),
            Err(e) => {
                return GridSearchResult {
                    point: *point,
                    mean_recall: None,
                    fold_recalls,
                    error: Some(e.to_string()),
                }
            }
        }
    }
    let mean = fold_recalls.iter().sum::<f64>() / fold_recalls.len() as f64;
    GridSearchResult {
        point: *point,
        mean_recall: Some(mean),
        fold_recalls,
        error: None,
    }
}

/// Runs every grid cell and ranks by mean recall, descending; failed
/// cells sort last, ties keep grid order.
pub fn grid_search(
    x: &FeatureMatrix,
    spec: &GridSearchSpec,
) -> Result<Vec<GridSearchResult>, EvalError> {
    spec.validate()?;
    let mut results: Vec<GridSearchResult> = spec
        .configurations()
        .iter()
        .map(|p| evaluate_grid_point(x, p, spec.folds, spec.seed, &spec.solver))
        .collect();
    results.sort_by(|a, b| {
        b.mean_recall
            .unwrap_or(f64::NEG_INFINITY)
            .partial_cmp(&a.mean_recall.unwrap_or(f64::NEG_INFINITY))
            .unwrap()
    });
    Ok(results)
}

/// Lower median: for even counts, the smaller of the two middle values.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(sorted[(sorted.len() - 1) / 2])
}

/// Both classifiers evaluated one-vs-rest for a single class.
#[derive(Debug, Clone)]
pub struct ClassBenchRow {
    pub class: String,
    pub gamma: Option<f64>,
    pub slab: EvalReport,
    pub baseline: EvalReport,
    pub slab_converged: bool,
    pub baseline_converged: bool,
}

/// Shared parameters for the per-class benchmark.
#[derive(Debug, Clone)]
pub struct BenchParams {
    pub nu1: f64,
    pub nu2: f64,
    pub epsilon: f64,
    /// Baseline classifier's outlier bound.
    pub nu: f64,
    pub solver: SolverConfig,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            nu1: 0.10,
            nu2: 0.01,
            epsilon: 2.0 / 3.0,
            nu: 0.1,
            solver: SolverConfig::default(),
        }
    }
}

/// Trains both classifiers on one class's training rows and evaluates
/// against the test partition's positives and negatives.
pub fn benchmark_class(
    data: &Dataset,
    class: &str,
    split: SplitSpec,
    kernel: KernelSpec,
    params: &BenchParams,
) -> Result<ClassBenchRow, EvalError> {
    let parts = data::one_vs_rest(data, class, split)?;
    let slab_config = SlabTrainConfig {
        nu1: params.nu1,
        nu2: params.nu2,
        epsilon: params.epsilon,
        kernel,
        solver: params.solver.clone(),
        sv_bound_tolerance: 1e-6,
    };
    let slab_model = slab::train_slab(&parts.train_positives, &slab_config)?;
    let baseline_model =
        slab::train_ocsvm(&parts.train_positives, params.nu, kernel, &params.solver)?;
    let slab = one_vs_rest_eval(&slab_model, &parts.test_positives, &parts.test_negatives)?;
    let baseline =
        one_vs_rest_eval(&baseline_model, &parts.test_positives, &parts.test_negatives)?;
    Ok(ClassBenchRow {
        class: class.to_string(),
        gamma: kernel.gamma(),
        slab,
        baseline,
        slab_converged: slab_model.converged(),
        baseline_converged: baseline_model.converged(),
    })
}
