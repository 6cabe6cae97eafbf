//! Kernel functions and Gram-matrix construction.
//!
//! Five families are supported: linear, RBF, and the additive histogram
//! kernels (intersection, Hellinger, chi-squared). The additive kernels
//! require nonnegative coordinates; negative inputs are an error rather
//! than being clamped, since valid histogram data never produces them.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::features::FeatureMatrix;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("feature vectors have mismatched dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("coordinate {index} is {value}, but the {family:?} kernel requires nonnegative inputs")]
    NegativeCoordinate {
        index: usize,
        value: f64,
        family: KernelFamily,
    },
    #[error("coordinate {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("rbf gamma must be positive and finite, got {gamma}")]
    InvalidGamma { gamma: f64 },
    #[error("gamma is only meaningful for the rbf kernel")]
    UnexpectedGamma,
    #[error("the rbf kernel requires a gamma parameter")]
    MissingGamma,
    #[error("empty feature vector")]
    EmptyVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Linear,
    Rbf,
    Intersection,
    Hellinger,
    ChiSquared,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Rbf => "rbf",
            KernelFamily::Intersection => "intersection",
            KernelFamily::Hellinger => "hellinger",
            KernelFamily::ChiSquared => "chi_squared",
        }
    }

    /// True for the histogram kernels that only accept nonnegative inputs.
    pub fn is_additive(&self) -> bool {
        matches!(
            self,
            KernelFamily::Intersection | KernelFamily::Hellinger | KernelFamily::ChiSquared
        )
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(KernelFamily::Linear),
            "rbf" => Ok(KernelFamily::Rbf),
            "intersection" => Ok(KernelFamily::Intersection),
            "hellinger" => Ok(KernelFamily::Hellinger),
            "chi_squared" | "chi2" => Ok(KernelFamily::ChiSquared),
            other => Err(format!("unknown kernel family `{other}`")),
        }
    }
}

/// A kernel family together with its parameter; immutable once built.
/// `gamma` is present exactly when the family is RBF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: Option<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: Option<f64>) -> Result<Self, KernelError> {
        match (family, gamma) {
            (KernelFamily::Rbf, Some(g)) if g > 0.0 && g.is_finite() => Ok(Self {
                family,
                gamma: Some(g),
            }),
            (KernelFamily::Rbf, Some(g)) => Err(KernelError::InvalidGamma { gamma: g }),
            (KernelFamily::Rbf, None) => Err(KernelError::MissingGamma),
            (_, Some(_)) => Err(KernelError::UnexpectedGamma),
            (family, None) => Ok(Self {
                family,
                gamma: None,
            }),
        }
    }

    pub fn linear() -> Self {
        Self {
            family: KernelFamily::Linear,
            gamma: None,
        }
    }

    pub fn rbf(gamma: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::Rbf, Some(gamma))
    }

    pub fn intersection() -> Self {
        Self {
            family: KernelFamily::Intersection,
            gamma: None,
        }
    }

    pub fn hellinger() -> Self {
        Self {
            family: KernelFamily::Hellinger,
            gamma: None,
        }
    }

    pub fn chi_squared() -> Self {
        Self {
            family: KernelFamily::ChiSquared,
            gamma: None,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }
}

fn validate_pair(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<(), KernelError> {
    if x.is_empty() || y.is_empty() {
        return Err(KernelError::EmptyVector);
    }
    if x.len() != y.len() {
        return Err(KernelError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let additive = spec.family.is_additive();
    for (i, &v) in x.iter().chain(y.iter()).enumerate() {
        let index = i % x.len();
        if !v.is_finite() {
            return Err(KernelError::NonFiniteInput { index });
        }
        if additive && v < 0.0 {
            return Err(KernelError::NegativeCoordinate {
                index,
                value: v,
                family: spec.family,
            });
        }
    }
    Ok(())
}

/// Kernel value without input validation; callers must have checked the
/// preconditions. Argument order never affects the result.
fn eval_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec.family {
        KernelFamily::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        KernelFamily::Rbf => {
            let gamma = spec.gamma.expect("rbf spec always carries gamma");
            let sq_dist: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            (-gamma * sq_dist).exp()
        }
        KernelFamily::Intersection => x.iter().zip(y).map(|(a, b)| a.min(*b)).sum(),
        KernelFamily::Hellinger => x.iter().zip(y).map(|(a, b)| (a * b).sqrt()).sum(),
        KernelFamily::ChiSquared => x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let s = a + b;
                // 0/0 -> 0 by convention
                if s == 0.0 {
                    0.0
                } else {
                    2.0 * a * b / s
                }
            })
            .sum(),
    }
}

/// Evaluates `k(x, y)` for the given spec.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
    validate_pair(spec, x, y)?;
    Ok(eval_unchecked(spec, x, y))
}

/// Symmetric matrix of pairwise kernel evaluations over a sample set.
/// The upper triangle is computed once and mirrored, so `values[i][j]`
/// and `values[j][i]` are bitwise equal.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: DMatrix<f64>,
}

impl GramMatrix {
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }
}

/// Builds the Gram matrix `K[i][j] = k(x_i, x_j)` for all sample pairs.
pub fn gram_matrix(spec: &KernelSpec, samples: &FeatureMatrix) -> Result<GramMatrix, KernelError> {
    let m = samples.rows();
    if m == 0 {
        return Err(KernelError::EmptyVector);
    }
    // Validate every row once instead of once per pair.
    for i in 0..m {
        validate_pair(spec, samples.row(i), samples.row(i))?;
    }
    let mut values = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = eval_unchecked(spec, samples.row(i), samples.row(j));
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(GramMatrix { values })
}

/// Kernel evaluations of one probe against every row of `samples`, in row
/// order; this is the `k(x, x_i)` vector of the dual decision function.
pub fn gram_vector(
    spec: &KernelSpec,
    samples: &FeatureMatrix,
    x: &[f64],
) -> Result<Vec<f64>, KernelError> {
    let mut out = Vec::with_capacity(samples.rows());
    for i in 0..samples.rows() {
        out.push(eval_kernel(spec, samples.row(i), x)?);
    }
    Ok(out)
}
