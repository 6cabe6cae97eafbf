//! One-class slab SVM (OCSSVM) training and evaluation.
//!
//! The one-class slab SVM encloses the decision scores of a target class
//! between two parallel hyperplanes with a shared normal vector and offsets
//! `rho1 < rho2`; probes whose score falls inside the slab are labeled `+1`,
//! everything else `-1`. Training solves the dual quadratic program with a
//! dense primal-dual interior-point method, then recovers the two offsets
//! from the on-plane support vectors.
//!
//! The crate also ships the single-hyperplane one-class SVM as a baseline,
//! five kernel families (linear, RBF, intersection, Hellinger, chi-squared),
//! confusion-matrix metrics (MCC, precision/recall/F1), k-fold grid search,
//! and loaders for the UCI letter, libsvm, and CSV formats.

pub use nalgebra;

pub mod data;
pub mod eval;
pub mod features;
pub mod kernels;
pub mod qp;
pub mod rng;
pub mod slab;

pub use data::{Dataset, SplitSpec, ToyConfig};
pub use eval::{ConfusionCounts, EvalReport, GridSearchSpec};
pub use features::FeatureMatrix;
pub use kernels::{GramMatrix, KernelFamily, KernelSpec};
pub use qp::{QpProblem, QpSolution, SolverConfig};
pub use slab::{OcsvmModel, SlabModel, SlabTrainConfig};
