//! Multi-class classification evaluation toolkit.
//!
//! Everything starts from the confusion matrix: an n×n grid of mass where
//! rows are predictions and columns are gold classes. From there the crate
//! provides:
//!
//! * [`matrix`] — the data model: label spaces, mass matrices, derived class
//!   masses (bias / prevalence / correct), normalization, prevalence scaling
//!   and calibration, and synthetic chance matrices.
//! * [`metrics`] — the metric roster (accuracy, micro and macro P/R/F1, the
//!   two distinct macro F1 definitions, weighted F1, Cohen's kappa, MCC,
//!   generalized-mean macro recall, bookmaker win) plus analytic and
//!   finite-difference gradients for each metric.
//! * [`properties`] — executable checkers for five metric properties
//!   (monotonicity, class sensitivity, class decomposability, prevalence
//!   invariance, chance correction), a seeded counterexample search, and a
//!   property summary table.
//! * [`analysis`] — multi-system ranking with fractional ranks, Spearman
//!   rank correlation, metric ensembles, and recall-based precision
//!   projection.
//! * [`io`] / [`cli`] — matrix JSON and prediction CSV/TSV formats, and the
//!   batch command-line surface (`evaluate`, `calibrate`, `check`,
//!   `compare`, `project`).
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything is safe to share across threads.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod analysis;
pub mod cli;
mod error;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod properties;

pub use error::{Error, Result};
pub use matrix::{
    chance_matrix, ChanceModel, ClassMasses, ConfusionMatrix, LabelSpace, ScalingVector,
};
pub use metrics::{ClassScores, MetricId, MetricScore, ScoreFlag};
pub use properties::{PropertyId, PropertyTable, PropertyVerdict, SearchBudget, Verdict, Witness};
