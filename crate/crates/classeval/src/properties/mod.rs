//! Executable metric properties.
//!
//! Five properties separate metrics from one another:
//!
//! * **Monotonicity** — correct mass never lowers the score, error mass
//!   never raises it.
//! * **Class sensitivity** — two single-item placements of equal
//!   correctness in different classes can move the score differently; a
//!   metric without this is a micro metric.
//! * **Class decomposability** — the metric is an unweighted power mean of
//!   per-class scores.
//! * **Prevalence invariance** — the score is unchanged under any positive
//!   column scaling, i.e. the metric treats all classes equally in the
//!   strict sense.
//! * **Chance correction** — every prediction-independent random baseline
//!   scores at or below a known bound that depends on the class count
//!   alone.
//!
//! The checkers are sampled searches, deterministic under a fixed seed:
//! universal properties report `holds_on_sample` or a replayable
//! refutation witness; existential searches that find nothing report
//! `not_declared` (sampling cannot prove absence); decomposability is
//! declaration-based. [`property_table`] assembles the verdict grid and
//! re-runs failed cells on the prevalence-calibrated composition of the
//! metric.

mod checks;
pub mod expectations;
mod search;

use serde::{Deserialize, Serialize};

use crate::matrix::ConfusionMatrix;
use crate::metrics::{self, MetricId};
use crate::{Error, Result};

pub use checks::{
    check_chance_correction, check_class_sensitivity, check_monotonicity,
    check_prevalence_invariance, verify_decomposition,
};
pub(crate) use checks::run_check;
pub use search::find_counterexample;

/// Score comparisons smaller than this are float noise, not violations.
pub const DIRECTIONAL_TOLERANCE: f64 = 1e-12;

/// Tolerance for value identities (prevalence invariance, declared
/// decompositions, chance bounds).
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Default seed for every randomized search.
pub const DEFAULT_SEED: u64 = 42;

/// The five checkable properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyId {
    Monotonicity,
    ClassSensitivity,
    ClassDecomposability,
    PrevalenceInvariance,
    ChanceCorrection,
}

impl PropertyId {
    pub const ALL: [PropertyId; 5] = [
        PropertyId::Monotonicity,
        PropertyId::ClassSensitivity,
        PropertyId::ClassDecomposability,
        PropertyId::PrevalenceInvariance,
        PropertyId::ChanceCorrection,
    ];

    pub fn short_label(&self) -> &'static str {
        match self {
            PropertyId::Monotonicity => "monotonic",
            PropertyId::ClassSensitivity => "class-sensitive",
            PropertyId::ClassDecomposability => "decomposable",
            PropertyId::PrevalenceInvariance => "prevalence-invariant",
            PropertyId::ChanceCorrection => "chance-corrected",
        }
    }
}

impl std::str::FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "monotonicity" => Ok(PropertyId::Monotonicity),
            "class_sensitivity" => Ok(PropertyId::ClassSensitivity),
            "class_decomposability" => Ok(PropertyId::ClassDecomposability),
            "prevalence_invariance" => Ok(PropertyId::PrevalenceInvariance),
            "chance_correction" => Ok(PropertyId::ChanceCorrection),
            other => Err(Error::Usage(format!("unknown property `{other}`"))),
        }
    }
}

/// Budget and seed for a randomized search. Per-trial generators are derived
/// from the seed by trial counter, so results do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub trials: u64,
    pub seed: u64,
    /// Inclusive range of class counts for sampled matrices.
    pub size_range: (usize, usize),
    /// Inclusive range of integer cell masses for sampled matrices.
    pub mass_range: (u64, u64),
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: DEFAULT_SEED,
            size_range: (2, 5),
            mass_range: (0, 100),
        }
    }
}

impl SearchBudget {
    pub fn with_trials(trials: u64) -> Self {
        Self {
            trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::BadBudget("trials must be at least 1".into()));
        }
        if self.size_range.0 < 2 {
            return Err(Error::BadBudget(
                "matrices need at least two classes".into(),
            ));
        }
        if self.size_range.0 > self.size_range.1 {
            return Err(Error::BadBudget(format!(
                "empty class-count range {:?}",
                self.size_range
            )));
        }
        if self.mass_range.0 > self.mass_range.1 {
            return Err(Error::BadBudget(format!(
                "empty mass range {:?}",
                self.mass_range
            )));
        }
        Ok(())
    }
}

/// Outcome of a property check.
///
/// Universal properties (monotonicity, prevalence invariance, chance
/// bounds) come back `HoldsOnSample` or `Refuted`; a refutation always
/// carries a witness. `DeclaredAndVerified`/`NotDeclared` report
/// declaration-based decomposability, and `NotDeclared` also stands in for
/// existential searches that found nothing, which sampling cannot settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnSample,
    Refuted,
    DeclaredAndVerified,
    NotDeclared,
}

/// What was done to the witness matrix to expose the behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// Mass added at one cell; scores compared before and after.
    AddMass { row: usize, col: usize, amount: f64 },
    /// Two column scalings applied to the same matrix; scores compared.
    ScalingPair { first: Vec<f64>, second: Vec<f64> },
    /// One unit of mass placed at either of two cells; scores compared.
    PlacementPair {
        first: (usize, usize),
        second: (usize, usize),
    },
    /// The matrix is the expected outcome of this random baseline; the
    /// score is compared against the declared bound.
    ChanceModel {
        prediction_dist: Vec<f64>,
        class_dist: Vec<f64>,
    },
}

/// A replayable piece of evidence: the matrix, the perturbation, and the
/// two scores it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub matrix: ConfusionMatrix,
    pub perturbation: Perturbation,
    pub score_before: f64,
    pub score_after: f64,
}

/// Evaluates a metric, optionally through prevalence calibration. The
/// calibrated composition `m -> metric(calibrate(m))` is itself a metric,
/// and it is what the after-calibration column of the property table checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Evaluator {
    pub metric: MetricId,
    pub calibrated: bool,
}

impl Evaluator {
    pub fn plain(metric: MetricId) -> Self {
        Self {
            metric,
            calibrated: false,
        }
    }

    pub fn calibrated(metric: MetricId) -> Self {
        Self {
            metric,
            calibrated: true,
        }
    }

    pub fn value(&self, m: &ConfusionMatrix) -> Result<f64> {
        let value = if self.calibrated {
            metrics::metric_value(self.metric, &m.calibrate()?)?
        } else {
            metrics::metric_value(self.metric, m)?
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::UndefinedMetric {
                metric: self.metric.to_string(),
                reason: "non-finite score".into(),
            })
        }
    }
}

impl Witness {
    /// Recomputes the score pair from the stored data. A refutation witness
    /// reproduces its violation bit-for-bit.
    pub fn replay(&self, metric: MetricId, calibrated: bool) -> Result<(f64, f64)> {
        let ev = Evaluator {
            metric,
            calibrated,
        };
        match &self.perturbation {
            Perturbation::AddMass { row, col, amount } => {
                let before = ev.value(&self.matrix)?;
                let after = ev.value(&self.matrix.with_added_mass(*row, *col, *amount)?)?;
                Ok((before, after))
            }
            Perturbation::ScalingPair { first, second } => {
                let first = crate::matrix::ScalingVector::new(first.clone())?;
                let second = crate::matrix::ScalingVector::new(second.clone())?;
                Ok((
                    ev.value(&self.matrix.scale(&first)?)?,
                    ev.value(&self.matrix.scale(&second)?)?,
                ))
            }
            Perturbation::PlacementPair { first, second } => Ok((
                ev.value(&self.matrix.with_added_mass(first.0, first.1, 1.0)?)?,
                ev.value(&self.matrix.with_added_mass(second.0, second.1, 1.0)?)?,
            )),
            Perturbation::ChanceModel { .. } => {
                Ok((self.score_before, ev.value(&self.matrix)?))
            }
        }
    }
}

/// The bound a chance-corrected metric declares for random baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChanceBound {
    /// `1/n` where `n` is the class count.
    ReciprocalClassCount,
    /// Zero regardless of the class count.
    Zero,
}

impl ChanceBound {
    pub fn value(&self, n: usize) -> f64 {
        match self {
            ChanceBound::ReciprocalClassCount => 1.0 / n as f64,
            ChanceBound::Zero => 0.0,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            ChanceBound::ReciprocalClassCount => "1/n",
            ChanceBound::Zero => "0",
        }
    }
}

/// Empirical summary of a chance-correction check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChanceStats {
    pub bound: Option<ChanceBound>,
    /// The bound's value at the class count where the gap was widest.
    pub bound_value: Option<f64>,
    pub observed_max: f64,
    pub observed_min: f64,
    /// Every sampled baseline scored exactly the bound.
    pub strict: bool,
    /// Scores are one constant across all probed class counts.
    pub complete: bool,
}

/// Verdict for one (metric, property) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub property: PropertyId,
    pub metric: MetricId,
    /// True when this verdict is about the prevalence-calibrated
    /// composition of the metric.
    pub calibrated: bool,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub trials: u64,
    /// Sampled evaluations skipped because the metric was undefined there.
    pub skipped: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chance: Option<ChanceStats>,
}

impl PropertyVerdict {
    /// Whether the property counts as present for table purposes.
    pub fn passed(&self) -> bool {
        matches!(
            self.verdict,
            Verdict::HoldsOnSample | Verdict::DeclaredAndVerified
        )
    }
}

/// One metric's row: the five base verdicts plus, for each failed cell, the
/// same property re-checked on the calibrated composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPropertyRow {
    pub metric: MetricId,
    pub verdicts: Vec<PropertyVerdict>,
    pub calibrated: Vec<Option<PropertyVerdict>>,
}

impl MetricPropertyRow {
    pub fn verdict(&self, property: PropertyId) -> &PropertyVerdict {
        let idx = PropertyId::ALL.iter().position(|&p| p == property).unwrap();
        &self.verdicts[idx]
    }

    pub fn calibrated_verdict(&self, property: PropertyId) -> Option<&PropertyVerdict> {
        let idx = PropertyId::ALL.iter().position(|&p| p == property).unwrap();
        self.calibrated[idx].as_ref()
    }
}

/// Verdict grid for a set of metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyTable {
    pub budget: SearchBudget,
    pub rows: Vec<MetricPropertyRow>,
}

/// Runs all five property checks for every metric. Cells that fail are
/// re-run on the calibrated composition, which is what the parenthesized
/// check mark in the rendered table reports.
pub fn property_table(metric_set: &[MetricId], budget: &SearchBudget) -> Result<PropertyTable> {
    budget.validate()?;
    let mut rows = Vec::with_capacity(metric_set.len());
    for &metric in metric_set {
        let mut verdicts = Vec::with_capacity(5);
        let mut calibrated = Vec::with_capacity(5);
        for property in PropertyId::ALL {
            let base = checks::run_check(Evaluator::plain(metric), property, budget);
            let rerun = if base.passed() {
                None
            } else {
                Some(checks::run_check(
                    Evaluator::calibrated(metric),
                    property,
                    budget,
                ))
            };
            verdicts.push(base);
            calibrated.push(rerun);
        }
        rows.push(MetricPropertyRow {
            metric,
            verdicts,
            calibrated,
        });
    }
    Ok(PropertyTable {
        budget: *budget,
        rows,
    })
}

impl PropertyTable {
    /// Plain-text rendering: one row per metric, one column per property,
    /// `y` / `x` / `x(y)` marks, with the chance bound spelled out.
    pub fn render_text(&self) -> String {
        let headers: Vec<String> = PropertyId::ALL
            .iter()
            .map(|p| p.short_label().to_string())
            .collect();
        let mut grid: Vec<Vec<String>> = Vec::new();
        for row in &self.rows {
            let mut cells = vec![row.metric.to_string()];
            for property in PropertyId::ALL {
                cells.push(render_cell(
                    row.verdict(property),
                    row.calibrated_verdict(property),
                ));
            }
            grid.push(cells);
        }
        let mut widths: Vec<usize> = Vec::new();
        let header_row: Vec<String> = std::iter::once("metric".to_string())
            .chain(headers)
            .collect();
        for row in std::iter::once(&header_row).chain(grid.iter()) {
            for (i, cell) in row.iter().enumerate() {
                if widths.len() <= i {
                    widths.push(0);
                }
                widths[i] = widths[i].max(cell.len());
            }
        }
        let fmt_row = |row: &[String]| {
            row.iter()
                .enumerate()
                .map(|(i, cell)| format!("{:width$}", cell, width = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        out.push_str(&fmt_row(&header_row));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &grid {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        out
    }
}

fn render_cell(base: &PropertyVerdict, calibrated: Option<&PropertyVerdict>) -> String {
    if !base.passed() {
        return match calibrated {
            Some(rerun) if rerun.passed() => "x(y)".to_string(),
            _ => "x".to_string(),
        };
    }
    let mut mark = "y".to_string();
    if base.property == PropertyId::ChanceCorrection {
        if let Some(stats) = &base.chance {
            if let Some(bound) = stats.bound {
                mark.push_str(": ");
                mark.push_str(bound.symbol());
                if stats.strict {
                    mark.push_str(", strict");
                }
                if stats.complete {
                    mark.push_str(", complete");
                }
            }
        }
    }
    mark
}
