//! Reference property pattern for the standard metric roster.
//!
//! Each entry records, per property, whether the metric is documented to
//! have it, to lack it, or to lack it while the calibrated composition has
//! it. The `check` command compares a freshly computed [`PropertyTable`]
//! against this pattern and signals any contradiction, which makes property
//! regressions scriptable.

use crate::metrics::MetricId;
use crate::properties::{ChanceBound, PropertyId, PropertyTable, Verdict};

/// Documented status of one (metric, property) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    /// The metric has the property.
    Holds,
    /// The metric lacks the property; a witness must be found.
    Fails,
    /// The metric lacks the property, but the calibrated composition has it.
    FailsHoldsCalibrated,
}

/// Documented chance-correction details.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChanceExpectation {
    pub bound: ChanceBound,
    pub strict: Option<bool>,
    pub complete: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Expectation {
    pub metric: MetricId,
    /// Marks in [`PropertyId::ALL`] order.
    pub marks: [Mark; 5],
    /// Expected chance stats for the base metric, when it is bounded.
    pub chance: Option<ChanceExpectation>,
    /// Expected chance stats for the calibrated composition, when the base
    /// metric is unbounded.
    pub chance_calibrated: Option<ChanceExpectation>,
}

/// The documented pattern for the standard roster.
pub fn reference_expectations() -> Vec<Expectation> {
    use Mark::{Fails, FailsHoldsCalibrated as FailsCal, Holds};
    let one_over_n = |strict: bool| ChanceExpectation {
        bound: ChanceBound::ReciprocalClassCount,
        strict: Some(strict),
        complete: Some(false),
    };
    let zero_complete = ChanceExpectation {
        bound: ChanceBound::Zero,
        strict: Some(true),
        complete: Some(true),
    };
    vec![
        Expectation {
            metric: MetricId::Accuracy,
            marks: [Holds, FailsCal, FailsCal, FailsCal, FailsCal],
            chance: None,
            chance_calibrated: Some(one_over_n(true)),
        },
        Expectation {
            metric: MetricId::MACRO_RECALL,
            marks: [Holds, Holds, Holds, Holds, Holds],
            chance: Some(one_over_n(true)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::GEOMETRIC_MACRO_RECALL,
            marks: [Holds, Holds, Holds, Holds, Holds],
            chance: Some(one_over_n(false)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::HARMONIC_MACRO_RECALL,
            marks: [Holds, Holds, Holds, Holds, Holds],
            chance: Some(one_over_n(false)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::MacroPrecision,
            marks: [Holds, Holds, Holds, FailsCal, Holds],
            chance: Some(one_over_n(true)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::MacroF1,
            marks: [Holds, Holds, Holds, FailsCal, Holds],
            chance: Some(one_over_n(false)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::MacroF1Prime,
            marks: [Holds, Holds, Fails, FailsCal, Holds],
            chance: Some(one_over_n(true)),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::WeightedF1,
            marks: [Fails, Holds, FailsCal, FailsCal, FailsCal],
            chance: None,
            chance_calibrated: Some(one_over_n(false)),
        },
        Expectation {
            metric: MetricId::Kappa,
            marks: [Fails, Holds, Fails, FailsCal, Holds],
            chance: Some(zero_complete),
            chance_calibrated: None,
        },
        Expectation {
            metric: MetricId::Mcc,
            marks: [Fails, Holds, Fails, FailsCal, Holds],
            chance: Some(zero_complete),
            chance_calibrated: None,
        },
    ]
}

fn expectation_for(metric: MetricId) -> Option<Expectation> {
    reference_expectations().into_iter().find(|e| e.metric == metric)
}

fn check_chance_stats(
    messages: &mut Vec<String>,
    metric: MetricId,
    context: &str,
    expected: ChanceExpectation,
    verdict: Option<&crate::properties::PropertyVerdict>,
) {
    let Some(stats) = verdict.and_then(|v| v.chance.as_ref()) else {
        messages.push(format!("{metric}: {context} chance stats missing"));
        return;
    };
    if stats.bound != Some(expected.bound) {
        messages.push(format!(
            "{metric}: {context} chance bound {:?}, expected {:?}",
            stats.bound, expected.bound
        ));
    }
    if let Some(strict) = expected.strict {
        if stats.strict != strict {
            messages.push(format!(
                "{metric}: {context} chance strictness {}, expected {strict}",
                stats.strict
            ));
        }
    }
    if let Some(complete) = expected.complete {
        if stats.complete != complete {
            messages.push(format!(
                "{metric}: {context} chance completeness {}, expected {complete}",
                stats.complete
            ));
        }
    }
}

/// Compares one computed cell against the documented pattern. Metrics or
/// properties without an expectation produce no messages.
pub fn cell_contradictions(
    metric: MetricId,
    property: PropertyId,
    base: &crate::properties::PropertyVerdict,
    rerun: Option<&crate::properties::PropertyVerdict>,
) -> Vec<String> {
    let Some(expected) = expectation_for(metric) else {
        return Vec::new();
    };
    let idx = PropertyId::ALL.iter().position(|&p| p == property).unwrap();
    let mark = expected.marks[idx];
    let mut messages = Vec::new();
    match mark {
        Mark::Holds => {
            if !base.passed() {
                messages.push(format!(
                    "{}: {} expected to hold, got {:?}",
                    metric,
                    property.short_label(),
                    base.verdict
                ));
            }
        }
        Mark::Fails | Mark::FailsHoldsCalibrated => {
            if base.passed() {
                messages.push(format!(
                    "{}: {} expected to fail, but no violation was found",
                    metric,
                    property.short_label()
                ));
                return messages;
            }
            if base.verdict == Verdict::Refuted && base.witness.is_none() {
                messages.push(format!(
                    "{}: {} refuted without a witness",
                    metric,
                    property.short_label()
                ));
            }
            if mark == Mark::FailsHoldsCalibrated && !rerun.is_some_and(|v| v.passed()) {
                messages.push(format!(
                    "{}: {} expected to hold after calibration",
                    metric,
                    property.short_label()
                ));
            }
        }
    }
    if property == PropertyId::ChanceCorrection {
        if let Some(expected_chance) = expected.chance {
            check_chance_stats(&mut messages, metric, "base", expected_chance, Some(base));
        }
        if let Some(expected_chance) = expected.chance_calibrated {
            check_chance_stats(&mut messages, metric, "calibrated", expected_chance, rerun);
        }
    }
    messages
}

/// Compares a computed table against the reference pattern. Returns one
/// message per contradiction; an empty result means the table reproduces
/// the documented pattern for every covered metric.
pub fn contradictions(table: &PropertyTable) -> Vec<String> {
    let mut messages = Vec::new();
    for row in &table.rows {
        for property in PropertyId::ALL {
            messages.extend(cell_contradictions(
                row.metric,
                property,
                row.verdict(property),
                row.calibrated_verdict(property),
            ));
        }
    }
    messages
}
