//! Evaluation metrics over confusion matrices.
//!
//! Every metric maps an n×n mass matrix to a scalar in `(-inf, 1]`
//! (bookmaker win is the one exception: it is reported in mass units and is
//! unbounded above). Higher is better. Zero denominators never abort an
//! evaluation where a harmless convention exists; they produce a score of 0
//! for the affected class and a [`ScoreFlag`] on the result. Genuinely
//! undefined evaluations (zero total mass, zero-prevalence classes for the
//! recall family, degenerate chance terms for kappa/MCC) are errors.

pub mod gradients;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::matrix::{ClassMasses, ConfusionMatrix};
use crate::{Error, Result};

/// Exponents `p` within this distance of zero route to the geometric mean,
/// the singular point of the generalized power mean.
pub const GEOMETRIC_EXPONENT_TOLERANCE: f64 = 1e-12;

/// Identity of a metric, including its parameters.
///
/// `MacroRecall` carries the exponent of the generalized mean over
/// class-wise recalls: `1` is the arithmetic mean, `0` the geometric mean,
/// `-1` the harmonic mean; any real exponent is accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricId {
    Accuracy,
    MicroPrecision,
    MicroRecall,
    MicroF1,
    MacroRecall { exponent: f64 },
    MacroPrecision,
    MacroF1,
    MacroF1Prime,
    WeightedF1,
    Kappa,
    Mcc,
    BookmakerWin,
}

impl MetricId {
    pub const MACRO_RECALL: MetricId = MetricId::MacroRecall { exponent: 1.0 };
    pub const GEOMETRIC_MACRO_RECALL: MetricId = MetricId::MacroRecall { exponent: 0.0 };
    pub const HARMONIC_MACRO_RECALL: MetricId = MetricId::MacroRecall { exponent: -1.0 };

    /// The full default roster reported by `evaluate`: accuracy, the three
    /// macro-recall means, macro precision, both macro F1 definitions,
    /// weighted F1, kappa, MCC, and bookmaker win.
    pub fn default_roster() -> Vec<MetricId> {
        vec![
            MetricId::Accuracy,
            MetricId::MACRO_RECALL,
            MetricId::GEOMETRIC_MACRO_RECALL,
            MetricId::HARMONIC_MACRO_RECALL,
            MetricId::MacroPrecision,
            MetricId::MacroF1,
            MetricId::MacroF1Prime,
            MetricId::WeightedF1,
            MetricId::Kappa,
            MetricId::Mcc,
            MetricId::BookmakerWin,
        ]
    }

    /// The metrics with documented property expectations (the default roster
    /// minus bookmaker win, whose score lives in mass units).
    pub fn property_roster() -> Vec<MetricId> {
        vec![
            MetricId::Accuracy,
            MetricId::MACRO_RECALL,
            MetricId::GEOMETRIC_MACRO_RECALL,
            MetricId::HARMONIC_MACRO_RECALL,
            MetricId::MacroPrecision,
            MetricId::MacroF1,
            MetricId::MacroF1Prime,
            MetricId::WeightedF1,
            MetricId::Kappa,
            MetricId::Mcc,
        ]
    }

    pub fn canonical_name(&self) -> String {
        match self {
            MetricId::Accuracy => "accuracy".into(),
            MetricId::MicroPrecision => "micro_precision".into(),
            MetricId::MicroRecall => "micro_recall".into(),
            MetricId::MicroF1 => "micro_f1".into(),
            MetricId::MacroRecall { exponent } => format!("macro_recall:p={exponent}"),
            MetricId::MacroPrecision => "macro_precision".into(),
            MetricId::MacroF1 => "macro_f1".into(),
            MetricId::MacroF1Prime => "macro_f1_prime".into(),
            MetricId::WeightedF1 => "weighted_f1".into(),
            MetricId::Kappa => "kappa".into(),
            MetricId::Mcc => "mcc".into(),
            MetricId::BookmakerWin => "bookmaker_win".into(),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let id = match s {
            "accuracy" => MetricId::Accuracy,
            "micro_precision" => MetricId::MicroPrecision,
            "micro_recall" => MetricId::MicroRecall,
            "micro_f1" => MetricId::MicroF1,
            // "balanced accuracy" is commonly identified with arithmetic
            // macro recall; exposed as an alias under that reading.
            "macro_recall" | "balanced_accuracy" => MetricId::MACRO_RECALL,
            "gmacr" => MetricId::GEOMETRIC_MACRO_RECALL,
            "hmacr" => MetricId::HARMONIC_MACRO_RECALL,
            "macro_precision" => MetricId::MacroPrecision,
            "macro_f1" => MetricId::MacroF1,
            "macro_f1_prime" => MetricId::MacroF1Prime,
            "weighted_f1" => MetricId::WeightedF1,
            "kappa" => MetricId::Kappa,
            "mcc" => MetricId::Mcc,
            "bookmaker_win" => MetricId::BookmakerWin,
            _ => {
                let exponent = s
                    .strip_prefix("macro_recall:p=")
                    .and_then(|p| p.parse::<f64>().ok())
                    .filter(|p| p.is_finite())
                    .ok_or_else(|| Error::BadMetricId(s.to_owned()))?;
                // Normalizes -0.0 so canonical names round-trip.
                MetricId::MacroRecall {
                    exponent: exponent + 0.0,
                }
            }
        };
        Ok(id)
    }
}

impl Serialize for MetricId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical_name())
    }
}

impl<'de> Deserialize<'de> for MetricId {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Caveats attached to a metric score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFlag {
    /// Some class had a zero denominator (bias, prevalence, or their sum);
    /// its class-wise score was taken as 0.
    ZeroDenominatorClass,
    /// An aggregate denominator vanished and the continuous-limit convention
    /// applied (zero class recall under a geometric/harmonic mean, or both
    /// components of a harmonic mean being zero).
    UndefinedClassSkipped,
    /// The metric was undefined on this matrix; the value is NaN. Only
    /// produced by batch evaluation, which reports instead of aborting.
    Undefined,
}

/// A metric identity together with its scalar result.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub metric: MetricId,
    pub value: f64,
    pub flags: BTreeSet<ScoreFlag>,
}

impl MetricScore {
    fn new(metric: MetricId, value: f64) -> Self {
        Self {
            metric,
            value,
            flags: BTreeSet::new(),
        }
    }

    fn with_flags(metric: MetricId, value: f64, flags: BTreeSet<ScoreFlag>) -> Self {
        Self {
            metric,
            value,
            flags,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_finite()
    }
}

impl Serialize for MetricScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MetricScore", 3)?;
        s.serialize_field("metric", &self.metric)?;
        // Non-finite values serialize as null.
        s.serialize_field("value", &self.value)?;
        s.serialize_field("flags", &self.flags)?;
        s.end()
    }
}

/// Per-class precision, recall, and F1 with zero-denominator markers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScores {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub zero_bias: Vec<bool>,
    pub zero_prevalence: Vec<bool>,
}

/// Class-wise precision `correct(i)/bias(i)`, recall
/// `correct(i)/prevalence(i)`, and F1 `2*correct(i)/(bias(i)+prevalence(i))`.
/// A zero denominator yields 0 for that class and sets the matching marker.
pub fn class_prf(m: &ConfusionMatrix) -> ClassScores {
    let n = m.n();
    let ClassMasses {
        bias,
        prevalence,
        correct,
    } = m.class_masses();
    let mut scores = ClassScores {
        precision: Vec::with_capacity(n),
        recall: Vec::with_capacity(n),
        f1: Vec::with_capacity(n),
        zero_bias: Vec::with_capacity(n),
        zero_prevalence: Vec::with_capacity(n),
    };
    for i in 0..n {
        scores.zero_bias.push(bias[i] == 0.0);
        scores.zero_prevalence.push(prevalence[i] == 0.0);
        scores
            .precision
            .push(if bias[i] > 0.0 { correct[i] / bias[i] } else { 0.0 });
        scores.recall.push(if prevalence[i] > 0.0 {
            correct[i] / prevalence[i]
        } else {
            0.0
        });
        let z = bias[i] + prevalence[i];
        scores
            .f1
            .push(if z > 0.0 { 2.0 * correct[i] / z } else { 0.0 });
    }
    scores
}

fn require_mass(m: &ConfusionMatrix) -> Result<()> {
    if m.total_mass() > 0.0 {
        Ok(())
    } else {
        Err(Error::ZeroMass)
    }
}

/// Ratio of correct predictions to total mass.
pub fn accuracy(m: &ConfusionMatrix) -> Result<MetricScore> {
    require_mass(m)?;
    let masses = m.class_masses();
    let correct: f64 = masses.correct.iter().sum();
    Ok(MetricScore::new(
        MetricId::Accuracy,
        correct / m.total_mass(),
    ))
}

/// Micro precision, recall, and F1.
///
/// Micro precision divides total correct mass by total bias, micro recall by
/// total prevalence; micro F1 is their harmonic mean. All three coincide
/// with accuracy in single-label multi-class evaluation, because total bias
/// and total prevalence both equal the total mass.
pub fn micro_prf(m: &ConfusionMatrix) -> Result<(MetricScore, MetricScore, MetricScore)> {
    require_mass(m)?;
    let masses = m.class_masses();
    let correct: f64 = masses.correct.iter().sum();
    let bias_sum: f64 = masses.bias.iter().sum();
    let prev_sum: f64 = masses.prevalence.iter().sum();
    let p = correct / bias_sum;
    let r = correct / prev_sum;
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    Ok((
        MetricScore::new(MetricId::MicroPrecision, p),
        MetricScore::new(MetricId::MicroRecall, r),
        MetricScore::new(MetricId::MicroF1, f1),
    ))
}

/// Generalized power mean with the continuous-limit convention: exponents at
/// or below zero give 0 whenever any value is 0. Returns the mean and
/// whether the limit convention fired.
pub(crate) fn power_mean(values: &[f64], exponent: f64) -> (f64, bool) {
    let n = values.len() as f64;
    if exponent.abs() < GEOMETRIC_EXPONENT_TOLERANCE {
        if values.contains(&0.0) {
            return (0.0, true);
        }
        let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / n;
        return (log_mean.exp(), false);
    }
    if exponent == 1.0 {
        return (values.iter().sum::<f64>() / n, false);
    }
    if exponent < 0.0 && values.contains(&0.0) {
        return (0.0, true);
    }
    let mean = values.iter().map(|&v| v.powf(exponent)).sum::<f64>() / n;
    (mean.powf(1.0 / exponent), false)
}

/// Generalized mean over class-wise recalls: `exponent` 1 is the usual
/// arithmetic macro recall, 0 the geometric variant, -1 the harmonic one.
/// Every class must have positive prevalence.
pub fn macro_recall(m: &ConfusionMatrix, exponent: f64) -> Result<MetricScore> {
    require_mass(m)?;
    let masses = m.class_masses();
    for (i, &prev) in masses.prevalence.iter().enumerate() {
        if prev <= 0.0 {
            return Err(Error::ZeroPrevalence(m.labels().label(i).to_owned()));
        }
    }
    let recalls: Vec<f64> = masses
        .correct
        .iter()
        .zip(&masses.prevalence)
        .map(|(c, p)| c / p)
        .collect();
    let (value, limit) = power_mean(&recalls, exponent);
    let mut flags = BTreeSet::new();
    if limit {
        flags.insert(ScoreFlag::UndefinedClassSkipped);
    }
    Ok(MetricScore::with_flags(
        MetricId::MacroRecall {
            exponent: exponent + 0.0,
        },
        value,
        flags,
    ))
}

/// Unweighted arithmetic mean over class-wise precisions. Classes that were
/// never predicted contribute 0 and set [`ScoreFlag::ZeroDenominatorClass`].
pub fn macro_precision(m: &ConfusionMatrix) -> Result<MetricScore> {
    require_mass(m)?;
    let scores = class_prf(m);
    let value = scores.precision.iter().sum::<f64>() / m.n() as f64;
    let mut flags = BTreeSet::new();
    if scores.zero_bias.iter().any(|&z| z) {
        flags.insert(ScoreFlag::ZeroDenominatorClass);
    }
    Ok(MetricScore::with_flags(
        MetricId::MacroPrecision,
        value,
        flags,
    ))
}

/// Arithmetic mean over class-wise F1 scores, i.e. over class-wise harmonic
/// means of precision and recall.
pub fn macro_f1(m: &ConfusionMatrix) -> Result<MetricScore> {
    require_mass(m)?;
    let scores = class_prf(m);
    let value = scores.f1.iter().sum::<f64>() / m.n() as f64;
    let mut flags = BTreeSet::new();
    if scores
        .zero_bias
        .iter()
        .zip(&scores.zero_prevalence)
        .any(|(&b, &p)| b && p)
    {
        flags.insert(ScoreFlag::ZeroDenominatorClass);
    }
    Ok(MetricScore::with_flags(MetricId::MacroF1, value, flags))
}

/// The other metric that goes by "macro F1": the harmonic mean of macro
/// recall and macro precision. Distinct from [`macro_f1`], which averages
/// class-wise harmonic means; the two can diverge by up to 0.5.
///
/// Equivalently this is an inter-annotator-agreement view: the harmonic mean
/// of macro recall computed on the matrix and on its transpose.
pub fn macro_f1_prime(m: &ConfusionMatrix) -> Result<MetricScore> {
    let recall = macro_recall(m, 1.0)?;
    let precision = macro_precision(m)?;
    let mut flags: BTreeSet<ScoreFlag> = &recall.flags | &precision.flags;
    let denom = recall.value + precision.value;
    let value = if denom > 0.0 {
        2.0 * recall.value * precision.value / denom
    } else {
        flags.insert(ScoreFlag::UndefinedClassSkipped);
        0.0
    };
    Ok(MetricScore::with_flags(MetricId::MacroF1Prime, value, flags))
}

/// Prevalence-weighted mean of class-wise F1 scores.
pub fn weighted_f1(m: &ConfusionMatrix) -> Result<MetricScore> {
    require_mass(m)?;
    let scores = class_prf(m);
    let masses = m.class_masses();
    let value = masses
        .prevalence
        .iter()
        .zip(&scores.f1)
        .map(|(p, f)| p * f)
        .sum::<f64>()
        / m.total_mass();
    let mut flags = BTreeSet::new();
    if scores
        .zero_bias
        .iter()
        .zip(&scores.zero_prevalence)
        .any(|(&b, &p)| b && p)
    {
        flags.insert(ScoreFlag::ZeroDenominatorClass);
    }
    Ok(MetricScore::with_flags(MetricId::WeightedF1, value, flags))
}

/// Accuracy, expected chance agreement, and the squared norms of the
/// normalized bias and prevalence vectors. Computed from raw masses with a
/// single division so degenerate cases are detected exactly on integer
/// matrices.
struct AgreementStats {
    accuracy: f64,
    chance: f64,
    bias_sq: f64,
    prevalence_sq: f64,
}

fn agreement_stats(m: &ConfusionMatrix) -> Result<AgreementStats> {
    require_mass(m)?;
    let s = m.total_mass();
    let masses = m.class_masses();
    let correct: f64 = masses.correct.iter().sum();
    let chance: f64 = masses
        .bias
        .iter()
        .zip(&masses.prevalence)
        .map(|(b, p)| b * p)
        .sum();
    let bias_sq: f64 = masses.bias.iter().map(|b| b * b).sum();
    let prevalence_sq: f64 = masses.prevalence.iter().map(|p| p * p).sum();
    Ok(AgreementStats {
        accuracy: correct / s,
        chance: chance / (s * s),
        bias_sq: bias_sq / (s * s),
        prevalence_sq: prevalence_sq / (s * s),
    })
}

/// Cohen's kappa: accuracy standardized by expected chance agreement,
/// `(accuracy - chance) / (1 - chance)`. Undefined when chance agreement is
/// total (all mass in a single predicted-and-gold class).
pub fn kappa(m: &ConfusionMatrix) -> Result<MetricScore> {
    let stats = agreement_stats(m)?;
    let denom = 1.0 - stats.chance;
    if denom <= 0.0 {
        return Err(Error::UndefinedMetric {
            metric: "kappa".into(),
            reason: "chance agreement is 1 (single-class data)".into(),
        });
    }
    Ok(MetricScore::new(
        MetricId::Kappa,
        (stats.accuracy - stats.chance) / denom,
    ))
}

/// Multi-class Matthews correlation coefficient:
/// `(accuracy - chance) / (sqrt(1 - b'b) * sqrt(1 - p'p))` on the normalized
/// matrix. Undefined when all mass sits in one predicted row or one gold
/// column.
pub fn mcc(m: &ConfusionMatrix) -> Result<MetricScore> {
    let stats = agreement_stats(m)?;
    let bias_term = 1.0 - stats.bias_sq;
    let prev_term = 1.0 - stats.prevalence_sq;
    if bias_term <= 0.0 || prev_term <= 0.0 {
        return Err(Error::UndefinedMetric {
            metric: "mcc".into(),
            reason: "all mass in a single predicted or gold class".into(),
        });
    }
    Ok(MetricScore::new(
        MetricId::Mcc,
        (stats.accuracy - stats.chance) / (bias_term.sqrt() * prev_term.sqrt()),
    ))
}

/// Net payoff of betting one coin on every prediction at fair odds
/// `total_mass / prevalence(class)`: equals `|S| * (n * macR - 1)`, positive
/// exactly when arithmetic macro recall beats `1/n`. Reported in mass units
/// and unbounded above.
pub fn bookmaker_win(m: &ConfusionMatrix) -> Result<MetricScore> {
    let recall = macro_recall(m, 1.0)?;
    let n = m.n() as f64;
    Ok(MetricScore::with_flags(
        MetricId::BookmakerWin,
        m.total_mass() * (n * recall.value - 1.0),
        recall.flags,
    ))
}

/// Evaluates one metric by id.
pub fn evaluate(metric: MetricId, m: &ConfusionMatrix) -> Result<MetricScore> {
    match metric {
        MetricId::Accuracy => accuracy(m),
        MetricId::MicroPrecision => micro_prf(m).map(|(p, _, _)| p),
        MetricId::MicroRecall => micro_prf(m).map(|(_, r, _)| r),
        MetricId::MicroF1 => micro_prf(m).map(|(_, _, f)| f),
        MetricId::MacroRecall { exponent } => macro_recall(m, exponent),
        MetricId::MacroPrecision => macro_precision(m),
        MetricId::MacroF1 => macro_f1(m),
        MetricId::MacroF1Prime => macro_f1_prime(m),
        MetricId::WeightedF1 => weighted_f1(m),
        MetricId::Kappa => kappa(m),
        MetricId::Mcc => mcc(m),
        MetricId::BookmakerWin => bookmaker_win(m),
    }
}

/// The bare score of a metric.
pub fn metric_value(metric: MetricId, m: &ConfusionMatrix) -> Result<f64> {
    evaluate(metric, m).map(|s| s.value)
}

/// Evaluates a batch of metrics in the given order. Per-metric failures do
/// not abort the batch: the entry comes back with a NaN value and
/// [`ScoreFlag::Undefined`].
pub fn evaluate_all(m: &ConfusionMatrix, metrics: &[MetricId]) -> Vec<MetricScore> {
    metrics
        .iter()
        .map(|&metric| {
            evaluate(metric, m).unwrap_or_else(|_| {
                MetricScore::with_flags(
                    metric,
                    f64::NAN,
                    BTreeSet::from([ScoreFlag::Undefined]),
                )
            })
        })
        .collect()
}
