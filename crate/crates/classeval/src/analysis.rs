//! Multi-system ranking and rank-correlation analysis.
//!
//! A [`RankingTable`] scores a set of systems (one confusion matrix each,
//! over a shared label space) under a set of metric columns, assigns
//! fractional ranks per column (rank 1 is best, ties averaged), and feeds a
//! Spearman [`CorrelationMatrix`] over the columns. Calibrated metric
//! variants are distinct columns named with a `~` suffix and are computed on
//! the prevalence-calibrated matrix. Per-class recall columns are supported
//! so a class's influence on the ranking can be inspected directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::matrix::{ConfusionMatrix, DISTRIBUTION_TOLERANCE};
use crate::metrics::{self, MetricId};
use crate::{Error, Result};

/// One system under comparison.
#[derive(Debug, Clone)]
pub struct SystemRun {
    pub system_id: String,
    pub matrix: ConfusionMatrix,
}

impl SystemRun {
    pub fn new(system_id: impl Into<String>, matrix: ConfusionMatrix) -> Self {
        Self {
            system_id: system_id.into(),
            matrix,
        }
    }
}

/// A scoring column: a metric (optionally on the calibrated matrix, written
/// `metric~`) or a single class's recall (written `recall:<label>`).
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSpec {
    Metric { id: MetricId, calibrated: bool },
    ClassRecall { label: String },
}

impl ColumnSpec {
    pub fn metric(id: MetricId) -> Self {
        ColumnSpec::Metric {
            id,
            calibrated: false,
        }
    }

    pub fn calibrated(id: MetricId) -> Self {
        ColumnSpec::Metric {
            id,
            calibrated: true,
        }
    }

    pub fn class_recall(label: impl Into<String>) -> Self {
        ColumnSpec::ClassRecall {
            label: label.into(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ColumnSpec::Metric { id, calibrated } => {
                if *calibrated {
                    format!("{id}~")
                } else {
                    id.to_string()
                }
            }
            ColumnSpec::ClassRecall { label } => format!("recall:{label}"),
        }
    }

    fn score(&self, m: &ConfusionMatrix) -> Option<f64> {
        match self {
            ColumnSpec::Metric { id, calibrated } => {
                let subject = if *calibrated {
                    m.calibrate().ok()?
                } else {
                    m.clone()
                };
                metrics::metric_value(*id, &subject)
                    .ok()
                    .filter(|v| v.is_finite())
            }
            ColumnSpec::ClassRecall { label } => {
                let i = m.labels().index_of(label)?;
                Some(metrics::class_prf(m).recall[i])
            }
        }
    }
}

impl fmt::Display for ColumnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ColumnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(label) = s.strip_prefix("recall:") {
            if label.is_empty() {
                return Err(Error::BadMetricId(s.to_owned()));
            }
            return Ok(ColumnSpec::class_recall(label));
        }
        if let Some(base) = s.strip_suffix('~') {
            return Ok(ColumnSpec::calibrated(base.parse()?));
        }
        Ok(ColumnSpec::metric(s.parse()?))
    }
}

impl Serialize for ColumnSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for ColumnSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Scores and fractional ranks for every (system, column) pair.
///
/// `scores[s][c]` is `None` when the column's metric is undefined on that
/// system's matrix; undefined entries rank last in their column and are
/// excluded from correlations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingTable {
    pub systems: Vec<String>,
    pub columns: Vec<ColumnSpec>,
    pub scores: Vec<Vec<Option<f64>>>,
    pub ranks: Vec<Vec<f64>>,
}

/// Pairwise Spearman correlations between the table's columns. `None`
/// entries are undefined pairs (a constant column, or fewer than two systems
/// where both columns are defined).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub columns: Vec<ColumnSpec>,
    pub rho: Vec<Vec<Option<f64>>>,
}

/// Fractional ranks, descending: the largest score gets rank 1 and tied
/// scores share the average of the positions they span. `None` scores rank
/// after every defined score, sharing the averaged tail positions.
pub fn fractional_ranks_desc(scores: &[Option<f64>]) -> Vec<f64> {
    let len = scores.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| match (scores[a], scores[b]) {
        (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Equal),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut ranks = vec![0.0; len];
    let mut start = 0;
    while start < len {
        let mut end = start;
        while end + 1 < len && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let average = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = average;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman rank correlation with averaged (fractional) ranks for ties:
/// the Pearson correlation of the two rank vectors. Identical rankings give
/// exactly 1. Constant input is undefined.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::BadShape(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateCorrelation(
            "need at least two observations".into(),
        ));
    }
    let to_options = |v: &[f64]| v.iter().map(|&a| Some(a)).collect::<Vec<_>>();
    let rx = fractional_ranks_desc(&to_options(x));
    let ry = fractional_ranks_desc(&to_options(y));
    if rx.iter().all(|&r| r == rx[0]) || ry.iter().all(|&r| r == ry[0]) {
        return Err(Error::DegenerateCorrelation("constant input".into()));
    }
    if rx == ry {
        return Ok(1.0);
    }
    let n = rx.len() as f64;
    let mean_x: f64 = rx.iter().sum::<f64>() / n;
    let mean_y: f64 = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Scores every system under every column and ranks each column.
pub fn score_systems(runs: &[SystemRun], columns: &[ColumnSpec]) -> Result<RankingTable> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("no system runs".into()));
    }
    let space = runs[0].matrix.labels();
    for run in &runs[1..] {
        if run.matrix.labels() != space {
            return Err(Error::LabelSpaceMismatch(format!(
                "system `{}` uses {:?}, system `{}` uses {:?}",
                runs[0].system_id,
                space.labels(),
                run.system_id,
                run.matrix.labels().labels()
            )));
        }
    }
    for column in columns {
        if let ColumnSpec::ClassRecall { label } = column {
            if space.index_of(label).is_none() {
                return Err(Error::UnknownLabel(label.clone()));
            }
        }
    }
    let scores: Vec<Vec<Option<f64>>> = runs
        .iter()
        .map(|run| columns.iter().map(|c| c.score(&run.matrix)).collect())
        .collect();
    let ranks: Vec<Vec<f64>> = {
        let mut per_system = vec![vec![0.0; columns.len()]; runs.len()];
        for (c, _) in columns.iter().enumerate() {
            let column_scores: Vec<Option<f64>> = scores.iter().map(|row| row[c]).collect();
            for (s, rank) in fractional_ranks_desc(&column_scores).into_iter().enumerate() {
                per_system[s][c] = rank;
            }
        }
        per_system
    };
    Ok(RankingTable {
        systems: runs.iter().map(|r| r.system_id.clone()).collect(),
        columns: columns.to_vec(),
        scores,
        ranks,
    })
}

/// Pairwise Spearman correlation over the table's columns, skipping systems
/// where either column is undefined.
pub fn correlation_matrix(table: &RankingTable) -> CorrelationMatrix {
    let k = table.columns.len();
    let mut rho = vec![vec![None; k]; k];
    for a in 0..k {
        for b in a..k {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for row in &table.scores {
                if let (Some(x), Some(y)) = (row[a], row[b]) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let value = spearman(&xs, &ys).ok();
            rho[a][b] = value;
            rho[b][a] = value;
        }
    }
    CorrelationMatrix {
        columns: table.columns.clone(),
        rho,
    }
}

/// A system with the mean of its fractional ranks over an ensemble of
/// columns. Equal mean ranks are ties and are reported as such.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleEntry {
    pub system_id: String,
    pub mean_rank: f64,
}

/// Mean fractional rank over `subset`, best (lowest) first. Ties keep the
/// table's system order; nothing breaks them.
pub fn ensemble_rank(table: &RankingTable, subset: &[ColumnSpec]) -> Result<Vec<EnsembleEntry>> {
    if subset.is_empty() {
        return Err(Error::EmptyInput("empty metric ensemble".into()));
    }
    let mut indices = Vec::with_capacity(subset.len());
    for column in subset {
        let idx = table
            .columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| Error::UnknownColumn(column.name()))?;
        indices.push(idx);
    }
    let mut entries: Vec<EnsembleEntry> = table
        .systems
        .iter()
        .enumerate()
        .map(|(s, id)| EnsembleEntry {
            system_id: id.clone(),
            mean_rank: indices.iter().map(|&c| table.ranks[s][c]).sum::<f64>()
                / indices.len() as f64,
        })
        .collect();
    entries.sort_by(|a, b| {
        a.mean_rank
            .partial_cmp(&b.mean_rank)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(entries)
}

/// Precision estimates projected from class recalls and estimated class and
/// prediction distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionProjection {
    /// Per-class estimates, clamped to 1 where the inputs were inconsistent.
    pub estimates: Vec<f64>,
    /// True where the raw estimate exceeded 1.
    pub inconsistent: Vec<bool>,
    /// Mean of the per-class estimates.
    pub macro_estimate: f64,
}

fn validate_distribution(name: &str, dist: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &v in dist {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::BadDistribution(format!(
                "{name} has negative or non-finite entry {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::BadDistribution(format!(
            "{name} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Guesses class precisions for a data set where only recalls are known:
/// `P(c=i|f->i) ~= R_i * P(c=i) / P(f->i)`, given an estimated class
/// distribution and an estimated prediction distribution. Estimates above 1
/// mean the inputs are mutually inconsistent; they are clamped and flagged
/// rather than rejected, since the projection is an idealized approximation
/// to begin with. The reverse direction (precisions to recalls) does not
/// transfer, which is what makes recall statistics worth reporting.
pub fn project_precision(
    recalls: &[f64],
    est_class_dist: &[f64],
    est_pred_dist: &[f64],
) -> Result<PrecisionProjection> {
    if recalls.len() != est_class_dist.len() || recalls.len() != est_pred_dist.len() {
        return Err(Error::BadShape(format!(
            "recalls ({}), class dist ({}), and prediction dist ({}) must have equal length",
            recalls.len(),
            est_class_dist.len(),
            est_pred_dist.len()
        )));
    }
    validate_distribution("class distribution", est_class_dist)?;
    validate_distribution("prediction distribution", est_pred_dist)?;
    for (i, &q) in est_pred_dist.iter().enumerate() {
        if q <= 0.0 {
            return Err(Error::BadDistribution(format!(
                "prediction distribution entry {i} is zero; projection is undefined"
            )));
        }
    }
    let mut estimates = Vec::with_capacity(recalls.len());
    let mut inconsistent = Vec::with_capacity(recalls.len());
    for ((&r, &c), &q) in recalls.iter().zip(est_class_dist).zip(est_pred_dist) {
        let raw = r * c / q;
        inconsistent.push(raw > 1.0);
        estimates.push(raw.min(1.0));
    }
    let macro_estimate = estimates.iter().sum::<f64>() / estimates.len() as f64;
    Ok(PrecisionProjection {
        estimates,
        inconsistent,
        macro_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::LabelSpace;

    fn matrix(rows: &[&[f64]]) -> ConfusionMatrix {
        ConfusionMatrix::from_rows(
            LabelSpace::synthetic(rows.len()),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn runs_with_accuracies(values: &[(&str, f64)]) -> Vec<SystemRun> {
        // Two-class matrices with 10 items and the requested accuracy.
        values
            .iter()
            .map(|(id, acc)| {
                let correct = acc * 10.0;
                let wrong = 10.0 - correct;
                SystemRun::new(
                    *id,
                    matrix(&[&[correct / 2.0, wrong / 2.0], &[wrong / 2.0, correct / 2.0]]),
                )
            })
            .collect()
    }

    #[test]
    fn fractional_ranks_average_ties() {
        let scores = vec![Some(0.9), Some(0.8), Some(0.9)];
        assert_eq!(fractional_ranks_desc(&scores), vec![1.5, 3.0, 1.5]);
    }

    #[test]
    fn undefined_scores_rank_last() {
        let scores = vec![None, Some(0.8), Some(0.9), None];
        assert_eq!(fractional_ranks_desc(&scores), vec![3.5, 2.0, 1.0, 3.5]);
    }

    #[test]
    fn score_systems_ranks_accuracy_column() {
        let runs = runs_with_accuracies(&[("a", 0.9), ("b", 0.8), ("c", 0.9)]);
        let table = score_systems(&runs, &[ColumnSpec::metric(MetricId::Accuracy)]).unwrap();
        let ranks: Vec<f64> = table.ranks.iter().map(|r| r[0]).collect();
        assert_eq!(ranks, vec![1.5, 3.0, 1.5]);
    }

    #[test]
    fn single_run_ranks_first_everywhere() {
        let runs = runs_with_accuracies(&[("only", 0.7)]);
        let table = score_systems(
            &runs,
            &[
                ColumnSpec::metric(MetricId::Accuracy),
                ColumnSpec::metric(MetricId::MacroF1),
            ],
        )
        .unwrap();
        assert_eq!(table.ranks[0], vec![1.0, 1.0]);
    }

    #[test]
    fn macro_recall_column_is_mean_of_class_recall_columns() {
        let runs = vec![
            SystemRun::new("a", matrix(&[&[8.0, 2.0, 1.0], &[1.0, 7.0, 2.0], &[1.0, 1.0, 7.0]])),
            SystemRun::new("b", matrix(&[&[5.0, 1.0, 3.0], &[3.0, 6.0, 1.0], &[2.0, 3.0, 6.0]])),
            SystemRun::new("c", matrix(&[&[9.0, 4.0, 2.0], &[0.0, 5.0, 2.0], &[1.0, 1.0, 6.0]])),
        ];
        let columns = vec![
            ColumnSpec::class_recall("c1"),
            ColumnSpec::class_recall("c2"),
            ColumnSpec::class_recall("c3"),
            ColumnSpec::metric(MetricId::MACRO_RECALL),
        ];
        let table = score_systems(&runs, &columns).unwrap();
        for row in &table.scores {
            let mean = (row[0].unwrap() + row[1].unwrap() + row[2].unwrap()) / 3.0;
            assert!((mean - row[3].unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn score_systems_rejects_mismatched_label_spaces() {
        let runs = vec![
            SystemRun::new("a", matrix(&[&[1.0, 0.0], &[0.0, 1.0]])),
            SystemRun::new(
                "b",
                ConfusionMatrix::from_rows(
                    LabelSpace::new(["x", "y"]).unwrap(),
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                )
                .unwrap(),
            ),
        ];
        assert!(matches!(
            score_systems(&runs, &[ColumnSpec::metric(MetricId::Accuracy)]),
            Err(Error::LabelSpaceMismatch(_))
        ));
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0
        );
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateCorrelation(_))
        ));
    }

    #[test]
    fn spearman_with_ties_matches_rank_pearson() {
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((rho - 0.8660254037844387).abs() < 1e-15);
    }

    #[test]
    fn spearman_is_symmetric() {
        let x = [0.4, 0.9, 0.9, 0.1, 0.6];
        let y = [0.3, 0.2, 0.8, 0.8, 0.5];
        assert_eq!(spearman(&x, &y).unwrap(), spearman(&y, &x).unwrap());
    }

    #[test]
    fn correlation_diagonal_is_one() {
        let runs = runs_with_accuracies(&[("a", 0.9), ("b", 0.7), ("c", 0.8)]);
        let table = score_systems(
            &runs,
            &[
                ColumnSpec::metric(MetricId::Accuracy),
                ColumnSpec::metric(MetricId::MacroF1),
            ],
        )
        .unwrap();
        let corr = correlation_matrix(&table);
        assert_eq!(corr.rho[0][0], Some(1.0));
        assert_eq!(corr.rho[1][1], Some(1.0));
        assert_eq!(corr.rho[0][1], corr.rho[1][0]);
    }

    #[test]
    fn equivalent_columns_correlate_exactly() {
        let runs = vec![
            SystemRun::new("a", matrix(&[&[8.0, 2.0, 1.0], &[1.0, 7.0, 2.0], &[1.0, 1.0, 7.0]])),
            SystemRun::new("b", matrix(&[&[5.0, 1.0, 3.0], &[3.0, 6.0, 1.0], &[2.0, 3.0, 6.0]])),
            SystemRun::new("c", matrix(&[&[9.0, 4.0, 2.0], &[1.0, 5.0, 2.0], &[1.0, 1.0, 6.0]])),
            SystemRun::new("d", matrix(&[&[4.0, 1.0, 1.0], &[2.0, 8.0, 3.0], &[1.0, 2.0, 5.0]])),
        ];
        let columns = vec![
            ColumnSpec::metric(MetricId::MACRO_RECALL),
            ColumnSpec::calibrated(MetricId::Kappa),
            ColumnSpec::calibrated(MetricId::Accuracy),
            ColumnSpec::calibrated(MetricId::WeightedF1),
            ColumnSpec::calibrated(MetricId::MacroF1),
        ];
        let table = score_systems(&runs, &columns).unwrap();
        let corr = correlation_matrix(&table);
        // Macro recall, calibrated kappa, and calibrated accuracy agree.
        assert_eq!(corr.rho[0][1], Some(1.0));
        assert_eq!(corr.rho[0][2], Some(1.0));
        // Calibrated weighted F1 agrees with calibrated macro F1.
        assert_eq!(corr.rho[3][4], Some(1.0));
    }

    #[test]
    fn rank_invariance_under_monotone_transforms() {
        let raw: Vec<Option<f64>> = vec![Some(0.31), Some(0.74), Some(0.52), Some(0.74)];
        let transformed: Vec<Option<f64>> =
            raw.iter().map(|v| v.map(|x| (3.0 * x).exp() + 7.0)).collect();
        assert_eq!(
            fractional_ranks_desc(&raw),
            fractional_ranks_desc(&transformed)
        );
    }

    #[test]
    fn ensemble_rank_orders_by_mean_rank() {
        let runs = runs_with_accuracies(&[("a", 0.9), ("b", 0.7), ("c", 0.8)]);
        let columns = vec![ColumnSpec::metric(MetricId::Accuracy)];
        let table = score_systems(&runs, &columns).unwrap();
        let entries = ensemble_rank(&table, &columns).unwrap();
        let ids: Vec<&str> = entries.iter().map(|e| e.system_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "c", "b"]);
    }

    #[test]
    fn ensemble_reports_ties() {
        // Two columns ranking the systems in opposite orders.
        let runs = vec![
            SystemRun::new("a", matrix(&[&[9.0, 5.0], &[1.0, 5.0]])),
            SystemRun::new("b", matrix(&[&[5.0, 1.0], &[5.0, 9.0]])),
        ];
        let columns = vec![
            ColumnSpec::class_recall("c1"),
            ColumnSpec::class_recall("c2"),
        ];
        let table = score_systems(&runs, &columns).unwrap();
        let entries = ensemble_rank(&table, &columns).unwrap();
        assert_eq!(entries[0].mean_rank, 1.5);
        assert_eq!(entries[1].mean_rank, 1.5);
    }

    #[test]
    fn ensemble_matches_brute_force_mean_ranks() {
        let runs = vec![
            SystemRun::new("r1", matrix(&[&[9.0, 2.0, 1.0], &[2.0, 6.0, 3.0], &[1.0, 2.0, 8.0]])),
            SystemRun::new("r2", matrix(&[&[7.0, 1.0, 2.0], &[3.0, 8.0, 1.0], &[2.0, 1.0, 9.0]])),
            SystemRun::new("r3", matrix(&[&[8.0, 3.0, 3.0], &[1.0, 5.0, 2.0], &[3.0, 2.0, 7.0]])),
        ];
        let columns = vec![
            ColumnSpec::metric(MetricId::Accuracy),
            ColumnSpec::metric(MetricId::MACRO_RECALL),
            ColumnSpec::metric(MetricId::GEOMETRIC_MACRO_RECALL),
            ColumnSpec::metric(MetricId::HARMONIC_MACRO_RECALL),
        ];
        let table = score_systems(&runs, &columns).unwrap();
        let entries = ensemble_rank(&table, &columns).unwrap();

        // Brute-force oracle: rank = 1 + #greater + (#equal - 1)/2.
        let brute_rank = |values: &[f64], i: usize| {
            let greater = values.iter().filter(|&&v| v > values[i]).count() as f64;
            let equal = values.iter().filter(|&&v| v == values[i]).count() as f64;
            1.0 + greater + (equal - 1.0) / 2.0
        };
        let mut expected: Vec<(String, f64)> = (0..runs.len())
            .map(|s| {
                let mean = (0..columns.len())
                    .map(|c| {
                        let column: Vec<f64> =
                            (0..runs.len()).map(|r| table.scores[r][c].unwrap()).collect();
                        brute_rank(&column, s)
                    })
                    .sum::<f64>()
                    / columns.len() as f64;
                (table.systems[s].clone(), mean)
            })
            .collect();
        expected.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for (entry, (id, mean)) in entries.iter().zip(&expected) {
            assert_eq!(&entry.system_id, id);
            assert!((entry.mean_rank - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_rejects_unknown_columns() {
        let runs = runs_with_accuracies(&[("a", 0.9)]);
        let table = score_systems(&runs, &[ColumnSpec::metric(MetricId::Accuracy)]).unwrap();
        assert!(matches!(
            ensemble_rank(&table, &[ColumnSpec::metric(MetricId::Kappa)]),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn projection_single_substitution() {
        let projection = project_precision(&[0.6, 1.0], &[0.5, 0.5], &[0.4, 0.6]).unwrap();
        assert!((projection.estimates[0] - 0.75).abs() < 1e-15);
        assert!(!projection.inconsistent[0]);
    }

    #[test]
    fn projection_recovers_true_precisions_from_own_matrix() {
        let m = matrix(&[&[15.0, 5.0], &[10.0, 10.0]]);
        let scores = metrics::class_prf(&m);
        let masses = m.class_masses();
        let s = m.total_mass();
        let class_dist: Vec<f64> = masses.prevalence.iter().map(|p| p / s).collect();
        let pred_dist: Vec<f64> = masses.bias.iter().map(|b| b / s).collect();
        let projection = project_precision(&scores.recall, &class_dist, &pred_dist).unwrap();
        for (estimate, truth) in projection.estimates.iter().zip(&scores.precision) {
            assert!((estimate - truth).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_perfect_recall_with_matched_distributions() {
        let projection = project_precision(&[1.0, 1.0], &[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(projection.estimates, vec![1.0, 1.0]);
        assert_eq!(projection.macro_estimate, 1.0);
    }

    #[test]
    fn projection_flags_inconsistent_estimates() {
        let projection = project_precision(&[1.0, 0.5], &[0.8, 0.2], &[0.2, 0.8]).unwrap();
        assert!(projection.inconsistent[0]);
        assert_eq!(projection.estimates[0], 1.0);
    }

    #[test]
    fn projection_validates_inputs() {
        assert!(matches!(
            project_precision(&[0.5, 0.5], &[0.4, 0.4], &[0.5, 0.5]),
            Err(Error::BadDistribution(_))
        ));
        assert!(matches!(
            project_precision(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::BadDistribution(_))
        ));
        assert!(matches!(
            project_precision(&[0.5], &[0.5, 0.5], &[0.5, 0.5]),
            Err(Error::BadShape(_))
        ));
    }
}
