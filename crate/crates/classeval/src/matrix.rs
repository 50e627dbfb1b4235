//! Confusion-matrix data model.
//!
//! A [`ConfusionMatrix`] stores non-negative real mass per (prediction, gold)
//! cell; rows are predictions, columns are gold classes. On top of it this
//! module provides the derived class masses (bias / prevalence / correct),
//! normalization, column-wise prevalence scaling, prevalence calibration
//! (the scaling that equalizes all class prevalences), and synthetic rank-1
//! chance matrices for prediction-independent baselines.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Tolerance for probability vectors that must sum to one.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Ordered set of distinct class labels.
///
/// Ordering is deterministic: lexicographic when inferred, or exactly the
/// order given when constructed explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSpace {
    labels: Vec<String>,
}

impl LabelSpace {
    /// Builds a label space keeping the given order.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::TooFewLabels(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Builds a label space from an unordered collection: deduplicated and
    /// sorted lexicographically.
    pub fn sorted<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        labels.dedup();
        if labels.len() < 2 {
            return Err(Error::TooFewLabels(labels.len()));
        }
        Ok(Self { labels })
    }

    /// Label space `c1..cn` for synthetic matrices.
    pub fn synthetic(n: usize) -> Self {
        assert!(n >= 2, "synthetic label space needs n >= 2");
        Self {
            labels: (1..=n).map(|i| format!("c{i}")).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Row/column sums and diagonal of a confusion matrix.
///
/// `bias[i]` is the total mass predicted as class `i` (row sum),
/// `prevalence[i]` the total mass truly belonging to class `i` (column sum),
/// and `correct[i]` the diagonal cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMasses {
    pub bias: Vec<f64>,
    pub prevalence: Vec<f64>,
    pub correct: Vec<f64>,
}

/// An n×n non-negative mass matrix over a label space.
///
/// Cell `(i, j)` holds the mass of events predicted as class `i` whose gold
/// class is `j`. Masses are reals so that ratios or accumulated soft scores
/// are representable; the counting constructor produces integers.
///
/// Values are immutable after construction; every operation returns a new
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    labels: LabelSpace,
    cells: Vec<f64>, // row-major
    total_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for ConfusionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            labels: self.labels.labels().to_vec(),
            matrix: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConfusionMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let labels = LabelSpace::new(repr.labels).map_err(D::Error::custom)?;
        ConfusionMatrix::from_rows(labels, repr.matrix).map_err(D::Error::custom)
    }
}

impl ConfusionMatrix {
    /// Builds a matrix from explicit row-major cells (rows = predictions).
    pub fn from_rows(labels: LabelSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.n();
        if rows.len() != n {
            return Err(Error::BadShape(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadShape(format!(
                    "row {i} has {} cells, expected {n}",
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::BadCell {
                        row: i,
                        col: j,
                        value,
                    });
                }
                cells.push(value);
            }
        }
        let total_mass = cells.iter().sum();
        Ok(Self {
            labels,
            cells,
            total_mass,
        })
    }

    /// Counts (gold, predicted) label pairs into a confusion matrix.
    ///
    /// When `labels` is omitted the label space is the sorted union of all
    /// gold and predicted labels seen in the input, so labels the classifier
    /// invents are covered. With an explicit space, any pair mentioning an
    /// unknown label is an error.
    pub fn from_pairs<I, S>(pairs: I, labels: Option<LabelSpace>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(g, p)| (g.as_ref().to_owned(), p.as_ref().to_owned()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::EmptyInput("no (gold, predicted) pairs".into()));
        }
        let labels = match labels {
            Some(space) => space,
            None => LabelSpace::sorted(
                pairs
                    .iter()
                    .flat_map(|(g, p)| [g.clone(), p.clone()])
                    .collect::<Vec<_>>(),
            )?,
        };
        let n = labels.n();
        let mut cells = vec![0.0; n * n];
        for (gold, pred) in &pairs {
            let j = labels
                .index_of(gold)
                .ok_or_else(|| Error::UnknownLabel(gold.clone()))?;
            let i = labels
                .index_of(pred)
                .ok_or_else(|| Error::UnknownLabel(pred.clone()))?;
            cells[i * n + j] += 1.0;
        }
        let total_mass = cells.iter().sum();
        Ok(Self {
            labels,
            cells,
            total_mass,
        })
    }

    pub fn labels(&self) -> &LabelSpace {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    /// Mass predicted as `pred` with gold class `gold`.
    pub fn get(&self, pred: usize, gold: usize) -> f64 {
        self.cells[pred * self.n() + gold]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| self.cells[i * n..(i + 1) * n].to_vec())
            .collect()
    }

    /// Returns a copy with `amount` added to cell `(pred, gold)`.
    pub fn with_added_mass(&self, pred: usize, gold: usize, amount: f64) -> Result<Self> {
        let n = self.n();
        let mut cells = self.cells.clone();
        let value = cells[pred * n + gold] + amount;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::BadCell {
                row: pred,
                col: gold,
                value,
            });
        }
        cells[pred * n + gold] = value;
        let total_mass = cells.iter().sum();
        Ok(Self {
            labels: self.labels.clone(),
            cells,
            total_mass,
        })
    }

    /// Row sums (bias), column sums (prevalence) and diagonal (correct).
    pub fn class_masses(&self) -> ClassMasses {
        let n = self.n();
        let mut bias = vec![0.0; n];
        let mut prevalence = vec![0.0; n];
        let mut correct = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let v = self.cells[i * n + j];
                bias[i] += v;
                prevalence[j] += v;
            }
            correct[i] = self.cells[i * n + i];
        }
        ClassMasses {
            bias,
            prevalence,
            correct,
        }
    }

    /// Divides every cell by the total mass so cells hold ratios.
    pub fn normalize(&self) -> Result<Self> {
        if self.total_mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let cells: Vec<f64> = self.cells.iter().map(|c| c / self.total_mass).collect();
        let total_mass = cells.iter().sum();
        Ok(Self {
            labels: self.labels.clone(),
            cells,
            total_mass,
        })
    }

    /// Multiplies column `j` by `factors[j]`, simulating a different class
    /// distribution while preserving intra-class error proportions.
    pub fn scale(&self, scaling: &ScalingVector) -> Result<Self> {
        let n = self.n();
        if scaling.factors().len() != n {
            return Err(Error::BadShape(format!(
                "scaling vector has {} factors, matrix has {n} classes",
                scaling.factors().len()
            )));
        }
        let mut cells = self.cells.clone();
        for i in 0..n {
            for j in 0..n {
                cells[i * n + j] *= scaling.factors()[j];
            }
        }
        let total_mass = cells.iter().sum();
        Ok(Self {
            labels: self.labels.clone(),
            cells,
            total_mass,
        })
    }

    /// The scaling that gives every class the same prevalence
    /// `total_mass / n`.
    ///
    /// Fails on a zero-prevalence class, naming the offending label; silently
    /// dropping the class would change `n` and with it every macro metric.
    pub fn calibration_scaling(&self) -> Result<ScalingVector> {
        let n = self.n();
        let masses = self.class_masses();
        let mut factors = Vec::with_capacity(n);
        for (j, &prev) in masses.prevalence.iter().enumerate() {
            if prev <= 0.0 {
                return Err(Error::ZeroPrevalence(self.labels.label(j).to_owned()));
            }
            factors.push(self.total_mass / (n as f64 * prev));
        }
        ScalingVector::new(factors)
    }

    /// Applies prevalence calibration: `scale` by [`Self::calibration_scaling`].
    pub fn calibrate(&self) -> Result<Self> {
        self.scale(&self.calibration_scaling()?)
    }
}

/// Strictly positive per-class scaling factors (the diagonal of a
/// prevalence-scaling matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalingVector {
    factors: Vec<f64>,
}

impl ScalingVector {
    pub fn new(factors: Vec<f64>) -> Result<Self> {
        for &f in &factors {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::BadScalingFactor(f));
            }
        }
        Ok(Self { factors })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            factors: vec![1.0; n],
        }
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }
}

impl TryFrom<Vec<f64>> for ScalingVector {
    type Error = Error;
    fn try_from(factors: Vec<f64>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<ScalingVector> for Vec<f64> {
    fn from(s: ScalingVector) -> Self {
        s.factors
    }
}

/// A random baseline: predictions drawn from `prediction_dist` independently
/// of the gold class, whose distribution is `class_dist`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceModel {
    pub prediction_dist: Vec<f64>,
    pub class_dist: Vec<f64>,
    pub mass: f64,
}

impl ChanceModel {
    pub fn new(prediction_dist: Vec<f64>, class_dist: Vec<f64>, mass: f64) -> Result<Self> {
        if prediction_dist.len() != class_dist.len() {
            return Err(Error::BadDistribution(format!(
                "prediction dist has {} entries, class dist has {}",
                prediction_dist.len(),
                class_dist.len()
            )));
        }
        if prediction_dist.len() < 2 {
            return Err(Error::TooFewLabels(prediction_dist.len()));
        }
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::BadDistribution(format!("mass {mass} must be > 0")));
        }
        for dist in [&prediction_dist, &class_dist] {
            let mut sum = 0.0;
            for &v in dist.iter() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadDistribution(format!("negative entry {v}")));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
                return Err(Error::BadDistribution(format!(
                    "entries sum to {sum}, expected 1"
                )));
            }
        }
        Ok(Self {
            prediction_dist,
            class_dist,
            mass,
        })
    }

    pub fn n(&self) -> usize {
        self.prediction_dist.len()
    }
}

/// Expected confusion matrix of the chance model: the outer product
/// `cells[i][j] = z[i] * p[j] * mass`, a rank-1 matrix where predictions are
/// independent of gold classes by construction.
pub fn chance_matrix(model: &ChanceModel) -> ConfusionMatrix {
    let n = model.n();
    let labels = LabelSpace::synthetic(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| model.prediction_dist[i] * model.class_dist[j] * model.mass)
                .collect()
        })
        .collect();
    ConfusionMatrix::from_rows(labels, rows).expect("chance matrix cells are non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(labels: &[&str]) -> LabelSpace {
        LabelSpace::new(labels.iter().map(|s| s.to_string())).unwrap()
    }

    pub(crate) fn matrix(labels: &[&str], rows: &[&[f64]]) -> ConfusionMatrix {
        ConfusionMatrix::from_rows(space(labels), rows.iter().map(|r| r.to_vec()).collect())
            .unwrap()
    }

    fn example_two_class() -> ConfusionMatrix {
        matrix(&["x", "y"], &[&[15.0, 5.0], &[10.0, 10.0]])
    }

    #[test]
    fn label_space_rejects_duplicates_and_singletons() {
        assert!(matches!(
            LabelSpace::new(["a", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            LabelSpace::new(["a"]),
            Err(Error::TooFewLabels(1))
        ));
        assert!(matches!(
            LabelSpace::sorted(["a", "a"]),
            Err(Error::TooFewLabels(1))
        ));
    }

    #[test]
    fn sorted_label_space_is_lexicographic() {
        let s = LabelSpace::sorted(["neu", "pos", "neg", "pos"]).unwrap();
        assert_eq!(s.labels(), &["neg", "neu", "pos"]);
    }

    #[test]
    fn from_pairs_counts_cells() {
        // (gold, pred) pairs reproducing [[15, 5], [10, 10]].
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n(("x", "x"), 15));
        pairs.extend(std::iter::repeat_n(("y", "x"), 5));
        pairs.extend(std::iter::repeat_n(("x", "y"), 10));
        pairs.extend(std::iter::repeat_n(("y", "y"), 10));
        let m = ConfusionMatrix::from_pairs(pairs, None).unwrap();
        assert_eq!(m.to_rows(), vec![vec![15.0, 5.0], vec![10.0, 10.0]]);
        assert_eq!(m.total_mass(), 40.0);
    }

    #[test]
    fn from_pairs_perfect_classifier_is_diagonal() {
        let pairs = [("a", "a"), ("b", "b"), ("c", "c"), ("b", "b")];
        let m = ConfusionMatrix::from_pairs(pairs, None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
        assert_eq!(m.get(1, 1), 2.0);
    }

    #[test]
    fn from_pairs_never_predicted_label_has_zero_bias() {
        let pairs = [
            ("x", "x"),
            ("x", "x"),
            ("y", "x"),
            ("y", "x"),
            ("y", "x"),
            ("x", "x"),
        ];
        let m = ConfusionMatrix::from_pairs(pairs, None).unwrap();
        let y = m.labels().index_of("y").unwrap();
        let masses = m.class_masses();
        assert_eq!(masses.bias[y], 0.0);
        assert_eq!(m.total_mass(), 6.0);
    }

    #[test]
    fn from_pairs_rejects_empty_and_unknown_labels() {
        let empty: Vec<(&str, &str)> = vec![];
        assert!(matches!(
            ConfusionMatrix::from_pairs(empty, None),
            Err(Error::EmptyInput(_))
        ));
        let err = ConfusionMatrix::from_pairs([("x", "z")], Some(space(&["x", "y"]))).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(l) if l == "z"));
    }

    #[test]
    fn class_masses_on_worked_example() {
        let masses = example_two_class().class_masses();
        assert_eq!(masses.bias, vec![20.0, 20.0]);
        assert_eq!(masses.prevalence, vec![25.0, 15.0]);
        assert_eq!(masses.correct, vec![15.0, 10.0]);
    }

    #[test]
    fn class_masses_identity_symmetry() {
        let m = matrix(
            &["a", "b", "c"],
            &[&[7.0, 0.0, 0.0], &[0.0, 7.0, 0.0], &[0.0, 0.0, 7.0]],
        );
        let masses = m.class_masses();
        assert_eq!(masses.bias, vec![7.0; 3]);
        assert_eq!(masses.prevalence, vec![7.0; 3]);
        assert_eq!(masses.correct, vec![7.0; 3]);
    }

    #[test]
    fn class_masses_scaled_example() {
        let m = matrix(&["x", "y"], &[&[15.0, 10.0], &[10.0, 20.0]]);
        assert_eq!(m.class_masses().prevalence, vec![25.0, 30.0]);
    }

    #[test]
    fn normalize_divides_by_total_mass() {
        let n = example_two_class().normalize().unwrap();
        assert_eq!(n.to_rows(), vec![vec![0.375, 0.125], vec![0.25, 0.25]]);
        assert!((n.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = example_two_class().normalize().unwrap();
        let twice = once.normalize().unwrap();
        assert_eq!(once.to_rows(), twice.to_rows());
    }

    #[test]
    fn normalize_symmetric_case() {
        let m = matrix(&["x", "y"], &[&[2.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(
            m.normalize().unwrap().to_rows(),
            vec![vec![0.5, 0.0], vec![0.0, 0.5]]
        );
    }

    #[test]
    fn normalize_rejects_zero_mass() {
        let m = matrix(&["x", "y"], &[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(m.normalize(), Err(Error::ZeroMass)));
    }

    #[test]
    fn scale_multiplies_columns() {
        let m = example_two_class();
        let scaled = m.scale(&ScalingVector::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(scaled.to_rows(), vec![vec![15.0, 10.0], vec![10.0, 20.0]]);

        let identity = m.scale(&ScalingVector::uniform(2)).unwrap();
        assert_eq!(identity.to_rows(), m.to_rows());

        let other = m.scale(&ScalingVector::new(vec![2.0, 1.0]).unwrap()).unwrap();
        assert_eq!(other.to_rows(), vec![vec![30.0, 5.0], vec![20.0, 10.0]]);
    }

    #[test]
    fn scaling_vector_rejects_non_positive_factors() {
        assert!(matches!(
            ScalingVector::new(vec![1.0, 0.0]),
            Err(Error::BadScalingFactor(_))
        ));
        assert!(matches!(
            ScalingVector::new(vec![1.0, -2.0]),
            Err(Error::BadScalingFactor(_))
        ));
    }

    #[test]
    fn calibration_scaling_on_worked_example() {
        let lambda = example_two_class().calibration_scaling().unwrap();
        assert!((lambda.factors()[0] - 0.8).abs() < 1e-15);
        assert!((lambda.factors()[1] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn calibration_of_balanced_matrix_is_identity() {
        let m = matrix(&["x", "y"], &[&[3.0, 1.0], &[1.0, 3.0]]);
        let lambda = m.calibration_scaling().unwrap();
        assert_eq!(lambda.factors(), &[1.0, 1.0]);
    }

    #[test]
    fn calibrated_matrix_has_equal_prevalences() {
        let calibrated = example_two_class().calibrate().unwrap();
        let prev = calibrated.class_masses().prevalence;
        assert!((prev[0] - 20.0).abs() < 1e-12);
        assert!((prev[1] - 20.0).abs() < 1e-12);
        // Calibration keeps the total mass.
        assert!((calibrated.total_mass() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_refuses_zero_prevalence() {
        let m = matrix(&["x", "y"], &[&[3.0, 0.0], &[2.0, 0.0]]);
        let err = m.calibration_scaling().unwrap_err();
        assert!(matches!(err, Error::ZeroPrevalence(l) if l == "y"));
    }

    #[test]
    fn chance_matrix_outer_product() {
        let model = ChanceModel::new(vec![0.5, 0.5], vec![0.5, 0.5], 4.0).unwrap();
        assert_eq!(
            chance_matrix(&model).to_rows(),
            vec![vec![1.0, 1.0], vec![1.0, 1.0]]
        );

        let degenerate = ChanceModel::new(vec![1.0, 0.0], vec![0.5, 0.5], 10.0).unwrap();
        assert_eq!(
            chance_matrix(&degenerate).to_rows(),
            vec![vec![5.0, 5.0], vec![0.0, 0.0]]
        );
    }

    #[test]
    fn chance_model_validates_distributions() {
        assert!(ChanceModel::new(vec![0.6, 0.3], vec![0.5, 0.5], 1.0).is_err());
        assert!(ChanceModel::new(vec![0.5, 0.5], vec![-0.5, 1.5], 1.0).is_err());
        assert!(ChanceModel::new(vec![0.5, 0.5], vec![0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = example_two_class();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"labels\""));
        assert!(json.contains("\"matrix\""));
        let back: ConfusionMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_json_rejects_negative_cells() {
        let json = r#"{"labels": ["a", "b"], "matrix": [[1.0, -2.0], [0.0, 1.0]]}"#;
        assert!(serde_json::from_str::<ConfusionMatrix>(json).is_err());
    }

    prop_compose! {
        fn arb_matrix()(n in 2usize..=5)(
            n in Just(n),
            cells in proptest::collection::vec(0u32..=100, n * n),
        ) -> ConfusionMatrix {
            let mut rows: Vec<Vec<f64>> = (0..n)
                .map(|i| cells[i * n..(i + 1) * n].iter().map(|&c| c as f64).collect())
                .collect();
            // Guarantee positive prevalence everywhere.
            for j in 0..n {
                if (0..n).map(|i| rows[i][j]).sum::<f64>() == 0.0 {
                    rows[j][j] = 1.0;
                }
            }
            ConfusionMatrix::from_rows(LabelSpace::synthetic(n), rows).unwrap()
        }
    }

    proptest! {
        #[test]
        fn mass_bookkeeping_consistent(m in arb_matrix()) {
            let masses = m.class_masses();
            let bias_sum: f64 = masses.bias.iter().sum();
            let prev_sum: f64 = masses.prevalence.iter().sum();
            prop_assert!((bias_sum - m.total_mass()).abs() <= 1e-9 * m.total_mass().max(1.0));
            prop_assert!((prev_sum - m.total_mass()).abs() <= 1e-9 * m.total_mass().max(1.0));
        }

        #[test]
        fn scaling_composes_elementwise(
            m in arb_matrix(),
            seed in proptest::collection::vec(1u32..=8, 10),
        ) {
            let n = m.n();
            let first: Vec<f64> = (0..n).map(|i| seed[i] as f64 / 4.0).collect();
            let second: Vec<f64> = (0..n).map(|i| seed[i + 5 - n.min(5)] as f64 / 2.0).collect();
            let composed: Vec<f64> = first.iter().zip(&second).map(|(a, b)| a * b).collect();
            let lhs = m
                .scale(&ScalingVector::new(first).unwrap()).unwrap()
                .scale(&ScalingVector::new(second).unwrap()).unwrap();
            let rhs = m.scale(&ScalingVector::new(composed).unwrap()).unwrap();
            for (a, b) in lhs.to_rows().iter().flatten().zip(rhs.to_rows().iter().flatten()) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }

        #[test]
        fn calibration_equalizes_prevalences(m in arb_matrix()) {
            let calibrated = m.calibrate().unwrap();
            let prev = calibrated.class_masses().prevalence;
            let max = prev.iter().cloned().fold(f64::MIN, f64::max);
            let min = prev.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(max - min <= 1e-9 * calibrated.total_mass());
        }

        #[test]
        fn chance_matrices_are_rank_one(
            z_raw in proptest::collection::vec(1u32..=20, 3),
            p_raw in proptest::collection::vec(1u32..=20, 3),
        ) {
            let norm = |v: &[u32]| {
                let s: u32 = v.iter().sum();
                v.iter().map(|&x| x as f64 / s as f64).collect::<Vec<_>>()
            };
            let model = ChanceModel::new(norm(&z_raw), norm(&p_raw), 90.0).unwrap();
            let m = chance_matrix(&model);
            let n = m.n();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let lhs = m.get(i, j) * m.get(k, l);
                            let rhs = m.get(i, l) * m.get(k, j);
                            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
                        }
                    }
                }
            }
        }
    }
}
