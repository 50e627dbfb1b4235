//! Analytic gradients of every metric with respect to the matrix cells, and
//! a central-finite-difference oracle to validate them.
//!
//! Gradient entry `(i, j)` is the partial derivative of the metric with
//! respect to the mass at (prediction `i`, gold `j`). For a monotonic metric
//! the diagonal entries are non-negative and all others non-positive, which
//! is what the property checks read off.

use crate::matrix::{ClassMasses, ConfusionMatrix};
use crate::metrics::{self, MetricId, GEOMETRIC_EXPONENT_TOLERANCE};
use crate::{Error, Result};

fn interior_masses(m: &ConfusionMatrix) -> Result<ClassMasses> {
    if m.total_mass() <= 0.0 {
        return Err(Error::GradientDomain("zero total mass".into()));
    }
    let masses = m.class_masses();
    for i in 0..m.n() {
        if masses.bias[i] <= 0.0 || masses.prevalence[i] <= 0.0 {
            return Err(Error::GradientDomain(format!(
                "class `{}` has zero bias or prevalence",
                m.labels().label(i)
            )));
        }
    }
    Ok(masses)
}

fn accuracy_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let s = m.total_mass();
    let acc = masses.correct.iter().sum::<f64>() / s;
    let n = m.n();
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { (1.0 - acc) / s } else { -acc / s })
                .collect()
        })
        .collect();
    Ok(grid)
}

/// Chain rule through the generalized mean: the mean's sensitivity to each
/// class recall, times the recall's sensitivity to the cell.
fn macro_recall_gradient(m: &ConfusionMatrix, exponent: f64) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let n = m.n();
    let nf = n as f64;
    let recalls: Vec<f64> = masses
        .correct
        .iter()
        .zip(&masses.prevalence)
        .map(|(c, p)| c / p)
        .collect();
    if exponent != 1.0 && recalls.iter().any(|&r| r <= 0.0) {
        return Err(Error::GradientDomain(
            "zero class recall is a boundary point for non-arithmetic means".into(),
        ));
    }
    let mean = metrics::macro_recall(m, exponent)?.value;
    let d_mean_d_recall: Vec<f64> = if exponent.abs() < GEOMETRIC_EXPONENT_TOLERANCE {
        recalls.iter().map(|&r| mean / (nf * r)).collect()
    } else if exponent == 1.0 {
        vec![1.0 / nf; n]
    } else {
        recalls
            .iter()
            .map(|&r| mean.powf(1.0 - exponent) * r.powf(exponent - 1.0) / nf)
            .collect()
    };
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        d_mean_d_recall[i] * (1.0 - recalls[i]) / masses.prevalence[i]
                    } else {
                        d_mean_d_recall[j] * (-recalls[j] / masses.prevalence[j])
                    }
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn macro_precision_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let n = m.n();
    let nf = n as f64;
    let grid = (0..n)
        .map(|i| {
            let bias_sq = masses.bias[i] * masses.bias[i];
            (0..n)
                .map(|j| {
                    if i == j {
                        (masses.bias[i] - masses.correct[i]) / (nf * bias_sq)
                    } else {
                        -masses.correct[i] / (nf * bias_sq)
                    }
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn macro_f1_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let n = m.n();
    let nf = n as f64;
    let z: Vec<f64> = masses
        .bias
        .iter()
        .zip(&masses.prevalence)
        .map(|(b, p)| b + p)
        .collect();
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        // The diagonal cell feeds correct, bias, and
                        // prevalence at once, so the denominator grows by 2.
                        2.0 * (z[i] - 2.0 * masses.correct[i]) / (nf * z[i] * z[i])
                    } else {
                        -2.0 * masses.correct[i] / (nf * z[i] * z[i])
                            - 2.0 * masses.correct[j] / (nf * z[j] * z[j])
                    }
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn macro_f1_prime_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let recall = metrics::macro_recall(m, 1.0)?.value;
    let precision = metrics::macro_precision(m)?.value;
    let denom = recall + precision;
    if denom <= 0.0 {
        return Err(Error::GradientDomain(
            "macro recall and precision are both zero".into(),
        ));
    }
    let d_recall = macro_recall_gradient(m, 1.0)?;
    let d_precision = macro_precision_gradient(m)?;
    let n = m.n();
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (2.0 * precision * precision * d_recall[i][j]
                        + 2.0 * recall * recall * d_precision[i][j])
                        / (denom * denom)
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn weighted_f1_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let s = m.total_mass();
    let n = m.n();
    let z: Vec<f64> = masses
        .bias
        .iter()
        .zip(&masses.prevalence)
        .map(|(b, p)| b + p)
        .collect();
    let value = metrics::weighted_f1(m)?.value;
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        (2.0 * masses.correct[i] * (masses.bias[i] - masses.prevalence[i])
                            / (z[i] * z[i])
                            + 2.0 * masses.prevalence[i] / z[i]
                            - value)
                            / s
                    } else {
                        (2.0 * masses.bias[j] * masses.correct[j] / (z[j] * z[j])
                            - 2.0 * masses.prevalence[i] * masses.correct[i] / (z[i] * z[i])
                            - value)
                            / s
                    }
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

/// Shared quotient-rule pieces for kappa and MCC on raw (unnormalized)
/// masses: numerator `r*s - p'b` and its cell-wise derivative.
struct AgreementPieces {
    masses: ClassMasses,
    s: f64,
    r: f64,
    numerator: f64,
    p_dot_b: f64,
    p_dot_p: f64,
    b_dot_b: f64,
}

fn agreement_pieces(m: &ConfusionMatrix) -> Result<AgreementPieces> {
    let masses = interior_masses(m)?;
    let s = m.total_mass();
    let r: f64 = masses.correct.iter().sum();
    let p_dot_b: f64 = masses
        .prevalence
        .iter()
        .zip(&masses.bias)
        .map(|(p, b)| p * b)
        .sum();
    let p_dot_p: f64 = masses.prevalence.iter().map(|p| p * p).sum();
    let b_dot_b: f64 = masses.bias.iter().map(|b| b * b).sum();
    Ok(AgreementPieces {
        s,
        r,
        numerator: r * s - p_dot_b,
        p_dot_b,
        p_dot_p,
        b_dot_b,
        masses,
    })
}

impl AgreementPieces {
    /// d(r*s - p'b)/dm_ij; the cell adds to prevalence(j) and bias(i), and on
    /// the diagonal also to r.
    fn d_numerator(&self, i: usize, j: usize) -> f64 {
        let d_chance = self.masses.prevalence[i] + self.masses.bias[j];
        if i == j {
            self.r + self.s - d_chance
        } else {
            self.r - d_chance
        }
    }
}

fn kappa_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let pieces = agreement_pieces(m)?;
    let denom = pieces.s * pieces.s - pieces.p_dot_b;
    if denom <= 0.0 {
        return Err(Error::GradientDomain("kappa denominator is zero".into()));
    }
    let n = m.n();
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d_num = pieces.d_numerator(i, j);
                    let d_chance = pieces.masses.prevalence[i] + pieces.masses.bias[j];
                    let d_denom = 2.0 * pieces.s - d_chance;
                    (d_num * denom - pieces.numerator * d_denom) / (denom * denom)
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn mcc_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let pieces = agreement_pieces(m)?;
    let gold_term = pieces.s * pieces.s - pieces.p_dot_p;
    let pred_term = pieces.s * pieces.s - pieces.b_dot_b;
    if gold_term <= 0.0 || pred_term <= 0.0 {
        return Err(Error::GradientDomain("mcc denominator is zero".into()));
    }
    let denom = (gold_term * pred_term).sqrt();
    let n = m.n();
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d_num = pieces.d_numerator(i, j);
                    let d_gold = 2.0 * pieces.s - 2.0 * pieces.masses.prevalence[j];
                    let d_pred = 2.0 * pieces.s - 2.0 * pieces.masses.bias[i];
                    d_num / denom
                        - pieces.numerator * (d_gold * pred_term + gold_term * d_pred)
                            / (2.0 * denom * denom * denom)
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

fn bookmaker_gradient(m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    let masses = interior_masses(m)?;
    let s = m.total_mass();
    let n = m.n();
    let recalls: Vec<f64> = masses
        .correct
        .iter()
        .zip(&masses.prevalence)
        .map(|(c, p)| c / p)
        .collect();
    let stake_rate = recalls.iter().sum::<f64>() - 1.0; // n * macR - 1
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        stake_rate + s * (1.0 - recalls[i]) / masses.prevalence[i]
                    } else {
                        stake_rate - s * recalls[j] / masses.prevalence[j]
                    }
                })
                .collect()
        })
        .collect();
    Ok(grid)
}

/// Closed-form gradient of `metric` at `m`.
///
/// `m` must be strictly inside the metric's domain: positive total mass,
/// positive bias and prevalence for every class, and non-degenerate
/// denominators where the metric has them.
pub fn analytic_gradient(metric: MetricId, m: &ConfusionMatrix) -> Result<Vec<Vec<f64>>> {
    match metric {
        MetricId::Accuracy | MetricId::MicroPrecision | MetricId::MicroRecall | MetricId::MicroF1 => {
            accuracy_gradient(m)
        }
        MetricId::MacroRecall { exponent } => macro_recall_gradient(m, exponent),
        MetricId::MacroPrecision => macro_precision_gradient(m),
        MetricId::MacroF1 => macro_f1_gradient(m),
        MetricId::MacroF1Prime => macro_f1_prime_gradient(m),
        MetricId::WeightedF1 => weighted_f1_gradient(m),
        MetricId::Kappa => kappa_gradient(m),
        MetricId::Mcc => mcc_gradient(m),
        MetricId::BookmakerWin => bookmaker_gradient(m),
    }
}

pub(crate) fn numeric_gradient_of<F>(f: F, m: &ConfusionMatrix, step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&ConfusionMatrix) -> Result<f64>,
{
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::GradientDomain(format!("step {step} must be > 0")));
    }
    let n = m.n();
    let mut grid = vec![vec![0.0; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            if m.get(i, j) < step {
                return Err(Error::GradientDomain(format!(
                    "cell ({i}, {j}) = {} cannot absorb a -{step} perturbation",
                    m.get(i, j)
                )));
            }
            let plus = f(&m.with_added_mass(i, j, step)?)
                .map_err(|e| Error::GradientDomain(e.to_string()))?;
            let minus = f(&m.with_added_mass(i, j, -step)?)
                .map_err(|e| Error::GradientDomain(e.to_string()))?;
            *slot = (plus - minus) / (2.0 * step);
        }
    }
    Ok(grid)
}

/// Central finite differences,
/// `(metric(m + step*e_ij) - metric(m - step*e_ij)) / (2*step)` per cell.
/// Both perturbed matrices must stay inside the metric's domain.
pub fn numeric_gradient(metric: MetricId, m: &ConfusionMatrix, step: f64) -> Result<Vec<Vec<f64>>> {
    numeric_gradient_of(|m| metrics::metric_value(metric, m), m, step)
}
