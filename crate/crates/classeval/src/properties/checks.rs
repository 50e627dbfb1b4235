//! The five property checkers.

use crate::matrix::{chance_matrix, ChanceModel, ConfusionMatrix};
use crate::metrics::{self, MetricId};
use crate::properties::search::{
    monotonicity_violation, scaling_violation, seed_matrices, seed_scaling_case, trial_rng,
    MatrixSampler, SALT_CHANCE, SALT_INVARIANCE, SALT_MONOTONICITY, SALT_SENSITIVITY,
};
use crate::properties::{
    ChanceBound, ChanceStats, Evaluator, Perturbation, PropertyId, PropertyVerdict, SearchBudget,
    Verdict, Witness, DIRECTIONAL_TOLERANCE, IDENTITY_TOLERANCE,
};
use rand::Rng;

pub(crate) fn run_check(
    ev: Evaluator,
    property: PropertyId,
    budget: &SearchBudget,
) -> PropertyVerdict {
    match property {
        PropertyId::Monotonicity => monotonicity(ev, budget),
        PropertyId::ClassSensitivity => class_sensitivity(ev, budget),
        PropertyId::ClassDecomposability => decomposition(ev, budget),
        PropertyId::PrevalenceInvariance => prevalence_invariance(ev, budget),
        PropertyId::ChanceCorrection => chance_correction_over_sizes(ev, budget),
    }
}

fn verdict_base(ev: Evaluator, property: PropertyId) -> PropertyVerdict {
    PropertyVerdict {
        property,
        metric: ev.metric,
        calibrated: ev.calibrated,
        verdict: Verdict::HoldsOnSample,
        witness: None,
        trials: 0,
        skipped: 0,
        chance: None,
    }
}

/// Adding one unit of correct mass must not lower the score; one unit of
/// error mass must not raise it. Checked discretely on every cell of the
/// seeded constructions and of `trials` sampled matrices, and backed by the
/// sign pattern of the analytic gradient where one exists.
pub fn check_monotonicity(metric: MetricId, budget: &SearchBudget) -> PropertyVerdict {
    monotonicity(Evaluator::plain(metric), budget)
}

fn monotonicity(ev: Evaluator, budget: &SearchBudget) -> PropertyVerdict {
    let mut out = verdict_base(ev, PropertyId::Monotonicity);
    let sampler = MatrixSampler::new(budget);
    for m in seed_matrices() {
        out.trials += 1;
        if let Some(witness) = monotonicity_violation(ev, &m, &mut out.skipped) {
            out.verdict = Verdict::Refuted;
            out.witness = Some(witness);
            return out;
        }
    }
    for trial in 0..budget.trials {
        out.trials += 1;
        let m = sampler.sample(SALT_MONOTONICITY, trial);
        if let Some(witness) = monotonicity_violation(ev, &m, &mut out.skipped) {
            out.verdict = Verdict::Refuted;
            out.witness = Some(witness);
            return out;
        }
    }
    out
}

/// Looks for two single-unit placements of equal correctness status (both
/// correct or both errors, in different cells) that move the score
/// differently. Finding one demonstrates class sensitivity; finding none
/// within the budget reports `NotDeclared`, consistent with a micro metric.
pub fn check_class_sensitivity(metric: MetricId, budget: &SearchBudget) -> PropertyVerdict {
    class_sensitivity(Evaluator::plain(metric), budget)
}

fn class_sensitivity(ev: Evaluator, budget: &SearchBudget) -> PropertyVerdict {
    let mut out = verdict_base(ev, PropertyId::ClassSensitivity);
    let sampler = MatrixSampler::new(budget);
    for trial in 0..budget.trials {
        out.trials += 1;
        let m = sampler.sample(SALT_SENSITIVITY, trial);
        let n = m.n();
        let mut added = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                match m
                    .with_added_mass(i, j, 1.0)
                    .and_then(|p| ev.value(&p))
                {
                    Ok(v) => added[i][j] = Some(v),
                    Err(_) => out.skipped += 1,
                }
            }
        }
        let mut cells: Vec<((usize, usize), f64)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if let Some(v) = added[i][j] {
                    cells.push(((i, j), v));
                }
            }
        }
        let mut witness = None;
        'outer: for (a, &(cell_a, score_a)) in cells.iter().enumerate() {
            for &(cell_b, score_b) in cells.iter().skip(a + 1) {
                let both_correct = cell_a.0 == cell_a.1 && cell_b.0 == cell_b.1;
                let both_errors = cell_a.0 != cell_a.1 && cell_b.0 != cell_b.1;
                if !(both_correct || both_errors) {
                    continue;
                }
                if (score_a - score_b).abs() > DIRECTIONAL_TOLERANCE {
                    witness = Some(Witness {
                        matrix: m.clone(),
                        perturbation: Perturbation::PlacementPair {
                            first: cell_a,
                            second: cell_b,
                        },
                        score_before: score_a,
                        score_after: score_b,
                    });
                    break 'outer;
                }
            }
        }
        if let Some(witness) = witness {
            out.verdict = Verdict::HoldsOnSample;
            out.witness = Some(witness);
            return out;
        }
    }
    out.verdict = Verdict::NotDeclared;
    out
}

/// The per-class score functions a metric can declare for its power-mean
/// decomposition.
#[derive(Clone, Copy)]
enum ClassScoreFn {
    Recall,
    Precision,
    F1,
}

fn declared_decomposition(ev: Evaluator) -> Option<(ClassScoreFn, f64)> {
    match (ev.metric, ev.calibrated) {
        (MetricId::MacroRecall { exponent }, _) => Some((ClassScoreFn::Recall, exponent)),
        (MetricId::MacroPrecision, _) => Some((ClassScoreFn::Precision, 1.0)),
        (MetricId::MacroF1, _) => Some((ClassScoreFn::F1, 1.0)),
        // Calibration equalizes prevalences, which turns accuracy (and the
        // micro family) into macro recall and weighted F1 into macro F1.
        (
            MetricId::Accuracy
            | MetricId::MicroPrecision
            | MetricId::MicroRecall
            | MetricId::MicroF1,
            true,
        ) => Some((ClassScoreFn::Recall, 1.0)),
        (MetricId::WeightedF1, true) => Some((ClassScoreFn::F1, 1.0)),
        _ => None,
    }
}

fn power_mean_of_class_scores(f: ClassScoreFn, exponent: f64, m: &ConfusionMatrix) -> f64 {
    let masses = m.class_masses();
    let n = m.n();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let diag = masses.correct[i];
            match f {
                ClassScoreFn::Recall => {
                    if masses.prevalence[i] > 0.0 {
                        diag / masses.prevalence[i]
                    } else {
                        0.0
                    }
                }
                ClassScoreFn::Precision => {
                    if masses.bias[i] > 0.0 {
                        diag / masses.bias[i]
                    } else {
                        0.0
                    }
                }
                ClassScoreFn::F1 => {
                    let z = masses.bias[i] + masses.prevalence[i];
                    if z > 0.0 {
                        2.0 * diag / z
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    metrics::power_mean(&values, exponent).0
}

/// Declaration-based decomposability: metrics that declare a per-class
/// score function and exponent get the declaration verified against the
/// direct computation on sampled matrices; metrics without a declaration
/// report `NotDeclared`, since sampling cannot decide non-existence.
pub fn verify_decomposition(metric: MetricId, budget: &SearchBudget) -> PropertyVerdict {
    decomposition(Evaluator::plain(metric), budget)
}

fn decomposition(ev: Evaluator, budget: &SearchBudget) -> PropertyVerdict {
    let mut out = verdict_base(ev, PropertyId::ClassDecomposability);
    let Some((f, exponent)) = declared_decomposition(ev) else {
        out.verdict = Verdict::NotDeclared;
        return out;
    };
    let sampler = MatrixSampler::new(budget);
    for trial in 0..budget.trials {
        out.trials += 1;
        let m = sampler.sample(crate::properties::search::SALT_DECOMPOSITION, trial);
        let direct = match ev.value(&m) {
            Ok(v) => v,
            Err(_) => {
                out.skipped += 1;
                continue;
            }
        };
        let subject = if ev.calibrated {
            match m.calibrate() {
                Ok(c) => c,
                Err(_) => {
                    out.skipped += 1;
                    continue;
                }
            }
        } else {
            m.clone()
        };
        let decomposed = power_mean_of_class_scores(f, exponent, &subject);
        if (direct - decomposed).abs() > IDENTITY_TOLERANCE {
            out.verdict = Verdict::Refuted;
            out.score_mismatch(direct, decomposed, m);
            return out;
        }
    }
    out.verdict = Verdict::DeclaredAndVerified;
    out
}

impl PropertyVerdict {
    fn score_mismatch(&mut self, direct: f64, decomposed: f64, m: ConfusionMatrix) {
        self.witness = Some(Witness {
            matrix: m,
            perturbation: Perturbation::PlacementPair {
                first: (0, 0),
                second: (0, 0),
            },
            score_before: direct,
            score_after: decomposed,
        });
    }
}

/// The score must not move under positive column scalings. Probes the
/// seeded two-class case first, then random matrices with random scaling
/// pairs.
pub fn check_prevalence_invariance(metric: MetricId, budget: &SearchBudget) -> PropertyVerdict {
    prevalence_invariance(Evaluator::plain(metric), budget)
}

fn prevalence_invariance(ev: Evaluator, budget: &SearchBudget) -> PropertyVerdict {
    let mut out = verdict_base(ev, PropertyId::PrevalenceInvariance);
    let (m, first, second) = seed_scaling_case();
    out.trials += 1;
    if let Some(witness) = scaling_violation(ev, &m, &first, &second, &mut out.skipped) {
        out.verdict = Verdict::Refuted;
        out.witness = Some(witness);
        return out;
    }
    let sampler = MatrixSampler::new(budget);
    for trial in 0..budget.trials {
        out.trials += 1;
        let m = sampler.sample(SALT_INVARIANCE, trial);
        let mut rng = trial_rng(budget.seed, SALT_INVARIANCE ^ 0x5C5C, trial);
        let mut draw = || {
            (0..m.n())
                .map(|_| rng.gen_range(1..=16) as f64 / 4.0)
                .collect::<Vec<f64>>()
        };
        let first = draw();
        let second = draw();
        if let Some(witness) = scaling_violation(ev, &m, &first, &second, &mut out.skipped) {
            out.verdict = Verdict::Refuted;
            out.witness = Some(witness);
            return out;
        }
    }
    out
}

fn declared_chance_bound(ev: Evaluator) -> Option<ChanceBound> {
    match ev.metric {
        MetricId::MacroRecall { .. }
        | MetricId::MacroPrecision
        | MetricId::MacroF1
        | MetricId::MacroF1Prime => Some(ChanceBound::ReciprocalClassCount),
        MetricId::Kappa | MetricId::Mcc | MetricId::BookmakerWin => Some(ChanceBound::Zero),
        MetricId::Accuracy
        | MetricId::MicroPrecision
        | MetricId::MicroRecall
        | MetricId::MicroF1
        | MetricId::WeightedF1 => {
            if ev.calibrated {
                Some(ChanceBound::ReciprocalClassCount)
            } else {
                None
            }
        }
    }
}

fn dominant_dist(n: usize, heavy: usize, weight: f64) -> Vec<f64> {
    let rest = (1.0 - weight) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == heavy { weight } else { rest })
        .collect()
}

fn model_grid(n: usize) -> Vec<Vec<f64>> {
    let uniform = vec![1.0 / n as f64; n];
    let ramp: Vec<f64> = {
        let total: f64 = (1..=n).map(|i| i as f64).sum();
        (1..=n).map(|i| i as f64 / total).collect()
    };
    let mut reverse = ramp.clone();
    reverse.reverse();
    vec![
        uniform,
        dominant_dist(n, 0, 0.9),
        dominant_dist(n, 0, 0.99),
        dominant_dist(n, n - 1, 0.9),
        ramp,
        reverse,
    ]
}

struct ChanceProbe {
    max: f64,
    min: f64,
    argmax: Option<ChanceModel>,
    skipped: u64,
    evaluations: u64,
}

fn probe_chance(ev: Evaluator, n: usize, budget: &SearchBudget) -> ChanceProbe {
    let mut probe = ChanceProbe {
        max: f64::NEG_INFINITY,
        min: f64::INFINITY,
        argmax: None,
        skipped: 0,
        evaluations: 0,
    };
    let grid = model_grid(n);
    let mut models: Vec<ChanceModel> = Vec::new();
    for z in &grid {
        for p in &grid {
            if let Ok(model) = ChanceModel::new(z.clone(), p.clone(), 100.0) {
                models.push(model);
            }
        }
    }
    for trial in 0..budget.trials {
        let mut rng = trial_rng(budget.seed, SALT_CHANCE ^ (n as u64) << 8, trial);
        let mut draw = || {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect::<Vec<f64>>()
        };
        let z = draw();
        // Every fourth draw matches the distributions, to observe the
        // equality case of non-strict bounds.
        let p = if trial % 4 == 0 { z.clone() } else { draw() };
        if let Ok(model) = ChanceModel::new(z, p, 100.0) {
            models.push(model);
        }
    }
    for model in models {
        let m = chance_matrix(&model);
        match ev.value(&m) {
            Ok(v) => {
                probe.evaluations += 1;
                if v > probe.max {
                    probe.max = v;
                    probe.argmax = Some(model);
                }
                probe.min = probe.min.min(v);
            }
            Err(_) => probe.skipped += 1,
        }
    }
    probe
}

/// Evaluates the metric on a grid plus a random sample of rank-1 chance
/// matrices with `n` classes and compares the observed maximum against the
/// metric's declared baseline bound. Strictness means every baseline scored
/// exactly the bound; completeness means one constant across all class
/// counts in the budget's range, probed here as well. Metrics without a
/// declared bound are refuted when a skewed baseline scores far above any
/// reciprocal-class-count bound.
pub fn check_chance_correction(
    metric: MetricId,
    n: usize,
    budget: &SearchBudget,
) -> PropertyVerdict {
    chance_correction_at(Evaluator::plain(metric), n, budget)
}

fn chance_correction_at(ev: Evaluator, n: usize, budget: &SearchBudget) -> PropertyVerdict {
    let mut out = verdict_base(ev, PropertyId::ChanceCorrection);
    let probe = probe_chance(ev, n, budget);
    out.trials = probe.evaluations;
    out.skipped = probe.skipped;

    // Completeness needs evidence across class counts.
    let mut global_max = probe.max;
    let mut global_min = probe.min;
    for other in budget.size_range.0..=budget.size_range.1 {
        if other == n {
            continue;
        }
        let cross = probe_chance(ev, other, &SearchBudget {
            trials: budget.trials.min(50),
            ..*budget
        });
        out.skipped += cross.skipped;
        global_max = global_max.max(cross.max);
        global_min = global_min.min(cross.min);
    }
    let complete = probe.evaluations > 0 && global_max - global_min <= IDENTITY_TOLERANCE;

    finish_chance_verdict(&mut out, ev, n, probe, complete);
    out
}

fn finish_chance_verdict(
    out: &mut PropertyVerdict,
    ev: Evaluator,
    n: usize,
    probe: ChanceProbe,
    complete: bool,
) {
    if probe.evaluations == 0 {
        out.verdict = Verdict::NotDeclared;
        return;
    }
    let bound = declared_chance_bound(ev);
    match bound {
        Some(kind) => {
            let omega = kind.value(n);
            let strict =
                probe.max <= omega + IDENTITY_TOLERANCE && probe.min >= omega - IDENTITY_TOLERANCE;
            out.chance = Some(ChanceStats {
                bound: Some(kind),
                bound_value: Some(omega),
                observed_max: probe.max,
                observed_min: probe.min,
                strict,
                complete,
            });
            if probe.max > omega + IDENTITY_TOLERANCE {
                out.verdict = Verdict::Refuted;
                out.witness = probe.argmax.map(|model| Witness {
                    matrix: chance_matrix(&model),
                    perturbation: Perturbation::ChanceModel {
                        prediction_dist: model.prediction_dist.clone(),
                        class_dist: model.class_dist.clone(),
                    },
                    score_before: omega,
                    score_after: probe.max,
                });
            } else {
                out.verdict = Verdict::HoldsOnSample;
            }
        }
        None => {
            // No bound is declared. A baseline scoring this far above 1/n
            // rules out any useful class-count-only bound.
            let threshold = (1.0 + 1.0 / n as f64) / 2.0;
            out.chance = Some(ChanceStats {
                bound: None,
                bound_value: None,
                observed_max: probe.max,
                observed_min: probe.min,
                strict: false,
                complete,
            });
            if probe.max > threshold {
                out.verdict = Verdict::Refuted;
                out.witness = probe.argmax.map(|model| Witness {
                    matrix: chance_matrix(&model),
                    perturbation: Perturbation::ChanceModel {
                        prediction_dist: model.prediction_dist.clone(),
                        class_dist: model.class_dist.clone(),
                    },
                    score_before: 1.0 / n as f64,
                    score_after: probe.max,
                });
            } else {
                out.verdict = Verdict::NotDeclared;
            }
        }
    }
}

/// Table cell: the chance check run at every class count in the budget's
/// range; the reported stats come from the least favorable count.
fn chance_correction_over_sizes(ev: Evaluator, budget: &SearchBudget) -> PropertyVerdict {
    let mut probes: Vec<(usize, ChanceProbe)> = Vec::new();
    let mut skipped = 0;
    let mut evaluations = 0;
    for n in budget.size_range.0..=budget.size_range.1 {
        let probe = probe_chance(ev, n, budget);
        skipped += probe.skipped;
        evaluations += probe.evaluations;
        probes.push((n, probe));
    }
    let mut out = verdict_base(ev, PropertyId::ChanceCorrection);
    out.trials = evaluations;
    out.skipped = skipped;
    if probes.iter().all(|(_, p)| p.evaluations == 0) {
        out.verdict = Verdict::NotDeclared;
        return out;
    }
    let global_max = probes.iter().map(|(_, p)| p.max).fold(f64::NEG_INFINITY, f64::max);
    let global_min = probes.iter().map(|(_, p)| p.min).fold(f64::INFINITY, f64::min);
    let complete = global_max - global_min <= IDENTITY_TOLERANCE;

    let bound = declared_chance_bound(ev);
    // Pick the class count with the widest gap above its bound.
    let (worst_n, worst_probe) = probes
        .into_iter()
        .max_by(|(na, a), (nb, b)| {
            let ga = a.max - bound.map_or(0.0, |k| k.value(*na));
            let gb = b.max - bound.map_or(0.0, |k| k.value(*nb));
            ga.partial_cmp(&gb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();

    finish_chance_verdict(&mut out, ev, worst_n, worst_probe, complete);
    // Strictness for the table means strict at every probed class count;
    // the declared bounds only vary with n, so per-count strictness is what
    // the worst probe reports, while completeness was computed globally.
    if let Some(stats) = &mut out.chance {
        stats.complete = complete;
    }
    out
}
