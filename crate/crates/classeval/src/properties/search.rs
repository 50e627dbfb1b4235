//! Randomized matrix sampling, deterministic seeding, and the
//! counterexample search with greedy witness minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{ConfusionMatrix, LabelSpace, ScalingVector};
use crate::metrics::gradients;
use crate::properties::{
    Evaluator, Perturbation, PropertyId, SearchBudget, Witness, DIRECTIONAL_TOLERANCE,
    IDENTITY_TOLERANCE,
};
use crate::{Error, Result};

// Stream salts so the five checks draw independent sequences from one seed.
pub(crate) const SALT_MONOTONICITY: u64 = 1;
pub(crate) const SALT_SENSITIVITY: u64 = 2;
pub(crate) const SALT_DECOMPOSITION: u64 = 3;
pub(crate) const SALT_INVARIANCE: u64 = 4;
pub(crate) const SALT_CHANCE: u64 = 5;
const SALT_CLIMB: u64 = 6;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-trial generator derived from (seed, salt, counter) alone, never from
/// execution order.
pub(crate) fn trial_rng(seed: u64, salt: u64, counter: u64) -> ChaCha8Rng {
    let mixed = splitmix64(
        seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15)
            ^ counter.wrapping_mul(0xD1B54A32D192ED03),
    );
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Draws integer-mass matrices inside the budget's size and mass ranges.
/// Every column is kept non-empty so prevalence-based metrics stay defined;
/// witnesses stay human-readable because cells are integers.
pub(crate) struct MatrixSampler<'a> {
    budget: &'a SearchBudget,
}

impl<'a> MatrixSampler<'a> {
    pub fn new(budget: &'a SearchBudget) -> Self {
        Self { budget }
    }

    pub fn sample(&self, salt: u64, trial: u64) -> ConfusionMatrix {
        let mut rng = trial_rng(self.budget.seed, salt, trial);
        let (lo, hi) = self.budget.size_range;
        let n = rng.gen_range(lo..=hi);
        let (mass_lo, mass_hi) = self.budget.mass_range;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| rng.gen_range(mass_lo..=mass_hi) as f64)
                    .collect()
            })
            .collect();
        for j in 0..n {
            if (0..n).map(|i| rows[i][j]).sum::<f64>() == 0.0 {
                rows[j][j] = mass_lo.max(1) as f64;
            }
        }
        ConfusionMatrix::from_rows(LabelSpace::synthetic(n), rows)
            .expect("sampled cells are non-negative")
    }
}

/// Fixed starting points every search visits before random sampling: the
/// known constructions where kappa, MCC, and weighted F1 reward added
/// errors, and the two-class matrix whose column scaling moves the
/// precision family.
pub(crate) fn seed_matrices() -> Vec<ConfusionMatrix> {
    let build = |rows: &[&[f64]]| {
        ConfusionMatrix::from_rows(
            LabelSpace::synthetic(rows.len()),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    };
    vec![
        build(&[&[10.0, 43.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
        build(&[&[1.0, 0.0], &[50.0, 5.0]]),
        build(&[&[2.0, 1.0], &[80.0, 8.0]]),
        build(&[&[15.0, 5.0], &[10.0, 10.0]]),
    ]
}

/// The seeded prevalence-scaling case: identity scaling against doubling
/// the second class.
pub(crate) fn seed_scaling_case() -> (ConfusionMatrix, Vec<f64>, Vec<f64>) {
    let m = ConfusionMatrix::from_rows(
        LabelSpace::synthetic(2),
        vec![vec![15.0, 5.0], vec![10.0, 10.0]],
    )
    .unwrap();
    (m, vec![1.0, 1.0], vec![1.0, 2.0])
}

fn add_mass_violates(ev: Evaluator, w: &Witness) -> bool {
    let Perturbation::AddMass { row, col, amount } = &w.perturbation else {
        return false;
    };
    let Ok(before) = ev.value(&w.matrix) else {
        return false;
    };
    let Ok(perturbed) = w.matrix.with_added_mass(*row, *col, *amount) else {
        return false;
    };
    let Ok(after) = ev.value(&perturbed) else {
        return false;
    };
    if row == col {
        before - after > DIRECTIONAL_TOLERANCE
    } else {
        after - before > DIRECTIONAL_TOLERANCE
    }
}

fn scaling_violates(ev: Evaluator, w: &Witness) -> bool {
    let Perturbation::ScalingPair { first, second } = &w.perturbation else {
        return false;
    };
    let (Ok(first), Ok(second)) = (
        ScalingVector::new(first.clone()),
        ScalingVector::new(second.clone()),
    ) else {
        return false;
    };
    let (Ok(a), Ok(b)) = (
        w.matrix.scale(&first).and_then(|m| ev.value(&m)),
        w.matrix.scale(&second).and_then(|m| ev.value(&m)),
    ) else {
        return false;
    };
    (a - b).abs() > IDENTITY_TOLERANCE
}

fn refresh_scores(ev: Evaluator, w: &mut Witness) {
    if let Ok((before, after)) = w.replay(ev.metric, ev.calibrated) {
        w.score_before = before;
        w.score_after = after;
    }
}

/// Scans all single-cell unit additions on `m`; where analytic gradients
/// exist, wrong-signed entries are additionally probed with fractional
/// masses. Returns the first violation.
pub(crate) fn monotonicity_violation(
    ev: Evaluator,
    m: &ConfusionMatrix,
    skipped: &mut u64,
) -> Option<Witness> {
    let before = match ev.value(m) {
        Ok(v) => v,
        Err(_) => {
            *skipped += 1;
            return None;
        }
    };
    let n = m.n();
    for i in 0..n {
        for j in 0..n {
            let perturbed = match m.with_added_mass(i, j, 1.0) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let after = match ev.value(&perturbed) {
                Ok(v) => v,
                Err(_) => {
                    *skipped += 1;
                    continue;
                }
            };
            let violated = if i == j {
                before - after > DIRECTIONAL_TOLERANCE
            } else {
                after - before > DIRECTIONAL_TOLERANCE
            };
            if violated {
                return Some(Witness {
                    matrix: m.clone(),
                    perturbation: Perturbation::AddMass {
                        row: i,
                        col: j,
                        amount: 1.0,
                    },
                    score_before: before,
                    score_after: after,
                });
            }
        }
    }
    if !ev.calibrated {
        if let Ok(grad) = gradients::analytic_gradient(ev.metric, m) {
            for i in 0..n {
                for j in 0..n {
                    let wrong_sign = if i == j {
                        grad[i][j] < -1e-9
                    } else {
                        grad[i][j] > 1e-9
                    };
                    if !wrong_sign {
                        continue;
                    }
                    for amount in [0.5, 0.25, 0.125, 0.0625] {
                        let Ok(perturbed) = m.with_added_mass(i, j, amount) else {
                            continue;
                        };
                        let Ok(after) = ev.value(&perturbed) else {
                            continue;
                        };
                        let violated = if i == j {
                            before - after > DIRECTIONAL_TOLERANCE
                        } else {
                            after - before > DIRECTIONAL_TOLERANCE
                        };
                        if violated {
                            return Some(Witness {
                                matrix: m.clone(),
                                perturbation: Perturbation::AddMass {
                                    row: i,
                                    col: j,
                                    amount,
                                },
                                score_before: before,
                                score_after: after,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Compares the metric across two column scalings of `m`.
pub(crate) fn scaling_violation(
    ev: Evaluator,
    m: &ConfusionMatrix,
    first: &[f64],
    second: &[f64],
    skipped: &mut u64,
) -> Option<Witness> {
    let witness = Witness {
        matrix: m.clone(),
        perturbation: Perturbation::ScalingPair {
            first: first.to_vec(),
            second: second.to_vec(),
        },
        score_before: 0.0,
        score_after: 0.0,
    };
    let Ok((a, b)) = witness.replay(ev.metric, ev.calibrated) else {
        *skipped += 1;
        return None;
    };
    if (a - b).abs() > IDENTITY_TOLERANCE {
        let mut witness = witness;
        witness.score_before = a;
        witness.score_after = b;
        Some(witness)
    } else {
        None
    }
}

fn set_cell(m: &ConfusionMatrix, i: usize, j: usize, value: f64) -> Result<ConfusionMatrix> {
    m.with_added_mass(i, j, value - m.get(i, j))
}

/// Greedy mass reduction: repeatedly zero, halve, or decrement single cells
/// while the violation persists. Keeps cells integral when they start out
/// integral, so minimized witnesses stay readable.
fn minimize_witness<F>(ev: Evaluator, mut witness: Witness, violated: F) -> Witness
where
    F: Fn(Evaluator, &Witness) -> bool,
{
    let n = witness.matrix.n();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                loop {
                    let current = witness.matrix.get(i, j);
                    if current <= 0.0 {
                        break;
                    }
                    let candidates = [0.0, (current / 2.0).floor(), current - 1.0];
                    let mut accepted = false;
                    for candidate in candidates {
                        if candidate >= current || candidate < 0.0 {
                            continue;
                        }
                        let Ok(next) = set_cell(&witness.matrix, i, j, candidate) else {
                            continue;
                        };
                        let trial = Witness {
                            matrix: next,
                            ..witness.clone()
                        };
                        if violated(ev, &trial) {
                            witness = trial;
                            accepted = true;
                            changed = true;
                            break;
                        }
                    }
                    if !accepted {
                        break;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    refresh_scores(ev, &mut witness);
    witness
}

/// Worst directional slack over all unit additions: positive means a
/// monotonicity violation, values near zero are promising starts for hill
/// climbing.
fn monotonicity_gap(ev: Evaluator, m: &ConfusionMatrix) -> Option<(f64, (usize, usize))> {
    let before = ev.value(m).ok()?;
    let n = m.n();
    let mut best: Option<(f64, (usize, usize))> = None;
    for i in 0..n {
        for j in 0..n {
            let Ok(perturbed) = m.with_added_mass(i, j, 1.0) else {
                continue;
            };
            let Ok(after) = ev.value(&perturbed) else {
                continue;
            };
            let gap = if i == j { before - after } else { after - before };
            if best.is_none_or(|(g, _)| gap > g) {
                best = Some((gap, (i, j)));
            }
        }
    }
    best
}

fn hill_climb_monotonicity(
    ev: Evaluator,
    start: &ConfusionMatrix,
    max_rounds: usize,
) -> Option<Witness> {
    let mut current = start.clone();
    let mut current_gap = monotonicity_gap(ev, &current)?;
    for _ in 0..max_rounds {
        if current_gap.0 > DIRECTIONAL_TOLERANCE {
            break;
        }
        let n = current.n();
        let mut improved: Option<(f64, ConfusionMatrix, (usize, usize))> = None;
        for i in 0..n {
            for j in 0..n {
                for delta in [1.0, 5.0, -1.0, -5.0] {
                    if current.get(i, j) + delta < 0.0 {
                        continue;
                    }
                    let Ok(candidate) = current.with_added_mass(i, j, delta) else {
                        continue;
                    };
                    if let Some((gap, cell)) = monotonicity_gap(ev, &candidate) {
                        if gap > current_gap.0
                            && improved.as_ref().is_none_or(|(g, _, _)| gap > *g)
                        {
                            improved = Some((gap, candidate, cell));
                        }
                    }
                }
            }
        }
        match improved {
            Some((gap, candidate, cell)) => {
                current = candidate;
                current_gap = (gap, cell);
            }
            None => break,
        }
    }
    if current_gap.0 > DIRECTIONAL_TOLERANCE {
        let (i, j) = current_gap.1;
        let mut witness = Witness {
            matrix: current,
            perturbation: Perturbation::AddMass {
                row: i,
                col: j,
                amount: 1.0,
            },
            score_before: 0.0,
            score_after: 0.0,
        };
        refresh_scores(ev, &mut witness);
        Some(witness)
    } else {
        None
    }
}

/// Searches for a minimal-ish witness that `metric` violates `property`.
///
/// Supported properties: monotonicity and prevalence invariance. The search
/// visits the fixed seed constructions, then random matrices, then greedy
/// single-cell hill climbing from the most promising near-miss; a found
/// witness is shrunk by greedy cell-mass reduction while the violation
/// persists. Deterministic for a fixed budget.
pub fn find_counterexample(
    metric: crate::metrics::MetricId,
    property: PropertyId,
    budget: &SearchBudget,
) -> Result<Option<Witness>> {
    budget.validate()?;
    let ev = Evaluator::plain(metric);
    let sampler = MatrixSampler::new(budget);
    let mut skipped = 0;
    match property {
        PropertyId::Monotonicity => {
            for m in seed_matrices() {
                if let Some(w) = monotonicity_violation(ev, &m, &mut skipped) {
                    return Ok(Some(minimize_witness(ev, w, add_mass_violates)));
                }
            }
            let mut best_start: Option<(f64, ConfusionMatrix)> = None;
            for trial in 0..budget.trials {
                let m = sampler.sample(SALT_CLIMB, trial);
                if let Some(w) = monotonicity_violation(ev, &m, &mut skipped) {
                    return Ok(Some(minimize_witness(ev, w, add_mass_violates)));
                }
                if let Some((gap, _)) = monotonicity_gap(ev, &m) {
                    if best_start.as_ref().is_none_or(|(g, _)| gap > *g) {
                        best_start = Some((gap, m));
                    }
                }
            }
            if let Some((_, start)) = best_start {
                if let Some(w) = hill_climb_monotonicity(ev, &start, 100) {
                    return Ok(Some(minimize_witness(ev, w, add_mass_violates)));
                }
            }
            Ok(None)
        }
        PropertyId::PrevalenceInvariance => {
            let (m, first, second) = seed_scaling_case();
            if let Some(w) = scaling_violation(ev, &m, &first, &second, &mut skipped) {
                return Ok(Some(minimize_witness(ev, w, scaling_violates)));
            }
            for trial in 0..budget.trials {
                let m = sampler.sample(SALT_CLIMB, trial);
                let mut rng = trial_rng(budget.seed, SALT_CLIMB ^ 0xA5A5, trial);
                let draw = |rng: &mut ChaCha8Rng| {
                    (0..m.n())
                        .map(|_| rng.gen_range(1..=16) as f64 / 4.0)
                        .collect::<Vec<f64>>()
                };
                let first = draw(&mut rng);
                let second = draw(&mut rng);
                if let Some(w) = scaling_violation(ev, &m, &first, &second, &mut skipped) {
                    return Ok(Some(minimize_witness(ev, w, scaling_violates)));
                }
            }
            Ok(None)
        }
        other => Err(Error::Usage(format!(
            "counterexample search covers monotonicity and prevalence_invariance, not {other:?}"
        ))),
    }
}
