//! Searches for matrices where adding an error *raises* a metric, and where
//! column scaling moves a score that a macro metric should hold still.
//!
//! Run with: cargo run --release --example hunt_counterexamples

use classeval::metrics::MetricId;
use classeval::properties::{find_counterexample, PropertyId, SearchBudget};

fn show(witness: &classeval::Witness) {
    for (label, row) in witness
        .matrix
        .labels()
        .labels()
        .iter()
        .zip(witness.matrix.to_rows())
    {
        println!("    pred {label}: {row:?}");
    }
    println!("    perturbation: {:?}", witness.perturbation);
    println!(
        "    score {} -> {}",
        witness.score_before, witness.score_after
    );
}

fn main() {
    let budget = SearchBudget::with_trials(5_000);

    for metric in [MetricId::Mcc, MetricId::Kappa, MetricId::WeightedF1] {
        println!("{metric} vs monotonicity:");
        match find_counterexample(metric, PropertyId::Monotonicity, &budget).unwrap() {
            Some(witness) => show(&witness),
            None => println!("    no witness within budget"),
        }
        println!();
    }

    println!("macro_recall:p=1 vs monotonicity (expected: none):");
    let none = find_counterexample(MetricId::MACRO_RECALL, PropertyId::Monotonicity, &budget)
        .unwrap();
    println!("    {:?}", none.map(|w| w.perturbation));
    println!();

    println!("macro_precision vs prevalence invariance:");
    let witness =
        find_counterexample(MetricId::MacroPrecision, PropertyId::PrevalenceInvariance, &budget)
            .unwrap()
            .expect("column scaling moves macro precision");
    show(&witness);
}
