//! Counts (gold, predicted) pairs into a confusion matrix and reports the
//! full metric roster.
//!
//! Run with: cargo run --example build_and_evaluate

use classeval::metrics::{evaluate_all, MetricId};
use classeval::ConfusionMatrix;

fn main() {
    // A small three-class run; "neu" is over-predicted.
    let pairs = [
        ("pos", "pos"),
        ("pos", "pos"),
        ("pos", "neu"),
        ("neg", "neg"),
        ("neg", "neu"),
        ("neg", "neg"),
        ("neu", "neu"),
        ("neu", "neu"),
        ("neu", "neu"),
        ("pos", "pos"),
        ("neg", "pos"),
        ("neu", "pos"),
    ];
    let matrix = ConfusionMatrix::from_pairs(pairs, None).unwrap();

    println!("labels: {:?}", matrix.labels().labels());
    for (label, row) in matrix.labels().labels().iter().zip(matrix.to_rows()) {
        println!("pred {label}: {row:?}");
    }
    let masses = matrix.class_masses();
    println!("bias (row sums):        {:?}", masses.bias);
    println!("prevalence (col sums):  {:?}", masses.prevalence);
    println!();

    for score in evaluate_all(&matrix, &MetricId::default_roster()) {
        println!("{:<20} {:.6}", score.metric.to_string(), score.value);
    }
}
