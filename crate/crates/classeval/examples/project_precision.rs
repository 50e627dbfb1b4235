//! Class recalls transfer across data sets with different class
//! distributions; precisions do not. This example projects the precisions a
//! classifier would reach on a differently distributed data set from its
//! recalls alone.
//!
//! Run with: cargo run --example project_precision

use classeval::analysis::project_precision;
use classeval::matrix::LabelSpace;
use classeval::metrics::class_prf;
use classeval::ConfusionMatrix;

fn main() {
    let matrix = ConfusionMatrix::from_rows(
        LabelSpace::new(["x", "y"]).unwrap(),
        vec![vec![15.0, 5.0], vec![10.0, 10.0]],
    )
    .unwrap();
    let scores = class_prf(&matrix);
    println!("measured recalls:    {:?}", scores.recall);
    println!("measured precisions: {:?}", scores.precision);
    println!();

    // Self-consistency: feeding back the matrix's own distributions
    // recovers the true precisions.
    let masses = matrix.class_masses();
    let s = matrix.total_mass();
    let class_dist: Vec<f64> = masses.prevalence.iter().map(|p| p / s).collect();
    let pred_dist: Vec<f64> = masses.bias.iter().map(|b| b / s).collect();
    let own = project_precision(&scores.recall, &class_dist, &pred_dist).unwrap();
    println!("projected with the matrix's own distributions: {:?}", own.estimates);
    println!();

    // A target domain where class y is much more common.
    let shifted = project_precision(&scores.recall, &[0.3, 0.7], &[0.4, 0.6]).unwrap();
    println!("projected for a 30/70 class distribution:");
    for (i, estimate) in shifted.estimates.iter().enumerate() {
        let mark = if shifted.inconsistent[i] {
            " (inconsistent, clamped)"
        } else {
            ""
        };
        println!("  class {i}: {estimate:.4}{mark}");
    }
    println!("macro precision estimate: {:.4}", shifted.macro_estimate);
}
