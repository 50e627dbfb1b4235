//! Prevalence calibration: rescales columns so every class carries the same
//! mass, and shows the identities that follow — calibrated accuracy is
//! macro recall, calibrated kappa is an affine transform of it, and
//! calibrated weighted F1 collapses into calibrated macro F1.
//!
//! Run with: cargo run --example calibrate

use classeval::matrix::LabelSpace;
use classeval::metrics;
use classeval::ConfusionMatrix;

fn main() {
    let matrix = ConfusionMatrix::from_rows(
        LabelSpace::new(["x", "y"]).unwrap(),
        vec![vec![15.0, 5.0], vec![10.0, 10.0]],
    )
    .unwrap();

    let scaling = matrix.calibration_scaling().unwrap();
    println!("scaling factors: {:?}", scaling.factors());

    let calibrated = matrix.scale(&scaling).unwrap();
    for (label, row) in calibrated.labels().labels().iter().zip(calibrated.to_rows()) {
        println!("pred {label}: {row:?}");
    }
    println!(
        "prevalences after calibration: {:?}",
        calibrated.class_masses().prevalence
    );
    println!();

    let macro_recall = metrics::macro_recall(&matrix, 1.0).unwrap().value;
    let calibrated_accuracy = metrics::accuracy(&calibrated).unwrap().value;
    println!("macro recall (raw matrix):      {macro_recall:.12}");
    println!("accuracy (calibrated matrix):   {calibrated_accuracy:.12}");

    let n = matrix.n() as f64;
    let calibrated_kappa = metrics::kappa(&calibrated).unwrap().value;
    let transformed = (macro_recall - 1.0 / n) / (1.0 - 1.0 / n);
    println!("kappa (calibrated matrix):      {calibrated_kappa:.12}");
    println!("(macR - 1/n) / (1 - 1/n):       {transformed:.12}");

    let weighted = metrics::weighted_f1(&calibrated).unwrap().value;
    let macro_f1 = metrics::macro_f1(&calibrated).unwrap().value;
    println!("weighted F1 (calibrated):       {weighted:.12}");
    println!("macro F1 (calibrated):          {macro_f1:.12}");
}
