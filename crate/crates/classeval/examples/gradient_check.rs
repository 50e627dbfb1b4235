//! Compares the closed-form gradients against central finite differences
//! for every metric, and reads monotonicity off the sign pattern.
//!
//! Run with: cargo run --example gradient_check

use classeval::matrix::LabelSpace;
use classeval::metrics::gradients::{analytic_gradient, numeric_gradient};
use classeval::metrics::MetricId;
use classeval::ConfusionMatrix;

fn main() {
    let matrix = ConfusionMatrix::from_rows(
        LabelSpace::synthetic(3),
        vec![
            vec![12.0, 3.0, 5.0],
            vec![2.0, 9.0, 4.0],
            vec![6.0, 2.0, 8.0],
        ],
    )
    .unwrap();

    for metric in MetricId::default_roster() {
        let analytic = analytic_gradient(metric, &matrix).unwrap();
        let numeric = numeric_gradient(metric, &matrix, 1e-4).unwrap();
        let mut worst = 0.0f64;
        let mut sign_ok = true;
        for i in 0..matrix.n() {
            for j in 0..matrix.n() {
                let a = analytic[i][j];
                let d = numeric[i][j];
                worst = worst.max((a - d).abs() / a.abs().max(d.abs()).max(1e-4));
                let expected_sign_ok = if i == j { a >= -1e-9 } else { a <= 1e-9 };
                sign_ok &= expected_sign_ok;
            }
        }
        println!(
            "{:<20} max rel. deviation {:>10.3e}   monotone sign pattern: {}",
            metric.to_string(),
            worst,
            if sign_ok { "yes" } else { "no" }
        );
    }
}
