//! Ranks three synthetic systems under several metrics, correlates the
//! rankings, and picks ensemble winners by mean rank.
//!
//! Run with: cargo run --example rank_systems

use classeval::analysis::{
    correlation_matrix, ensemble_rank, score_systems, ColumnSpec, SystemRun,
};
use classeval::matrix::LabelSpace;
use classeval::metrics::MetricId;
use classeval::ConfusionMatrix;

fn system(id: &str, rows: Vec<Vec<f64>>) -> SystemRun {
    let matrix = ConfusionMatrix::from_rows(LabelSpace::synthetic(3), rows).unwrap();
    SystemRun::new(id, matrix)
}

fn main() {
    // "steady" spreads its correctness evenly; "lopsided" nails class 1 at
    // the cost of class 2; "mediocre" trails everywhere.
    let runs = vec![
        system(
            "steady",
            vec![
                vec![14.0, 3.0, 3.0],
                vec![3.0, 13.0, 3.0],
                vec![3.0, 4.0, 14.0],
            ],
        ),
        system(
            "lopsided",
            vec![
                vec![19.0, 9.0, 2.0],
                vec![0.0, 8.0, 2.0],
                vec![1.0, 3.0, 16.0],
            ],
        ),
        system(
            "mediocre",
            vec![
                vec![12.0, 5.0, 4.0],
                vec![4.0, 10.0, 5.0],
                vec![4.0, 5.0, 11.0],
            ],
        ),
    ];

    let columns = vec![
        ColumnSpec::metric(MetricId::Accuracy),
        ColumnSpec::metric(MetricId::MACRO_RECALL),
        ColumnSpec::metric(MetricId::GEOMETRIC_MACRO_RECALL),
        ColumnSpec::metric(MetricId::MacroF1),
        ColumnSpec::metric(MetricId::Kappa),
        ColumnSpec::calibrated(MetricId::Kappa),
        ColumnSpec::class_recall("c2"),
    ];

    let table = score_systems(&runs, &columns).unwrap();
    println!("scores (rank):");
    for (i, system) in table.systems.iter().enumerate() {
        print!("  {system:<9}");
        for (c, score) in table.scores[i].iter().enumerate() {
            match score {
                Some(v) => print!("  {}={:.4} ({})", table.columns[c].name(), v, table.ranks[i][c]),
                None => print!("  {}=undef", table.columns[c].name()),
            }
        }
        println!();
    }
    println!();

    let corr = correlation_matrix(&table);
    println!("Spearman correlation of the rankings:");
    print!("  {:<18}", "");
    for column in &corr.columns {
        print!("{:>18}", column.name());
    }
    println!();
    for (i, column) in corr.columns.iter().enumerate() {
        print!("  {:<18}", column.name());
        for value in &corr.rho[i] {
            match value {
                Some(v) => print!("{v:>18.3}"),
                None => print!("{:>18}", "undef"),
            }
        }
        println!();
    }
    println!();

    // Macro recall and calibrated kappa always rank identically.
    let macro_recall_idx = 1;
    let calibrated_kappa_idx = 5;
    println!(
        "rho(macro_recall, kappa~) = {:?}",
        corr.rho[macro_recall_idx][calibrated_kappa_idx]
    );
    println!();

    let entries = ensemble_rank(&table, &table.columns).unwrap();
    println!("ensemble mean ranks:");
    for entry in &entries {
        println!("  {:<9} {}", entry.system_id, entry.mean_rank);
    }
}
