//! Builds the property table for the standard metric roster and compares it
//! against the documented pattern.
//!
//! Run with: cargo run --release --example check_properties

use classeval::metrics::MetricId;
use classeval::properties::{expectations, property_table, SearchBudget};

fn main() {
    let budget = SearchBudget::with_trials(2_000);
    let table = property_table(&MetricId::property_roster(), &budget).unwrap();
    println!("{}", table.render_text());

    let contradictions = expectations::contradictions(&table);
    if contradictions.is_empty() {
        println!("verdicts match the documented property pattern");
    } else {
        println!("contradictions:");
        for message in contradictions {
            println!("  {message}");
        }
    }
}
