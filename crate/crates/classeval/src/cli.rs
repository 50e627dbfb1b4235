//! Batch command-line surface.
//!
//! Five commands bind the library to files: `evaluate`, `calibrate`,
//! `check`, `compare`, and `project`. Exit codes are scriptable: 0 success,
//! 1 usage error, 2 data error, 3 property-expectation contradiction.
//! Reports carry no timestamps, so identical inputs and seed produce
//! byte-identical output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    correlation_matrix, ensemble_rank, project_precision, score_systems, ColumnSpec,
    CorrelationMatrix, RankingTable, SystemRun,
};
use crate::io;
use crate::matrix::{ConfusionMatrix, LabelSpace};
use crate::metrics::{self, MetricId, MetricScore, ScoreFlag};
use crate::properties::{
    expectations, property_table, run_check, Evaluator, Perturbation, PropertyId, PropertyVerdict,
    SearchBudget, Witness, DEFAULT_SEED,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONTRADICTION: i32 = 3;

#[derive(Parser)]
#[command(
    name = "classeval",
    version,
    about = "Confusion-matrix evaluation: metric roster, metric properties, calibration, system ranking"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a prediction file or matrix JSON under a set of metrics
    Evaluate(EvaluateArgs),
    /// Equalize class prevalences and emit the calibrated matrix
    Calibrate(CalibrateArgs),
    /// Check metric properties against the documented pattern
    Check(CheckArgs),
    /// Rank systems under many metrics and correlate the rankings
    Compare(CompareArgs),
    /// Project class precisions from recalls and estimated distributions
    Project(ProjectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction CSV/TSV (gold,pred header) or matrix JSON
    #[arg(long)]
    input: PathBuf,
    /// Explicit label space for prediction files (comma-separated)
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Metrics to report; `metric~` scores the calibrated matrix,
    /// `recall:<label>` a single class recall (default: the full roster)
    #[arg(long, alias = "metric", value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Calibrate the input matrix before scoring anything
    #[arg(long)]
    calibrated: bool,
    /// Field separator for prediction files: `,` or `tab` (default: sniffed)
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Prediction CSV/TSV or matrix JSON
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long)]
    delimiter: Option<String>,
    /// Write the calibrated matrix JSON here (default: stdout); the scaling
    /// factors are echoed on stderr either way
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Metrics to check (default: the documented roster)
    #[arg(long, alias = "metric", value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Restrict to one property: monotonicity, class_sensitivity,
    /// class_decomposability, prevalence_invariance, chance_correction
    #[arg(long)]
    property: Option<String>,
    /// Random-search trials per check
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Seed for the randomized searches
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// One prediction file or matrix JSON per system
    #[arg(long, alias = "input", value_delimiter = ',', num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long)]
    delimiter: Option<String>,
    /// Metric columns; `metric~` and `recall:<label>` work here too
    #[arg(long, alias = "metric", value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Add a calibrated `~` twin for every metric column
    #[arg(long)]
    calibrated: bool,
    /// Also print the mean-rank ensemble over all columns
    #[arg(long)]
    ensemble: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Directory for ranking.csv and correlation.csv (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// JSON file {"recalls": [...], "class_dist": [...], "pred_dist": [...]}
    #[arg(long)]
    input: Option<PathBuf>,
    /// Per-class recalls (comma-separated)
    #[arg(long, value_delimiter = ',')]
    recalls: Option<Vec<f64>>,
    /// Estimated class distribution
    #[arg(long, value_delimiter = ',')]
    class_dist: Option<Vec<f64>>,
    /// Estimated prediction distribution
    #[arg(long, value_delimiter = ',')]
    pred_dist: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Entry point for the binary: parses `std::env::args`.
pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Entry point with explicit arguments, for tests.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Check(args) => cmd_check(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Project(args) => cmd_project(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::BadBudget(_) | Error::BadMetricId(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn parse_labels(labels: Option<Vec<String>>) -> Result<Option<LabelSpace>> {
    labels.map(LabelSpace::new).transpose()
}

fn parse_delimiter(delimiter: Option<&str>) -> Result<Option<u8>> {
    match delimiter {
        None => Ok(None),
        Some(",") | Some("comma") => Ok(Some(b',')),
        Some("\t") | Some("tab") | Some("\\t") => Ok(Some(b'\t')),
        Some(other) => Err(Error::Usage(format!(
            "unsupported delimiter `{other}` (use `,` or `tab`)"
        ))),
    }
}

fn parse_columns(metrics: Option<Vec<String>>) -> Result<Vec<ColumnSpec>> {
    match metrics {
        None => Ok(MetricId::default_roster()
            .into_iter()
            .map(ColumnSpec::metric)
            .collect()),
        Some(names) => names.iter().map(|name| name.parse()).collect(),
    }
}

fn parse_metric_ids(metrics: Option<Vec<String>>) -> Result<Vec<MetricId>> {
    match metrics {
        None => Ok(MetricId::property_roster()),
        Some(names) => names.iter().map(|name| name.parse()).collect(),
    }
}

fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_value(value: f64) -> String {
    if value.is_finite() {
        format!("{value}")
    } else {
        String::new()
    }
}

fn format_flags(flags: &BTreeSet<ScoreFlag>) -> String {
    flags
        .iter()
        .map(|f| serde_json::to_value(f).unwrap().as_str().unwrap().to_owned())
        .collect::<Vec<_>>()
        .join(";")
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn score_column(column: &ColumnSpec, m: &ConfusionMatrix) -> MetricScore {
    match column {
        ColumnSpec::Metric { id, calibrated } => {
            let target = if *calibrated { m.calibrate() } else { Ok(m.clone()) };
            match target.and_then(|t| metrics::evaluate(*id, &t)) {
                Ok(score) => score,
                Err(_) => MetricScore {
                    metric: *id,
                    value: f64::NAN,
                    flags: BTreeSet::from([ScoreFlag::Undefined]),
                },
            }
        }
        ColumnSpec::ClassRecall { label } => {
            let (value, flags) = match m.labels().index_of(label) {
                Some(i) => {
                    let scores = metrics::class_prf(m);
                    let mut flags = BTreeSet::new();
                    if scores.zero_prevalence[i] {
                        flags.insert(ScoreFlag::ZeroDenominatorClass);
                    }
                    (scores.recall[i], flags)
                }
                None => (f64::NAN, BTreeSet::from([ScoreFlag::Undefined])),
            };
            MetricScore {
                metric: MetricId::MACRO_RECALL,
                value,
                flags,
            }
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32> {
    let labels = parse_labels(args.labels)?;
    let delimiter = parse_delimiter(args.delimiter.as_deref())?;
    let mut matrix = io::load_matrix_input(&args.input, labels, delimiter)?;
    if args.calibrated {
        matrix = matrix.calibrate()?;
    }
    let columns = parse_columns(args.metrics)?;
    let rows: Vec<(String, MetricScore)> = columns
        .iter()
        .map(|c| (c.name(), score_column(c, &matrix)))
        .collect();

    let text = match args.format {
        OutputFormat::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(name, score)| {
                    serde_json::json!({
                        "metric": name,
                        "value": if score.value.is_finite() {
                            serde_json::json!(score.value)
                        } else {
                            serde_json::Value::Null
                        },
                        "flags": score.flags,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&entries).unwrap();
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("metric,value,flags\n");
            for (name, score) in &rows {
                let _ = writeln!(
                    s,
                    "{name},{},{}",
                    format_value(score.value),
                    format_flags(&score.flags)
                );
            }
            s
        }
        OutputFormat::Table => {
            let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
            let mut s = format!("{:width$}  {:>12}  flags\n", "metric", "value");
            for (name, score) in &rows {
                let value = if score.value.is_finite() {
                    format!("{:>12.6}", score.value)
                } else {
                    format!("{:>12}", "undefined")
                };
                let _ = writeln!(s, "{name:width$}  {value}  {}", format_flags(&score.flags));
            }
            s
        }
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

fn cmd_calibrate(args: CalibrateArgs) -> Result<i32> {
    let labels = parse_labels(args.labels)?;
    let delimiter = parse_delimiter(args.delimiter.as_deref())?;
    let matrix = io::load_matrix_input(&args.input, labels, delimiter)?;
    let scaling = matrix.calibration_scaling()?;
    let calibrated = matrix.scale(&scaling)?;
    let factors: Vec<String> = scaling.factors().iter().map(|f| format!("{f}")).collect();
    eprintln!("scaling: [{}]", factors.join(", "));
    write_output(args.output.as_deref(), &io::matrix_json_string(&calibrated))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn render_witness(witness: &Witness, indent: &str) -> String {
    let mut s = String::new();
    let labels = witness.matrix.labels();
    for (i, row) in witness.matrix.to_rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "{indent}{}: [{}]", labels.label(i), cells.join(", "));
    }
    match &witness.perturbation {
        Perturbation::AddMass { row, col, amount } => {
            let _ = writeln!(
                s,
                "{indent}add {amount} at (pred {}, gold {}): score {} -> {}",
                labels.label(*row),
                labels.label(*col),
                witness.score_before,
                witness.score_after
            );
        }
        Perturbation::ScalingPair { first, second } => {
            let _ = writeln!(
                s,
                "{indent}scale {first:?} vs {second:?}: score {} vs {}",
                witness.score_before, witness.score_after
            );
        }
        Perturbation::PlacementPair { first, second } => {
            let _ = writeln!(
                s,
                "{indent}place one unit at {first:?} vs {second:?}: score {} vs {}",
                witness.score_before, witness.score_after
            );
        }
        Perturbation::ChanceModel {
            prediction_dist,
            class_dist,
        } => {
            let _ = writeln!(
                s,
                "{indent}chance baseline z={prediction_dist:?} p={class_dist:?}: bound {} observed {}",
                witness.score_before, witness.score_after
            );
        }
    }
    s
}

fn single_property_report(
    metric_ids: &[MetricId],
    property: PropertyId,
    budget: &SearchBudget,
) -> (Vec<(PropertyVerdict, Option<PropertyVerdict>)>, Vec<String>) {
    let mut rows = Vec::new();
    let mut messages = Vec::new();
    for &metric in metric_ids {
        let base = run_check(Evaluator::plain(metric), property, budget);
        let rerun = if base.passed() {
            None
        } else {
            Some(run_check(Evaluator::calibrated(metric), property, budget))
        };
        messages.extend(expectations::cell_contradictions(
            metric,
            property,
            &base,
            rerun.as_ref(),
        ));
        rows.push((base, rerun));
    }
    (rows, messages)
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let budget = SearchBudget {
        trials: args.trials,
        seed: args.seed,
        ..SearchBudget::default()
    };
    budget.validate()?;
    let metric_ids = parse_metric_ids(args.metrics)?;

    let (text, contradictions) = match &args.property {
        Some(name) => {
            let property: PropertyId = name.parse()?;
            let (rows, messages) = single_property_report(&metric_ids, property, &budget);
            let text = match args.format {
                OutputFormat::Json => {
                    let entries: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(base, rerun)| {
                            serde_json::json!({"base": base, "calibrated": rerun})
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&entries).unwrap();
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => {
                    let mut s = String::from("metric,property,verdict,calibrated_verdict\n");
                    for (base, rerun) in &rows {
                        let _ = writeln!(
                            s,
                            "{},{},{:?},{}",
                            base.metric,
                            property.short_label(),
                            base.verdict,
                            rerun
                                .as_ref()
                                .map(|v| format!("{:?}", v.verdict))
                                .unwrap_or_default()
                        );
                    }
                    s
                }
                OutputFormat::Table => {
                    let mut s = String::new();
                    for (base, rerun) in &rows {
                        let _ = writeln!(
                            s,
                            "{} / {}: {:?} (trials {}, skipped {})",
                            base.metric,
                            property.short_label(),
                            base.verdict,
                            base.trials,
                            base.skipped
                        );
                        if let Some(witness) = &base.witness {
                            s.push_str(&render_witness(witness, "  "));
                        }
                        if let Some(rerun) = rerun {
                            let _ =
                                writeln!(s, "  after calibration: {:?}", rerun.verdict);
                        }
                    }
                    s
                }
            };
            (text, messages)
        }
        None => {
            let table = property_table(&metric_ids, &budget)?;
            let messages = expectations::contradictions(&table);
            let text = match args.format {
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&table).unwrap();
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => {
                    let mut s =
                        String::from("metric,property,verdict,calibrated_verdict\n");
                    for row in &table.rows {
                        for property in PropertyId::ALL {
                            let base = row.verdict(property);
                            let rerun = row.calibrated_verdict(property);
                            let _ = writeln!(
                                s,
                                "{},{},{:?},{}",
                                row.metric,
                                property.short_label(),
                                base.verdict,
                                rerun
                                    .map(|v| format!("{:?}", v.verdict))
                                    .unwrap_or_default()
                            );
                        }
                    }
                    s
                }
                OutputFormat::Table => table.render_text(),
            };
            (text, messages)
        }
    };

    write_output(args.output.as_deref(), &text)?;
    if contradictions.is_empty() {
        Ok(EXIT_OK)
    } else {
        for message in &contradictions {
            eprintln!("contradiction: {message}");
        }
        Ok(EXIT_CONTRADICTION)
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn system_id_for(path: &Path, taken: &[String]) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    if !taken.contains(&stem) {
        return stem;
    }
    let mut k = 2;
    loop {
        let candidate = format!("{stem}-{k}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

fn ranking_csv(table: &RankingTable) -> String {
    let mut s = String::from("system");
    for column in &table.columns {
        let _ = write!(s, ",{}", column.name());
    }
    for column in &table.columns {
        let _ = write!(s, ",rank:{}", column.name());
    }
    s.push('\n');
    for (i, system) in table.systems.iter().enumerate() {
        let _ = write!(s, "{system}");
        for score in &table.scores[i] {
            let _ = write!(s, ",{}", score.map(format_value).unwrap_or_default());
        }
        for rank in &table.ranks[i] {
            let _ = write!(s, ",{rank}");
        }
        s.push('\n');
    }
    s
}

fn correlation_csv(corr: &CorrelationMatrix) -> String {
    let mut s = String::from("metric");
    for column in &corr.columns {
        let _ = write!(s, ",{}", column.name());
    }
    s.push('\n');
    for (i, column) in corr.columns.iter().enumerate() {
        let _ = write!(s, "{}", column.name());
        for value in &corr.rho[i] {
            let _ = write!(s, ",{}", value.map(format_value).unwrap_or_default());
        }
        s.push('\n');
    }
    s
}

fn ranking_table_text(table: &RankingTable) -> String {
    let mut header: Vec<String> = vec!["system".into()];
    header.extend(table.columns.iter().map(|c| c.name()));
    let mut grid: Vec<Vec<String>> = vec![header];
    for (i, system) in table.systems.iter().enumerate() {
        let mut row = vec![system.clone()];
        for (c, score) in table.scores[i].iter().enumerate() {
            let cell = match score {
                Some(v) => format!("{:.4} ({})", v, table.ranks[i][c]),
                None => format!("undef ({})", table.ranks[i][c]),
            };
            row.push(cell);
        }
        grid.push(row);
    }
    render_grid(&grid)
}

fn correlation_text(corr: &CorrelationMatrix) -> String {
    let mut header: Vec<String> = vec!["rho".into()];
    header.extend(corr.columns.iter().map(|c| c.name()));
    let mut grid = vec![header];
    for (i, column) in corr.columns.iter().enumerate() {
        let mut row = vec![column.name()];
        for value in &corr.rho[i] {
            row.push(match value {
                Some(v) => format!("{v:.4}"),
                None => "undef".into(),
            });
        }
        grid.push(row);
    }
    render_grid(&grid)
}

fn render_grid(grid: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = Vec::new();
    for row in grid {
        for (i, cell) in row.iter().enumerate() {
            if widths.len() <= i {
                widths.push(0);
            }
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut s = String::new();
    for row in grid {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{:width$}", cell, width = widths[i]))
            .collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    s
}

fn ensemble_text(table: &RankingTable) -> Result<String> {
    let entries = ensemble_rank(table, &table.columns)?;
    let best = entries[0].mean_rank;
    let winners: Vec<&str> = entries
        .iter()
        .filter(|e| e.mean_rank == best)
        .map(|e| e.system_id.as_str())
        .collect();
    let mut s = String::from("ensemble mean ranks:\n");
    for entry in &entries {
        let _ = writeln!(s, "  {}  {}", entry.system_id, entry.mean_rank);
    }
    let _ = writeln!(s, "winner(s): {}", winners.join(", "));
    Ok(s)
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    if args.inputs.is_empty() {
        return Err(Error::Usage("compare needs at least one --inputs file".into()));
    }
    let labels = parse_labels(args.labels)?;
    let delimiter = parse_delimiter(args.delimiter.as_deref())?;
    let mut runs: Vec<SystemRun> = Vec::new();
    let mut taken = Vec::new();
    for path in &args.inputs {
        let matrix = io::load_matrix_input(path, labels.clone(), delimiter)?;
        let id = system_id_for(path, &taken);
        taken.push(id.clone());
        runs.push(SystemRun::new(id, matrix));
    }
    let mut columns = parse_columns(args.metrics)?;
    if args.calibrated {
        let twins: Vec<ColumnSpec> = columns
            .iter()
            .filter_map(|c| match c {
                ColumnSpec::Metric {
                    id,
                    calibrated: false,
                } => {
                    let twin = ColumnSpec::calibrated(*id);
                    (!columns.contains(&twin)).then_some(twin)
                }
                _ => None,
            })
            .collect();
        columns.extend(twins);
    }
    let table = score_systems(&runs, &columns)?;
    let corr = correlation_matrix(&table);

    match args.format {
        OutputFormat::Json => {
            let ensemble = if args.ensemble {
                Some(ensemble_rank(&table, &table.columns)?)
            } else {
                None
            };
            let value = serde_json::json!({
                "ranking": table,
                "correlation": corr,
                "ensemble": ensemble,
            });
            let mut s = serde_json::to_string_pretty(&value).unwrap();
            s.push('\n');
            write_output(args.output.as_deref(), &s)?;
        }
        OutputFormat::Csv => match &args.output {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.display().to_string(),
                    source,
                })?;
                fs::write(dir.join("ranking.csv"), ranking_csv(&table)).map_err(|source| {
                    Error::Io {
                        path: dir.join("ranking.csv").display().to_string(),
                        source,
                    }
                })?;
                fs::write(dir.join("correlation.csv"), correlation_csv(&corr)).map_err(
                    |source| Error::Io {
                        path: dir.join("correlation.csv").display().to_string(),
                        source,
                    },
                )?;
                if args.ensemble {
                    print!("{}", ensemble_text(&table)?);
                }
            }
            None => {
                print!("{}", ranking_csv(&table));
                println!();
                print!("{}", correlation_csv(&corr));
                if args.ensemble {
                    println!();
                    print!("{}", ensemble_text(&table)?);
                }
            }
        },
        OutputFormat::Table => {
            let mut s = ranking_table_text(&table);
            s.push('\n');
            s.push_str(&correlation_text(&corr));
            if args.ensemble {
                s.push('\n');
                s.push_str(&ensemble_text(&table)?);
            }
            write_output(args.output.as_deref(), &s)?;
        }
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
struct ProjectionInput {
    recalls: Vec<f64>,
    class_dist: Vec<f64>,
    pred_dist: Vec<f64>,
}

fn cmd_project(args: ProjectArgs) -> Result<i32> {
    let input = match (&args.input, &args.recalls, &args.class_dist, &args.pred_dist) {
        (Some(path), None, None, None) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_json::from_str::<ProjectionInput>(&text).map_err(|e| Error::BadFile {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
        (None, Some(recalls), Some(class_dist), Some(pred_dist)) => ProjectionInput {
            recalls: recalls.clone(),
            class_dist: class_dist.clone(),
            pred_dist: pred_dist.clone(),
        },
        _ => {
            return Err(Error::Usage(
                "project needs either --input or all of --recalls, --class-dist, --pred-dist"
                    .into(),
            ))
        }
    };
    let projection = project_precision(&input.recalls, &input.class_dist, &input.pred_dist)?;

    let text = match args.format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&projection).unwrap();
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("class,recall,projected_precision,inconsistent\n");
            for (i, estimate) in projection.estimates.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{i},{},{},{}",
                    input.recalls[i], estimate, projection.inconsistent[i]
                );
            }
            let _ = writeln!(s, "macro,,{},", projection.macro_estimate);
            s
        }
        OutputFormat::Table => {
            let mut s = String::from("class  recall      projected precision\n");
            for (i, estimate) in projection.estimates.iter().enumerate() {
                let mark = if projection.inconsistent[i] {
                    "  (inconsistent, clamped)"
                } else {
                    ""
                };
                let _ = writeln!(s, "{i:<5}  {:<10}  {estimate}{mark}", input.recalls[i]);
            }
            let _ = writeln!(s, "macro precision estimate: {}", projection.macro_estimate);
            s
        }
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}
