//! File formats: matrix JSON and prediction CSV/TSV.
//!
//! Matrix JSON is `{"labels": [...], "matrix": [[row-major cells]]}` with
//! rows as predictions. Prediction files have a header naming `gold` and
//! `pred` columns (any others, such as an id column, are ignored); the
//! separator is sniffed from the header line between comma and tab, with an
//! explicit override available.

use std::fs;
use std::path::Path;

use crate::matrix::{ConfusionMatrix, LabelSpace};
use crate::{Error, Result};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a confusion matrix from matrix JSON.
pub fn read_matrix_json(path: &Path) -> Result<ConfusionMatrix> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::BadFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes a confusion matrix as pretty-printed matrix JSON.
pub fn write_matrix_json(path: &Path, m: &ConfusionMatrix) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m).expect("matrix serialization is infallible");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn matrix_json_string(m: &ConfusionMatrix) -> String {
    let mut text = serde_json::to_string_pretty(m).expect("matrix serialization is infallible");
    text.push('\n');
    text
}

fn sniff_delimiter(text: &str) -> u8 {
    match text.lines().next() {
        Some(header) if header.contains('\t') => b'\t',
        _ => b',',
    }
}

/// Counts a prediction file into a confusion matrix.
///
/// With an explicit label space, a row mentioning an unknown label is an
/// error naming the line; otherwise the space is the sorted union of every
/// label seen.
pub fn read_predictions(
    path: &Path,
    labels: Option<LabelSpace>,
    delimiter: Option<u8>,
) -> Result<ConfusionMatrix> {
    let text = read_to_string(path)?;
    let delimiter = delimiter.unwrap_or_else(|| sniff_delimiter(&text));
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::BadFile {
            path: path_str.clone(),
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let gold_idx = find("gold").ok_or_else(|| Error::BadFile {
        path: path_str.clone(),
        message: format!("header {:?} has no `gold` column", headers),
    })?;
    let pred_idx = find("pred").ok_or_else(|| Error::BadFile {
        path: path_str.clone(),
        message: format!("header {:?} has no `pred` column", headers),
    })?;

    let mut pairs: Vec<(String, String)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line())
                .unwrap_or_default();
            Error::BadRecord {
                path: path_str.clone(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        let field = |idx: usize, name: &str| {
            record
                .get(idx)
                .map(|v| v.trim().to_owned())
                .filter(|v| !v.is_empty())
                .ok_or_else(|| Error::BadRecord {
                    path: path_str.clone(),
                    line,
                    message: format!("missing `{name}` field"),
                })
        };
        let gold = field(gold_idx, "gold")?;
        let pred = field(pred_idx, "pred")?;
        if let Some(space) = &labels {
            for label in [&gold, &pred] {
                if space.index_of(label).is_none() {
                    return Err(Error::BadRecord {
                        path: path_str.clone(),
                        line,
                        message: format!("unknown label `{label}`"),
                    });
                }
            }
        }
        pairs.push((gold, pred));
    }
    if pairs.is_empty() {
        return Err(Error::BadFile {
            path: path_str,
            message: "no data rows".into(),
        });
    }
    ConfusionMatrix::from_pairs(pairs, labels)
}

/// Loads either input kind: files ending in `.json` (or whose first
/// non-blank byte is `{`) are matrix JSON, everything else is a prediction
/// file. An explicit label space only applies to prediction files.
pub fn load_matrix_input(
    path: &Path,
    labels: Option<LabelSpace>,
    delimiter: Option<u8>,
) -> Result<ConfusionMatrix> {
    let looks_like_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false)
        || read_to_string(path)?.trim_start().starts_with('{');
    if looks_like_json {
        if labels.is_some() {
            return Err(Error::Usage(
                "--labels applies to prediction files; matrix JSON carries its own labels".into(),
            ));
        }
        read_matrix_json(path)
    } else {
        read_predictions(path, labels, delimiter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new()
            .suffix(suffix)
            .tempfile()
            .unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn matrix_json_round_trip_on_disk() {
        let m = ConfusionMatrix::from_rows(
            LabelSpace::new(["x", "y"]).unwrap(),
            vec![vec![15.0, 5.0], vec![10.0, 10.0]],
        )
        .unwrap();
        let file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
        write_matrix_json(file.path(), &m).unwrap();
        let back = read_matrix_json(file.path()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn predictions_csv_counts_and_sniffs_comma() {
        let file = temp_file("id,gold,pred\n1,x,x\n2,x,y\n3,y,y\n", ".csv");
        let m = read_predictions(file.path(), None, None).unwrap();
        assert_eq!(m.labels().labels(), &["x", "y"]);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(1, 1), 1.0);
    }

    #[test]
    fn predictions_tsv_sniffs_tab() {
        let file = temp_file("gold\tpred\nx\tx\ny\tx\n", ".tsv");
        let m = read_predictions(file.path(), None, None).unwrap();
        assert_eq!(m.total_mass(), 2.0);
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn unknown_label_errors_name_the_line() {
        let file = temp_file("gold,pred\nx,x\nz,x\n", ".csv");
        let labels = LabelSpace::new(["x", "y"]).unwrap();
        let err = read_predictions(file.path(), Some(labels), None).unwrap_err();
        match err {
            Error::BadRecord { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains('z'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_columns_are_reported() {
        let file = temp_file("gold,guess\nx,x\n", ".csv");
        assert!(matches!(
            read_predictions(file.path(), None, None),
            Err(Error::BadFile { .. })
        ));
    }

    #[test]
    fn load_matrix_input_detects_json_without_extension() {
        let file = temp_file(
            "{\"labels\": [\"a\", \"b\"], \"matrix\": [[1.0, 0.0], [0.0, 1.0]]}",
            ".dat",
        );
        let m = load_matrix_input(file.path(), None, None).unwrap();
        assert_eq!(m.total_mass(), 2.0);
    }

    #[test]
    fn labels_flag_rejected_for_json_inputs() {
        let file = temp_file(
            "{\"labels\": [\"a\", \"b\"], \"matrix\": [[1.0, 0.0], [0.0, 1.0]]}",
            ".json",
        );
        assert!(matches!(
            load_matrix_input(file.path(), Some(LabelSpace::new(["a", "b"]).unwrap()), None),
            Err(Error::Usage(_))
        ));
    }
}
