use std::io::Read;
use std::path::Path;

use curvopt_core::problem::Dataset;

use crate::error::{HarnessError, Result};

/// Reads an all-numeric CSV: the last column is the label, the others are
/// features. With `has_header` the first line is skipped.
pub fn load_dataset(path: &Path, has_header: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_dataset(file, has_header, path)
}

/// [`load_dataset`] over any reader; `path` only labels errors.
pub fn parse_dataset(reader: impl Read, has_header: bool, path: &Path) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let schema = |message: String| HarnessError::Schema { path: path.to_path_buf(), message };

    let mut width: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| HarnessError::Parse { path: path.to_path_buf(), row, message: e.to_string() })?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        match width {
            None if record.len() < 2 => {
                return Err(schema(format!("row {row}: need at least one feature and a label")));
            }
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(schema(format!("row {row}: {} columns, expected {w}", record.len())));
            }
            Some(_) => {}
        }
        let mut values = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| HarnessError::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("column {}: `{cell}` is not a number", col + 1),
            })?;
            values.push(v);
        }
        labels.push(values.pop().expect("width >= 2"));
        features.extend(values);
    }
    let Some(width) = width else {
        return Err(schema("no data rows".into()));
    };
    Dataset::new(width - 1, features, labels).map_err(|e| schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, header: bool) -> Result<Dataset> {
        parse_dataset(text.as_bytes(), header, Path::new("mem.csv"))
    }

    #[test]
    fn four_rows_two_features() {
        let d = parse("a,b,y\n1,2,3\n4,5,6\n7,8,9\n0,0,1\n", true).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.feature_dim(), 2);
        assert_eq!(d.record(1), (&[4.0, 5.0][..], 6.0));
    }

    #[test]
    fn bad_cell_cites_its_row() {
        let err = parse("1,2,3\n4,5,6\n7,x,9\n", false).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { row: 3, .. }), "{err}");
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn header_is_not_counted() {
        let err = parse("a,b,y\n1,2,3\n4,5,6\n7,x,9\n", true).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { row: 3, .. }));
    }

    #[test]
    fn ragged_and_empty_inputs_are_schema_errors() {
        assert!(matches!(parse("1,2,3\n4,5\n", false), Err(HarnessError::Schema { .. })));
        assert!(matches!(parse("", false), Err(HarnessError::Schema { .. })));
        assert!(matches!(parse("a,b,y\n", true), Err(HarnessError::Schema { .. })));
        assert!(matches!(parse("1\n2\n", false), Err(HarnessError::Schema { .. })));
    }
}
