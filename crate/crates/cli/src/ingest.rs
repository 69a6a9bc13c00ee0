//! CSV ingestion.
//!
//! Value files hold one numeric column, optionally under a header. Prediction
//! files need a header with a `y` column plus either `p` (one logit or
//! regression output) or `p0..p{C-1}` (class logits).

use std::path::Path;

use asymsens::{ModelEvalInput, Predictions};

use crate::error::{BenchError, Result};

fn open(path: &Path, has_headers: bool) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn record_error(path: &Path, e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => BenchError::io(path, source),
        other => BenchError::parse(path, format!("{other:?}")),
    }
}

fn parse_number(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| BenchError::parse(path, format!("line {line}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(BenchError::parse(path, format!("line {line}: value {field:?} is not finite")));
    }
    Ok(v)
}

/// Reads a single numeric column. A non-numeric first row is taken as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let mut reader = open(path, false)?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| record_error(path, e))?;
        let line = i + 1;
        if record.len() != 1 {
            return Err(BenchError::parse(
                path,
                format!("line {line}: expected 1 column, found {}", record.len()),
            ));
        }
        let field = &record[0];
        if i == 0 && field.parse::<f64>().is_err() {
            continue;
        }
        values.push(parse_number(path, line, field)?);
    }
    if values.is_empty() {
        return Err(BenchError::parse(path, "no values"));
    }
    Ok(values)
}

/// Reads labels and predictions. `class_logits` selects the `p0..` layout.
pub fn read_predictions(path: &Path, class_logits: bool) -> Result<ModelEvalInput> {
    let mut reader = open(path, true)?;
    let headers = reader.headers().map_err(|e| record_error(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let y_col = find("y").ok_or_else(|| BenchError::parse(path, "header has no `y` column"))?;

    let p_cols: Vec<usize> = if class_logits {
        let cols: Vec<usize> = (0..).map_while(|c| find(&format!("p{c}"))).collect();
        if cols.len() < 2 {
            return Err(BenchError::parse(path, "class logits need columns p0, p1, ..."));
        }
        cols
    } else {
        vec![find("p").ok_or_else(|| BenchError::parse(path, "header has no `p` column"))?]
    };

    let mut labels = Vec::new();
    let mut scalar = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| record_error(path, e))?;
        let line = i + 2;
        if record.len() != headers.len() {
            return Err(BenchError::parse(
                path,
                format!("line {line}: expected {} columns, found {}", headers.len(), record.len()),
            ));
        }
        let y = parse_number(path, line, &record[y_col])?;
        if class_logits {
            if y < 0.0 || y.fract() != 0.0 || y as usize >= p_cols.len() {
                return Err(BenchError::parse(
                    path,
                    format!("line {line}: label {y} is not a class index below {}", p_cols.len()),
                ));
            }
            let row = p_cols
                .iter()
                .map(|&c| parse_number(path, line, &record[c]))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        } else {
            scalar.push(parse_number(path, line, &record[p_cols[0]])?);
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(BenchError::parse(path, "no rows"));
    }
    Ok(ModelEvalInput {
        predictions: if class_logits { Predictions::Logits(rows) } else { Predictions::Scalar(scalar) },
        labels,
        output_range: None,
    })
}
