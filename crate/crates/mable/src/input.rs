//! CSV input contract: header `value,group`, group 0 or 1, one observation
//! per row. Errors carry line numbers.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct DataError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for DataError {}

fn err(line: Option<usize>, message: impl Into<String>) -> DataError {
    DataError { line, message: message.into() }
}

/// Parse the `value,group` CSV into (group-0 values, group-1 values),
/// original scale, in file order.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>), DataError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| err(None, format!("cannot read {}: {e}", path.display())))?;
    parse_samples(&raw)
}

pub fn parse_samples(raw: &str) -> Result<(Vec<f64>, Vec<f64>), DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    {
        let headers = rdr.headers().map_err(|e| err(Some(1), e.to_string()))?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["value", "group"] {
            return Err(err(
                Some(1),
                format!("header must be `value,group`, got `{}`", cols.join(",")),
            ));
        }
    }
    let mut y0 = Vec::new();
    let mut y1 = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| err(Some(line), e.to_string()))?;
        if record.len() != 2 {
            return Err(err(Some(line), format!("expected 2 fields, got {}", record.len())));
        }
        let value: f64 = record[0]
            .parse()
            .map_err(|_| err(Some(line), format!("bad value `{}`", &record[0])))?;
        if !value.is_finite() {
            return Err(err(Some(line), format!("value `{}` is not finite", &record[0])));
        }
        match &record[1] {
            "0" => y0.push(value),
            "1" => y1.push(value),
            other => {
                return Err(err(Some(line), format!("group must be 0 or 1, got `{other}`")))
            }
        }
    }
    if y0.is_empty() {
        return Err(err(None, "group 0 has no observations"));
    }
    if y1.is_empty() {
        return Err(err(None, "group 1 has no observations"));
    }
    Ok((y0, y1))
}
