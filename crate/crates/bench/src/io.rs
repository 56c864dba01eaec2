//! CSV input and the SHAP output table.

use std::io::{Read, Write};
use std::path::Path;

use ordershap_core::{Dataset, FeatureVector};

use crate::error::{BenchError, Result};

/// Reads a numeric CSV. A first line that does not parse as numbers is
/// taken as a header and skipped.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    let mut p = None;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(BenchError::Data(format!("line {}: {e}", line + 1))),
        };
        match p {
            None => p = Some(row.len()),
            Some(p) if p != row.len() => {
                return Err(BenchError::Data(format!("line {}: expected {p} columns, got {}", line + 1, row.len())))
            }
            _ => {}
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(BenchError::Data(format!("line {}: non-finite value in column {j}", line + 1)));
        }
        values.extend(row);
    }
    let p = p.ok_or_else(|| BenchError::Data("no data rows".into()))?;
    Ok(Dataset::from_row_major(p, values)?)
}

pub fn read_dataset_file(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::Data(format!("{}: {e}", path.display())))?;
    read_dataset(file)
}

/// A baseline file holds exactly one data row.
pub fn read_baseline_file(path: &Path) -> Result<FeatureVector> {
    let data = read_dataset_file(path)?;
    if data.n_rows() != 1 {
        return Err(BenchError::Data(format!("baseline file must have one row, got {}", data.n_rows())));
    }
    Ok(FeatureVector::new(data.row(0).to_vec())?)
}

/// One SHAP row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapRow {
    pub phi: Vec<f64>,
    pub order_used: Option<usize>,
    pub converged: Option<bool>,
}

/// Writes `phi_0..phi_{p-1},order_used,converged`. Missing values are empty
/// cells. Floats use the shortest round-trip representation.
pub fn write_shap<W: Write>(writer: W, p: usize, rows: &[ShapRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..p).map(|j| format!("phi_{j}")).collect();
    header.push("order_used".into());
    header.push("converged".into());
    w.write_record(&header)?;
    for row in rows {
        if row.phi.len() != p {
            return Err(BenchError::Data(format!("expected {p} attributions, got {}", row.phi.len())));
        }
        let mut rec: Vec<String> = row.phi.iter().map(|v| v.to_string()).collect();
        rec.push(row.order_used.map(|k| k.to_string()).unwrap_or_default());
        rec.push(row.converged.map(|c| c.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_shap`].
pub fn read_shap<R: Read>(reader: R) -> Result<Vec<ShapRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let n = headers.len();
    if n < 2 || &headers[n - 2] != "order_used" || &headers[n - 1] != "converged" {
        return Err(BenchError::Data("not a SHAP table".into()));
    }
    let bad = |e: String| BenchError::Data(e);
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let phi = rec.iter().take(n - 2).map(|s| s.parse::<f64>().map_err(|e| bad(e.to_string()))).collect::<Result<_>>()?;
            let order_used = match &rec[n - 2] {
                "" => None,
                s => Some(s.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
            };
            let converged = match &rec[n - 1] {
                "" => None,
                s => Some(s.parse().map_err(|e: std::str::ParseBoolError| bad(e.to_string()))?),
            };
            Ok(ShapRow { phi, order_used, converged })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let a = read_dataset("x0,x1\n1,2\n3,4\n".as_bytes()).unwrap();
        let b = read_dataset("1,2\n3, 4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_rows(), 2);
        assert_eq!(a.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(read_dataset("1,2\n3\n".as_bytes()).is_err());
        assert!(read_dataset("1,2\nx,4\n".as_bytes()).is_err());
        assert!(read_dataset("1,NaN\n".as_bytes()).is_err());
        assert!(read_dataset("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn shap_round_trip() {
        let rows = vec![
            ShapRow { phi: vec![0.1, -2.5e-17, 3.0], order_used: Some(4), converged: Some(true) },
            ShapRow { phi: vec![1.0 / 3.0, 0.0, -1.0], order_used: None, converged: None },
        ];
        let mut buf = Vec::new();
        write_shap(&mut buf, 3, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("phi_0,phi_1,phi_2,order_used,converged\n"));
        assert_eq!(read_shap(buf.as_slice()).unwrap(), rows);
    }
}
