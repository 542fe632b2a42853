//! Matrix files: either `{"n": 2, "data": [[1, 0], [0, 1]]}` or plain CSV
//! with one row per line.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Largest relative asymmetry `|M - M^T|_F / |M|_F` that is silently
/// symmetrized away.
pub const ASYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixFile {
            n: m.nrows(),
            data: rows(m),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>, String> {
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        if self.data.len() != self.n {
            return Err(format!("n = {} but data has {} rows", self.n, self.data.len()));
        }
        from_rows(&self.data)
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(data: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let n = data.len();
    if n == 0 {
        return Err("no rows".into());
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != n {
            return Err(format!(
                "row {} has {} entries, expected {n} for a square matrix",
                i + 1,
                row.len()
            ));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(format!("non-finite entry {v} in row {}", i + 1));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| data[i][j]))
}

fn parse_csv(text: &str) -> Result<DMatrix<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| format!("row {}: cannot parse '{field}' as a number", i + 1))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        data.push(row);
    }
    from_rows(&data)
}

/// Parses file contents. Text whose first non-blank character is `{` is read
/// as JSON, anything else as CSV.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, String> {
    if text.trim_start().starts_with('{') {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        file.to_matrix()
    } else {
        parse_csv(text)
    }
}

/// Rejects `m` if its relative asymmetry exceeds [`ASYMMETRY_TOL`]. Smaller
/// asymmetry is averaged away when the matrix is wrapped.
pub fn check_symmetry(m: &DMatrix<f64>) -> Result<(), String> {
    let scale = m.norm();
    if scale == 0.0 {
        return Ok(());
    }
    let asym = (m - m.transpose()).norm() / scale;
    if asym > ASYMMETRY_TOL {
        return Err(format!("matrix is not symmetric (relative asymmetry {asym:e})"));
    }
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m = parse_matrix(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    check_symmetry(&m).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_agree() {
        let a = parse_matrix(r#"{"n": 2, "data": [[1, 2], [2, 5.5]]}"#).unwrap();
        let b = parse_matrix("1, 2\n2, 5.5\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(1, 1)], 5.5);
    }

    #[test]
    fn csv_comments_and_blank_lines() {
        let m = parse_matrix("# covariance\n4,0\n\n0,9\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]));
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_matrix(r#"{"n": 3, "data": [[1, 0], [0, 1]]}"#).is_err());
        assert!(parse_matrix(r#"{"n": 2, "data": [[1, 0], [0]]}"#).is_err());
        assert!(parse_matrix(r#"{"n": 1, "data": [[1]], "extra": 0}"#).is_err());
        assert!(parse_matrix("1,2,3\n4,5,6\n").is_err());
        assert!(parse_matrix("1,x\n0,1\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("inf,0\n0,1\n").is_err());
    }

    #[test]
    fn symmetry_gate() {
        let ok = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]);
        assert!(check_symmetry(&ok).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.6, 1.0]);
        assert!(check_symmetry(&bad).is_err());
    }

    #[test]
    fn round_trip_through_json() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -2.5e-17, -2.5e-17, 3.0]);
        let text = serde_json::to_string(&MatrixFile::from_matrix(&m)).unwrap();
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }
}
