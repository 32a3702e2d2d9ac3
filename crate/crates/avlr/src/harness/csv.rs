//! CSV ingestion and emission for incomplete datasets: one header row,
//! feature columns first, the binary label last. A missing cell is an
//! empty field or a bare NaN token; values print through Rust's shortest
//! round-trip float formatting so a write/read cycle is exact.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use std::path::Path;

pub fn write_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(Error::Csv)?;
    let mut header: Vec<String> = (1..=data.d).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(data.d + 1);
    for i in 0..data.n {
        record.clear();
        for j in 0..data.d {
            if data.mask[i * data.d + j] {
                record.push(format!("{}", data.x[i * data.d + j]));
            } else {
                record.push(String::new());
            }
        }
        record.push(format!("{}", data.y[i]));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(Error::Csv)?;
    let columns = reader.headers()?.len();
    if columns < 2 {
        return Err(Error::Data(format!(
            "{}: need at least one feature column and a label column",
            path.display()
        )));
    }
    let d = columns - 1;

    let mut x = Vec::new();
    let mut mask = Vec::new();
    let mut y = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let lineno = idx + 2;
        for field in record.iter().take(d) {
            let token = field.trim();
            if token.is_empty() || token.eq_ignore_ascii_case("nan") {
                x.push(f64::NAN);
                mask.push(false);
            } else {
                let v: f64 = token.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: line {lineno}: bad number {token:?}",
                        path.display()
                    ))
                })?;
                x.push(v);
                mask.push(true);
            }
        }
        match record.get(d).map(str::trim) {
            Some("0") => y.push(0),
            Some("1") => y.push(1),
            other => {
                return Err(Error::Data(format!(
                    "{}: line {lineno}: label must be 0 or 1, found {other:?}",
                    path.display()
                )))
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Dataset::new(n, d, x, mask, y)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("avlr-csv-{name}-{}", std::process::id()))
    }

    #[test]
    fn write_then_read_is_exact() {
        let x = vec![0.1 + 0.2, f64::NAN, -1e-300, 3.5e17, 0.0, f64::NAN];
        let mask = vec![true, false, true, true, true, false];
        let data = Dataset::new(3, 2, x, mask, vec![0, 1, 1]).unwrap();
        let path = tmp("roundtrip");
        write_csv(&path, &data).unwrap();
        let back = read_csv(&path).unwrap();
        std::fs::remove_file(&path).unwrap();

        assert_eq!(back.n, 3);
        assert_eq!(back.d, 2);
        assert_eq!(back.mask, data.mask);
        assert_eq!(back.y, data.y);
        for i in 0..6 {
            if data.mask[i] {
                assert_eq!(back.x[i].to_bits(), data.x[i].to_bits(), "cell {i}");
            } else {
                assert!(back.x[i].is_nan());
            }
        }
    }

    #[test]
    fn nan_tokens_and_blanks_both_mean_missing() {
        let path = tmp("tokens");
        std::fs::write(&path, "x1,x2,y\n1.5,NaN,0\n,2.5,1\nnan,NAN,1\n").unwrap();
        let data = read_csv(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(data.mask, vec![true, false, false, true, false, false]);
        assert_eq!(data.x[0], 1.5);
        assert_eq!(data.x[3], 2.5);
    }

    #[test]
    fn malformed_rows_are_reported() {
        let path = tmp("badline");
        std::fs::write(&path, "x1,y\n1.0,0\n2.0\n").unwrap();
        let err = read_csv(&path).unwrap_err();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(err.exit_code(), 3, "{err}");

        let path = tmp("badlabel");
        std::fs::write(&path, "x1,y\n1.0,2\n").unwrap();
        let err = read_csv(&path).unwrap_err();
        std::fs::remove_file(&path).unwrap();
        assert!(err.to_string().contains("label"), "{err}");

        let path = tmp("badnumber");
        std::fs::write(&path, "x1,y\n1.0,0\noops,1\n").unwrap();
        let err = read_csv(&path).unwrap_err();
        std::fs::remove_file(&path).unwrap();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
