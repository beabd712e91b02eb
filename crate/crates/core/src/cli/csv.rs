use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Floats are written with 17 significant digits, which round-trips `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        for (i, v) in r.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", format_float(*v));
        }
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Schema(format!("{}: row {}: {e}", path.display(), n + 2)))?;
        if row.len() != header.len() {
            return Err(Error::Schema(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                n + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert!(!format_float(1234567.0).contains(' '));
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], &[vec![1.0, 2.0], vec![0.1, f64::NAN]]).unwrap();
        let t = read_csv(&p).unwrap();
        assert_eq!(t.column("a").unwrap(), vec![1.0, 0.1]);
        assert!(t.column("c").is_err());
    }
}
