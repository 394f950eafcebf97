//! `timeseries.csv` and `summary.txt`.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every finite `f64` bit-exactly. Files are written to a
//! temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::virial::{DiagnosticsRecord, CSV_COLUMNS};

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// An extra trailing column, e.g. the breather's exact-solution error.
#[derive(Debug, Clone, Copy)]
pub struct ExtraColumn<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

pub fn timeseries_csv(
    records: &[DiagnosticsRecord],
    extra: Option<ExtraColumn<'_>>,
) -> Result<String> {
    if let Some(col) = extra {
        if col.values.len() != records.len() {
            return Err(Error::SizeMismatch {
                expected: records.len(),
                got: col.values.len(),
            });
        }
    }
    let mut out = CSV_COLUMNS.join(",");
    if let Some(col) = extra {
        out.push(',');
        out.push_str(col.name);
    }
    out.push('\n');
    for (i, rec) in records.iter().enumerate() {
        let mut fields: Vec<String> = rec.csv_values().iter().map(|&v| format_float(v)).collect();
        if let Some(col) = extra {
            fields.push(format_float(col.values[i]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_timeseries(
    records: &[DiagnosticsRecord],
    extra: Option<ExtraColumn<'_>>,
    path: &Path,
) -> Result<()> {
    write_atomic(path, timeseries_csv(records, extra)?.as_bytes())
}

/// Reads the fixed twelve columns back; trailing extra columns are ignored.
/// Fields outside the csv (`energy_norm`, `nonlinear_ratio`) come back NaN.
pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "missing header".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() < CSV_COLUMNS.len() || names[..CSV_COLUMNS.len()] != CSV_COLUMNS {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(bad(
                i + 2,
                format!("expected {} fields, got {}", names.len(), fields.len()),
            ));
        }
        let mut values = [0.0; 12];
        for (slot, raw) in values.iter_mut().zip(&fields) {
            *slot = raw
                .parse()
                .map_err(|_| bad(i + 2, format!("not a number: `{raw}`")))?;
        }
        records.push(DiagnosticsRecord::from_csv_values(values));
    }
    Ok(records)
}

/// Ordered `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), format_float(value)));
    }

    pub fn extend(&mut self, kv: impl IntoIterator<Item = (String, String)>) {
        self.entries.extend(kv);
    }

    /// Replaces an existing key in place, or appends it.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value.to_string(),
            None => self.push(key, value),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Summary { entries }
    }
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    write_atomic(path, summary.render().as_bytes())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(Summary::parse(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: f64) -> DiagnosticsRecord {
        let mut v = [0.0; 12];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = (seed + i as f64).sin() * 10f64.powi(i as i32 - 6);
        }
        DiagnosticsRecord::from_csv_values(v)
    }

    #[test]
    fn empty_records_give_header_only() {
        let csv = timeseries_csv(&[], None).unwrap();
        assert_eq!(csv, format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timeseries.csv");
        let recs: Vec<_> = (0..5).map(|i| record(i as f64 * 0.37)).collect();
        let extra: Vec<f64> = (0..5).map(|i| i as f64 / 3.0).collect();
        write_timeseries(
            &recs,
            Some(ExtraColumn {
                name: "exact_l2_error",
                values: &extra,
            }),
            &path,
        )
        .unwrap();
        let back = read_timeseries(&path).unwrap();
        for (a, b) in recs.iter().zip(&back) {
            for (x, y) in a.csv_values().iter().zip(b.csv_values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert!(!dir.path().join(".timeseries.csv.tmp").exists());
    }

    #[test]
    fn mismatched_extra_column_is_rejected() {
        let recs = vec![record(0.0)];
        assert!(timeseries_csv(
            &recs,
            Some(ExtraColumn {
                name: "e",
                values: &[]
            })
        )
        .is_err());
    }

    #[test]
    fn io_error_names_the_path() {
        let err =
            write_summary(&Summary::new(), Path::new("/nonexistent/dir/summary.txt")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir"));
    }

    #[test]
    fn summary_round_trip() {
        let mut s = Summary::new();
        s.push("status", "ok");
        s.push_float("H_ratio", 0.0625);
        s.set("status", "failed");
        let back = Summary::parse(&s.render());
        assert_eq!(back, s);
        assert_eq!(back.get("status"), Some("failed"));
        assert_eq!(back.get_f64("H_ratio"), Some(0.0625));
    }
}
