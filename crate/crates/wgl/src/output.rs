//! Atomic CSV and JSON writers: data goes to a temp file in the target
//! directory, which is then renamed over the destination.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::Result;

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "NaN".into()
    } else if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, &table.to_csv_bytes()?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_and_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), num(0.1)]);
        t.push(vec!["say \"hi\"".into(), num(1e-300)]);
        let s = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(s, "a,b\r\n\"x,y\",0.1\r\n\"say \"\"hi\"\"\",1e-300\r\n");
        assert_eq!(num(2.5e20), "2.5e20");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-17, 12345.678, -3.3e-9, 7e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("t.csv");
        let mut t = Table::new(&["k"]);
        t.push(vec!["1".into()]);
        write_csv(&p, &t).unwrap();
        t.push(vec!["2".into()]);
        write_csv(&p, &t).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "k\r\n1\r\n2\r\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
