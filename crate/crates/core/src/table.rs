//! Plain CSV tables with round-trip number formatting.

use std::io::Write;
use std::path::Path;

use crate::Result;

/// Formats `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// An in-memory table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Appends a row of preformatted cells.
    ///
    /// Panics if the row width differs from the header width.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    /// Appends a row of numbers.
    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().copied().map(number).collect());
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("cells are valid UTF-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    /// Reads a table with a header row; every record must match its width.
    pub fn read_from<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut table = Table { header, rows: Vec::new() };
        for record in r.records() {
            let record = record?;
            table.rows.push(record.iter().map(|c| c.trim().to_string()).collect());
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers(&[1.0, 2.0]);
        t.push(vec!["x".into(), "y".into()]);
        let s = t.to_csv_string();
        let back = Table::read_from(s.as_bytes()).unwrap();
        assert_eq!(back, t);
    }
}
