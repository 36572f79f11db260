//! Self-describing output tables (CSV with a comment header, or JSON).

use std::io::Write;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub generator: String,
    pub omega1: String,
    pub q: String,
    pub kappa: String,
    pub normalization: String,
}

impl Header {
    pub fn new(omega1: impl Into<String>, q: impl Into<String>, kappa: impl Into<String>, normalization: impl Into<String>) -> Self {
        Self {
            generator: format!("stokes2-kinetic v{}", crate::VERSION),
            omega1: omega1.into(),
            q: q.into(),
            kappa: kappa.into(),
            normalization: normalization.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# {}, omega1={}, q={}, kappa={}, normalization={}",
            self.generator, self.omega1, self.q, self.kappa, self.normalization
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Set when a sweep was split around the index transition.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub partitioned: bool,
}

impl Table {
    pub fn new(header: Header, columns: Vec<String>) -> Self {
        Self { header, columns, rows: Vec::new(), partitioned: false }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header.line())?;
        if self.partitioned {
            writeln!(out, "# partitioned: points inside the index-transition guard band were skipped")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.15e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(Header::new("1", "1", "0", "per U0"), vec!["omega1".into(), "abs_A".into()]);
        t.push(vec![1.0, 0.5]);
        t
    }

    #[test]
    fn csv_has_header_line() {
        let s = table().to_string(Format::Csv);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            format!("# stokes2-kinetic v{}, omega1=1, q=1, kappa=0, normalization=per U0", crate::VERSION)
        );
        assert_eq!(lines.next().unwrap(), "omega1,abs_A");
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn json_round_trips_fields() {
        let v: serde_json::Value = serde_json::from_str(&table().to_string(Format::Json)).unwrap();
        assert_eq!(v["header"]["normalization"], "per U0");
        assert_eq!(v["rows"][0][1], 0.5);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
