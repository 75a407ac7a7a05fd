//! CSV tables and metadata sidecars.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which
//! round-trips every binary64 value. Integers and words are written as is.
//! [`check_csv`] parses a table and re-renders it, reporting the first cell
//! that does not reproduce byte for byte.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i128),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Reads a cell the way [`Cell::render`] writes it.
    pub fn parse(token: &str) -> Cell {
        if let Ok(v) = token.parse::<i128>() {
            return Cell::Int(v);
        }
        match token {
            "inf" => return Cell::Real(f64::INFINITY),
            "-inf" => return Cell::Real(f64::NEG_INFINITY),
            "NaN" => return Cell::Real(f64::NAN),
            _ => {}
        }
        let numeric = token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'));
        match token.parse::<f64>() {
            Ok(v) if numeric => Cell::Real(v),
            _ => Cell::Text(token.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits in scientific notation; `inf`, `-inf`, `NaN` for
/// non-finite values.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of a named column.
    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .filter(|h| !h.is_empty())
            .ok_or_else(|| Error::Parse("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<Cell> = line.split(',').map(Cell::parse).collect();
            if row.len() != header.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Outcome of [`check_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSummary {
    pub rows: usize,
    pub columns: usize,
}

/// Parses a CSV and verifies that re-rendering it reproduces the input.
pub fn check_csv(text: &str) -> Result<CheckSummary> {
    let table = Table::from_csv(text)?;
    let rendered = table.to_csv();
    if rendered != text {
        let (line, (a, b)) = text
            .lines()
            .zip(rendered.lines())
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .unwrap_or((0, ("<end of input>", "<end of input>")));
        return Err(Error::Parse(format!(
            "line {}: `{a}` re-renders as `{b}`",
            line + 1
        )));
    }
    Ok(CheckSummary {
        rows: table.rows.len(),
        columns: table.header.len(),
    })
}

/// Metadata written next to every output, as `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sidecar {
    entries: Vec<(String, String)>,
}

impl Sidecar {
    /// A sidecar already carrying the command and crate version.
    pub fn new(command: &str) -> Self {
        let mut s = Self::default();
        s.set("command", command);
        s.set("version", env!("CARGO_PKG_VERSION"));
        s
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_real(&mut self, key: &str, value: f64) {
        self.set(key, format_real(value));
    }

    pub fn set_list(&mut self, key: &str, values: &[f64]) {
        let v: Vec<String> = values.iter().map(|x| format_real(*x)).collect();
        self.set(key, v.join(","));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# sdof metadata\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = crate::config::parse_key_values(text)?;
        let mut s = Self::default();
        for key in kv.keys() {
            s.entries.push((key.to_string(), kv.get(key).unwrap_or("").to_string()));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reals_render_with_17_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(f64::INFINITY), "inf");
        assert_eq!(format_real(-0.0), "-0.0000000000000000e0");
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(["P", "Q", "gamma"]);
        t.push(vec![1e6.into(), 19u32.into(), "true".into()]);
        t.push(vec![f64::INFINITY.into(), 0u32.into(), "suspect".into()]);
        let csv = t.to_csv();
        assert_eq!(check_csv(&csv).unwrap(), CheckSummary { rows: 2, columns: 3 });
        assert_eq!(Table::from_csv(&csv).unwrap(), t);
        assert_eq!(t.real_column("P").unwrap()[0], 1e6);
    }

    #[test]
    fn check_reports_differences() {
        assert!(check_csv("a,b\n0.5,1\n").is_err());
        assert!(check_csv("a,b\n1\n").is_err());
        assert!(check_csv("").is_err());
        assert!(check_csv("a\n1\n").is_ok());
    }

    #[test]
    fn sidecar_round_trip() {
        let mut s = Sidecar::new("sweep");
        s.set("seed", 42);
        s.set_real("slope", 0.25);
        s.set("seed", 43);
        let back = Sidecar::parse(&s.render()).unwrap();
        assert_eq!(back.get("seed"), Some("43"));
        assert_eq!(back.get("slope"), Some("2.5000000000000000e-1"));
        assert_eq!(back.get("command"), Some("sweep"));
    }

    proptest! {
        #[test]
        fn every_real_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(!v.is_nan());
            let back = Cell::parse(&format_real(v)).as_f64().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
