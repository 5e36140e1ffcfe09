//! Plot-ready numeric tables, CSV emission and span parsing.

use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Upper bound on span sizes, to keep a mistyped flag from exhausting memory.
pub const MAX_SPAN_POINTS: usize = 1_000_000;

/// Evenly spaced sample points written `start:stop:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Span {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::Usage("span bounds must be finite".into()));
        }
        if points == 0 {
            return Err(Error::Usage("span is empty".into()));
        }
        if points > MAX_SPAN_POINTS {
            return Err(Error::Usage(format!(
                "span exceeds {MAX_SPAN_POINTS} points"
            )));
        }
        if points == 1 && start != stop {
            return Err(Error::Usage("a one-point span needs start == stop".into()));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| self.start + (self.stop - self.start) * (i as f64 / last))
            .collect();
        v[self.points - 1] = self.stop;
        v
    }
}

impl FromStr for Span {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts.as_slice() else {
            return Err(Error::Usage(format!("span `{s}` is not start:stop:points")));
        };
        let number = |text: &str| {
            text.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("span bound `{text}` is not a number")))
        };
        let points = points.trim().parse::<usize>().map_err(|_| {
            Error::Usage(format!("span point count `{points}` is not a whole number"))
        })?;
        Span::new(number(start)?, number(stop)?, points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Written as a leading `#` comment.
    pub provenance: String,
}

impl CurveTable {
    pub fn new(columns: Vec<String>, provenance: impl Into<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(
                "table row",
                format!(
                    "has {} values for {} columns",
                    row.len(),
                    self.columns.len()
                ),
            ));
        }
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "table row",
                format!("non-finite value in column `{}`", self.columns[bad]),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in self.provenance.lines() {
            writeln!(out, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("table output is UTF-8")
    }
}

/// Parses a CSV written by [`CurveTable::write_csv`].
pub fn read_csv(text: &str) -> Result<CurveTable> {
    let mut provenance = Vec::new();
    let mut body = text;
    while let Some(rest) = body.strip_prefix("# ") {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        provenance.push(line);
        body = tail;
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let columns = reader
        .headers()
        .map_err(|e| Error::Config(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut table = CurveTable::new(columns, provenance.join("\n"));
    for record in reader.records() {
        let record = record.map_err(|e| Error::Config(e.to_string()))?;
        let row = record
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("`{v}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        table.push(row)?;
    }
    Ok(table)
}
