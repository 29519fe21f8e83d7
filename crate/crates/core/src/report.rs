//! CSV and JSON output for sweep rows. Floats carry 12 significant digits.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::mcm::ErrorReport;
use crate::uncompute::UncomputeReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(u64),
    Float(f64),
    OptInt(Option<u64>),
    OptFloat(Option<f64>),
    Bool(bool),
}

/// `x` rounded to 12 significant digits, in exponent form.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl Field {
    fn text(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(x) => fmt_float(*x),
            Field::OptInt(v) => v.map(|v| v.to_string()).unwrap_or_default(),
            Field::OptFloat(x) => x.map(fmt_float).unwrap_or_default(),
            Field::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        let float = |x: f64| {
            let rounded: f64 = fmt_float(x).parse().expect("formatted float parses");
            serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
        };
        match self {
            Field::Int(v) => Value::from(*v),
            Field::Float(x) => float(*x),
            Field::OptInt(v) => v.map(Value::from).unwrap_or(Value::Null),
            Field::OptFloat(x) => x.map(float).unwrap_or(Value::Null),
            Field::Bool(b) => Value::Bool(*b),
        }
    }
}

/// A record with a fixed column list and a pass flag.
pub trait Row {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<Field>;
    fn pass(&self) -> bool;
}

pub fn write_rows<R: Row, W: Write>(rows: &[R], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(R::header())?;
            for row in rows {
                w.write_record(row.fields().iter().map(Field::text))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let array: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let map: Map<String, Value> =
                        R::header().iter().zip(row.fields()).map(|(k, f)| (k.to_string(), f.json())).collect();
                    Value::Object(map)
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &array)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn rows_to_string<R: Row>(rows: &[R], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

impl Row for ErrorReport {
    fn header() -> &'static [&'static str] {
        &["K", "m", "p", "c", "eta_max", "e_measured", "e_bound", "pass", "seed"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Int(self.k as u64),
            Field::Int(self.m as u64),
            Field::OptInt(self.p.map(|p| p as u64)),
            Field::OptFloat(self.c),
            Field::Float(self.eta_max),
            Field::Float(self.e_measured),
            Field::OptFloat(self.e_bound),
            Field::Bool(Row::pass(self)),
            Field::Int(self.seed),
        ]
    }

    /// Rows without a bound cannot be certified and count as failures.
    fn pass(&self) -> bool {
        ErrorReport::pass(self).unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncomputeRow {
    pub report: UncomputeReport,
    pub seed: u64,
}

impl Row for UncomputeRow {
    fn header() -> &'static [&'static str] {
        &["delta", "eps_requested", "eps_measured", "queries", "ancillae_peak", "ancillae_final", "pass", "seed"]
    }

    fn fields(&self) -> Vec<Field> {
        let r = &self.report;
        vec![
            Field::Float(r.delta),
            Field::Float(r.eps_requested),
            Field::Float(r.eps_measured),
            Field::Int(r.queries),
            Field::Int(r.ancillae_peak as u64),
            Field::Int(r.ancillae_final as u64),
            Field::Bool(self.pass()),
            Field::Int(self.seed),
        ]
    }

    fn pass(&self) -> bool {
        self.report.eps_measured <= self.report.eps_requested
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub k: usize,
    pub m: usize,
    pub restarts: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    /// `best >= threshold` below the `ceil(log2 K)` bound, `best <= threshold` at it.
    pub threshold: f64,
    pub below_bound: bool,
    pub seed: u64,
}

impl Row for ProbeRow {
    fn header() -> &'static [&'static str] {
        &["K", "m", "restarts", "best", "mean", "worst", "threshold", "pass", "seed"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Int(self.k as u64),
            Field::Int(self.m as u64),
            Field::Int(self.restarts as u64),
            Field::Float(self.best),
            Field::Float(self.mean),
            Field::Float(self.worst),
            Field::Float(self.threshold),
            Field::Bool(self.pass()),
            Field::Int(self.seed),
        ]
    }

    fn pass(&self) -> bool {
        if self.below_bound {
            self.best >= self.threshold
        } else {
            self.best <= self.threshold
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostRow {
    pub k: usize,
    pub p: usize,
    pub c: f64,
    pub eps: f64,
    pub alpha_before: f64,
    pub iterations: usize,
    pub alpha_after: f64,
    pub fidelity: f64,
    pub seed: u64,
}

impl Row for BoostRow {
    fn header() -> &'static [&'static str] {
        &["K", "p", "c", "eps", "alpha_before", "k", "alpha_after", "fidelity", "pass", "seed"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Int(self.k as u64),
            Field::Int(self.p as u64),
            Field::Float(self.c),
            Field::Float(self.eps),
            Field::Float(self.alpha_before),
            Field::Int(self.iterations as u64),
            Field::Float(self.alpha_after),
            Field::Float(self.fidelity),
            Field::Bool(self.pass()),
            Field::Int(self.seed),
        ]
    }

    /// Fidelity at least `1 - ε²` and signal probability at least 0.8.
    fn pass(&self) -> bool {
        self.fidelity >= 1.0 - self.eps * self.eps && self.alpha_after * self.alpha_after >= 0.8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub index: usize,
    pub eta: f64,
    pub eta_limit: f64,
}

impl Row for DeviationRow {
    fn header() -> &'static [&'static str] {
        &["index", "eta", "eta_limit", "pass"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Int(self.index as u64),
            Field::Float(self.eta),
            Field::Float(self.eta_limit),
            Field::Bool(self.pass()),
        ]
    }

    fn pass(&self) -> bool {
        self.eta <= self.eta_limit
    }
}
