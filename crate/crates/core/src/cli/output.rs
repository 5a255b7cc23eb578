//! Output records and their plain, CSV and JSON renderings.
//!
//! Values are rounded to [`SIG_DIGITS`] significant digits before they are
//! stored, so what is printed is exactly what a parser reads back. Error
//! columns are rounded up.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

pub const SIG_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    TruncatedSolve,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::TruncatedSolve => "truncated_solve",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A real value or an integer too large for a float, kept as decimal text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Integer(String),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Integer(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub quantity: String,
    pub value: Value,
    pub err_or_se: f64,
    pub method: Method,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl OutputRecord {
    /// A real-valued record; `err` is widened by the rounding of `value`.
    pub fn real(quantity: impl Into<String>, value: f64, err: f64, method: Method) -> Self {
        let shown = round_sig(value);
        let err = round_sig_up(err.abs() + (shown - value).abs());
        Self { quantity: quantity.into(), value: Value::Real(shown), err_or_se: err, method, metadata: BTreeMap::new() }
    }

    /// A Monte Carlo estimate: the standard error is reported as is, rounded up.
    pub fn estimate(quantity: impl Into<String>, mean: f64, se: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value: Value::Real(round_sig(mean)),
            err_or_se: round_sig_up(se),
            method: Method::MonteCarlo,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    fn metadata_text(&self) -> String {
        self.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

/// `x` rounded to nearest at [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("float text")
}

/// The smallest [`SIG_DIGITS`]-digit decimal that is `>= x`, for `x >= 0`.
pub fn round_sig_up(x: f64) -> f64 {
    let r = round_sig(x);
    if !x.is_finite() || r >= x {
        return r;
    }
    let text = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = text.split_once('e').expect("exponent");
    let digits: u64 = mantissa.replace('.', "").parse().expect("digits");
    let exp: i32 = exp.parse().expect("exponent");
    let bumped = digits + 1;
    let up: f64 = format!("{bumped}e{}", exp - (SIG_DIGITS as i32 - 1)).parse().expect("float text");
    // rounding the decimal text to f64 may land just below it
    if up >= x { up } else { up.next_up() }
}

/// Flat CSV shape of a record.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CsvRow {
    pub quantity: String,
    pub value: String,
    pub err_or_se: f64,
    pub method: Method,
    pub metadata: String,
}

impl CsvRow {
    pub fn into_record(self) -> OutputRecord {
        let value = match self.value.parse::<f64>() {
            Ok(x) if self.value.contains(['.', 'e', 'E', 'i', 'N']) => Value::Real(x),
            _ => Value::Integer(self.value),
        };
        let metadata = self
            .metadata
            .split(';')
            .filter(|s| !s.is_empty())
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        OutputRecord { quantity: self.quantity, value, err_or_se: self.err_or_se, method: self.method, metadata }
    }
}

fn real_text(x: f64) -> String {
    // `{:?}` keeps a decimal point on integral values so the CSV reader sees a real
    format!("{x:?}")
}

pub fn write_records(out: &mut dyn Write, format: Format, records: &[OutputRecord]) -> io::Result<()> {
    match format {
        Format::Plain => {
            let width = records.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
            for r in records {
                let meta = r.metadata_text();
                write!(out, "{:<width$}  {:>20} ± {:<18e} {}", r.quantity, r.value.to_string(), r.err_or_se, r.method.as_str())?;
                if !meta.is_empty() {
                    write!(out, "  {meta}")?;
                }
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(CsvRow {
                    quantity: r.quantity.clone(),
                    value: match &r.value {
                        Value::Real(x) => real_text(*x),
                        Value::Integer(s) => s.clone(),
                    },
                    err_or_se: r.err_or_se,
                    method: r.method,
                    metadata: r.metadata_text(),
                })?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Parses CSV output back into records.
pub fn parse_csv(text: &str) -> csv::Result<Vec<OutputRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<CsvRow>()
        .map(|row| row.map(CsvRow::into_record))
        .collect()
}

pub fn parse_json(text: &str) -> serde_json::Result<Vec<OutputRecord>> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Vec<OutputRecord> {
        vec![
            OutputRecord::real("tau", 0.682_725_075_939_1, 1e-15, Method::ClosedForm).with("tol", 1e-12),
            OutputRecord::estimate("pi_0", 0.464_8, 1.3e-4).with("seed", 7).with("t_max", 1e6),
            OutputRecord {
                quantity: "a_40".into(),
                value: Value::Integer("123456789012345678901234567890".into()),
                err_or_se: 0.0,
                method: Method::ClosedForm,
                metadata: BTreeMap::new(),
            },
            OutputRecord::real("whole", 3.0, 0.0, Method::TruncatedSolve),
        ]
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.682_725_075_939_1), 0.682_725_075_939);
        assert_eq!(round_sig_up(1.000_000_000_001_1), 1.000_000_000_01);
        assert_eq!(round_sig_up(2.5e-13), 2.5e-13);
        assert_eq!(round_sig_up(0.0), 0.0);
    }

    #[test]
    fn real_records_cover_their_own_rounding() {
        let r = OutputRecord::real("x", 0.123_456_789_012_34, 0.0, Method::ClosedForm);
        let Value::Real(v) = r.value else { panic!() };
        assert!((v - 0.123_456_789_012_34).abs() <= r.err_or_se);
    }

    #[test]
    fn json_round_trip() {
        let mut buf = Vec::new();
        write_records(&mut buf, Format::Json, &sample()).unwrap();
        assert_eq!(parse_json(std::str::from_utf8(&buf).unwrap()).unwrap(), sample());
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_records(&mut buf, Format::Csv, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("quantity,value,err_or_se,method,metadata"));
        assert_eq!(parse_csv(&text).unwrap(), sample());
    }

    #[test]
    fn plain_has_a_plus_minus_column() {
        let mut buf = Vec::new();
        write_records(&mut buf, Format::Plain, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.contains(" ± ")));
    }

    proptest! {
        #[test]
        fn rounded_up_errors_dominate(x in 0.0f64..1e6, scale in -30i32..5) {
            let e = x * 10f64.powi(scale);
            prop_assert!(round_sig_up(e) >= e);
            prop_assert!(round_sig_up(e) <= e * (1.0 + 2e-11) + f64::MIN_POSITIVE);
        }

        #[test]
        fn any_real_round_trips(v in -1e12f64..1e12, e in 0.0f64..1.0) {
            let recs = vec![OutputRecord::real("q", v, e, Method::ClosedForm)];
            let mut buf = Vec::new();
            write_records(&mut buf, Format::Csv, &recs).unwrap();
            prop_assert_eq!(parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), recs.clone());
            let mut buf = Vec::new();
            write_records(&mut buf, Format::Json, &recs).unwrap();
            prop_assert_eq!(parse_json(std::str::from_utf8(&buf).unwrap()).unwrap(), recs);
        }
    }
}
