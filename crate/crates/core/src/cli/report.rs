//! Report serialization. Floats are written with 17 significant digits so
//! every value round-trips exactly and reports are byte-stable.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SCHEMA_VERSION: u32 = 1;

/// `d.dddddddddddddddde±x`, 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with fixed-precision floats. Non-finite values become `null`.
struct FixedPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FixedPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report values serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// One CSV row: `name, lower, mean, upper, quad_error, verified`. Missing
/// values are left empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub name: String,
    pub lower: Option<f64>,
    pub mean: Option<f64>,
    pub upper: Option<f64>,
    pub quad_error: Option<f64>,
    pub verified: bool,
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    w.write_record(["name", "lower", "mean", "upper", "quad_error", "verified"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.name.clone(),
            cell(r.lower),
            cell(r.mean),
            cell(r.upper),
            cell(r.quad_error),
            r.verified.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json(&json!({"a": 2.0 / 3.0, "b": 0.5, "n": 3, "bad": f64::NAN}));
        assert!(s.contains("\"a\": 6.6666666666666663e-1"), "{s}");
        assert!(s.contains("\"b\": 5.0000000000000000e-1"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap(), 2.0 / 3.0);
        assert!(back["bad"].is_null());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![CsvRow {
            name: "x".into(),
            lower: Some(0.25),
            mean: None,
            upper: Some(1.0),
            quad_error: Some(0.0),
            verified: true,
        }];
        let s = to_csv(&rows);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "name,lower,mean,upper,quad_error,verified"
        );
        assert_eq!(
            lines.next().unwrap(),
            "x,2.5000000000000000e-1,,1.0000000000000000e0,0.0000000000000000e0,true"
        );
    }
}
