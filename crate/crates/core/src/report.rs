//! Output plumbing: compact JSON with spaced separators, and CSV rows.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

/// Like `serde_json`'s compact output but with `": "` and `", "`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SpacedFormatter;

impl Formatter for SpacedFormatter {
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

/// One-line JSON. Non-finite floats come out as `null`.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SpacedFormatter);
    v.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Rounds to `digits` decimals for display.
pub fn round_to(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

/// Rows to CSV text with `\n` terminators. The header goes first when given.
pub fn to_csv(header: Option<&[&str]>, rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("in-memory write");
    }
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

/// Shortest round-trip formatting, locale independent.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        dim: f64,
        degenerate: bool,
        v: [i64; 2],
    }

    #[test]
    fn spaced_json() {
        let s = to_json(&Sample { dim: round_to(4.0 / 3.0, 10), degenerate: false, v: [1, 2] });
        assert_eq!(s, r#"{"dim": 1.3333333333, "degenerate": false, "v": [1, 2]}"#);
    }

    #[test]
    fn csv_rows() {
        let s = to_csv(Some(&["a", "b"]), &[vec!["1".into(), num(0.5)]]);
        assert_eq!(s, "a,b\n1,0.5\n");
    }
}
