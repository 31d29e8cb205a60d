//! Deterministic report serialization: JSON with fixed key order and fixed
//! 17-significant-digit float formatting, and CSV with shortest round-trip
//! decimals.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use slantgeom::audit::InequalityRow;

/// Writes every f64 as `{:.16e}` (17 significant digits) so identical
/// reports are byte-identical across runs.
struct SciFloatFormatter;

impl Formatter for SciFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any report to deterministic JSON (struct key order, scientific
/// floats, trailing newline).
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFloatFormatter);
    value.serialize(&mut ser).expect("report serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("reports are UTF-8")
}

/// Per-point inequality table: parameter coordinates, both sides of the
/// bound, the slack, the slant angle, and both warp values.
pub fn inequality_csv(param_names: &[String], rows: &[InequalityRow]) -> String {
    let mut out = String::new();
    for name in param_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("lhs,rhs,slack,theta,f,sigma\n");
    for row in rows {
        for c in &row.point {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.lhs, row.rhs, row.slack, row.theta, row.warp_f, row.warp_sigma
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        a: f64,
        b: Vec<f64>,
        name: String,
    }

    #[test]
    fn floats_use_fixed_scientific_form() {
        let s = Sample {
            a: 1.0,
            b: vec![0.5, 19.0 / 27.0],
            name: "x".into(),
        };
        let json = to_json(&s);
        assert!(json.contains("1.0000000000000000e0"));
        assert!(json.contains("5.0000000000000000e-1"));
        assert!(json.contains("7.0370370370370372e-1"));
        assert!(json.ends_with('\n'));
    }

    #[test]
    fn csv_uses_shortest_round_trip() {
        let rows = vec![InequalityRow {
            point: vec![1.0, 0.1],
            lhs: 1.5555555555555556,
            rhs: 0.7037037037037037,
            slack: 0.8518518518518519,
            theta: 1.2309594173407747,
            warp_f: 2f64.sqrt(),
            warp_sigma: 3f64.sqrt(),
        }];
        let csv = inequality_csv(&["u".into(), "v".into()], &rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "u,v,lhs,rhs,slack,theta,f,sigma");
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,0.1,"));
        // every numeric field parses back to the exact f64
        let fields: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[3], 0.7037037037037037);
        assert_eq!(fields[6], 2f64.sqrt());
    }
}
