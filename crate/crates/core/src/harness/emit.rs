//! Byte-stable JSON and CSV output.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::HarnessError;
use crate::walk::WalkRun;

/// `x` with 12 significant digits, in plain decimal notation when the
/// exponent is moderate; trailing zeros are trimmed.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-6..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("round trip");
        let mut s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            let t = s.trim_end_matches('0');
            s = if t.ends_with('.') { format!("{t}0") } else { t.to_string() };
        } else {
            s.push_str(".0");
        }
        s
    } else {
        let m = mantissa.trim_end_matches('0');
        let m = if m.ends_with('.') { format!("{m}0") } else { m.to_string() };
        format!("{m}e{exp}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and fixed float formatting.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

/// One-line form used for registry entries.
pub fn compact_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(&serde_json::to_value(value).expect("manifest serializes")).expect("value serializes")
}

pub const CSV_HEADER: &str = "trial,n,d,s_lower,clt_stat";

/// One row per trial and checkpoint; `clt_stat` is `(d - nλ)/√n`.
pub fn walk_csv(run: &WalkRun, lambda: f64) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for (t, rec) in run.trials.iter().enumerate() {
        for (k, &n) in run.checkpoints.iter().enumerate() {
            let stat = if n == 0 {
                0.0
            } else {
                (rec.d[k] as f64 - n as f64 * lambda) / (n as f64).sqrt()
            };
            w.write_record([t.to_string(), n.to_string(), rec.d[k].to_string(), rec.s_lower[k].to_string(), format_float(stat)])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii rows")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Writes a report (JSON) or a walk run (CSV, centered at `lambda`).
pub fn emit_json<T: Serialize + ?Sized>(report: &T, path: &Path) -> Result<(), HarnessError> {
    write_file(path, &canonical_json(report))
}

pub fn emit_csv(run: &WalkRun, lambda: f64, path: &Path) -> Result<(), HarnessError> {
    write_file(path, &walk_csv(run, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(2.0 / 3.0 * 1000.0), "666.666666667");
        assert_eq!(format_float(-1.25e-9), "-1.25e-9");
        assert_eq!(format_float(3.0), "3.0");
        assert_eq!(format_float(123456789012345.0), "123456789012000.0");
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn sorted_and_stable() {
        let v = json!({"b": [1, 2.5], "a": {"z": null, "c": true}, "s": "x\"y"});
        let a = canonical_json(&v);
        assert_eq!(a, canonical_json(&v));
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
        assert!(a.find("\"c\"").unwrap() < a.find("\"z\"").unwrap());
        let back: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(back, v);
        assert_eq!(compact_json(&json!({"k": [1, 2], "j": ": "})), "{\"j\":\": \",\"k\":[1,2]}");
    }
}
