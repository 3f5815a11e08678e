//! Deterministic CSV artifacts: one `#` line of JSON metadata, a header row,
//! then data rows with 17 significant digits. Files are written through a
//! temporary file in the target directory and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::states::{ComplexField2D, RealField2D};
use crate::wigner::NegativityCurve;

pub const TOOL_NAME: &str = "pqovs";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scientific notation with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn meta_line(meta: &BTreeMap<String, Value>, extra: &BTreeMap<String, Value>) -> String {
    let mut all = meta.clone();
    all.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
    all.insert("tool".into(), json!(TOOL_NAME));
    all.insert("version".into(), json!(TOOL_VERSION));
    // BTreeMap keys serialise in sorted order, so the line is reproducible.
    format!(
        "# {}\n",
        serde_json::to_string(&all).expect("metadata is valid JSON")
    )
}

pub fn complex_field_csv(field: &ComplexField2D, extra: &BTreeMap<String, Value>) -> String {
    let mut out = meta_line(&field.meta, extra);
    let _ = writeln!(out, "{},{},re,im", field.axis1.label, field.axis2.label);
    let xs = field.axis1.values();
    for (j, y) in field.axis2.values().into_iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let v = field.get(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(x),
                fmt_num(y),
                fmt_num(v.re),
                fmt_num(v.im)
            );
        }
    }
    out
}

pub fn real_field_csv(field: &RealField2D, extra: &BTreeMap<String, Value>) -> String {
    let mut out = meta_line(&field.meta, extra);
    let _ = writeln!(out, "{},{},value", field.axis1.label, field.axis2.label);
    let xs = field.axis1.values();
    for (j, y) in field.axis2.values().into_iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_num(x),
                fmt_num(y),
                fmt_num(field.get(i, j))
            );
        }
    }
    out
}

/// Rows `q,n_value`; failed entries are written as `nan` and listed in the
/// metadata.
pub fn curve_csv(curve: &NegativityCurve, extra: &BTreeMap<String, Value>) -> String {
    let mut meta = BTreeMap::new();
    meta.insert("alpha".to_string(), json!(curve.alpha));
    meta.insert("settings".to_string(), curve.settings.clone());
    if let Some(e) = curve.entries.first() {
        meta.insert("method".to_string(), json!(e.method.as_str()));
    }
    let refinement: BTreeMap<String, Value> = curve
        .entries
        .iter()
        .filter_map(|e| {
            e.refinement_change
                .map(|c| (e.charge.to_string(), json!(c)))
        })
        .collect();
    meta.insert("refinement_change".to_string(), json!(refinement));
    let failures: BTreeMap<String, Value> = curve
        .entries
        .iter()
        .filter_map(|e| e.error.as_ref().map(|m| (e.charge.to_string(), json!(m))))
        .collect();
    meta.insert("failures".to_string(), json!(failures));
    let mut out = meta_line(&meta, extra);
    out.push_str("q,n_value\n");
    for e in &curve.entries {
        let v = e.n_value.map(fmt_num).unwrap_or_else(|| "nan".to_string());
        let _ = writeln!(out, "{},{}", e.charge, v);
    }
    out
}

/// Writes `contents` to `path` atomically: nothing is left behind on failure.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{Axis, Field2D};
    use num_complex::Complex64;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn complex_layout() {
        let f: ComplexField2D = Field2D::try_fill(
            Axis::new("x", 0.0, 1.0, 2).unwrap(),
            Axis::new("y", 0.0, 1.0, 3).unwrap(),
            |x, y| Ok(Complex64::new(x, y)),
        )
        .unwrap();
        let csv = complex_field_csv(&f, &BTreeMap::new());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2 + 6);
        assert!(lines[0].starts_with("# {"));
        let meta: Value = serde_json::from_str(&lines[0][2..]).unwrap();
        assert_eq!(meta["tool"], "pqovs");
        assert_eq!(lines[1], "x,y,re,im");
        // axis2 outer, axis1 inner
        assert!(lines[3].starts_with("1.0000000000000000e0,0.0000000000000000e0,"));
        assert!(lines[4].starts_with("0.0000000000000000e0,5.0000000000000000e-1,"));
    }

    #[test]
    fn atomic_write_and_failure() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, "hello\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "hello\n");
        let bad = dir.path().join("missing").join("b.csv");
        let e = write_atomic(&bad, "x").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("missing"));
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }
}
