//! Result tables and the atomic artifact writer.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use martinlab_core::Estimate;

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    /// Scale parameter of the row (radius, distance, start point); `None`
    /// leaves the column empty.
    pub r: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl Row {
    pub fn estimate(quantity: impl Into<String>, r: Option<f64>, e: &Estimate) -> Self {
        Row {
            quantity: quantity.into(),
            r,
            mean: e.mean,
            stderr: e.stderr,
            n: e.n,
            seed: e.seed,
        }
    }

    /// A deterministic value.
    pub fn exact(quantity: impl Into<String>, r: Option<f64>, value: f64, seed: u64) -> Self {
        Row {
            quantity: quantity.into(),
            r,
            mean: value,
            stderr: 0.0,
            n: 0,
            seed,
        }
    }
}

/// 17 significant digits, `.` decimal, independent of locale.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv(rows: &[Row]) -> String {
    let mut s = String::from("quantity,r,mean,stderr,n,seed\n");
    for row in rows {
        let r = row.r.map(fmt_float).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{}",
            row.quantity,
            r,
            fmt_float(row.mean),
            fmt_float(row.stderr),
            row.n,
            row.seed
        )
        .expect("writing to a String");
    }
    s
}

/// Writes every file into a fresh sibling directory of `out` and renames it
/// into place, so that `out` holds either all artifacts or none. An existing
/// `out` is replaced.
pub fn write_atomic(out: &Path, files: &[(&str, String)]) -> io::Result<PathBuf> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let stem = out
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = tempfile::Builder::new().prefix(&format!(".{stem}.tmp")).tempdir_in(&parent)?;
    for (name, body) in files {
        fs::write(tmp.path().join(name), body)?;
    }
    let staged = tmp.keep();
    if out.exists() {
        let old = tempfile::Builder::new().prefix(&format!(".{stem}.old")).tempdir_in(&parent)?.keep();
        fs::remove_dir(&old)?;
        fs::rename(out, &old)?;
        if let Err(e) = fs::rename(&staged, out) {
            fs::rename(&old, out).ok();
            fs::remove_dir_all(&staged).ok();
            return Err(e);
        }
        fs::remove_dir_all(&old).ok();
    } else if let Err(e) = fs::rename(&staged, out) {
        fs::remove_dir_all(&staged).ok();
        return Err(e);
    }
    Ok(out.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.5e-300), "-2.5000000000000000e-300");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-310] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let rows = [Row::exact("a", Some(0.5), 1.0, 3), Row::exact("b", None, 2.0, 3)];
        let s = csv(&rows);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "quantity,r,mean,stderr,n,seed");
        assert_eq!(lines[1], "a,5.0000000000000000e-1,1.0000000000000000e0,0.0000000000000000e0,0,3");
        assert_eq!(lines[2], "b,,2.0000000000000000e0,0.0000000000000000e0,0,3");
    }
}
