//! File formats: path CSV, report CSVs, and float text that round-trips.

use std::fs;
use std::path::Path;

use chenfliess_core::expansion::{ExpansionReport, ScalingReport};
use chenfliess_core::path::{Interpolation, SampledPath};
use chenfliess_core::polynomial::PolynomialFunctional;
use chenfliess_core::word::MultiIndex;

use crate::{CliError, Result};

/// 17 significant digits: parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Path CSV: header `t,x1,...,xe`, one row per grid node.
pub fn path_to_csv(path: &SampledPath) -> String {
    let mut out = String::from("t");
    for c in 1..=path.dim() {
        out.push_str(&format!(",x{c}"));
    }
    out.push('\n');
    for j in 0..path.len() {
        out.push_str(&fmt_f64(path.times()[j]));
        for v in path.row(j) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses the path CSV format; interpolation defaults to piecewise-linear.
pub fn path_from_csv(text: &str, interp: Interpolation) -> Result<SampledPath> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::new("empty path CSV"))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"t") || cols.len() < 2 {
        return Err(CliError::new(format!(
            "path CSV header must be t,x1,...,xe, got `{header}`"
        )));
    }
    let dim = cols.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(CliError::new(format!(
                "line {}: expected {} fields, got {}",
                lineno + 1,
                dim + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::new(format!("line {}: {e}", lineno + 1)))
        };
        times.push(parse(fields[0])?);
        for f in &fields[1..] {
            values.push(parse(f)?);
        }
    }
    SampledPath::new(times, values, dim, interp).map_err(CliError::from)
}

/// Expansion CSV: `word,coefficient,integral,product` in canonical word
/// order.
pub fn expansion_to_csv(report: &ExpansionReport) -> String {
    let mut out = String::from("word,coefficient,integral,product\n");
    for (k, word) in report.words.iter().enumerate() {
        out.push_str(&format!(
            "{word},{},{},{}\n",
            fmt_f64(report.coefficients[k]),
            fmt_f64(report.integrals[k]),
            fmt_f64(report.coefficients[k] * report.integrals[k]),
        ));
    }
    out
}

/// Signature CSV: `word,value` in canonical word order.
pub fn signature_to_csv(entries: &[(MultiIndex, f64)]) -> String {
    let mut out = String::from("word,value\n");
    for (word, value) in entries {
        out.push_str(&format!("{word},{}\n", fmt_f64(*value)));
    }
    out
}

/// Scaling CSV: one row per horizon.
pub fn scaling_to_csv(report: &ScalingReport) -> String {
    let mut out = String::from("t,rms,ci_halfwidth\n");
    for (k, t) in report.t_values.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(*t),
            fmt_f64(report.rms[k]),
            fmt_f64(report.ci_halfwidth[k]),
        ));
    }
    out
}

/// Fit error-curve CSV.
pub fn fit_curve_to_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("N,train_sup_error,holdout_sup_error\n");
    for (level, train, holdout) in rows {
        out.push_str(&format!(
            "{level},{},{}\n",
            fmt_f64(*train),
            fmt_f64(*holdout)
        ));
    }
    out
}

/// Fitted coefficients CSV: `word,coefficient`.
pub fn coefficients_to_csv(poly: &PolynomialFunctional) -> String {
    let mut out = String::from("word,coefficient\n");
    for (word, p) in poly.coefficients() {
        out.push_str(&format!("{word},{}\n", fmt_f64(*p)));
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::new(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::new(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips_exactly() {
        for &x in &[
            0.0,
            1.0,
            -1.5,
            0.1,
            core::f64::consts::PI,
            1.2345678901234567e-12,
            -9.87654321e300,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn path_csv_round_trips() {
        let p = SampledPath::new(
            vec![0.0, 0.25, 1.0],
            vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6],
            2,
            Interpolation::Linear,
        )
        .unwrap();
        let text = path_to_csv(&p);
        assert!(text.starts_with("t,x1,x2\n"));
        let back = path_from_csv(&text, Interpolation::Linear).unwrap();
        assert_eq!(back.times(), p.times());
        assert_eq!(back.values(), p.values());
    }

    #[test]
    fn path_csv_rejects_malformed_input() {
        assert!(path_from_csv("", Interpolation::Linear).is_err());
        assert!(path_from_csv("a,b\n1,2\n", Interpolation::Linear).is_err());
        assert!(path_from_csv("t,x1\n0.0\n", Interpolation::Linear).is_err());
        assert!(path_from_csv("t,x1\n0.0,zzz\n", Interpolation::Linear).is_err());
    }
}
