//! Deterministic text formatting shared by the CSV and JSON writers.

use std::fmt::Write as _;

/// 17 significant digits in scientific notation, locale independent.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV line (no trailing newline) from already formatted cells.
pub fn csv_line<S: AsRef<str>>(cells: &[S]) -> String {
    let mut out = String::new();
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(c.as_ref());
    }
    out
}

/// A full CSV document: header line followed by numeric rows.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = csv_line(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        let _ = writeln!(out, "{}", csv_line(&cells));
    }
    out
}
