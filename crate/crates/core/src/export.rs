//! Plain-text matrix dumps.

use std::fmt::Write as _;

use faer::Mat;

/// Dense CSV, one row per line, full round-trip precision.
pub fn dense_csv(m: &Mat<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// `row col value` lines (0-based) for entries with |value| > `tol`.
pub fn triplets(m: &Mat<f64>, tol: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.abs() > tol {
                let _ = writeln!(s, "{i} {j} {v:e}");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 0.5 } else { 0.0 });
        assert_eq!(dense_csv(&m), "5e-1,0e0\n0e0,5e-1\n");
        assert_eq!(triplets(&m, 0.0), "# 2 2\n0 0 5e-1\n1 1 5e-1\n");
    }
}
