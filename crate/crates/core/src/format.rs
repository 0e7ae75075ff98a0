//! Stable numeric formatting for exported files.

/// Round to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("scientific notation parses")
}

/// Shortest decimal text of `x` rounded to 6 significant digits.
pub fn sig6(x: f64) -> String {
    format!("{}", round_sig6(x))
}
