//! Number formatting shared by the text and export formats.

/// Shortest decimal string that parses back to exactly `v`, in plain or
/// exponent notation, whichever is shorter (ties go to plain).
pub fn format_exact(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let plain = format!("{v}");
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

/// Rounds to `digits` significant decimal digits. Non-finite values and zero
/// pass through unchanged.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    let digits = digits.max(1);
    format!("{:.*e}", digits - 1, v).parse().unwrap_or(v)
}

/// `v` rounded to `digits` significant digits and printed with
/// [`format_exact`].
pub fn format_sig(v: f64, digits: usize) -> String {
    format_exact(round_sig(v, digits))
}
