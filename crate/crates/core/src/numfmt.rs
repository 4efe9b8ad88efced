//! Float formatting shared by every emitted table.

/// Significant digits kept in emitted files.
pub const SIG_DIGITS: usize = 10;

/// Rounds to `digits` significant digits; non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Shortest decimal form of `x` rounded to [`SIG_DIGITS`].
pub fn fmt(x: f64) -> String {
    let r = round_sig(x, SIG_DIGITS);
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(fmt(369.2), "369.2");
        assert_eq!(fmt(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt(-0.0), "0");
        assert_eq!(round_sig(123456789012.0, 10), 123456789000.0);
        assert!(round_sig(f64::NAN, 10).is_nan());
    }
}
