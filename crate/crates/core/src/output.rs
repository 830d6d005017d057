//! Number formatting shared by the CSV writers.

/// `x` rounded to 15 significant digits, printed in shortest round-trip form.
pub fn sig15(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    // Normalize -0 so reruns and sign flips in dust compare byte-for-byte.
    if rounded == 0.0 {
        return "0".into();
    }
    if (1e-5..1e16).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig15;

    #[test]
    fn rounding() {
        assert_eq!(sig15(0.1 + 0.2), "0.3");
        assert_eq!(sig15(1.0), "1");
        assert_eq!(sig15(-0.0), "0");
        assert_eq!(sig15(123456789.123456789), "123456789.123457");
        assert_eq!(sig15(1.5e-20), "1.5e-20");
    }
}
