//! Stable number formatting for emitted CSV/JSON/text artifacts.

/// Significant digits used for every number written to an output file.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits in the style of C's
/// `%.12g`, trimming trailing zeros.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..(SIG_DIGITS as i32)).contains(&exp) {
        let s = format!("{:.*e}", SIG_DIGITS - 1, x);
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit; that is harmless here
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_percent_g() {
        assert_eq!(sig(0.5), "0.5");
        assert_eq!(sig(-1.25), "-1.25");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(232.0), "232");
        assert_eq!(sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig(1.0e-7), "1e-7");
        assert_eq!(sig(6.02214076e23), "6.02214076e23");
        assert_eq!(sig(0.0), "0");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for &x in &[1.0 / 3.0, -std::f64::consts::E, 1234.56789012345, 9.87654321e-3] {
            let y: f64 = sig(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 1e-11, "{x} -> {y}");
        }
    }
}
