//! Nine-significant-digit number rendering shared by every text output.

/// Renders `x` with at most nine significant digits, trailing zeros trimmed.
/// Magnitudes outside `[1e-5, 1e15)` use exponent notation.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

/// `x` rounded to nine significant digits, for serializers that print the
/// shortest round-trip form of a float.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        sig9(x).parse().expect("sig9 output parses")
    } else {
        x
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nine_digits() {
        assert_eq!(sig9(100.0), "100");
        assert_eq!(sig9(std::f64::consts::LN_2), "0.693147181");
        assert_eq!(sig9(-1.5), "-1.5");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(9.999999999), "10");
        assert_eq!(sig9(1.0e-7), "1e-7");
        assert_eq!(sig9(2.5e20), "2.5e20");
        assert_eq!(sig9(0.00012345678912), "0.000123456789");
        assert_eq!(sig9(f64::NAN), "NaN");
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
    }
}
