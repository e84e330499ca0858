//! Number formatting shared by the file emitters.

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // Round first so the exponent reflects the rounded value (9.9999999996 -> 10).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Shortest decimal text that parses back to exactly `x`.
pub fn exact(x: f64) -> String {
    if x == 0.0 {
        // Drop the sign of negative zero.
        return "0".to_string();
    }
    let s = format!("{x:?}");
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
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
    fn sig_matches_printf_g() {
        assert_eq!(sig(1.0, 9), "1");
        assert_eq!(sig(3.55881271e9, 9), "3.55881271e9");
        assert_eq!(sig(0.123456789123, 9), "0.123456789");
        assert_eq!(sig(-49.0, 9), "-49");
        assert_eq!(sig(1.0e-7, 9), "1e-7");
        assert_eq!(sig(99999999.96, 9), "100000000");
        assert_eq!(sig(f64::INFINITY, 9), "inf");
    }

    #[test]
    fn exact_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0e-300, -7.25, 1e22] {
            assert_eq!(exact(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(exact(-0.0), "0");
        assert_eq!(exact(50.0), "50");
        assert_eq!(exact(-1.5e-7), "-1.5e-7");
    }
}
