//! Fixed-precision float text for CSV output.

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped,
/// scientific notation for very small or very large magnitudes.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
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
    use super::g17;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.7 + 1e-9, "0.70000000099999993"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (0.0001, "0.0001"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(g17(x), want, "{x}");
        }
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 0.931270695591156, -1e-300, 6.02e23, 0.999999999] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
