/// `x` with 12 significant digits in the style of C's `%.12g`.
pub fn sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let m = trim(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn sig_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), sig)
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn matches_percent_g() {
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(0.5), "0.5");
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig(-12.25), "-12.25");
        assert_eq!(sig(1e-5), "1e-05");
        assert_eq!(sig(0.0001234), "0.0001234");
        assert_eq!(sig(1234567890123.0), "1.23456789012e+12");
        assert_eq!(sig(999999999999.5), "1e+12");
        assert_eq!(sig(0.1 + 0.2), "0.3");
    }
}
