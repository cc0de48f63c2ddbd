//! Numeric rendering shared by the trace sink, the status printer and CSV.

/// Formats `x` like C's `%g` with `digits` significant digits: trailing
/// zeros are dropped and scientific notation is used for very large or
/// very small magnitudes. Infinities render as `Inf`/`-Inf`.
pub fn general(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent value");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Trace timestamps: six significant digits.
pub fn trace_time(t: f64) -> String {
    general(t, 6)
}

/// Status-line and message timestamps: fifteen significant digits.
pub fn long_time(t: f64) -> String {
    general(t, 15)
}

/// Shortest round-trip rendering, `Inf` for infinities.
pub fn exact(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "Inf".into() } else { "-Inf".into() }
    } else if x.is_nan() {
        "NA".into()
    } else {
        format!("{x}")
    }
}
