use num_complex::Complex64;

/// Parses `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    match s.split_once(',') {
        None => Ok(Complex64::new(parse(s)?, 0.0)),
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
