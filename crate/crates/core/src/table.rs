//! Plain-text table output shared by the CSV emitters.

use std::io::{self, Write};

/// Formats `x` with 12 significant digits in the style of C's `%.12g`:
/// fixed notation for decimal exponents in `-4..12`, scientific otherwise,
/// trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes one comma-separated, newline-terminated row.
pub fn write_row<W: Write, S: AsRef<str>>(w: &mut W, fields: &[S]) -> io::Result<()> {
    let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
    writeln!(w, "{}", line.join(","))
}

#[cfg(test)]
mod tests {
    use super::format_float;

    #[test]
    fn matches_printf_g12() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(2.0 / 9.0), "0.222222222222");
        assert_eq!(format_float(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(format_float(2.5e-9), "2.5e-09");
        assert_eq!(format_float(1.0e-4), "0.0001");
        assert_eq!(format_float(1.0e-5), "1e-05");
        assert_eq!(format_float(123456789012.0), "123456789012");
        assert_eq!(format_float(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_float(0.999_999_999_999_9), "1");
        assert_eq!(format_float(3.333333333333e-9), "3.33333333333e-09");
    }
}
