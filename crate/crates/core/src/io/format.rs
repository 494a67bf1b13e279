//! Text encoding of numbers shared by every CSV the crate writes.

use crate::linalg::C64;

/// Significant digits used for every written real.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style rendering: fixed notation for decimal exponents in
/// `[-4, 9)`, scientific otherwise, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
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

/// Real cells stay plain; complex cells become `a+bi` or `a-bi`.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        return format_number(z.re);
    }
    let im = format_number(z.im.abs());
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{im}i", format_number(z.re))
}

pub fn parse_real(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Accepts `a`, `bi`, `a+bi`, `a-bi` (also `j` for the imaginary unit).
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return parse_real(s).map(|re| C64::new(re, 0.0));
    };
    // The split point is the last sign not at the start and not part of an
    // exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, imag_part(&body[k..])?),
        None => (0.0, imag_part(body)?),
    };
    Some(C64::new(re, im))
}

fn imag_part(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (0.758_800_123_45, "0.758800123"),
            (123_456_789.0, "123456789"),
            (1_234_567_890.0, "1.23456789e+09"),
            (1e-5, "1e-05"),
            (1.5e-6, "1.5e-06"),
            (1.0 / 3.0, "0.333333333"),
            (-0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x}");
        }
    }

    #[test]
    fn complex_cells() {
        assert_eq!(parse_complex("1.5-2i"), Some(C64::new(1.5, -2.0)));
        assert_eq!(parse_complex("-1+i"), Some(C64::new(-1.0, 1.0)));
        assert_eq!(parse_complex("3"), Some(C64::new(3.0, 0.0)));
        assert_eq!(parse_complex("-2.5i"), Some(C64::new(0.0, -2.5)));
        assert_eq!(parse_complex("1e-3+2e+2i"), Some(C64::new(1e-3, 200.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+xi"), None);
        assert_eq!(format_complex(C64::new(1.5, -2.0)), "1.5-2i");
        assert_eq!(format_complex(C64::new(0.25, 0.0)), "0.25");
    }

    proptest! {
        #[test]
        fn real_round_trip_to_nine_digits(x in -1e12f64..1e12) {
            let back = parse_real(&format_number(x)).unwrap();
            prop_assert!((back - x).abs() <= 1e-8 * x.abs().max(1e-300));
        }

        #[test]
        fn complex_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let z = C64::new(re, im);
            let back = parse_complex(&format_complex(z)).unwrap();
            prop_assert!((back - z).norm() <= 1e-8 * z.norm().max(1e-300));
        }
    }
}
