//! Deterministic plain-decimal float formatting for report files.

/// Formats `x` with at most `digits` significant digits in plain decimal
/// notation, trimming trailing zeros. Identical inputs give identical
/// bytes, so re-running a report reproduces its files exactly.
pub fn significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }

    let formatted = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp_str) = formatted.split_once('e').expect("exponential format");
    let exp: i32 = exp_str.parse().expect("exponent");
    if !(-15..15).contains(&exp) {
        // Plain decimal would be a wall of zeros; keep the e-notation but
        // trim the mantissa's trailing zeros.
        let mut m = mantissa.to_string();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        return format!("{m}e{exp}");
    }
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let mut body = if exp >= digits as i32 - 1 {
        // Pure integer, possibly with trailing zeros.
        let zeros = exp as usize - (digits - 1);
        format!("{digits_only}{}", "0".repeat(zeros))
    } else if exp >= 0 {
        let split = exp as usize + 1;
        let (int_part, frac_part) = digits_only.split_at(split);
        format!("{int_part}.{frac_part}")
    } else {
        let zeros = (-exp - 1) as usize;
        format!("0.{}{digits_only}", "0".repeat(zeros))
    };

    if body.contains('.') {
        while body.ends_with('0') {
            body.pop();
        }
        if body.ends_with('.') {
            body.pop();
        }
    }
    if body == "0" {
        // Rounded all the way down; sign carries no information.
        return body;
    }
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// The report-file default: 12 significant digits.
pub fn sig12(x: f64) -> String {
    significant(x, 12)
}
