//! Stable number formatting for command output.

/// 12 significant digits; fixed notation for exponents in [-5, 12), scientific otherwise,
/// trailing zeros trimmed. Zero of either sign prints as "0".
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mant))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Exact form p/q or p/(q√3) with q ≤ 12 when `x` is within 1e-9 of one.
pub fn exact_form(x: f64) -> Option<String> {
    let frac = |p: f64, q: u32, root: bool| {
        let p = p as i64;
        match (q, root) {
            (1, false) => format!("{p}"),
            (_, false) => format!("{p}/{q}"),
            (1, true) => format!("{p}/√3"),
            (_, true) => format!("{p}/({q}√3)"),
        }
    };
    for root in [false, true] {
        for q in 1..=12u32 {
            let p = x * q as f64 * if root { 3f64.sqrt() } else { 1.0 };
            if (p - p.round()).abs() < 1e-9 && p.round() != 0.0 {
                return Some(frac(p.round(), q, root));
            }
        }
    }
    None
}

/// "-1/√3 X_L + 1/3 Z_L - 1/3 I" from (coefficient, operator) pairs; zero coefficients are
/// dropped and unit magnitudes print without a factor.
pub fn symbolic_sum(parts: &[(f64, &str)]) -> String {
    let mut out = String::new();
    for &(x, op) in parts {
        if x.abs() < 1e-12 {
            continue;
        }
        let mag = exact_form(x.abs()).unwrap_or_else(|| fmt_num(x.abs()));
        let mag = if mag == "1" {
            String::new()
        } else {
            format!("{mag} ")
        };
        let sign = match (out.is_empty(), x < 0.0) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        out.push_str(&format!("{sign}{mag}{op}"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(4.0), "4");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_num(1234567.0), "1234567");
        assert_eq!(fmt_num(6.4e-7), "6.4e-7");
        assert_eq!(fmt_num(7.0e12), "7e12");
        assert_eq!(fmt_num(0.99999999999999), "1");
    }

    #[test]
    fn exact_forms() {
        assert_eq!(exact_form(2.0 / 3.0).as_deref(), Some("2/3"));
        assert_eq!(exact_form(1.0 / 3f64.sqrt()).as_deref(), Some("1/√3"));
        assert_eq!(
            exact_form(2.0 / (3.0 * 3f64.sqrt())).as_deref(),
            Some("2/(3√3)")
        );
        assert_eq!(exact_form(0.123456789), None);
        assert_eq!(
            symbolic_sum(&[
                (-1.0 / 3f64.sqrt(), "X_L"),
                (0.0, "Y_L"),
                (1.0 / 3.0, "Z_L"),
                (-1.0 / 3.0, "I")
            ]),
            "-1/√3 X_L + 1/3 Z_L - 1/3 I"
        );
    }
}
