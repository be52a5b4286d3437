//! Fixed-precision number output.

/// Significant digits used in every CSV and JSON output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite values
/// pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal form of `round_sig(x)`.
pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Rounds every number inside a JSON value in place.
pub fn round_json(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(80.70125), "80.70125");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn json_rounding_leaves_integers() {
        let mut v = serde_json::json!({"a": 2.0_f64 / 3.0, "n": 7, "xs": [0.1234567890123456]});
        round_json(&mut v);
        assert_eq!(v["a"].as_f64().unwrap(), 0.666666666667);
        assert_eq!(v["n"].as_u64().unwrap(), 7);
        assert_eq!(v["xs"][0].as_f64().unwrap(), 0.123456789012);
    }
}
