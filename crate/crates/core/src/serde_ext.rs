//! Serialization helpers for values that may be infinite or undefined.

use serde::Serializer;

/// Finite values as numbers, ±∞ as the strings `"inf"`/`"-inf"`, NaN as null.
pub fn f64_marker<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[cfg(test)]
mod tests {
    #[derive(serde::Serialize)]
    struct W(#[serde(serialize_with = "super::f64_marker")] f64);

    #[test]
    fn markers() {
        assert_eq!(serde_json::to_string(&W(1.5)).unwrap(), "1.5");
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&W(f64::NAN)).unwrap(), "null");
    }
}
