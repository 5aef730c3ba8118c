//! Shared report plumbing: version stamp, exponent serialization, JSON/CSV
//! emission.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serializes an exponent `p` as a JSON number, or `"inf"` for `p = inf`.
pub mod exponent {
    use super::*;

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => parse_exponent(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `"inf"`, `"infinity"` or a number.
pub fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("not an exponent: {s:?}")),
    }
}

/// Pretty JSON with a trailing newline. Field order follows struct
/// declaration order, so equal values give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// CSV text from a header and rows of already formatted cells.
pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Shortest round-trip formatting; non-finite values as `nan`/`inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
