//! Serde helpers for values that may be infinite.

/// `f64` written as a number, or as the string `"inf"` when infinite.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Wire::deserialize(d)? {
            Wire::Num(x) => Ok(x),
            Wire::Text(t) => crate::mixed_norm::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}
