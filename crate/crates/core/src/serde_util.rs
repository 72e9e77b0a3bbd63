//! Serde helpers: complex numbers travel as `[re, im]` pairs in every JSON
//! form of this crate.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap {
        #[serde(with = "complex_pair")]
        z: Complex64,
    }

    #[test]
    fn complex_as_pair() {
        let w = Wrap { z: Complex64::new(1.5, -2.0) };
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"z":[1.5,-2.0]}"#);
        let back: Wrap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.z, w.z);
    }
}
