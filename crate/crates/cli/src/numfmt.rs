//! Fixed 17-significant-digit number output for JSON and CSV.

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` in scientific notation with 17 significant digits; enough to
/// round-trip every finite `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float that serializes to JSON with exactly 17 significant digits
/// (non-finite values become `null`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// `[re, im]` pair.
pub fn pair(z: Complex64) -> [Num; 2] {
    [Num(z.re), Num(z.im)]
}
