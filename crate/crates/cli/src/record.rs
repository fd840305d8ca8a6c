//! Line-delimited JSON run records.

use std::io::Write;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use weylab_core::num_bigint::BigUint;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: String,
    pub params: Value,
    pub result: Value,
    pub elapsed_ms: f64,
    pub seed: u64,
    pub version: String,
}

impl RunRecord {
    pub fn new(subcommand: &str, params: Value, result: Value, elapsed_ms: f64, seed: u64) -> Self {
        RunRecord {
            subcommand: subcommand.into(),
            params,
            result,
            elapsed_ms,
            seed,
            version: ARTIFACT_VERSION.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Writes each record as one line with a single `write_all`.
pub fn write_records<W: Write + ?Sized>(out: &mut W, records: &[RunRecord]) -> std::io::Result<()> {
    for r in records {
        let mut line = r.to_line();
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// A big count as a JSON integer when it fits in `u64`, otherwise as a decimal string.
pub fn big_json(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => Value::from(v),
        None => Value::from(n.to_string()),
    }
}

/// `{num, den}` for a rational.
pub fn rational_json(r: &weylab_core::num_rational::BigRational) -> Value {
    let (num, den) = weylab_core::kprofile::rational_parts(r);
    serde_json::json!({ "num": num, "den": den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip() {
        let r = RunRecord::new("sigma", json!({"profile": [3, 1]}), json!({"x": 1}), 0.5, 9);
        let line = r.to_line();
        assert!(!line.contains('\n'));
        let back: RunRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn big_counts() {
        assert_eq!(big_json(&BigUint::from(190u32)), json!(190));
        let huge = BigUint::from(u64::MAX) * 3u32;
        assert_eq!(big_json(&huge), json!(huge.to_string()));
    }
}
