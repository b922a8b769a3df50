//! Small shared helpers.

use sha2::{Digest, Sha256};

/// Sign function with `sign(0) = 0`.
///
/// The zero convention makes the two-relay cancellation of the
/// energy-saving law and the initial action at `sigma = sigma(0)`
/// well-defined.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Clamp `x` to the symmetric interval `[-bound, bound]`.
pub fn clamp_abs(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// Format a float with 12 significant digits for CSV emission.
///
/// Uses exponent notation, which is locale independent and round-trips
/// through standard parsers.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{:.11e}", x)
    }
}

/// Hex SHA-256 digest of a serialisable value's canonical JSON form.
pub fn config_digest<T: serde::Serialize>(value: &T) -> crate::Result<String> {
    let json = serde_json::to_string(value)?;
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}
