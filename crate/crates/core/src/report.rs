//! JSON records for one-sided statistical inequality checks.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Standard errors a check must clear before it is flagged.
pub const GUARD_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdErrs {
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of checking `lhs ≤ rhs` from noisy estimates of both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub std_errs: StdErrs,
    /// `(rhs + 3·SE_rhs) − (lhs − 3·SE_lhs)`; negative means flagged.
    pub margin: f64,
    pub flag: bool,
    pub parameters: serde_json::Value,
}

impl InequalityReport {
    /// Flags only when `lhs − 3·SE_lhs > rhs + 3·SE_rhs`.
    pub fn upper_bound(
        check: impl Into<String>,
        (lhs, lhs_se): (f64, f64),
        (rhs, rhs_se): (f64, f64),
        parameters: serde_json::Value,
    ) -> Self {
        let margin = (rhs + GUARD_SIGMAS * rhs_se) - (lhs - GUARD_SIGMAS * lhs_se);
        InequalityReport {
            check: check.into(),
            lhs,
            rhs,
            std_errs: StdErrs { lhs: lhs_se, rhs: rhs_se },
            margin,
            flag: !(margin >= 0.0),
            parameters,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes any serializable record as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_band_decides_the_flag() {
        let ok = InequalityReport::upper_bound("x", (1.0, 0.1), (0.8, 0.0), serde_json::Value::Null);
        assert!(!ok.flag);
        assert!((ok.margin - 0.1).abs() < 1e-12);
        let bad = InequalityReport::upper_bound("x", (1.0, 0.01), (0.8, 0.01), serde_json::Value::Null);
        assert!(bad.flag);
        let nan = InequalityReport::upper_bound("x", (f64::NAN, 0.0), (1.0, 0.0), serde_json::Value::Null);
        assert!(nan.flag);
    }

    #[test]
    fn json_shape() {
        let r = InequalityReport::upper_bound("levy", (0.2, 0.01), (1.2, 0.02), serde_json::json!({"r": 0.5}));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["lhs", "rhs", "std_errs", "margin", "flag", "parameters"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: InequalityReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
