//! Text formats: complex literals, CSV matrices, and the nested key/value
//! (TOML) ensemble configuration.
//!
//! Complex entries are written `a+bi` with `.` as the decimal separator, e.g.
//! `1.5`, `-2i`, `0.25-3e-2i`. Writers always emit 17 significant digits per
//! component so values round-trip bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::{DistributionSpec, EnsembleSpec, EntryLaw, Profile};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result, C64};

pub fn parse_complex(text: &str) -> Result<C64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("cannot parse complex number {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(C64::new(real(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        s => real(s),
    };
    match split {
        Some(k) => Ok(C64::new(real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// `a+bi` with 17 significant digits per component.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im.abs())
}

/// Float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serde adapter for complex fields: reads a number, an `a+bi` string, or a
/// `[re, im]` pair; writes the string form.
pub mod serde_complex {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Int(i64),
        Text(String),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if z.im == 0.0 {
            s.serialize_f64(z.re)
        } else {
            s.serialize_str(&format_complex(*z))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(C64::new(x, 0.0)),
            Repr::Int(x) => Ok(C64::new(x as f64, 0.0)),
            Repr::Pair([re, im]) => Ok(C64::new(re, im)),
            Repr::Text(t) => parse_complex(&t).map_err(D::Error::custom),
        }
    }
}

/// Reads a complex matrix, one row per line, comma separated.
pub fn read_matrix_csv(path: &Path) -> Result<ComplexMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_matrix_csv(path: &Path, m: &ComplexMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|&z| format_complex(z)))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

fn value_to_complex(v: &toml::Value) -> Result<C64> {
    match v {
        toml::Value::Integer(i) => Ok(C64::new(*i as f64, 0.0)),
        toml::Value::Float(x) => Ok(C64::new(*x, 0.0)),
        toml::Value::String(s) => parse_complex(s),
        other => Err(Error::Config(format!("expected a number, found {other}"))),
    }
}

/// Parses a shift or scale profile:
///
/// * a number or complex literal: every entry equals it;
/// * `"identity"`, `"identity*c"` or `"c*identity"`: `c` on the diagonal;
/// * an inline array of rows;
/// * a path ending in `.csv`, relative to `base_dir`.
pub fn profile_from_value(v: &toml::Value, base_dir: &Path) -> Result<Profile> {
    match v {
        toml::Value::Array(rows) => {
            let parsed = rows
                .iter()
                .map(|r| match r {
                    toml::Value::Array(cells) => cells.iter().map(value_to_complex).collect(),
                    other => Err(Error::Config(format!("matrix row must be an array, found {other}"))),
                })
                .collect::<Result<Vec<Vec<C64>>>>()?;
            Ok(Profile::Dense(ComplexMatrix::from_rows(&parsed)?))
        }
        toml::Value::String(s) => {
            let t = s.trim();
            if t.to_ascii_lowercase().ends_with(".csv") {
                let path = base_dir.join(t);
                return Ok(Profile::Dense(read_matrix_csv(&path)?));
            }
            let lower = t.to_ascii_lowercase();
            if lower == "identity" {
                return Ok(Profile::Identity(C64::new(1.0, 0.0)));
            }
            if let Some(c) = lower.strip_prefix("identity*") {
                return Ok(Profile::Identity(parse_complex(c)?));
            }
            if let Some(c) = lower.strip_suffix("*identity") {
                return Ok(Profile::Identity(parse_complex(c)?));
            }
            Ok(Profile::Constant(parse_complex(t)?))
        }
        other => Ok(Profile::Constant(value_to_complex(other)?)),
    }
}

fn default_shift() -> toml::Value {
    toml::Value::Float(0.0)
}

fn default_scale() -> toml::Value {
    toml::Value::Float(1.0)
}

fn default_b() -> f64 {
    0.5
}

fn default_k() -> f64 {
    2.0
}

/// Ensemble section of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Optional when an experiment supplies its own list of dimensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub dist: DistributionSpec,
    #[serde(default = "default_shift")]
    pub shift: toml::Value,
    #[serde(default = "default_scale")]
    pub scale: toml::Value,
    #[serde(default = "default_b")]
    pub declared_b: f64,
    #[serde(default = "default_k", rename = "declared_K")]
    pub declared_k: f64,
    /// Bounds `α ≤ σᵢⱼ ≤ β` checked in universality mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub base_seed: u64,
}

impl EnsembleConfig {
    /// Builds the ensemble at dimension `n` (or the configured one).
    pub fn to_spec(&self, n: Option<usize>, base_dir: &Path) -> Result<EnsembleSpec> {
        let n = n
            .or(self.n)
            .ok_or_else(|| Error::Config("ensemble dimension `n` is not set".into()))?;
        let shift = profile_from_value(&self.shift, base_dir)?;
        let scale = match profile_from_value(&self.scale, base_dir)? {
            Profile::Constant(c) => Profile::Constant(real_part(c)?),
            Profile::Identity(c) => Profile::Identity(real_part(c)?),
            Profile::Dense(m) => {
                m.as_slice().iter().try_for_each(|&c| real_part(c).map(|_| ()))?;
                Profile::Dense(m)
            }
        };
        let bounds = match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(Error::Config("set both `alpha` and `beta` or neither".into())),
        };
        let spec = EnsembleSpec {
            n,
            shift,
            scale,
            entry_law: EntryLaw::Uniform(self.dist.clone()),
            declared_b: self.declared_b,
            declared_k: self.declared_k,
            bounds,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn real_part(c: C64) -> Result<C64> {
    if c.im != 0.0 {
        return Err(Error::Config(format!("scale entries must be real, found {}", format_complex(c))));
    }
    Ok(c)
}

pub fn read_toml(path: &Path) -> Result<toml::Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse::<toml::Table>().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Applies `dotted.key=value`; the value is parsed as TOML, falling back to a string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override has an empty key: {assignment:?}")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::Config(format!("override key `{key}`: `{part}` is not a table"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Directory used to resolve relative paths inside a config file.
pub fn base_dir_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_complex_literals() {
        let cases = [
            ("1.5", C64::new(1.5, 0.0)),
            ("-2i", C64::new(0.0, -2.0)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("1+i", C64::new(1.0, 1.0)),
            ("0.25-3e-2i", C64::new(0.25, -0.03)),
            ("1e-3+2E+1i", C64::new(1e-3, 20.0)),
            (" 3 - 4i ", C64::new(3.0, -4.0)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
        assert!(parse_complex("1,5").is_err());
        assert!(parse_complex("").is_err());
    }

    proptest! {
        #[test]
        fn complex_format_round_trips(re in -1e300f64..1e300, im in -1e300f64..1e300) {
            let z = C64::new(re, im);
            let back = parse_complex(&format_complex(z)).unwrap();
            prop_assert_eq!(back.re.to_bits(), z.re.to_bits());
            prop_assert_eq!(back.im.to_bits(), z.im.to_bits());
        }
    }

    #[test]
    fn matrix_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = ComplexMatrix::from_fn(3, 2, |i, j| C64::new(i as f64 / 3.0, -(j as f64) * 0.1));
        write_matrix_csv(&path, &m).unwrap();
        assert_eq!(read_matrix_csv(&path).unwrap(), m);
    }

    #[test]
    fn profiles_from_values() {
        let dir = Path::new(".");
        let v: toml::Value = "identity*2".into();
        assert_eq!(profile_from_value(&v, dir).unwrap(), Profile::Identity(C64::new(2.0, 0.0)));
        let v = toml::Value::Float(1.0);
        assert_eq!(profile_from_value(&v, dir).unwrap(), Profile::Constant(C64::new(1.0, 0.0)));
        let v: toml::Value = "1+i".into();
        assert_eq!(profile_from_value(&v, dir).unwrap(), Profile::Constant(C64::new(1.0, 1.0)));
        let t: toml::Table = "m = [[1, \"i\"], [0, 2.5]]".parse().unwrap();
        match profile_from_value(&t["m"], dir).unwrap() {
            Profile::Dense(m) => assert_eq!(m[(0, 1)], C64::new(0.0, 1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_set_nested_keys() {
        let mut t: toml::Table = "trials = 5\n[x]\nn = 4".parse().unwrap();
        apply_override(&mut t, "trials=100").unwrap();
        apply_override(&mut t, "x.dist.kind=four_point_uniform").unwrap();
        assert_eq!(t["trials"].as_integer(), Some(100));
        assert_eq!(t["x"]["dist"]["kind"].as_str(), Some("four_point_uniform"));
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "trials.x=1").is_err());
    }

    #[test]
    fn ensemble_config_from_toml() {
        let text = r#"
            n = 3
            dist = { kind = "complex_gaussian", variance = 1.0 }
            shift = "identity*2"
            scale = 0.5
            declared_b = 0.25
            declared_K = 3.0
        "#;
        let cfg: EnsembleConfig = toml::from_str(text).unwrap();
        let spec = cfg.to_spec(None, Path::new(".")).unwrap();
        assert_eq!(spec.n, 3);
        assert_eq!(spec.declared_k, 3.0);
        let bad = format!("{text}\nbogus = 1");
        assert!(toml::from_str::<EnsembleConfig>(&bad).is_err());
    }
}
