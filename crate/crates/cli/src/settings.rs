//! The run configuration shared by every subcommand, and its resolution from a
//! config file plus `key=value` overrides.

use std::path::{Path, PathBuf};

use rmtk::anticonc::{CrlcdGrid, QuadratureSpec};
use rmtk::config::{apply_override, base_dir_of, read_toml, EnsembleConfig};
use rmtk::experiments::{ExperimentConfig, ExperimentParams};
use rmtk::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

mod complex_list {
    use rmtk::config::{format_complex, parse_complex};
    use rmtk::C64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| format_complex(*z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Number(f64),
            Text(String),
        }
        Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| match e {
                Entry::Number(x) => Ok(C64::new(x, 0.0)),
                Entry::Text(t) => parse_complex(&t).map_err(D::Error::custom),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnticoncCheck {
    #[default]
    LevyP,
    Doubling,
    CrlcdTail,
    Uniform,
}

/// `[anticonc]`: which verifier to run and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnticoncParams {
    pub check: AnticoncCheck,
    /// Coefficient vector; empty means `e₁` in the ensemble dimension.
    #[serde(with = "complex_list")]
    pub v: Vec<C64>,
    pub r: f64,
    pub m: usize,
    pub eps: f64,
    pub l: f64,
    pub u: f64,
    pub c_grid: Vec<f64>,
    pub quadrature: QuadratureSpec,
    pub grid: CrlcdGrid,
}

impl Default for AnticoncParams {
    fn default() -> Self {
        AnticoncParams {
            check: AnticoncCheck::default(),
            v: Vec::new(),
            r: 1.0,
            m: 20_000,
            eps: 0.1,
            l: 6.0,
            u: 0.3,
            c_grid: vec![0.49, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01],
            quadrature: QuadratureSpec::default(),
            grid: CrlcdGrid::default(),
        }
    }
}

/// `[crlcd]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrlcdParams {
    #[serde(with = "complex_list")]
    pub v: Vec<C64>,
    pub l: f64,
    pub u: f64,
    pub grid: CrlcdGrid,
}

impl Default for CrlcdParams {
    fn default() -> Self {
        CrlcdParams {
            v: Vec::new(),
            l: 10.0,
            u: 0.3,
            grid: CrlcdGrid::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereProbeKind {
    SingleVector,
    Compressible,
    #[default]
    Distance,
    Incompressible,
}

/// `[sphere]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereProbeParams {
    pub probe: SphereProbeKind,
    pub delta: f64,
    pub rho: f64,
    pub eps: f64,
    /// Test vector for the single-vector probe; empty means the flat unit vector.
    #[serde(with = "complex_list")]
    pub v: Vec<C64>,
    pub c_grid: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub vector_samples: usize,
    pub l: f64,
    pub u: f64,
    pub grid: CrlcdGrid,
}

impl Default for SphereProbeParams {
    fn default() -> Self {
        SphereProbeParams {
            probe: SphereProbeKind::default(),
            delta: 0.1,
            rho: 0.1,
            eps: 0.1,
            v: Vec::new(),
            c_grid: vec![0.01, 0.05, 0.1, 0.2, 0.3],
            thresholds: vec![0.1, 0.2, 0.3],
            vector_samples: 1000,
            l: 6.0,
            u: 0.3,
            grid: CrlcdGrid::default(),
        }
    }
}

/// `[identity]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityParams {
    pub tol: f64,
}

impl Default for IdentityParams {
    fn default() -> Self {
        IdentityParams { tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_y: Option<EnsembleConfig>,
    #[serde(default)]
    pub experiment: ExperimentParams,
    #[serde(default)]
    pub anticonc: AnticoncParams,
    #[serde(default)]
    pub crlcd: CrlcdParams,
    #[serde(default)]
    pub sphere: SphereProbeParams,
    #[serde(default)]
    pub identity: IdentityParams,
}

impl RunConfig {
    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            ensemble: self.ensemble.clone(),
            ensemble_y: self.ensemble_y.clone(),
            experiment: self.experiment.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }
}

/// A config file after overrides, with the directory its relative paths
/// resolve against.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

fn parse(table: &toml::Table) -> Result<RunConfig, String> {
    toml::Value::Table(table.clone())
        .try_into::<RunConfig>()
        .map_err(|e| e.to_string().trim().to_string())
}

/// Expands a bare key such as `trials` to the one section that defines it.
fn qualify(key: &str, table: &toml::Table) -> Result<String, CliError> {
    if key.contains('.') || table.contains_key(key) {
        return Ok(key.to_string());
    }
    let owners: Vec<&String> = table
        .iter()
        .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
        .map(|(k, _)| k)
        .collect();
    match owners.as_slice() {
        [one] => Ok(format!("{one}.{key}")),
        [] => Err(CliError::Usage(format!("invalid override `{key}`: no such key"))),
        many => Err(CliError::Usage(format!(
            "invalid override `{key}`: ambiguous, qualify it as one of {}",
            many.iter().map(|s| format!("`{s}.{key}`")).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Reads `path`, then applies each override in order onto the fully defaulted
/// config; the seed, when given, replaces `experiment.base_seed`.
pub fn resolve(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Resolved, CliError> {
    let raw = read_toml(path).map_err(|e| CliError::Usage(e.to_string()))?;
    let base = parse(&raw).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut table = toml::Table::try_from(&base).expect("run config serializes to a table");
    let mut assignments = overrides.to_vec();
    if let Some(s) = seed {
        assignments.push(format!("experiment.base_seed={s}"));
    }
    for assignment in &assignments {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::Usage(format!("invalid override {assignment:?}: expected key=value")));
        };
        let key = qualify(key.trim(), &table)?;
        apply_override(&mut table, &format!("{key}={value}"))
            .map_err(|e| CliError::Usage(format!("invalid override `{key}`: {e}")))?;
        parse(&table).map_err(|e| CliError::Usage(format!("invalid override `{key}`: {e}")))?;
    }
    let config = parse(&table).map_err(CliError::Usage)?;
    Ok(Resolved {
        config,
        base_dir: base_dir_of(path),
    })
}
