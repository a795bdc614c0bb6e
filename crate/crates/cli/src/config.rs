//! Experiment configuration: a JSON tree merged with command-line flags.

use std::path::{Path, PathBuf};

use linvol::cocycle::LyapunovOptions;
use linvol::weakmix::{CorrelationOptions, Observable, ReturnWindow, WeakMixOptions};
use linvol::GeneralizedPermutation;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything a run may read from a config file; every block is optional and unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub permutation: Option<PermSource>,
    pub lengths: Option<LengthSource>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub backend: Option<Backend>,
    pub classes: Option<ClassesParams>,
    pub induct: Option<InductParams>,
    pub cover: Option<CoverParams>,
    pub lyapunov: Option<LyapunovOptions>,
    pub cycle: Option<CycleParams>,
    pub veech: Option<VeechParams>,
    pub correlate: Option<CorrelateParams>,
    pub scan: Option<WeakMixOptions>,
    pub outputs: Option<Outputs>,
}

/// Inline rows (`"A B / B A"`), a `{top, bottom}` object, or `{file}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermSource {
    Text(String),
    Rows(GeneralizedPermutation),
    File { file: PathBuf },
}

/// `{label: value}`, a whitespace separated list in alphabet order, or `{file}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSource {
    File { file: PathBuf },
    Map(serde_json::Map<String, serde_json::Value>),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Backend {
    Rational,
    Float { bits: u32 },
}

impl Backend {
    pub fn parse(kind: &str, bits: Option<u32>) -> Result<Self, CliError> {
        match kind {
            "rational" => Ok(Backend::Rational),
            "float" => Ok(Backend::Float { bits: bits.unwrap_or(DEFAULT_FLOAT_BITS) }),
            other => Err(CliError::Config(format!("unknown backend {other:?}; expected rational or float"))),
        }
    }
}

pub const DEFAULT_FLOAT_BITS: u32 = 256;
pub const DEFAULT_LENGTH_BITS: u64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassesParams {
    pub cap: usize,
}

impl Default for ClassesParams {
    fn default() -> Self {
        ClassesParams { cap: linvol::rauzy::DEFAULT_CLASS_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InductParams {
    pub steps: usize,
    /// count maximal runs of equal moves instead of single moves
    pub zorich: bool,
    /// bits of sampled lengths when none are given
    pub bits: u64,
}

impl Default for InductParams {
    fn default() -> Self {
        InductParams { steps: 10, zorich: false, bits: DEFAULT_LENGTH_BITS }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverParams {
    /// quadratic orders; read from the permutation when absent
    pub orders: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleParams {
    pub attempts: usize,
    pub max_len: usize,
    /// random cone pairs used to check that the product does not expand the Hilbert metric
    pub pairs: usize,
}

impl Default for CycleParams {
    fn default() -> Self {
        CycleParams { attempts: 8, max_len: 1_000_000, pairs: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VeechParams {
    /// `v = t (1, ..., 1)`; ignored when `v` is set
    pub t: String,
    /// explicit coordinates in alphabet order
    pub v: Option<Vec<String>>,
    pub steps: usize,
    pub window: ReturnWindow,
    /// bits of sampled lengths; `None` picks `256 + 2 * steps`
    pub bits: Option<u64>,
}

impl Default for VeechParams {
    fn default() -> Self {
        VeechParams { t: "1/2".into(), v: None, steps: 2000, window: ReturnWindow::default(), bits: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelateParams {
    pub f: Observable,
    pub g: Observable,
    pub options: CorrelationOptions,
}

impl Default for CorrelateParams {
    fn default() -> Self {
        CorrelateParams { f: Observable::component(0), g: Observable::component(1), options: CorrelationOptions::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Reads a value that may name a file.
pub fn text_or_file(s: &str) -> Result<String, CliError> {
    let path = Path::new(s);
    if !s.contains('\n') && path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {s}: {e}")));
    }
    Ok(s.to_string())
}

pub fn parse_permutation(text: &str) -> Result<GeneralizedPermutation, CliError> {
    GeneralizedPermutation::parse(&text_or_file(text)?).map_err(|e| CliError::Config(format!("permutation: {e}")))
}

impl PermSource {
    pub fn resolve(&self) -> Result<GeneralizedPermutation, CliError> {
        match self {
            PermSource::Text(t) => parse_permutation(t),
            PermSource::Rows(p) => Ok(p.clone()),
            PermSource::File { file } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", file.display())))?;
                GeneralizedPermutation::parse(&text).map_err(|e| CliError::Config(format!("permutation: {e}")))
            }
        }
    }
}

/// SHA-256 of the compact JSON of the resolved configuration.
pub fn config_hash<T: Serialize>(resolved: &T) -> String {
    let bytes = serde_json::to_vec(resolved).expect("configuration serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
