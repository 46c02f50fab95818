//! JSON configuration files.
//!
//! Complex entries are `[re, im]` pairs; a bare number is accepted as a real
//! shorthand. Matrices are row-major nested arrays. Unknown keys are
//! rejected. [`Config::to_canonical_json`] writes every field explicitly with
//! complex pairs, and parsing that output yields an identical `Config`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qbattery::audit::{default_epsilons, ChannelEnsemble};
use qbattery::matrix::{ComplexMatrix, HermitianMatrix, C64};
use qbattery::{DensityMatrix, JumpChannel, LindbladModel, ToleranceConfig};

/// Largest Hamiltonian Hermiticity defect accepted in a config file.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at {path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixDoc = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub rate: f64,
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateDoc {
    /// `k0`-th eigenvector of `H`, optionally mixed with `I/d` at weight `epsilon`.
    Eigenstate {
        k0: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Matrix { matrix: MatrixDoc },
    /// Gibbs state of `H`; `beta` defaults to the top-level `beta`.
    Thermal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeDoc {
    #[serde(default)]
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
}

impl Default for TimeDoc {
    fn default() -> Self {
        Self {
            t0: 0.0,
            horizon: 1.0,
            step: 1e-3,
        }
    }
}

/// On-disk schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixDoc>,
    #[serde(default)]
    pub channels: Vec<ChannelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateDoc>,
    #[serde(default)]
    pub time: TimeDoc,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dim_range")]
    pub dim_range: [usize; 2],
    #[serde(default = "default_ensemble")]
    pub channel_ensemble: ChannelEnsemble,
    #[serde(default = "default_true")]
    pub include_bundled: bool,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn default_beta() -> f64 {
    1.0
}
fn default_trials() -> usize {
    100
}
fn default_dim_range() -> [usize; 2] {
    [2, 6]
}
fn default_ensemble() -> ChannelEnsemble {
    ChannelEnsemble::Ginibre
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Eigenstate { k0: usize, epsilon: Option<f64> },
    Matrix(DensityMatrix),
    Thermal { beta: f64 },
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Canonical form of the parsed document.
    pub doc: ConfigDoc,
    pub model: Option<LindbladModel>,
    pub initial_state: Option<InitialState>,
}

fn matrix_from_doc(doc: &MatrixDoc, dim: usize, path: &str) -> Result<ComplexMatrix, ConfigError> {
    if doc.len() != dim {
        return Err(ConfigError::at(path, format!("expected {dim} rows, found {}", doc.len())));
    }
    let mut rows = Vec::with_capacity(dim);
    for (i, row) in doc.iter().enumerate() {
        if row.len() != dim {
            return Err(ConfigError::at(
                format!("{path}[{i}]"),
                format!("expected {dim} columns, found {}", row.len()),
            ));
        }
        rows.push(row.iter().map(|e| e.value()).collect::<Vec<_>>());
    }
    ComplexMatrix::from_rows(&rows).map_err(|e| ConfigError::at(path, e.to_string()))
}

fn canonical_matrix(m: &ComplexMatrix) -> MatrixDoc {
    m.rows()
        .map(|row| row.iter().map(|z| Entry::Complex([z.re, z.im])).collect())
        .collect()
}

fn positive(value: f64, path: &str) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::at(path, format!("must be positive and finite, got {value}")))
    }
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(if path.is_empty() { "$".to_string() } else { path }, e.inner().to_string())
    })?;
    Config::from_doc(doc)
}

impl Config {
    pub fn from_doc(doc: ConfigDoc) -> Result<Self, ConfigError> {
        positive(doc.beta, "beta")?;
        positive(doc.time.step, "time.step")?;
        if !doc.time.t0.is_finite() {
            return Err(ConfigError::at("time.t0", "must be finite"));
        }
        if !(doc.time.horizon.is_finite() && doc.time.horizon >= doc.time.step) {
            return Err(ConfigError::at("time.horizon", "must be at least one step"));
        }
        for (i, &e) in doc.epsilons.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                return Err(ConfigError::at(format!("epsilons[{i}]"), format!("must lie in (0, 1), got {e}")));
            }
            if i > 0 && !(e < doc.epsilons[i - 1]) {
                return Err(ConfigError::at(format!("epsilons[{i}]"), "epsilons must be strictly descending"));
            }
        }
        let [lo, hi] = doc.dim_range;
        if lo < 2 || hi < lo {
            return Err(ConfigError::at("dim_range", format!("need 2 <= min <= max, got [{lo}, {hi}]")));
        }
        for (key, value) in [
            ("hermitian", doc.tolerances.hermitian),
            ("jacobi", doc.tolerances.jacobi),
            ("rank", doc.tolerances.rank),
            ("trace", doc.tolerances.trace),
            ("psd", doc.tolerances.psd),
            ("prop_trace", doc.tolerances.prop_trace),
            ("prop_min_eig", doc.tolerances.prop_min_eig),
            ("prop_hermitian", doc.tolerances.prop_hermitian),
            ("claim_zero", doc.tolerances.claim_zero),
            ("consistency", doc.tolerances.consistency),
        ] {
            positive(value, &format!("tolerances.{key}"))?;
        }
        if doc.tolerances.max_sweeps == 0 {
            return Err(ConfigError::at("tolerances.max_sweeps", "must be at least 1"));
        }

        let mut canonical = doc.clone();
        let model = match &doc.hamiltonian {
            None => {
                if doc.dim.is_some() || !doc.channels.is_empty() {
                    return Err(ConfigError::at("hamiltonian", "required when dim or channels are given"));
                }
                None
            }
            Some(h_doc) => {
                let dim = doc.dim.ok_or_else(|| ConfigError::at("dim", "required with a hamiltonian"))?;
                if dim < 2 {
                    return Err(ConfigError::at("dim", format!("must be at least 2, got {dim}")));
                }
                let h = matrix_from_doc(h_doc, dim, "hamiltonian")?;
                let defect = h.hermiticity_defect();
                if defect > HERMITIAN_INPUT_TOL {
                    return Err(ConfigError::at(
                        "hamiltonian",
                        format!("not Hermitian: max |H - H^dag| = {defect:e} exceeds {HERMITIAN_INPUT_TOL:e}"),
                    ));
                }
                canonical.hamiltonian = Some(canonical_matrix(&h));
                let h = HermitianMatrix::with_tolerance(h, HERMITIAN_INPUT_TOL)
                    .map_err(|e| ConfigError::at("hamiltonian", e.to_string()))?;
                let mut channels = Vec::with_capacity(doc.channels.len());
                for (j, ch) in doc.channels.iter().enumerate() {
                    if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                        return Err(ConfigError::at(
                            format!("channels[{j}].rate"),
                            format!("must be finite and >= 0, got {}", ch.rate),
                        ));
                    }
                    let l = matrix_from_doc(&ch.matrix, dim, &format!("channels[{j}].matrix"))?;
                    canonical.channels[j].matrix = canonical_matrix(&l);
                    channels.push(
                        JumpChannel::new(ch.rate, l)
                            .map_err(|e| ConfigError::at(format!("channels[{j}]"), e.to_string()))?,
                    );
                }
                Some(LindbladModel::new(h, channels).map_err(|e| ConfigError::at("$", e.to_string()))?)
            }
        };

        let initial_state = match &doc.initial_state {
            None => None,
            Some(state) => {
                let dim = model
                    .as_ref()
                    .map(|m| m.dim())
                    .ok_or_else(|| ConfigError::at("initial_state", "needs a model (dim, hamiltonian)"))?;
                Some(match state {
                    InitialStateDoc::Eigenstate { k0, epsilon } => {
                        if *k0 >= dim {
                            return Err(ConfigError::at(
                                "initial_state.k0",
                                format!("index {k0} out of range for dimension {dim}"),
                            ));
                        }
                        if let Some(e) = epsilon {
                            if !(*e > 0.0 && *e < 1.0) {
                                return Err(ConfigError::at(
                                    "initial_state.epsilon",
                                    format!("must lie in (0, 1), got {e}"),
                                ));
                            }
                        }
                        InitialState::Eigenstate {
                            k0: *k0,
                            epsilon: *epsilon,
                        }
                    }
                    InitialStateDoc::Matrix { matrix } => {
                        let m = matrix_from_doc(matrix, dim, "initial_state.matrix")?;
                        if let Some(InitialStateDoc::Matrix { matrix }) = &mut canonical.initial_state {
                            *matrix = canonical_matrix(&m);
                        }
                        let h = HermitianMatrix::with_tolerance(m, HERMITIAN_INPUT_TOL)
                            .map_err(|e| ConfigError::at("initial_state.matrix", e.to_string()))?;
                        InitialState::Matrix(
                            DensityMatrix::with_tolerance(h, &doc.tolerances)
                                .map_err(|e| ConfigError::at("initial_state.matrix", e.to_string()))?,
                        )
                    }
                    InitialStateDoc::Thermal { beta } => {
                        let b = beta.unwrap_or(doc.beta);
                        positive(b, "initial_state.beta")?;
                        InitialState::Thermal { beta: b }
                    }
                })
            }
        };

        Ok(Self {
            doc: canonical,
            model,
            initial_state,
        })
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("config serializes")
    }

    pub fn name(&self) -> String {
        self.doc.name.clone().unwrap_or_else(|| "scenario".to_string())
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.doc.tolerances
    }

    pub fn eigenstate_index(&self) -> Option<usize> {
        match self.initial_state {
            Some(InitialState::Eigenstate { k0, .. }) => Some(k0),
            _ => None,
        }
    }

    /// Applies `KEY=VALUE` tolerance overrides.
    pub fn apply_overrides(&mut self, overrides: &[(String, f64)]) -> Result<(), ConfigError> {
        for (key, value) in overrides {
            self.doc
                .tolerances
                .set(key, *value)
                .map_err(|e| ConfigError::at(format!("--tol {key}"), e.to_string()))?;
        }
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.doc.seed = seed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dim": 2,
        "hamiltonian": [[0, 0], [0, 1]],
        "channels": [{"rate": 1.0, "matrix": [[0, 1], [1, 0]]}]
    }"#;

    #[test]
    fn minimal_qubit_config() {
        let cfg = parse_config(MINIMAL).unwrap();
        let model = cfg.model.as_ref().unwrap();
        assert_eq!(model.dim(), 2);
        assert_eq!(model.channels().len(), 1);
        assert_eq!(cfg.doc.beta, 1.0);
        assert_eq!(cfg.doc.epsilons, default_epsilons());
    }

    #[test]
    fn negative_rate_rejected_with_path() {
        let text = MINIMAL.replace("\"rate\": 1.0", "\"rate\": -1");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "channels[0].rate");
    }

    #[test]
    fn k0_out_of_range() {
        let text = MINIMAL.replace(
            "\"dim\": 2,",
            "\"dim\": 2, \"initial_state\": {\"kind\": \"eigenstate\", \"k0\": 5},",
        );
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "initial_state.k0");
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let text = MINIMAL.replace("[[0, 0], [0, 1]]", "[[0, 1], [0, 1]]");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "hamiltonian");
        assert!(err.message.contains("1e0"), "{}", err.message);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("\"dim\": 2,", "\"dim\": 2, \"colour\": 3,");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
    }

    #[test]
    fn schema_errors_carry_json_path() {
        let text = MINIMAL.replace("\"rate\": 1.0", "\"rate\": \"fast\"");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "channels[0].rate");
        let text = MINIMAL.replace("[[0, 1], [1, 0]]", "[[0, 1], [1]]");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "channels[0].matrix[1]");
    }

    #[test]
    fn complex_entries_and_canonical_roundtrip() {
        let text = r#"{
            "name": "y",
            "dim": 2,
            "hamiltonian": [[1, [0, -1]], [[0, 1], -1]],
            "initial_state": {"kind": "thermal"},
            "time": {"horizon": 2, "step": 0.01}
        }"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_canonical_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_canonical_json(), again.to_canonical_json());
        assert_eq!(cfg.initial_state, Some(InitialState::Thermal { beta: 1.0 }));
    }

    #[test]
    fn check_only_config_has_no_model() {
        let cfg = parse_config(r#"{"seed": 42, "trials": 10}"#).unwrap();
        assert!(cfg.model.is_none());
        assert_eq!(cfg.doc.seed, 42);
        assert!(parse_config(r#"{"dim": 2}"#).is_err());
    }

    #[test]
    fn epsilons_must_descend() {
        let text = MINIMAL.replace("\"dim\": 2,", "\"dim\": 2, \"epsilons\": [0.01, 0.1],");
        assert_eq!(parse_config(&text).unwrap_err().path, "epsilons[1]");
    }

    #[test]
    fn tolerance_overrides() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.apply_overrides(&[("claim_zero".into(), 1e-8)]).unwrap();
        assert_eq!(cfg.tolerances().claim_zero, 1e-8);
        assert!(cfg.apply_overrides(&[("nope".into(), 1.0)]).is_err());
    }
}
