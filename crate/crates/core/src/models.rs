//! Concrete model builders and JSON run configuration.
//!
//! Configuration schema:
//!
//! ```json
//! {
//!   "model": {"type": "ring", "sites": 6, "t": 1.0, "U": -8.0},
//!   "truncation": {"n_max": 4},
//!   "bound": {"policy": "below_edge", "margin": 1e-8},
//!   "output": {"dir": "out", "formats": ["json", "csv"]}
//! }
//! ```
//!
//! An explicit model replaces the ring with `{"type": "explicit", "O": [[..]], "T4": [..]}`
//! where `T4` is flat row-major with the last index fastest:
//! `T4[((m*M + n)*M + p)*M + q] = <m n|T|p q>`. Explicit tensors are rotated
//! into the eigenbasis of `O` before use.
//!
//! `bound` also accepts `{"policy": "lowest_k", "k": 2}`. Only `model` is
//! required; `n_max` defaults to 4 and the policy to `below_edge` with the
//! default margin.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mode_space::{BoundPolicy, ModeBasis, ModeSpace, ModeSpaceError, OneBodyTensor, TwoBodyTensor};
use crate::numerics::{dense_symmetric_eigen, DenseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: &'static str, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    ModeSpace(#[from] ModeSpaceError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ModelError {
    ModelError::Validation {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ring {
        sites: usize,
        t: f64,
        #[serde(rename = "U")]
        u: f64,
    },
    Explicit {
        #[serde(rename = "O")]
        o: Vec<Vec<f64>>,
        #[serde(rename = "T4")]
        t4: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    4
}

impl Default for Truncation {
    fn default() -> Self {
        Self { n_max: default_n_max() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundConfig {
    BelowEdge {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        margin: Option<f64>,
    },
    LowestK {
        k: usize,
    },
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig::BelowEdge { margin: None }
    }
}

impl BoundConfig {
    pub fn policy(&self) -> BoundPolicy {
        match *self {
            BoundConfig::BelowEdge { margin } => BoundPolicy::BelowEdge { margin },
            BoundConfig::LowestK { k } => BoundPolicy::LowestK(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<ModelSpec>,
    #[serde(default)]
    truncation: Truncation,
    #[serde(default)]
    bound: BoundConfig,
    #[serde(default)]
    output: OutputConfig,
}

pub fn load_config(text: &str) -> Result<ModelConfig, ModelError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model = raw.model.ok_or_else(|| invalid("model", "missing required key"))?;
    let config = ModelConfig {
        model,
        truncation: raw.truncation,
        bound: raw.bound,
        output: raw.output,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config_file(path: &Path) -> Result<ModelConfig, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_config(&text)
}

impl ModelConfig {
    pub fn ring(sites: usize, t: f64, u: f64, n_max: usize) -> Self {
        Self {
            model: ModelSpec::Ring { sites, t, u },
            truncation: Truncation { n_max },
            bound: BoundConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match &self.model {
            ModelSpec::Ring { sites, t, u } => {
                if *sites < 2 {
                    return Err(invalid(
                        "model.sites",
                        format!("ring needs at least 2 sites, got {sites}"),
                    ));
                }
                if !t.is_finite() {
                    return Err(invalid("model.t", "must be finite"));
                }
                if !u.is_finite() {
                    return Err(invalid("model.U", "must be finite"));
                }
            }
            ModelSpec::Explicit { o, t4 } => {
                let m = o.len();
                if m == 0 {
                    return Err(invalid("model.O", "must contain at least one row"));
                }
                if o.iter().any(|r| r.len() != m) {
                    return Err(invalid("model.O", "must be square"));
                }
                if o.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(invalid("model.O", "entries must be finite"));
                }
                if t4.len() != m.pow(4) {
                    return Err(invalid(
                        "model.T4",
                        format!("expected {} entries, got {}", m.pow(4), t4.len()),
                    ));
                }
                if t4.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("model.T4", "entries must be finite"));
                }
                DenseMatrix::from_rows(o)
                    .and_then(|d| d.check_symmetric())
                    .map_err(|e| invalid("model.O", e.to_string()))?;
                TwoBodyTensor::new(m, t4.clone()).map_err(|e| invalid("model.T4", e.to_string()))?;
            }
        }
        if let BoundConfig::BelowEdge { margin: Some(m) } = self.bound {
            if !(m.is_finite() && m >= 0.0) {
                return Err(invalid(
                    "bound.margin",
                    format!("must be finite and non-negative, got {m}"),
                ));
            }
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        match &self.model {
            ModelSpec::Ring { sites, .. } => *sites,
            ModelSpec::Explicit { o, .. } => o.len(),
        }
    }

    pub fn build(&self) -> Result<ModeSpace, ModelError> {
        self.validate()?;
        match &self.model {
            ModelSpec::Ring { sites, t, u } => Ok(build_ring_model(*sites, *t, *u)?),
            ModelSpec::Explicit { o, t4 } => {
                let o = DenseMatrix::from_rows(o).map_err(|e| invalid("model.O", e.to_string()))?;
                Ok(build_explicit_model(o, t4.clone())?)
            }
        }
    }
}

/// Site-basis hopping for a ring; two sites share a single bond.
pub fn ring_hopping(sites: usize, t: f64) -> DenseMatrix {
    DenseMatrix::from_fn(sites, sites, |i, j| {
        if i != j && ((i + 1) % sites == j || (j + 1) % sites == i) {
            -t
        } else {
            0.0
        }
    })
}

pub fn contact_interaction(sites: usize, u: f64) -> TwoBodyTensor {
    let mut data = vec![0.0; sites.pow(4)];
    for s in 0..sites {
        data[((s * sites + s) * sites + s) * sites + s] = u;
    }
    TwoBodyTensor::new(sites, data).expect("contact interaction is symmetric")
}

/// Real momentum modes: the constant mode, cosine/sine pairs for
/// `0 < k < M/2`, and the alternating mode for even `M`. Columns are ordered
/// by free energy `-2t cos(2 pi k / M)`, cosine before sine.
pub fn ring_momentum_modes(sites: usize, t: f64) -> (DenseMatrix, Vec<String>) {
    let m = sites as f64;
    let mut columns: Vec<(f64, String, Vec<f64>)> = Vec::new();
    for k in 0..=sites / 2 {
        let phase = |x: usize| 2.0 * PI * (k * x) as f64 / m;
        let energy = -2.0 * t * (2.0 * PI * k as f64 / m).cos();
        if k == 0 || 2 * k == sites {
            let v = (0..sites).map(|x| phase(x).cos() / m.sqrt()).collect();
            columns.push((energy, format!("k{k}"), v));
        } else {
            let norm = (2.0 / m).sqrt();
            columns.push((
                energy,
                format!("k{k}c"),
                (0..sites).map(|x| norm * phase(x).cos()).collect(),
            ));
            columns.push((
                energy,
                format!("k{k}s"),
                (0..sites).map(|x| norm * phase(x).sin()).collect(),
            ));
        }
    }
    columns.sort_by(|a, b| a.0.total_cmp(&b.0));
    let u = DenseMatrix::from_fn(sites, sites, |x, c| columns[c].2[x]);
    (u, columns.into_iter().map(|c| c.1).collect())
}

/// Ring of `sites` sites with hopping `t` and contact interaction `u`,
/// expressed in the real momentum basis.
pub fn build_ring_model(sites: usize, t: f64, u: f64) -> Result<ModeSpace, ModeSpaceError> {
    if sites < 2 {
        return Err(ModeSpaceError::Dimension(format!(
            "ring needs at least 2 sites, got {sites}"
        )));
    }
    let (rot, labels) = ring_momentum_modes(sites, t);
    let o = OneBodyTensor::new(ring_hopping(sites, t))?.transform(&rot)?;
    let t4 = contact_interaction(sites, u).transform(&rot)?;
    ModeSpace::new(ModeBasis::new(labels)?, o, t4)
}

/// Rotates explicit tensors into the eigenbasis of `o`.
pub fn build_explicit_model(o: DenseMatrix, t4: Vec<f64>) -> Result<ModeSpace, ModeSpaceError> {
    let one = OneBodyTensor::new(o)?;
    let two = TwoBodyTensor::new(one.dim(), t4)?;
    let eig = dense_symmetric_eigen(one.matrix())?;
    ModeSpace::new(
        ModeBasis::indexed(one.dim())?,
        one.transform(&eig.vectors)?,
        two.transform(&eig.vectors)?,
    )
}

/// Random symmetric `O` and `T4` with entries in `[-1, 1)`, reproducible from `seed`.
pub fn random_model(mode_count: usize, seed: u64) -> Result<ModeSpace, ModeSpaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upper: Vec<f64> = (0..mode_count * (mode_count + 1) / 2)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let o = DenseMatrix::from_fn(mode_count, mode_count, |i, j| {
        let (i, j) = (i.min(j), i.max(j));
        upper[i * mode_count - i * (i + 1) / 2 + j]
    });
    let raw: Vec<f64> = (0..mode_count.pow(4)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ModeSpace::new(
        ModeBasis::indexed(mode_count)?,
        OneBodyTensor::new(o)?,
        TwoBodyTensor::symmetrized(mode_count, &raw)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_free_energies() {
        let ms = build_ring_model(2, 1.0, 0.0).unwrap();
        assert!((ms.one_body().get(0, 0) + 1.0).abs() < 1e-14);
        assert!((ms.one_body().get(1, 1) - 1.0).abs() < 1e-14);
        assert!(ms.one_body().get(0, 1).abs() < 1e-14);
    }

    #[test]
    fn two_site_pair_ground_energy() {
        let ms = build_ring_model(2, 1.0, -4.0).unwrap();
        let spec = ms.solve_bound_states(BoundPolicy::default()).unwrap();
        assert!((spec.energy(0) + 2.0 + 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_interaction_stays_zero() {
        let ms = build_ring_model(5, 1.0, 0.0).unwrap();
        assert_eq!(ms.two_body().max_abs(), 0.0);
    }

    #[test]
    fn ring_basis_diagonalizes_hopping() {
        for sites in 2..=8 {
            let ms = build_ring_model(sites, 1.3, -2.0).unwrap();
            let o = ms.one_body();
            let site_trace = ring_hopping(sites, 1.3).trace();
            assert!((o.matrix().trace() - site_trace).abs() < 1e-12);
            for i in 0..sites {
                for j in 0..sites {
                    if i != j {
                        assert!(o.get(i, j).abs() < 1e-12, "M={sites} O[{i},{j}]={}", o.get(i, j));
                    }
                }
                if i > 0 {
                    assert!(o.get(i, i) >= o.get(i - 1, i - 1) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn ring_modes_are_orthonormal() {
        let (u, labels) = ring_momentum_modes(6, 1.0);
        assert_eq!(labels, ["k0", "k1c", "k1s", "k2c", "k2s", "k3"]);
        let g = u.transpose().matmul(&u).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - target).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parses_schema_example() {
        let c =
            load_config(r#"{"model":{"type":"ring","sites":6,"t":1.0,"U":-8.0},"truncation":{"n_max":4}}"#).unwrap();
        assert_eq!(
            c.model,
            ModelSpec::Ring {
                sites: 6,
                t: 1.0,
                u: -8.0
            }
        );
        assert_eq!(c.truncation.n_max, 4);
        assert_eq!(c.bound, BoundConfig::BelowEdge { margin: None });
        assert_eq!(c.output.formats, [OutputFormat::Json, OutputFormat::Csv]);
    }

    #[test]
    fn defaults_apply() {
        let c = load_config(r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0}}"#).unwrap();
        assert_eq!(c.truncation.n_max, 4);
        assert_eq!(c.bound.policy(), BoundPolicy::BelowEdge { margin: None });
    }

    #[test]
    fn missing_model_is_named() {
        match load_config(r#"{"truncation":{"n_max":2}}"#) {
            Err(ModelError::Validation { field: "model", .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_site_ring_rejected() {
        match load_config(r#"{"model":{"type":"ring","sites":1,"t":1.0,"U":-1.0}}"#) {
            Err(ModelError::Validation {
                field: "model.sites", ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load_config(r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0},"extra":1}"#).is_err());
        assert!(load_config(r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0,"V":2}}"#).is_err());
        assert!(load_config(
            r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0},"bound":{"policy":"lowest_k","k":1,"margin":0}}"#
        )
        .is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        match load_config("{\n  \"model\": {,\n}") {
            Err(ModelError::Parse { line: 2, column, .. }) => assert!(column > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_margin_rejected() {
        let text =
            r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0},"bound":{"policy":"below_edge","margin":-1.0}}"#;
        assert!(matches!(
            load_config(text),
            Err(ModelError::Validation {
                field: "bound.margin",
                ..
            })
        ));
    }

    #[test]
    fn lowest_k_policy() {
        let text = r#"{"model":{"type":"ring","sites":3,"t":1.0,"U":-1.0},"bound":{"policy":"lowest_k","k":2}}"#;
        assert_eq!(load_config(text).unwrap().bound.policy(), BoundPolicy::LowestK(2));
    }

    #[test]
    fn explicit_model_rotates_into_eigenbasis() {
        let mut t4 = vec![0.0; 16];
        t4[0] = -4.0;
        t4[15] = -4.0;
        let text = format!(
            r#"{{"model":{{"type":"explicit","O":[[0.0,-1.0],[-1.0,0.0]],"T4":{}}}}}"#,
            serde_json::to_string(&t4).unwrap()
        );
        let ms = load_config(&text).unwrap().build().unwrap();
        assert!((ms.one_body().get(0, 0) + 1.0).abs() < 1e-14);
        assert!(ms.one_body().get(0, 1).abs() < 1e-14);
        let spec = ms.solve_bound_states(BoundPolicy::default()).unwrap();
        assert!((spec.energy(0) + 2.0 + 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn explicit_model_checks_shapes() {
        let text = r#"{"model":{"type":"explicit","O":[[0.0,1.0],[1.0,0.0]],"T4":[0.0]}}"#;
        assert!(matches!(
            load_config(text),
            Err(ModelError::Validation { field: "model.T4", .. })
        ));
        let text = r#"{"model":{"type":"explicit","O":[[0.0,1.0],[2.0,0.0]],"T4":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}}"#;
        assert!(matches!(
            load_config(text),
            Err(ModelError::Validation { field: "model.O", .. })
        ));
    }

    #[test]
    fn random_model_is_reproducible() {
        let a = random_model(3, 7).unwrap();
        let b = random_model(3, 7).unwrap();
        assert_eq!(a.two_body(), b.two_body());
        assert_eq!(a.one_body().matrix(), b.one_body().matrix());
        assert_ne!(random_model(3, 8).unwrap().two_body(), a.two_body());
    }
}
