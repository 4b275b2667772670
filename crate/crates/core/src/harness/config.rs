//! Experiment configuration files.
//!
//! A config is one JSON object:
//!
//! ```json
//! { "kind": "simulate", "seed": 7, "output_dir": "out/sim",
//!   "grid": { "n": 64, "box_length": 6.283185307179586 },
//!   "params": { "kappa": 1.0, "ell": 1 },
//!   "parameters": { "t_final": 1.0, "dt": 0.001,
//!                   "initial": { "kind": "smooth_random", "width": 3.0, "norm": 1.0 } } }
//! ```
//!
//! `parameters` holds the block of the chosen kind. Validation visits every
//! key and reports all problems at once.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::PathBuf;

use crate::error::{Error, Result, ValidationIssue};
use crate::evolution::PicardConfig;
use crate::illposedness_probe::IllposednessConfig;
use crate::spectral_core::{DiracParams, Grid2D, SpinorField};
use crate::xsb_probe::{BilinearConfig, L4ConeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Picard,
    Convergence,
    L4Cone,
    Bilinear,
    IllposedSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Simulate,
        ExperimentKind::Picard,
        ExperimentKind::Convergence,
        ExperimentKind::L4Cone,
        ExperimentKind::Bilinear,
        ExperimentKind::IllposedSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Picard => "picard",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::L4Cone => "l4-cone",
            ExperimentKind::Bilinear => "bilinear",
            ExperimentKind::IllposedSweep => "illposed-sweep",
        }
    }

    fn needs_grid(self) -> bool {
        matches!(self, ExperimentKind::Simulate | ExperimentKind::Picard | ExperimentKind::Convergence)
    }
}

/// Initial spinor for the time-stepping kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Gaussian-weighted random modes inside the dealiased band, L²-normalized.
    SmoothRandom { width: f64, norm: f64 },
    /// Single Fourier mode k with spinor amplitude v = [[re, im], [re, im]].
    PlaneWave { k: [i64; 2], v: [[f64; 2]; 2] },
    /// Field read from a checkpoint file.
    Checkpoint { path: PathBuf },
}

impl InitialData {
    fn issues(&self, key: &str, out: &mut Vec<ValidationIssue>) {
        if let InitialData::SmoothRandom { width, norm } = self {
            if !(width.is_finite() && *width > 0.0) {
                out.push(issue(&format!("{key}.width"), "must be positive"));
            }
            if !(norm.is_finite() && *norm >= 0.0) {
                out.push(issue(&format!("{key}.norm"), "must be non-negative"));
            }
        }
    }

    pub fn build(&self, grid: Grid2D, seed: u64) -> Result<SpinorField> {
        use num_complex::Complex64;
        match self {
            InitialData::SmoothRandom { width, norm } => Ok(SpinorField::smooth_random(grid, seed, *width, *norm)),
            InitialData::PlaneWave { k, v } => {
                if grid.storage_index(k[0]).is_none() || grid.storage_index(k[1]).is_none() {
                    return Err(Error::invalid("initial.k", format!("mode {k:?} is outside the n = {} lattice", grid.n())));
                }
                Ok(SpinorField::plane_wave(grid, *k, [Complex64::new(v[0][0], v[0][1]), Complex64::new(v[1][0], v[1][1])]))
            }
            InitialData::Checkpoint { path } => {
                let f: SpinorField = crate::spectral_core::checkpoint::load(path)?;
                if *f.grid() != grid {
                    return Err(Error::GridMismatch(format!("checkpoint grid {:?} differs from config grid {:?}", f.grid(), grid)));
                }
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub t_final: f64,
    pub dt: f64,
    pub initial: InitialData,
    #[serde(default = "default_every")]
    pub diagnostics_every: usize,
    #[serde(default = "default_indices")]
    pub sobolev_indices: Vec<f64>,
    /// Write initial and final fields as checkpoints.
    #[serde(default = "yes")]
    pub checkpoints: bool,
}

fn default_every() -> usize {
    10
}
fn default_indices() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardBlock {
    pub t_final: f64,
    pub n_iter: usize,
    pub quadrature_points: usize,
    /// Data is rescaled to ‖ψ₀‖_{H^s} = delta.
    pub delta: f64,
    #[serde(default = "one")]
    pub s: f64,
    pub initial: InitialData,
    /// Also run Strang splitting with the quadrature spacing and compare.
    #[serde(default = "yes")]
    pub compare_strang: bool,
}

fn one() -> f64 {
    1.0
}

impl PicardBlock {
    pub fn picard_config(&self) -> PicardConfig {
        PicardConfig { t_final: self.t_final, n_iter: self.n_iter, quadrature_points: self.quadrature_points, delta: self.delta, s: self.s }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceBlock {
    pub t_final: f64,
    /// Coarsest step; the study also runs dt/2 and dt/4.
    pub dt: f64,
    pub initial: InitialData,
}

/// The kind-specific block, already typed.
#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Simulate(SimulateBlock),
    Picard(PicardBlock),
    Convergence(ConvergenceBlock),
    L4Cone(L4ConeConfig),
    Bilinear(BilinearConfig),
    IllposedSweep(IllposednessConfig),
}

impl Parameters {
    fn to_value(&self) -> Value {
        let (v, top_level) = match self {
            Parameters::Simulate(b) => (serde_json::to_value(b), None),
            Parameters::Picard(b) => (serde_json::to_value(b), None),
            Parameters::Convergence(b) => (serde_json::to_value(b), None),
            Parameters::L4Cone(b) => (serde_json::to_value(b), Some("seed")),
            Parameters::Bilinear(b) => (serde_json::to_value(b), Some("seed")),
            Parameters::IllposedSweep(b) => (serde_json::to_value(b), Some("params")),
        };
        let mut v = v.unwrap_or(Value::Null);
        // keys that live at the top level of the config
        if let (Value::Object(m), Some(k)) = (&mut v, top_level) {
            m.remove(k);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: Option<Grid2D>,
    pub params: DiracParams,
    pub parameters: Parameters,
}

const TOP_KEYS: [&str; 6] = ["kind", "seed", "output_dir", "grid", "params", "parameters"];

fn issue(key: &str, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue { key: key.into(), message: message.into() }
}

fn from_error(prefix: &str, e: Error) -> ValidationIssue {
    match e {
        Error::InvalidParameter { name, reason } => issue(&format!("{prefix}.{name}"), reason),
        other => issue(prefix, other.to_string()),
    }
}

fn typed<T: serde::de::DeserializeOwned>(v: &Value, key: &str, out: &mut Vec<ValidationIssue>) -> Option<T> {
    match serde_json::from_value::<T>(v.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            out.push(issue(key, e.to_string()));
            None
        }
    }
}

fn positive(v: f64, key: &str, out: &mut Vec<ValidationIssue>) {
    if !(v.is_finite() && v > 0.0) {
        out.push(issue(key, format!("must be positive, got {v}")));
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Validation(vec![issue("<document>", e.to_string())]))?;
        Self::from_value(&v)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let mut out = Vec::new();
        let Some(obj) = v.as_object() else {
            return Err(Error::Validation(vec![issue("<document>", "config must be a JSON object")]));
        };
        for k in obj.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                out.push(issue(k, format!("unknown key; expected one of {TOP_KEYS:?}")));
            }
        }
        let kind = match obj.get("kind") {
            None => {
                out.push(issue("kind", "missing experiment kind"));
                None
            }
            Some(k) => match serde_json::from_value::<ExperimentKind>(k.clone()) {
                Ok(k) => Some(k),
                Err(_) => {
                    let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                    out.push(issue("kind", format!("unknown experiment kind {k}; expected one of {names:?}")));
                    None
                }
            },
        };
        let seed = match obj.get("seed") {
            None => {
                out.push(issue("seed", "missing; every run needs an explicit seed"));
                None
            }
            Some(s) => match s.as_u64() {
                Some(s) => Some(s),
                None => {
                    out.push(issue("seed", format!("must be a non-negative integer, got {s}")));
                    None
                }
            },
        };
        let output_dir = match obj.get("output_dir") {
            Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(other) => {
                out.push(issue("output_dir", format!("must be a non-empty string, got {other}")));
                None
            }
            None => {
                out.push(issue("output_dir", "missing"));
                None
            }
        };
        let params = match obj.get("params") {
            None => Some(DiracParams::default()),
            Some(p) => typed::<DiracParams>(p, "params", &mut out).and_then(|p| match p.validate() {
                Ok(()) => Some(p),
                Err(e) => {
                    out.push(from_error("params", e));
                    None
                }
            }),
        };
        let grid = match obj.get("grid") {
            None => {
                if kind.is_some_and(|k| k.needs_grid()) {
                    out.push(issue("grid", format!("required for kind {}", kind.unwrap().name())));
                }
                None
            }
            Some(g) => typed::<GridSpec>(g, "grid", &mut out).and_then(|g| match Grid2D::new(g.n, g.box_length) {
                Ok(g) => Some(g),
                Err(e) => {
                    out.push(from_error("grid", e));
                    None
                }
            }),
        };
        let empty = Value::Object(Map::new());
        let block = obj.get("parameters").unwrap_or(&empty);
        let parameters = kind.and_then(|k| parse_block(k, block, &mut out));
        if !out.is_empty() {
            return Err(Error::Validation(out));
        }
        Ok(Self {
            kind: kind.unwrap(),
            seed: seed.unwrap(),
            output_dir: output_dir.unwrap(),
            grid,
            params: params.unwrap(),
            parameters: parameters.unwrap(),
        })
    }

    /// Lossless echo of the parsed configuration (defaults filled in).
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), Value::String(self.kind.name().into()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("output_dir".into(), Value::String(self.output_dir.to_string_lossy().into_owned()));
        if let Some(g) = self.grid {
            m.insert("grid".into(), serde_json::to_value(g).unwrap_or(Value::Null));
        }
        m.insert("params".into(), serde_json::to_value(self.params).unwrap_or(Value::Null));
        m.insert("parameters".into(), self.parameters.to_value());
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    n: usize,
    box_length: f64,
}

fn parse_block(kind: ExperimentKind, block: &Value, out: &mut Vec<ValidationIssue>) -> Option<Parameters> {
    const KEY: &str = "parameters";
    match kind {
        ExperimentKind::Simulate => {
            let b: SimulateBlock = typed(block, KEY, out)?;
            let n0 = out.len();
            positive(b.t_final, "parameters.t_final", out);
            positive(b.dt, "parameters.dt", out);
            if b.diagnostics_every == 0 {
                out.push(issue("parameters.diagnostics_every", "must be at least 1"));
            }
            if b.sobolev_indices.iter().any(|s| !s.is_finite()) {
                out.push(issue("parameters.sobolev_indices", "entries must be finite"));
            }
            b.initial.issues("parameters.initial", out);
            (out.len() == n0).then_some(Parameters::Simulate(b))
        }
        ExperimentKind::Picard => {
            let b: PicardBlock = typed(block, KEY, out)?;
            let n0 = out.len();
            if let Err(e) = b.picard_config().validate() {
                out.push(from_error(KEY, e));
            }
            b.initial.issues("parameters.initial", out);
            (out.len() == n0).then_some(Parameters::Picard(b))
        }
        ExperimentKind::Convergence => {
            let b: ConvergenceBlock = typed(block, KEY, out)?;
            let n0 = out.len();
            positive(b.t_final, "parameters.t_final", out);
            positive(b.dt, "parameters.dt", out);
            b.initial.issues("parameters.initial", out);
            (out.len() == n0).then_some(Parameters::Convergence(b))
        }
        ExperimentKind::L4Cone => {
            if block.get("seed").is_some() {
                out.push(issue("parameters.seed", "set the seed at the top level"));
                return None;
            }
            let b: L4ConeConfig = typed(block, KEY, out)?;
            match b.validate() {
                Ok(()) => Some(Parameters::L4Cone(b)),
                Err(e) => {
                    out.push(from_error(KEY, e));
                    None
                }
            }
        }
        ExperimentKind::Bilinear => {
            if block.get("seed").is_some() {
                out.push(issue("parameters.seed", "set the seed at the top level"));
                return None;
            }
            let b: BilinearConfig = typed(block, KEY, out)?;
            match b.validate() {
                Ok(()) => Some(Parameters::Bilinear(b)),
                Err(e) => {
                    out.push(from_error(KEY, e));
                    None
                }
            }
        }
        ExperimentKind::IllposedSweep => {
            if block.get("params").is_some() {
                out.push(issue("parameters.params", "set physical parameters in the top-level `params`"));
                return None;
            }
            let b: IllposednessConfig = typed(block, KEY, out)?;
            let n0 = out.len();
            if let Err(e) = b.validate() {
                out.push(from_error(KEY, e));
            }
            if b.lambdas.len() < 3 {
                out.push(issue("parameters.lambdas", "need at least 3 values for a slope fit"));
            }
            (out.len() == n0).then_some(Parameters::IllposedSweep(b))
        }
    }
}
