//! Experiment configuration: defaults, presets, JSON files and `--set`
//! overrides, resolved in that order of precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ergostab_core::landscapes::{Activation, LossKind, TeacherKind};
use ergostab_core::markov::SURROGATE_LABEL;
use ergostab_core::stability::Statistic;
use ergostab_core::{Mode, OptimizerConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Kind {
    Bifurcate,
    Lyapunov,
    Orbit,
    Autocorr,
    Sas,
    Ulam,
    Ntk,
    Bound,
    CorruptSweep,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetParams {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub teacher: TeacherKind,
    /// Held-out samples used as probes and for the population risk.
    pub test_size: usize,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            n: 64,
            d: 5,
            p: 0.0,
            teacher: TeacherKind::Logistic { temperature: 0.0 },
            test_size: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetParams {
    pub hidden: usize,
    pub activation: Activation,
    pub loss: LossKind,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            hidden: 16,
            activation: Activation::Tanh,
            loss: LossKind::Logistic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimParams {
    pub eta: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub mode: Mode,
    pub divergence_radius: f64,
}

impl Default for OptimParams {
    fn default() -> Self {
        Self {
            eta: 0.05,
            momentum: 0.9,
            batch_size: 8,
            mode: Mode::Sgd,
            divergence_radius: 1e6,
        }
    }
}

impl OptimParams {
    pub fn to_config(&self, n: usize) -> OptimizerConfig {
        let base = match self.mode {
            Mode::Gd => OptimizerConfig::gd(self.eta, n),
            Mode::Sgd => OptimizerConfig::sgd(self.eta, self.batch_size),
        };
        base.with_momentum(self.momentum)
            .with_divergence_radius(self.divergence_radius)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainChoice {
    #[default]
    Periodic,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcateParams {
    pub s: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_step: f64,
    pub n_inits: usize,
    pub runup: usize,
    pub keep_k: usize,
    pub tol: f64,
    pub divergence_radius: f64,
    pub domain: DomainChoice,
}

impl Default for BifurcateParams {
    fn default() -> Self {
        Self {
            s: 1.0,
            eta_min: 0.5,
            eta_max: 3.6,
            eta_step: 0.05,
            n_inits: 100,
            runup: 2000,
            keep_k: 200,
            tol: 1e-6,
            divergence_radius: 1e6,
            domain: DomainChoice::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovMap {
    /// Gradient descent `w ↦ w − η ℓ_s'(w)` on the unit circle.
    #[default]
    Gd,
    /// Raw iteration of `g_s`.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovParams {
    pub map: LyapunovMap,
    pub s: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_step: f64,
    pub w0: f64,
    pub steps: usize,
    pub runup: usize,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            map: LyapunovMap::Gd,
            s: 1.0,
            eta_min: 0.5,
            eta_max: 3.6,
            eta_step: 0.05,
            w0: 0.3,
            steps: 100_000,
            runup: 1000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    pub dataset: DatasetParams,
    pub net: NetParams,
    pub optimizer: OptimParams,
    pub runup: usize,
    pub length: usize,
    /// Weight snapshot thinning; 0 disables snapshots.
    pub stride: usize,
}

impl OrbitParams {
    fn desk() -> Self {
        Self {
            runup: 200,
            length: 1200,
            stride: 0,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutocorrParams {
    pub dataset: DatasetParams,
    pub net: NetParams,
    pub optimizer: OptimParams,
    pub runup: usize,
    pub length: usize,
    pub tau_max: usize,
    pub n_inits: usize,
}

impl Default for AutocorrParams {
    fn default() -> Self {
        Self {
            dataset: DatasetParams::default(),
            net: NetParams::default(),
            optimizer: OptimParams::default(),
            runup: 200,
            length: 1200,
            tau_max: 50,
            n_inits: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SasParams {
    pub dataset: DatasetParams,
    pub net: NetParams,
    pub optimizer: OptimParams,
    pub pairs: usize,
    pub runup: usize,
    pub window: usize,
    pub inits_per_side: usize,
    /// Probe points taken from the front of the held-out set.
    pub probes: usize,
    pub statistic: Statistic,
}

impl Default for SasParams {
    fn default() -> Self {
        Self {
            dataset: DatasetParams::default(),
            net: NetParams::default(),
            optimizer: OptimParams::default(),
            pairs: 10,
            runup: 200,
            window: 1200,
            inits_per_side: 1,
            probes: 32,
            statistic: Statistic::Loss,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UlamParams {
    pub dataset: DatasetParams,
    pub net: NetParams,
    pub optimizer: OptimParams,
    pub runup: usize,
    pub length: usize,
    pub bins: usize,
    pub margin: f64,
    pub smoothing: f64,
    /// Probes whose individual loss processes are discretised.
    pub probes: usize,
    pub tv_steps: usize,
    pub label: String,
}

impl Default for UlamParams {
    fn default() -> Self {
        Self {
            dataset: DatasetParams::default(),
            net: NetParams::default(),
            optimizer: OptimParams::default(),
            runup: 200,
            length: 5000,
            bins: 64,
            margin: 0.05,
            smoothing: 0.0,
            probes: 4,
            tv_steps: 50,
            label: SURROGATE_LABEL.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NtkParams {
    pub n: usize,
    pub d_w: usize,
    /// Learning rate as a fraction of `1/θ_max`.
    pub eta_scale: f64,
    pub ridge: f64,
    pub steps: usize,
    pub koopman_probes: usize,
    /// Row of `Φ` that is redrawn for the perturbed model.
    pub perturbed_row: usize,
}

impl Default for NtkParams {
    fn default() -> Self {
        Self {
            n: 10,
            d_w: 50,
            eta_scale: 0.5,
            ridge: 0.0,
            steps: 400,
            koopman_probes: 100,
            perturbed_row: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub n: usize,
    #[serde(rename = "L")]
    pub loss_bound: f64,
    pub delta: f64,
    pub beta: f64,
    pub empirical_risk: f64,
    #[serde(rename = "L_D")]
    pub l_d: f64,
    pub lambda: f64,
    pub m: usize,
    pub eta: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            n: 100,
            loss_bound: 1.0,
            delta: 0.05,
            beta: 0.0,
            empirical_risk: 0.0,
            l_d: 1.0,
            lambda: 0.0,
            m: 10,
            eta: 0.01,
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptSweepParams {
    pub dataset: DatasetParams,
    pub net: NetParams,
    pub optimizer: OptimParams,
    pub ps: Vec<f64>,
    pub pairs: usize,
    pub runup: usize,
    pub window: usize,
    pub inits_per_side: usize,
    pub probes: usize,
    pub statistic: Statistic,
    pub tau_max: usize,
    /// Autocorrelation is averaged over `τ ∈ [1, tau_fit]`.
    pub tau_fit: usize,
    /// Reference orbits per `p` for the risk and autocorrelation columns.
    pub n_inits: usize,
}

impl Default for CorruptSweepParams {
    fn default() -> Self {
        Self {
            dataset: DatasetParams::default(),
            net: NetParams::default(),
            optimizer: OptimParams::default(),
            ps: vec![0.0, 0.25, 0.5],
            pairs: 10,
            runup: 200,
            window: 1200,
            inits_per_side: 1,
            probes: 128,
            statistic: Statistic::Loss,
            tau_max: 20,
            tau_fit: 20,
            n_inits: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Bifurcate(BifurcateParams),
    Lyapunov(LyapunovParams),
    Orbit(OrbitParams),
    Autocorr(AutocorrParams),
    Sas(SasParams),
    Ulam(UlamParams),
    Ntk(NtkParams),
    Bound(BoundParams),
    CorruptSweep(CorruptSweepParams),
}

impl Params {
    pub fn default_for(kind: Kind) -> Self {
        match kind {
            Kind::Bifurcate => Params::Bifurcate(Default::default()),
            Kind::Lyapunov => Params::Lyapunov(Default::default()),
            Kind::Orbit => Params::Orbit(OrbitParams::desk()),
            Kind::Autocorr => Params::Autocorr(Default::default()),
            Kind::Sas => Params::Sas(Default::default()),
            Kind::Ulam => Params::Ulam(Default::default()),
            Kind::Ntk => Params::Ntk(Default::default()),
            Kind::Bound => Params::Bound(Default::default()),
            Kind::CorruptSweep => Params::CorruptSweep(Default::default()),
        }
    }

    fn from_value(kind: Kind, v: Value) -> serde_json::Result<Self> {
        Ok(match kind {
            Kind::Bifurcate => Params::Bifurcate(serde_json::from_value(v)?),
            Kind::Lyapunov => Params::Lyapunov(serde_json::from_value(v)?),
            Kind::Orbit => Params::Orbit(serde_json::from_value(v)?),
            Kind::Autocorr => Params::Autocorr(serde_json::from_value(v)?),
            Kind::Sas => Params::Sas(serde_json::from_value(v)?),
            Kind::Ulam => Params::Ulam(serde_json::from_value(v)?),
            Kind::Ntk => Params::Ntk(serde_json::from_value(v)?),
            Kind::Bound => Params::Bound(serde_json::from_value(v)?),
            Kind::CorruptSweep => Params::CorruptSweep(serde_json::from_value(v)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 defers to `ERGOSTAB_WORKERS`, then to the number
    /// of cores.
    pub workers: usize,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    master_seed: u64,
    out_dir: PathBuf,
    workers: usize,
    params: Value,
}

const TOP_LEVEL: [&str; 5] = ["kind", "master_seed", "out_dir", "workers", "params"];

impl ExperimentConfig {
    pub fn defaults(kind: Kind) -> Self {
        Self {
            kind,
            master_seed: 0,
            out_dir: PathBuf::from("out"),
            workers: 0,
            params: Params::default_for(kind),
        }
    }

    pub fn from_value(v: Value) -> Result<Self, RunError> {
        let raw: RawConfig = serde_json::from_value(v).map_err(|e| RunError::Config(e.to_string()))?;
        let params = Params::from_value(raw.kind, raw.params)
            .map_err(|e| RunError::Config(format!("params: {e}")))?;
        Ok(Self {
            kind: raw.kind,
            master_seed: raw.master_seed,
            out_dir: raw.out_dir,
            workers: raw.workers,
            params,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let v: Value = serde_json::from_str(text).map_err(|e| RunError::Config(format!(
            "invalid JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        )))?;
        Self::from_value(v)
    }

    pub fn resolved_workers(&self) -> usize {
        if self.workers > 0 {
            return self.workers;
        }
        std::env::var("ERGOSTAB_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0)
    }
}

/// Inputs to [`parse_config`], lowest precedence first.
#[derive(Clone, Debug, Default)]
pub struct ConfigSources<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    /// `key=value` overrides; keys are dotted paths, and keys that are not
    /// top-level fields are looked up under `params`.
    pub overrides: &'a [String],
}

pub fn preset(kind: Kind, name: &str) -> Result<Value, RunError> {
    match name {
        "desk" => Ok(Value::Object(Map::new())),
        "paper-protocol" => {
            // 45 pairs; 200 and 1200 epochs of n/m = 8 steps each
            let params = match kind {
                Kind::Sas | Kind::CorruptSweep => {
                    serde_json::json!({"pairs": 45, "runup": 1600, "window": 9600})
                }
                Kind::Bifurcate => serde_json::json!({"n_inits": 100}),
                _ => Value::Object(Map::new()),
            };
            Ok(serde_json::json!({ "params": params }))
        }
        other => Err(RunError::Config(format!(
            "unknown preset {other:?} (expected \"desk\" or \"paper-protocol\")"
        ))),
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // tagged sub-objects (e.g. the teacher) are replaced whole
                    Some(slot) if slot.is_object() && v.is_object() && !v.as_object().is_some_and(|m| m.contains_key("kind")) => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn set_path(root: &mut Value, assignment: &str) -> Result<(), RunError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| RunError::Config(format!("override {assignment:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(RunError::Config(format!("override {assignment:?} has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut path: Vec<&str> = key.split('.').collect();
    if !TOP_LEVEL.contains(&path[0]) {
        path.insert(0, "params");
    }
    let mut cur = root;
    for part in &path[..path.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| RunError::Config(format!("cannot set {key}: {part} is not an object")))?;
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let last = path[path.len() - 1];
    cur.as_object_mut()
        .ok_or_else(|| RunError::Config(format!("cannot set {key}")))?
        .insert(last.to_string(), value);
    Ok(())
}

/// Resolves a configuration: defaults < preset < file < overrides.
pub fn parse_config(kind: Kind, sources: &ConfigSources<'_>) -> Result<ExperimentConfig, RunError> {
    let mut v = serde_json::to_value(ExperimentConfig::defaults(kind)).expect("defaults serialize");
    if let Some(name) = sources.preset {
        merge(&mut v, preset(kind, name)?);
    }
    if let Some(path) = sources.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| {
            RunError::Config(format!(
                "{}: invalid JSON at line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        if !file.is_object() {
            return Err(RunError::Config(format!("{}: top level must be an object", path.display())));
        }
        if let Some(k) = file.get("kind") {
            if k != &serde_json::to_value(kind).expect("kind") {
                return Err(RunError::Config(format!(
                    "{}: file declares kind {k} but {kind} was requested",
                    path.display()
                )));
            }
        }
        merge(&mut v, file);
    }
    for s in sources.overrides {
        set_path(&mut v, s)?;
    }
    ExperimentConfig::from_value(v)
}
