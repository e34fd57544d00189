//! Experiment manifests: a TOML file, `key=value` overrides and an
//! environment seed, validated into one [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use mbl_vqe_core::ansatz::AnsatzConfig;
use mbl_vqe_core::model::{golden_ratio_conjugate, AAParams, Boundary};
use mbl_vqe_core::noise::{NoiseModel, NoisePlacement};
use mbl_vqe_core::spectra::SpectrumWindow;
use mbl_vqe_core::vqe::{Optimizer, VqeConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable that sets the master seed.
pub const SEED_ENV: &str = "MBLVQE_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "kebab-case")]
pub enum Experiment {
    LevelStats,
    InputEiprScan,
    VqeSweep,
    WitnessSweep,
    NoisyWitness,
    TrotterWitness,
    Compile,
    DepthFit,
    Scaling,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::LevelStats => "level_stats",
            Experiment::InputEiprScan => "input_eipr_scan",
            Experiment::VqeSweep => "vqe_sweep",
            Experiment::WitnessSweep => "witness_sweep",
            Experiment::NoisyWitness => "noisy_witness",
            Experiment::TrotterWitness => "trotter_witness",
            Experiment::Compile => "compile",
            Experiment::DepthFit => "depth_fit",
            Experiment::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub v0: f64,
    pub eta: f64,
    pub phi: f64,
    pub boundary: BoundarySpec,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            v0: 0.5,
            eta: golden_ratio_conjugate(),
            phi: 0.0,
            boundary: BoundarySpec::Periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    pub theta0: f64,
    pub init_scale: f64,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self {
            theta0: mbl_vqe_core::ansatz::DEFAULT_THETA0,
            init_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerSpec {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeSection {
    pub optimizer: OptimizerSpec,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub n_trials: usize,
    pub k_best: usize,
}

impl Default for VqeSection {
    fn default() -> Self {
        Self {
            optimizer: OptimizerSpec::Adam,
            learning_rate: 0.01,
            max_iters: 2000,
            grad_tol: 1e-7,
            n_trials: 100,
            k_best: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementSpec {
    AfterEachTwoQubitGate,
    PerCnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineSpec {
    Density,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub p: f64,
    pub placement: PlacementSpec,
    pub engine: EngineSpec,
    pub n_traj: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            p: 1e-3,
            placement: PlacementSpec::AfterEachTwoQubitGate,
            engine: EngineSpec::Density,
            n_traj: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    Full,
    MiddleHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub w: Vec<f64>,
    pub depths: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Preparation angles scanned by `input_eipr_scan`.
    pub theta0: Vec<f64>,
    pub n_phases: usize,
    pub window: WindowSpec,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            w: vec![1.5, 8.0],
            depths: vec![2, 4, 6, 8],
            sizes: vec![8],
            theta0: (0..=20).map(|k| 0.1 * k as f64).collect(),
            n_phases: 200,
            window: WindowSpec::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    /// `t = value / W`.
    InvW,
    /// `t = value`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub rule: TimeRule,
    pub value: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            rule: TimeRule::InvW,
            value: 1.0,
        }
    }
}

impl TimeSection {
    pub fn time(&self, w: f64) -> f64 {
        match self.rule {
            TimeRule::InvW => self.value / w,
            TimeRule::Fixed => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompileSection {
    pub depth: usize,
    pub n_trials: usize,
    pub max_iters: usize,
    pub learning_rate: f64,
    pub init_scale: f64,
    pub fidelity_goal: f64,
}

impl Default for CompileSection {
    fn default() -> Self {
        Self {
            depth: 6,
            n_trials: 20,
            max_iters: 3000,
            learning_rate: 0.02,
            init_scale: std::f64::consts::PI,
            fidelity_goal: 0.999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub effective_zero: f64,
    /// Existing witness-sweep CSV to fit; when absent the sweep is run.
    pub input: Option<PathBuf>,
    /// Disorder strengths compared by the scaling report.
    pub mbl_w: f64,
    pub thermal_w: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            effective_zero: -8.9,
            input: None,
            mbl_w: 4.5,
            thermal_w: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Reuse finished grid points from `dir/cache`.
    pub cache: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cache: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub vqe: VqeSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub compile: CompileSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Parse `value` as TOML, falling back to a bare string.
fn parse_scalar(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.to_owned())),
        Err(_) => toml::Value::String(value.to_owned()),
    }
}

/// Set a dotted `key` inside `table`.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(spec.to_owned()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.to_owned()));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node
            .entry((*p).to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(spec.to_owned()))?;
    }
    node.insert(parts[parts.len() - 1].to_owned(), parse_scalar(value.trim()));
    Ok(())
}

/// Sources merged in order: file, then `experiment`, then overrides, then
/// the environment seed, then an explicit seed.
#[derive(Debug, Default, Clone)]
pub struct ConfigSources<'a> {
    pub file: Option<&'a Path>,
    pub experiment: Option<Experiment>,
    pub overrides: &'a [String],
    pub env_seed: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<&'a Path>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(src: &ConfigSources<'_>) -> Result<Self, ConfigError> {
        let mut table = match src.file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.to_owned(),
                    source,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        if let Some(e) = src.experiment {
            table.insert("experiment".into(), toml::Value::String(e.name().into()));
        }
        for o in src.overrides {
            apply_override(&mut table, o)?;
        }
        if let Some(s) = &src.env_seed {
            let seed: u64 = s
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{SEED_ENV} must be an unsigned integer, got `{s}`")))?;
            table.insert("seed".into(), toml::Value::Integer(seed as i64));
        }
        let mut cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        if let Some(seed) = src.seed {
            cfg.seed = seed;
        }
        if let Some(out) = src.out {
            cfg.output.dir = out.to_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sweep;
        let needs = |name: &str, empty: bool| {
            if empty {
                Err(invalid(format!("sweep.{name} must not be empty")))
            } else {
                Ok(())
            }
        };
        needs("sizes", s.sizes.is_empty())?;
        match self.experiment {
            Experiment::Scaling => {}
            _ => needs("w", s.w.is_empty())?,
        }
        match self.experiment {
            Experiment::VqeSweep
            | Experiment::WitnessSweep
            | Experiment::NoisyWitness
            | Experiment::TrotterWitness
            | Experiment::DepthFit => needs("depths", s.depths.is_empty())?,
            Experiment::InputEiprScan => needs("theta0", s.theta0.is_empty())?,
            Experiment::LevelStats if s.n_phases == 0 => {
                return Err(invalid("sweep.n_phases must be at least 1"))
            }
            _ => {}
        }
        if s.w.iter().any(|w| !w.is_finite() || *w <= 0.0) && self.time.rule == TimeRule::InvW {
            return Err(invalid("time.rule = inv_w needs positive finite W values"));
        }
        for &n in &s.sizes {
            self.model_params(n, 1.0)
                .validate()
                .map_err(|e| invalid(format!("N={n}: {e}")))?;
        }
        if !self.time.value.is_finite() {
            return Err(invalid("time.value must be finite"));
        }
        let v = &self.vqe;
        if v.n_trials == 0 || v.k_best == 0 || v.k_best > v.n_trials {
            return Err(invalid("need 1 <= vqe.k_best <= vqe.n_trials"));
        }
        if v.max_iters == 0 || !(v.learning_rate > 0.0) {
            return Err(invalid("vqe.max_iters and vqe.learning_rate must be positive"));
        }
        self.noise_model()
            .validate()
            .map_err(|e| invalid(format!("noise: {e}")))?;
        if self.noise.engine == EngineSpec::Trajectory && self.noise.n_traj == 0 {
            return Err(invalid("noise.n_traj must be positive"));
        }
        if self.compile.depth == 0 || self.compile.n_trials == 0 || self.compile.max_iters == 0 {
            return Err(invalid("compile.depth, n_trials and max_iters must be positive"));
        }
        if !self.fit.effective_zero.is_finite() {
            return Err(invalid("fit.effective_zero must be finite"));
        }
        Ok(())
    }

    pub fn model_params(&self, n_sites: usize, w: f64) -> AAParams {
        AAParams {
            v0: self.model.v0,
            eta: self.model.eta,
            phi: self.model.phi,
            boundary: match self.model.boundary {
                BoundarySpec::Periodic => Boundary::Periodic,
                BoundarySpec::Open => Boundary::Open,
            },
            ..AAParams::new(n_sites, w)
        }
    }

    pub fn ansatz_config(&self, n_sites: usize, depth: usize) -> AnsatzConfig {
        AnsatzConfig {
            theta0: self.ansatz.theta0,
            init_scale: self.ansatz.init_scale,
            seed: self.seed,
            boundary: self.model_params(n_sites, 1.0).boundary,
            ..AnsatzConfig::new(n_sites, depth)
        }
    }

    /// VQE settings at one grid point. The point's seed is derived from the
    /// master seed and the point label so points are independent of grid
    /// order.
    pub fn vqe_config(&self, n_sites: usize, w: f64, depth: usize) -> VqeConfig {
        let mut cfg = VqeConfig::new(self.model_params(n_sites, w), depth);
        cfg.ansatz = self.ansatz_config(n_sites, depth);
        cfg.optimizer = match self.vqe.optimizer {
            OptimizerSpec::Adam => Optimizer::Adam,
            OptimizerSpec::Sgd => Optimizer::Sgd,
        };
        cfg.learning_rate = self.vqe.learning_rate;
        cfg.max_iters = self.vqe.max_iters;
        cfg.grad_tol = self.vqe.grad_tol;
        cfg.n_trials = self.vqe.n_trials;
        cfg.k_best = self.vqe.k_best;
        cfg.seed = point_seed(self.seed, &format!("N={n_sites},W={w},depth={depth}"));
        cfg.witness_time = Some(self.time.time(w));
        cfg
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            p: self.noise.p,
            placement: match self.noise.placement {
                PlacementSpec::AfterEachTwoQubitGate => NoisePlacement::AfterEachTwoQubitGate,
                PlacementSpec::PerCnot => NoisePlacement::PerCnot,
            },
        }
    }

    pub fn window(&self) -> SpectrumWindow {
        match self.sweep.window {
            WindowSpec::Full => SpectrumWindow::Full,
            WindowSpec::MiddleHalf => SpectrumWindow::MiddleHalf,
        }
    }

    /// SHA-256 over everything that affects results (output settings
    /// excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Like [`hash`](Self::hash) but blind to the experiment kind and the
    /// grid axes, so cached points are shared across experiments and
    /// extended grids. Cache keys name the point they hold.
    pub fn cache_hash(&self) -> String {
        let mut c = self.clone();
        c.experiment = Experiment::WitnessSweep;
        c.sweep.sizes.clear();
        c.sweep.w.clear();
        c.sweep.depths.clear();
        c.hash()
    }
}

/// Seed for a labelled grid point.
pub fn point_seed(seed: u64, label: &str) -> u64 {
    let d = Sha256::digest(label.as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    mbl_vqe_core::rng::derive_seed(seed, u64::from_le_bytes(b))
}
