use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CAP_MAX;
use crate::parametric::LambdaSchedule;
use crate::scheduler::{Policy, WorkerHandle, WorkerKind};
use crate::supergraph::SwapMode;

/// Comma-separated `host:port` list replacing the configured workers.
pub const WORKERS_ENV: &str = "SUPERFLOW_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchMode {
    /// `seeds_per_supergraph` problems times the whole schedule per task.
    #[default]
    Supergraph,
    /// One task per (seed, lambda) pair.
    Single,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerSpec {
    #[serde(flatten)]
    pub kind: WorkerKind,
    #[serde(default = "one")]
    pub slots: usize,
}

fn one() -> usize {
    1
}

/// Benchmark configuration, read from TOML. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    /// Seeds per image, laid out on a near-square regular grid.
    pub seeds: usize,
    pub images: usize,
    pub lambdas: LambdaSchedule,
    pub seeds_per_supergraph: usize,
    /// Fixed-point scale turning real-valued weights into capacities.
    pub weight_scale: i64,
    /// Real weight of a maximally dissimilar pixel's foreground cost.
    pub unary_weight: f64,
    /// Real weight of a pairwise term between equal intensities.
    pub smoothness: f64,
    pub contrast_sigma: f64,
    /// Piecewise-constant regions per image.
    pub regions: usize,
    /// Intensity noise amplitude.
    pub noise: u8,
    /// Empty means one local worker.
    pub workers: Vec<WorkerSpec>,
    pub policy: Policy,
    pub batch: BatchMode,
    pub swap: SwapMode,
    pub timeout_secs: u64,
    pub rng_seed: u64,
    pub output: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            width: 64,
            height: 64,
            seeds: 178,
            images: 1,
            lambdas: LambdaSchedule::default_20(),
            seeds_per_supergraph: 2,
            weight_scale: 128,
            unary_weight: 4.0,
            smoothness: 0.5,
            contrast_sigma: 32.0,
            regions: 6,
            noise: 12,
            workers: Vec::new(),
            policy: Policy::Dynamic,
            batch: BatchMode::Supergraph,
            swap: SwapMode::Heuristic,
            timeout_secs: 120,
            rng_seed: 0x5eed,
            output: PathBuf::from("superflow-out"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("{0} must be finite and non-negative")]
    BadWeight(&'static str),
    #[error("worker {0} has zero slots")]
    ZeroSlots(usize),
    #[error("a task could need finite capacity {need}, over the limit {limit}")]
    CapacityBudget { need: u64, limit: u64 },
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: BenchConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("width", self.width),
            ("height", self.height),
            ("seeds", self.seeds),
            ("images", self.images),
            ("seeds_per_supergraph", self.seeds_per_supergraph),
            ("regions", self.regions),
            ("timeout_secs", self.timeout_secs as usize),
        ] {
            if v == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if self.weight_scale < 1 {
            return Err(ConfigError::Zero("weight_scale"));
        }
        for (name, w) in [
            ("unary_weight", self.unary_weight),
            ("smoothness", self.smoothness),
            ("contrast_sigma", self.contrast_sigma),
        ] {
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::BadWeight(name));
            }
        }
        if let Some(i) = self.workers.iter().position(|w| w.slots == 0) {
            return Err(ConfigError::ZeroSlots(i));
        }
        let need = self.worst_case_task_capacity();
        if need >= CAP_MAX as u64 {
            return Err(ConfigError::CapacityBudget {
                need,
                limit: CAP_MAX as u64,
            });
        }
        Ok(())
    }

    pub fn scaled(&self, real: f64) -> i64 {
        round_half_up(real * self.weight_scale as f64)
    }

    /// Upper bound on the finite capacity sum of one task's composite graph.
    pub fn worst_case_task_capacity(&self) -> u64 {
        let max_lambda = *self.lambdas.values().last().expect("schedule is non-empty") as u64;
        let per_pixel = max_lambda + self.scaled(self.unary_weight) as u64 + 4 * self.scaled(self.smoothness) as u64;
        let constituents = match self.batch {
            BatchMode::Supergraph => self.seeds_per_supergraph.min(self.seeds) * self.lambdas.len(),
            BatchMode::Single => 1,
        } as u64;
        per_pixel.saturating_mul((self.width * self.height) as u64 * constituents)
    }

    /// Worker handles, with [`WORKERS_ENV`] taking precedence when set.
    pub fn resolve_workers(&self, env: Option<&str>) -> Vec<WorkerHandle> {
        if let Some(list) = env.map(str::trim).filter(|l| !l.is_empty()) {
            return list
                .split(',')
                .map(str::trim)
                .filter(|e| !e.is_empty())
                .enumerate()
                .map(|(id, e)| WorkerHandle::remote(id, e, 1))
                .collect();
        }
        if self.workers.is_empty() {
            return vec![WorkerHandle::local(0)];
        }
        self.workers
            .iter()
            .enumerate()
            .map(|(id, w)| WorkerHandle {
                id,
                kind: w.kind.clone(),
                slots: w.slots,
            })
            .collect()
    }
}

pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}
