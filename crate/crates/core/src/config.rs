//! JSON experiment configuration. Every key is optional; command-line flags
//! are layered on top with [`ExperimentConfig::overlay`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageModelDesc;
use crate::dut::DutKind;
use crate::engine::{BinOrder, EngineConfig, ExperimentSpec, GoalEncoding, Method, NetworkOverrides, Testbench};
use crate::error::{Error, Result};
use crate::stimulus::Constraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultKeyword {
    Default,
}

/// `"default"` or an explicit model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoverageModelChoice {
    Default(DefaultKeyword),
    Custom(CoverageModelDesc),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dut: Option<DutKind>,
    pub width: Option<u32>,
    pub widths: Option<Vec<u32>>,
    pub seeds: Option<usize>,
    pub method: Option<Method>,
    pub seed: Option<u64>,
    pub cap: Option<usize>,
    pub goal: Option<f64>,
    pub train_transactions: Option<usize>,
    pub retrain_interval: Option<usize>,
    pub per_bin_model_attempts: Option<usize>,
    pub bin_order: Option<BinOrder>,
    pub goal_encoding: Option<GoalEncoding>,
    pub iterations: Option<usize>,
    pub pool: Option<usize>,
    pub coverage_model: Option<CoverageModelChoice>,
    pub constraints: Option<BTreeMap<String, Constraint>>,
    pub network: Option<NetworkOverrides>,
    pub log: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub save_model: Option<PathBuf>,
    pub load_model: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("missing required setting `{name}`")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Values set in `top` win; unset ones fall through to `self`. Network
    /// overrides merge field by field.
    pub fn overlay(self, top: ExperimentConfig) -> ExperimentConfig {
        let network = match (self.network, top.network) {
            (Some(base), Some(t)) => Some(NetworkOverrides {
                hidden_layers: t.hidden_layers.or(base.hidden_layers),
                learning_rate: t.learning_rate.or(base.learning_rate),
                epochs: t.epochs.or(base.epochs),
                init_seed: t.init_seed.or(base.init_seed),
            }),
            (base, t) => t.or(base),
        };
        ExperimentConfig {
            dut: top.dut.or(self.dut),
            width: top.width.or(self.width),
            widths: top.widths.or(self.widths),
            seeds: top.seeds.or(self.seeds),
            method: top.method.or(self.method),
            seed: top.seed.or(self.seed),
            cap: top.cap.or(self.cap),
            goal: top.goal.or(self.goal),
            train_transactions: top.train_transactions.or(self.train_transactions),
            retrain_interval: top.retrain_interval.or(self.retrain_interval),
            per_bin_model_attempts: top.per_bin_model_attempts.or(self.per_bin_model_attempts),
            bin_order: top.bin_order.or(self.bin_order),
            goal_encoding: top.goal_encoding.or(self.goal_encoding),
            iterations: top.iterations.or(self.iterations),
            pool: top.pool.or(self.pool),
            coverage_model: top.coverage_model.or(self.coverage_model),
            constraints: top.constraints.or(self.constraints),
            network,
            log: top.log.or(self.log),
            out: top.out.or(self.out),
            save_model: top.save_model.or(self.save_model),
            load_model: top.load_model.or(self.load_model),
            svg: top.svg.or(self.svg),
        }
    }

    pub fn dut(&self) -> Result<DutKind> {
        required(&self.dut, "dut")
    }

    pub fn width(&self) -> Result<u32> {
        required(&self.width, "width")
    }

    pub fn method(&self) -> Result<Method> {
        required(&self.method, "method")
    }

    pub fn seed(&self) -> Result<u64> {
        required(&self.seed, "seed")
    }

    pub fn coverage_desc(&self) -> Option<&CoverageModelDesc> {
        match &self.coverage_model {
            Some(CoverageModelChoice::Custom(desc)) => Some(desc),
            _ => None,
        }
    }

    /// Engine settings with defaults for everything unset. `seed` becomes
    /// the base seed (0 when absent).
    pub fn engine(&self) -> Result<EngineConfig> {
        let d = EngineConfig::default();
        if self.train_transactions == Some(0) {
            return Err(Error::Config("train_transactions must be positive".into()));
        }
        let config = EngineConfig {
            train_transactions: self.train_transactions,
            iteration_cap: self.cap.unwrap_or(d.iteration_cap),
            retrain_interval: self.retrain_interval.unwrap_or(d.retrain_interval),
            per_bin_model_attempts: self.per_bin_model_attempts.unwrap_or(d.per_bin_model_attempts),
            goal: self.goal.unwrap_or(d.goal),
            base_seed: self.seed.unwrap_or(d.base_seed),
            bin_order: self.bin_order.unwrap_or(d.bin_order),
            goal_encoding: self.goal_encoding.unwrap_or(d.goal_encoding),
            network: self.network.clone().unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn testbench_at(&self, width: u32) -> Result<Testbench> {
        Testbench::configured(
            self.dut()?,
            width,
            self.coverage_desc(),
            self.constraints.as_ref().unwrap_or(&BTreeMap::new()),
        )
    }

    pub fn testbench(&self) -> Result<Testbench> {
        self.testbench_at(self.width()?)
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let widths = required(&self.widths, "widths")?;
        if widths.is_empty() {
            return Err(Error::Config("`widths` is empty".into()));
        }
        let seeds = required(&self.seeds, "seeds")?;
        if seeds == 0 {
            return Err(Error::Config("`seeds` must be positive".into()));
        }
        let spec = ExperimentSpec {
            dut: self.dut()?,
            widths,
            seeds_per_width: seeds,
            coverage_model: self.coverage_desc().cloned(),
            constraints: self.constraints.clone().unwrap_or_default(),
            engine: self.engine()?,
        };
        // Surface model or constraint errors before any run starts.
        for &w in &spec.widths {
            self.testbench_at(w)?;
        }
        Ok(spec)
    }
}
