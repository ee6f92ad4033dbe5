//! Run configuration: a strict TOML document naming a model, simulation
//! parameters and one task.
//!
//! ```toml
//! task = "rare-event"
//!
//! [model.kernel]
//! shape = "exponential"
//! amplitude = 1.0
//! decay = 2.0
//!
//! [model.rate]
//! shape = "linear"
//! base = 1.0
//!
//! [sim]
//! seed = 7
//! horizon = 100.0
//! replicas = 2000
//!
//! [rare_event]
//! threshold = 3.0
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::empirical::{WindowFunctional, WindowStatistic};
use crate::models::{IntensityModel, Interpolation, Kernel, ModelError, RateFn};
use crate::simulate::{SimConfig, DEFAULT_MAX_EVENTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError::Validation {
            field: field.into(),
            message: message.to_string(),
        }
    }

    fn missing(field: &str) -> Self {
        Self::invalid(field, "required field is missing")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    Loglik,
    Entropy,
    RateFn,
    RareEvent,
    Empirical,
    Lln,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Simulate => "simulate",
            Task::Loglik => "loglik",
            Task::Entropy => "entropy",
            Task::RateFn => "rate-fn",
            Task::RareEvent => "rare-event",
            Task::Empirical => "empirical",
            Task::Lln => "lln",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    Exponential {
        amplitude: f64,
        decay: f64,
    },
    PowerLaw {
        amplitude: f64,
        offset: f64,
        exponent: f64,
    },
    Table {
        knots: Vec<[f64; 2]>,
        #[serde(default = "default_interpolation")]
        interpolation: Interpolation,
    },
}

fn default_interpolation() -> Interpolation {
    Interpolation::Linear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateSpec {
    Linear {
        base: f64,
        #[serde(default = "one")]
        slope: f64,
    },
    Saturating {
        base: f64,
        cap: f64,
        scale: f64,
    },
    ClippedLinear {
        base: f64,
        cap: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub kernel: KernelSpec,
    pub rate: RateSpec,
}

impl ModelSpec {
    pub fn build(&self, field: &str) -> Result<IntensityModel, ConfigError> {
        let err = |e: ModelError| ConfigError::invalid(field, e);
        let kernel = match &self.kernel {
            KernelSpec::Exponential { amplitude, decay } => Kernel::exponential(*amplitude, *decay),
            KernelSpec::PowerLaw { amplitude, offset, exponent } => Kernel::power_law(*amplitude, *offset, *exponent),
            KernelSpec::Table { knots, interpolation } => {
                Kernel::table(knots.iter().map(|k| (k[0], k[1])).collect(), *interpolation)
            }
        }
        .map_err(err)?;
        let rate = match self.rate {
            RateSpec::Linear { base, slope } => RateFn::linear(base, slope),
            RateSpec::Saturating { base, cap, scale } => RateFn::saturating(base, cap, scale),
            RateSpec::ClippedLinear { base, cap } => RateFn::clipped_linear(base, cap),
        }
        .map_err(err)?;
        let label = self.label.clone().unwrap_or_else(|| field.to_string());
        IntensityModel::new(kernel, rate, label).map_err(err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default)]
    pub seed: u64,
    pub horizon: f64,
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default = "one_usize")]
    pub replicas: usize,
    #[serde(default = "default_max_events")]
    pub max_events: usize,
}

fn one_usize() -> usize {
    1
}

fn default_max_events() -> usize {
    DEFAULT_MAX_EVENTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoglikSpec {
    pub target: Option<ModelSpec>,
    /// CSV of a stream to evaluate instead of simulated paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySpec {
    /// The law `Q` that paths are drawn from.
    pub q: Option<ModelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateFnSpec {
    #[serde(default)]
    pub start: f64,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RareEventSpec {
    pub threshold: Option<f64>,
    #[serde(default = "upper")]
    pub tail: TailSide,
    /// Horizon ladder; defaults to `[sim.horizon]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
    /// Defaults to the mean-matched proposal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<ModelSpec>,
}

fn upper() -> TailSide {
    TailSide::Upper
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSpec {
    #[serde(default = "one")]
    pub window: f64,
    #[serde(default = "count")]
    pub statistic: WindowStatistic,
}

fn count() -> WindowStatistic {
    WindowStatistic::Count
}

impl EmpiricalSpec {
    pub fn functional(&self) -> WindowFunctional {
        WindowFunctional::new(self.window, self.statistic.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Also write `events_<replica>.bin`.
    #[serde(default)]
    pub binary: bool,
}

/// A fully parsed and validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelSpec,
    pub sim: SimSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglik: Option<LoglikSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_fn: Option<RateFnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_event: Option<RareEventSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parses and validates a TOML run description. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim().replace('\n', " ")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let model = self.model.build("model")?;
        self.sim_config()
            .validate()
            .map_err(|e| ConfigError::invalid("sim", e))?;
        match self.task {
            Task::Simulate | Task::Lln => {}
            Task::Loglik => {
                let spec = self.loglik.as_ref().ok_or_else(|| ConfigError::missing("loglik.target"))?;
                let target = spec.target.as_ref().ok_or_else(|| ConfigError::missing("loglik.target"))?;
                target.build("loglik.target")?;
                if !(model.rate.lower_bound() > 0.0) {
                    return Err(ConfigError::invalid("model.rate", "base model needs λ(0) > 0"));
                }
            }
            Task::Entropy => {
                let q = self
                    .entropy
                    .as_ref()
                    .and_then(|e| e.q.as_ref())
                    .ok_or_else(|| ConfigError::missing("entropy.q"))?;
                q.build("entropy.q")?;
                if !(model.rate.lower_bound() > 0.0) {
                    return Err(ConfigError::invalid("model.rate", "reference model needs λ(0) > 0"));
                }
            }
            Task::RateFn => {
                let spec = self.rate_fn.as_ref().ok_or_else(|| ConfigError::missing("rate_fn.stop"))?;
                let stop = spec.stop.ok_or_else(|| ConfigError::missing("rate_fn.stop"))?;
                let step = spec.step.ok_or_else(|| ConfigError::missing("rate_fn.step"))?;
                if !(step > 0.0) || !(stop >= spec.start) || spec.start < 0.0 {
                    return Err(ConfigError::invalid("rate_fn", "need 0 ≤ start ≤ stop and step > 0"));
                }
                if crate::ldp::LinearRateParams::from_model(&model).is_none() {
                    return Err(ConfigError::invalid(
                        "model.rate",
                        "rate-fn needs a linear rate with base > 0 (explicit rate function)",
                    ));
                }
            }
            Task::RareEvent => {
                let spec = self
                    .rare_event
                    .as_ref()
                    .ok_or_else(|| ConfigError::missing("rare_event.threshold"))?;
                let a = spec.threshold.ok_or_else(|| ConfigError::missing("rare_event.threshold"))?;
                if !a.is_finite() {
                    return Err(ConfigError::invalid("rare_event.threshold", "must be finite"));
                }
                if let Some(hs) = &spec.horizons {
                    if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0)) {
                        return Err(ConfigError::invalid("rare_event.horizons", "need positive horizons"));
                    }
                }
                if let Some(p) = &spec.proposal {
                    p.build("rare_event.proposal")?;
                }
                if !(model.rate.lower_bound() > 0.0) {
                    return Err(ConfigError::invalid("model.rate", "model needs λ(0) > 0"));
                }
            }
            Task::Empirical => {
                let window = self.empirical.as_ref().map_or(1.0, |e| e.window);
                if !(window > 0.0 && window <= self.sim.horizon) {
                    return Err(ConfigError::invalid("empirical.window", "need 0 < window ≤ sim.horizon"));
                }
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.sim.seed,
            horizon: self.sim.horizon,
            burn_in: self.sim.burn_in,
            replicas: self.sim.replicas,
            max_events: self.sim.max_events,
        }
    }

    pub fn model(&self) -> Result<IntensityModel, ConfigError> {
        self.model.build("model")
    }

    /// Hash of the semantic content (output settings excluded). Independent of
    /// key order in the source document.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let canonical = serde_json::to_string(&value).expect("json");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to toml")
    }
}
