//! Exact simulation of (non)linear Hawkes paths by thinning.
//!
//! Between events the excitation `Z_s` is non-increasing (h is non-increasing)
//! and `λ(·)` is non-decreasing, so `λ(Z)` evaluated at the current time bounds
//! the intensity until the next event. The bound is re-anchored at every
//! accepted and rejected candidate, which makes the scheme exact without an
//! envelope parameter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::excitation::{stream_excitation, Tracker};
use crate::models::IntensityModel;
use crate::stream::{EventStream, StreamError};

pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("explosion guard: more than {0} events")]
    Explosion(usize),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Seed, horizon and replica count shared by every Monte Carlo routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: f64,
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_max_events")]
    pub max_events: usize,
}

fn default_replicas() -> usize {
    1
}

fn default_max_events() -> usize {
    DEFAULT_MAX_EVENTS
}

impl SimConfig {
    pub fn new(seed: u64, horizon: f64) -> Self {
        Self {
            seed,
            horizon,
            burn_in: 0.0,
            replicas: 1,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn with_replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Config(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return Err(SimError::Config(format!("burn_in must be ≥ 0, got {}", self.burn_in)));
        }
        if self.replicas == 0 {
            return Err(SimError::Config("replicas must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Independent generator for one replica: the seed selects the key, the
    /// replica index selects the ChaCha stream.
    pub fn replica_rng(&self, replica: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replica as u64);
        rng
    }
}

/// Initial condition of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// No past events (the law `P^∅`).
    Empty,
    /// Simulated from empty over `[−burn_in, 0]` first.
    BurnIn,
}

/// Intensity `λ(Σ_{τ<t} h(t − τ))` at `t` along `stream`; events at `t` itself
/// do not count.
pub fn intensity_at(model: &IntensityModel, stream: &EventStream, t: f64) -> f64 {
    model.rate.value(stream_excitation(&model.kernel, stream, t))
}

/// One exact draw on `(0, horizon]` given `history` (times ≤ 0).
pub fn simulate_with_rng<R: Rng + ?Sized>(
    model: &IntensityModel,
    horizon: f64,
    history: &[f64],
    max_events: usize,
    rng: &mut R,
) -> Result<EventStream, SimError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::Config(format!("horizon must be > 0, got {horizon}")));
    }
    let mut times = Vec::new();
    if model.is_poisson() {
        // λ is constant; skip the excitation bookkeeping.
        let rate = model.rate.value(0.0);
        if rate > 0.0 {
            let mut s = 0.0;
            loop {
                let gap: f64 = rng.sample(Exp1);
                s += gap / rate;
                if s > horizon {
                    break;
                }
                if times.last().is_some_and(|&last| s <= last) {
                    continue;
                }
                if times.len() >= max_events {
                    return Err(SimError::Explosion(max_events));
                }
                times.push(s);
            }
        }
        return Ok(EventStream::from_parts_unchecked(horizon, times, history.to_vec()));
    }

    let mut tracker = Tracker::new(&model.kernel, history, 0.0);
    let mut s = 0.0;
    let mut bound = model.rate.value(tracker.value(s));
    while bound > 0.0 {
        let gap: f64 = rng.sample(Exp1);
        let u = s + gap / bound;
        if u > horizon {
            break;
        }
        if u <= s {
            continue;
        }
        let lambda_u = model.rate.value(tracker.value(u));
        let accept: f64 = rng.random();
        if accept * bound <= lambda_u {
            if times.len() >= max_events {
                return Err(SimError::Explosion(max_events));
            }
            times.push(u);
            tracker.push(u);
            bound = model.rate.value(tracker.value(u));
        } else {
            bound = lambda_u;
        }
        s = u;
    }
    Ok(EventStream::from_parts_unchecked(horizon, times, history.to_vec()))
}

/// Path from the given history (empty history gives `P^∅`).
pub fn simulate_path(
    model: &IntensityModel,
    cfg: &SimConfig,
    history: Option<&EventStream>,
    replica: usize,
) -> Result<EventStream, SimError> {
    cfg.validate()?;
    let mut rng = cfg.replica_rng(replica);
    let past: Vec<f64> = history.map(|h| h.all_events().filter(|&t| t <= 0.0).collect()).unwrap_or_default();
    simulate_with_rng(model, cfg.horizon, &past, cfg.max_events, &mut rng)
}

/// Simulates on `[−burn_in, T]` from empty and returns the window `(0, T]`
/// with everything before it as history.
pub fn burn_in_stationarize(
    model: &IntensityModel,
    cfg: &SimConfig,
    replica: usize,
) -> Result<EventStream, SimError> {
    cfg.validate()?;
    if cfg.burn_in == 0.0 {
        return simulate_path(model, cfg, None, replica);
    }
    let mut rng = cfg.replica_rng(replica);
    let long = simulate_with_rng(model, cfg.burn_in + cfg.horizon, &[], cfg.max_events, &mut rng)?;
    let split = long.times().partition_point(|&t| t <= cfg.burn_in);
    let history = long.times()[..split].iter().map(|t| t - cfg.burn_in).collect();
    let times = long.times()[split..]
        .iter()
        .map(|t| t - cfg.burn_in)
        .filter(|&t| t > 0.0)
        .collect();
    Ok(EventStream::from_parts_unchecked(cfg.horizon, times, history))
}

/// Path with the requested initial condition.
pub fn simulate_start(
    model: &IntensityModel,
    cfg: &SimConfig,
    start: Start,
    replica: usize,
) -> Result<EventStream, SimError> {
    match start {
        Start::Empty => simulate_path(model, cfg, None, replica),
        Start::BurnIn => burn_in_stationarize(model, cfg, replica),
    }
}

/// Maps `f` over replica indices `0..n`, in parallel when enabled. Results keep
/// replica order.
pub fn map_replicas<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// `cfg.replicas` independent paths.
pub fn simulate_replicas(
    model: &IntensityModel,
    cfg: &SimConfig,
    start: Start,
) -> Result<Vec<EventStream>, SimError> {
    cfg.validate()?;
    map_replicas(cfg.replicas, |r| simulate_start(model, cfg, start, r))
}
