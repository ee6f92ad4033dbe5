//! Level-1 large deviations: the explicit linear rate function, constrained
//! minima, law-of-large-numbers estimates and rare-event probabilities by
//! Girsanov importance sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::likelihood::{girsanov_log_ratio, mean_and_std_err, LikelihoodError, LikelihoodRatio};
use crate::models::{IntensityModel, ModelError, RateFn, RateShape};
use crate::simulate::{map_replicas, simulate_path, simulate_start, SimConfig, SimError, Start};

/// Below this effective sample size an estimate is flagged unreliable.
pub const MIN_RELIABLE_ESS: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpError {
    #[error("invalid linear rate parameters: {0}")]
    Params(String),
    #[error("window length {window} exceeds horizon {horizon}")]
    WindowTooLong { window: f64, horizon: f64 },
    #[error("cannot build a mean-matched proposal: {0}")]
    Proposal(String),
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `(ν, ‖h‖)` of a subcritical linear Hawkes process with `λ(z) = ν + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearRateParams {
    nu: f64,
    hnorm: f64,
}

impl LinearRateParams {
    pub fn new(nu: f64, hnorm: f64) -> Result<Self, LdpError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(LdpError::Params(format!("nu must be > 0, got {nu}")));
        }
        if !(0.0..1.0).contains(&hnorm) {
            return Err(LdpError::Params(format!("hnorm must lie in [0, 1), got {hnorm}")));
        }
        Ok(Self { nu, hnorm })
    }

    /// Parameters of a model with a linear rate; a slope `s` rescales the
    /// kernel, so `hnorm = s·‖h‖`.
    pub fn from_model(model: &IntensityModel) -> Option<Self> {
        match model.rate.shape() {
            RateShape::Linear { base, slope } => Self::new(base, slope * model.kernel.l1_norm()).ok(),
            _ => None,
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn hnorm(&self) -> f64 {
        self.hnorm
    }

    /// `μ = ν/(1 − ‖h‖)`
    pub fn mean(&self) -> f64 {
        self.nu / (1.0 - self.hnorm)
    }

    /// `I(x) = x log(x/(ν + x‖h‖)) − x + x‖h‖ + ν` for `x ≥ 0`, `+∞` otherwise.
    pub fn rate_function(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::INFINITY;
        }
        if x == 0.0 {
            return self.nu;
        }
        x * (x / (self.nu + x * self.hnorm)).ln() - x + x * self.hnorm + self.nu
    }

    /// `I'(x) = log(x/(ν + x‖h‖)) + ‖h‖ − x‖h‖/(ν + x‖h‖)`, the optimal tilt.
    pub fn rate_function_slope(&self, x: f64) -> f64 {
        let d = self.nu + x * self.hnorm;
        (x / d).ln() + self.hnorm - x * self.hnorm / d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "side", content = "bound", rename_all = "kebab-case")]
pub enum Constraint {
    AtLeast(f64),
    AtMost(f64),
}

/// `argmin I` over the constraint set, using convexity and `I(μ) = 0`.
pub fn rate_fn_minimum(params: &LinearRateParams, constraint: Constraint) -> (f64, f64) {
    let mu = params.mean();
    let x = match constraint {
        Constraint::AtLeast(a) => a.max(mu),
        Constraint::AtMost(a) => a.min(mu),
    };
    (x, params.rate_function(x))
}

/// The event `{N_t/t ≥ a}` or `{N_t/t ≤ a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "side", content = "threshold", rename_all = "kebab-case")]
pub enum Tail {
    Upper(f64),
    Lower(f64),
}

impl Tail {
    pub fn threshold(&self) -> f64 {
        match *self {
            Tail::Upper(a) | Tail::Lower(a) => a,
        }
    }

    pub fn contains(&self, count: usize, horizon: f64) -> bool {
        let n = count as f64;
        match *self {
            Tail::Upper(a) => n >= a * horizon,
            Tail::Lower(a) => n <= a * horizon,
        }
    }
}

/// Importance-sampling estimate of `P(N_t/t ∈ tail)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RareEventEstimate {
    pub tail: Tail,
    pub horizon: f64,
    pub p_hat: f64,
    /// `−(1/t) log p_hat`; `None` when `p_hat = 0`.
    pub rate_hat: Option<f64>,
    pub std_err: f64,
    /// Delta-method standard error of `rate_hat`.
    pub rate_std_err: Option<f64>,
    pub ess: f64,
    pub replicas: usize,
    pub hits: usize,
    pub proposal: String,
    pub unreliable: bool,
    /// Explicit rate function at the threshold, for linear models.
    pub i_explicit: Option<f64>,
    /// `(rate_hat − I)/I`, for linear models.
    pub relative_gap: Option<f64>,
}

/// Likelihood ratios `dP/dQ` of `model` (P) against `proposal` (Q) along
/// `cfg.replicas` paths drawn from `proposal` on `[0, horizon]`, paired with
/// the event count of each path. Paths start from empty history.
pub fn importance_weights(
    model: &IntensityModel,
    proposal: &IntensityModel,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<Vec<(usize, f64)>, LdpError> {
    let cfg = cfg.with_horizon(horizon);
    map_replicas(cfg.replicas, |r| {
        let path = simulate_path(proposal, &cfg, None, r)?;
        let w = path_weight(model, proposal, &path)?;
        Ok((path.len(), w))
    })
}

fn path_weight(
    model: &IntensityModel,
    proposal: &IntensityModel,
    path: &crate::stream::EventStream,
) -> Result<f64, LdpError> {
    Ok(match girsanov_log_ratio(proposal, model, path)? {
        LikelihoodRatio::Regular(b) => (-b.log_ratio).exp(),
        // The proposal cannot fire where its own intensity vanishes.
        LikelihoodRatio::Singular { event_time, .. } => {
            return Err(LdpError::Proposal(format!("proposal intensity zero at its own event {event_time}")))
        }
    })
}

/// Estimates `P(N_t/t ∈ tail)` under `model` from paths simulated under
/// `proposal`, weighting each path by `exp(−log dQ/dP)`.
pub fn rare_event_probability(
    model: &IntensityModel,
    tail: Tail,
    horizon: f64,
    proposal: &IntensityModel,
    cfg: &SimConfig,
) -> Result<RareEventEstimate, LdpError> {
    let cfg = cfg.with_horizon(horizon);
    cfg.validate()?;
    // lower bound of the base model is needed even when no path hits
    if !(model.rate.lower_bound() > 0.0) {
        return Err(LikelihoodError::NonPositiveLowerBound(model.label.clone()).into());
    }
    let contributions = map_replicas(cfg.replicas, |r| -> Result<f64, LdpError> {
        let path = simulate_path(proposal, &cfg, None, r)?;
        if tail.contains(path.len(), horizon) {
            path_weight(model, proposal, &path)
        } else {
            Ok(0.0)
        }
    })?;
    let (mean, std_err) = mean_and_std_err(&contributions);
    let p_hat = mean.clamp(0.0, 1.0);
    let sum: f64 = contributions.iter().sum();
    let sum_sq: f64 = contributions.iter().map(|w| w * w).sum();
    let ess = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    let hits = contributions.iter().filter(|&&w| w > 0.0).count();
    let rate_hat = (p_hat > 0.0).then(|| -p_hat.ln() / horizon);
    let rate_std_err = (p_hat > 0.0).then(|| std_err / (horizon * p_hat));
    let i_explicit = LinearRateParams::from_model(model).map(|p| p.rate_function(tail.threshold()));
    let relative_gap = match (rate_hat, i_explicit) {
        (Some(r), Some(i)) if i > 0.0 => Some((r - i) / i),
        _ => None,
    };
    Ok(RareEventEstimate {
        tail,
        horizon,
        p_hat,
        rate_hat,
        std_err,
        rate_std_err,
        ess,
        replicas: cfg.replicas,
        hits,
        proposal: proposal.label.clone(),
        unreliable: ess < MIN_RELIABLE_ESS,
        i_explicit,
        relative_gap,
    })
}

/// Runs [`rare_event_probability`] at each horizon.
pub fn rate_ladder(
    model: &IntensityModel,
    tail: Tail,
    horizons: &[f64],
    proposal: &IntensityModel,
    cfg: &SimConfig,
) -> Result<Vec<RareEventEstimate>, LdpError> {
    horizons
        .iter()
        .map(|&t| rare_event_probability(model, tail, t, proposal, cfg))
        .collect()
}

/// Replica-averaged `N_T/T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlnEstimate {
    pub mean_rate: f64,
    pub std_err: f64,
    pub start: Start,
}

pub fn lln_estimate(model: &IntensityModel, cfg: &SimConfig) -> Result<LlnEstimate, LdpError> {
    cfg.validate()?;
    let start = if cfg.burn_in > 0.0 { Start::BurnIn } else { Start::Empty };
    let rates = map_replicas(cfg.replicas, |r| {
        simulate_start(model, cfg, start, r).map(|s| s.len() as f64 / cfg.horizon)
    })?;
    let (mean_rate, std_err) = mean_and_std_err(&rates);
    Ok(LlnEstimate { mean_rate, std_err, start })
}

/// Same kernel, rate shifted by `delta`: `λ(z) + δ` (caps move with it).
fn shifted_rate(rate: &RateFn, delta: f64) -> Result<RateFn, ModelError> {
    match rate.shape() {
        RateShape::Linear { base, slope } => RateFn::linear(base + delta, slope),
        RateShape::Saturating { base, cap, scale } => RateFn::saturating(base + delta, cap + delta, scale),
        RateShape::ClippedLinear { base, cap } => RateFn::clipped_linear(base + delta, cap + delta),
    }
}

/// A proposal from the same family whose law-of-large-numbers mean is
/// `target_mean`.
///
/// Linear models change `ν` to `target_mean·(1 − slope‖h‖)`. Other models
/// shift the whole rate function by a constant found by bisection on pilot
/// LLN estimates (common random numbers from `pilot`).
pub fn mean_matched_proposal(
    model: &IntensityModel,
    target_mean: f64,
    pilot: &SimConfig,
) -> Result<IntensityModel, LdpError> {
    if !(target_mean > 0.0 && target_mean.is_finite()) {
        return Err(LdpError::Proposal(format!("target mean must be > 0, got {target_mean}")));
    }
    if let Some(b) = model.branching_ratio() {
        let RateShape::Linear { slope, .. } = model.rate.shape() else {
            unreachable!()
        };
        let nu = target_mean * (1.0 - b);
        let rate = RateFn::linear(nu, slope)?;
        return Ok(IntensityModel::new(model.kernel.clone(), rate, format!("mean-matched(nu={nu:.6})"))?);
    }
    let base = model.rate.base();
    let mean_at = |delta: f64| -> Result<f64, LdpError> {
        let m = IntensityModel::new(model.kernel.clone(), shifted_rate(&model.rate, delta)?, "pilot")?;
        Ok(lln_estimate(&m, pilot)?.mean_rate)
    };
    let current = mean_at(0.0)?;
    let (mut lo, mut hi) = if target_mean >= current {
        let mut hi = target_mean.max(1.0);
        while mean_at(hi)? < target_mean {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(LdpError::Proposal("no shift reaches the target mean".into()));
            }
        }
        (0.0, hi)
    } else {
        let lo = -base * (1.0 - 1e-9);
        if mean_at(lo)? > target_mean {
            return Err(LdpError::Proposal(format!(
                "target mean {target_mean} below what any non-negative shift reaches"
            )));
        }
        (lo, 0.0)
    };
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid)? < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 * (1.0 + hi.abs()) {
            break;
        }
    }
    let delta = 0.5 * (lo + hi);
    Ok(IntensityModel::new(
        model.kernel.clone(),
        shifted_rate(&model.rate, delta)?,
        format!("mean-matched(shift={delta:.6})"),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LinearRateParams {
        LinearRateParams::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn rate_function_examples() {
        let p = params();
        assert_eq!(p.rate_function(2.0), 0.0);
        assert_eq!(p.rate_function(0.0), 1.0);
        let expected = 3.0 * (3.0f64 / 2.5).ln() - 3.0 + 1.5 + 1.0;
        assert!((p.rate_function(3.0) - expected).abs() < 1e-15);
        assert!((p.rate_function(3.0) - 0.046_964_670_381_863_8).abs() < 1e-12);
        assert_eq!(p.rate_function(-0.1), f64::INFINITY);
        let poisson = LinearRateParams::new(2.0, 0.0).unwrap();
        for x in [0.5, 1.0, 2.0, 3.7] {
            let direct = x * (x / 2.0f64).ln() - x + 2.0;
            assert!((poisson.rate_function(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn rate_function_slope_matches_finite_differences() {
        let p = params();
        for x in [0.5, 1.0, 2.0, 3.0, 4.5] {
            let h = 1e-5;
            let fd = (p.rate_function(x + h) - p.rate_function(x - h)) / (2.0 * h);
            assert!((p.rate_function_slope(x) - fd).abs() < 1e-8);
        }
        assert!(p.rate_function_slope(2.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_examples() {
        let p = params();
        assert_eq!(rate_fn_minimum(&p, Constraint::AtLeast(1.0)), (2.0, 0.0));
        let (x, i) = rate_fn_minimum(&p, Constraint::AtLeast(3.0));
        assert_eq!(x, 3.0);
        assert!((i - 0.046_964_670_381_863_8).abs() < 1e-12);
        assert_eq!(rate_fn_minimum(&p, Constraint::AtMost(0.0)), (0.0, 1.0));
    }

    #[test]
    fn params_validation() {
        assert!(LinearRateParams::new(1.0, 1.0).is_err());
        assert!(LinearRateParams::new(0.0, 0.5).is_err());
        let m = IntensityModel::new(
            crate::models::Kernel::exponential(1.0, 2.0).unwrap(),
            RateFn::linear(1.0, 1.5).unwrap(),
            "scaled",
        )
        .unwrap();
        assert_eq!(LinearRateParams::from_model(&m).unwrap().hnorm(), 0.75);
    }

    #[test]
    fn certain_event_has_unit_weights() {
        let m = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
        let cfg = SimConfig::new(5, 10.0).with_replicas(64);
        let est = rare_event_probability(&m, Tail::Upper(-1.0), 10.0, &m, &cfg).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.rate_hat, Some(0.0));
        assert_eq!(est.ess, 64.0);
        assert!(!est.unreliable);
        let w = importance_weights(&m, &m, 10.0, &cfg).unwrap();
        assert!(w.iter().all(|&(_, w)| w == 1.0));
    }

    #[test]
    fn empty_hit_set_is_flagged() {
        let m = IntensityModel::poisson(1.0).unwrap();
        let cfg = SimConfig::new(5, 10.0).with_replicas(20);
        let est = rare_event_probability(&m, Tail::Upper(50.0), 10.0, &m, &cfg).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.rate_hat, None);
        assert!(est.unreliable);
    }

    #[test]
    fn linear_mean_matching_is_closed_form() {
        let m = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
        let q = mean_matched_proposal(&m, 3.0, &SimConfig::new(1, 10.0)).unwrap();
        assert_eq!(q.rate.base(), 1.5);
        assert_eq!(q.lln_mean(), Some(3.0));
    }
}
