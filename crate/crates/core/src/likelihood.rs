//! Compensators, Girsanov log-likelihood ratios between two intensity models on
//! a common path, and ergodic estimates of the relative-entropy rate.
//!
//! For a target intensity `λ̂` and base intensity `λ` on the same stream,
//!
//! ```text
//! log dQ/dP |_{[0,T]} = ∫_0^T (λ − λ̂) ds + ∫_0^T log(λ̂/λ) dN_s
//! ```
//!
//! and the entropy rate is the stationary time-average of
//! `λ − λ̂ + λ̂ log(λ̂/λ)`, which is pointwise non-negative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::excitation::{excitation_at_events, Profile, Tracker};
use crate::models::{IntensityModel, Kernel, RateShape};
use crate::quadrature::integrate;
use crate::simulate::{burn_in_stationarize, map_replicas, SimConfig, SimError};
use crate::stream::EventStream;

/// Relative accuracy requested from quadrature on each event-free segment.
pub const SEGMENT_REL_TOL: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LikelihoodError {
    #[error("base model `{0}` needs a positive lower bound on its rate")]
    NonPositiveLowerBound(String),
    #[error("absolute continuity violated: base intensity is zero at event t = {0}")]
    AbsoluteContinuity(f64),
    #[error("integration limit {upto} outside [0, {horizon}]")]
    Range { upto: f64, horizon: f64 },
    #[error("entropy estimate {rate} below −3 s.e. ({std_err})")]
    Sanity { rate: f64, std_err: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Terms of the Girsanov log-likelihood ratio on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirsanovBreakdown {
    /// `∫(λ − λ̂) ds`
    pub compensator_diff: f64,
    /// `∫ log(λ̂/λ) dN`
    pub jump_term: f64,
    /// `compensator_diff + jump_term`
    pub log_ratio: f64,
    pub horizon: f64,
}

/// Result of a likelihood-ratio evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LikelihoodRatio {
    Regular(GirsanovBreakdown),
    /// The target intensity vanishes at an observed event; the ratio is zero
    /// (log-ratio −∞).
    Singular { event_time: f64, horizon: f64 },
}

impl LikelihoodRatio {
    pub fn breakdown(&self) -> Option<&GirsanovBreakdown> {
        match self {
            LikelihoodRatio::Regular(b) => Some(b),
            LikelihoodRatio::Singular { .. } => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, LikelihoodRatio::Singular { .. })
    }

    /// `log dQ/dP`, `None` when singular.
    pub fn log_ratio(&self) -> Option<f64> {
        self.breakdown().map(|b| b.log_ratio)
    }

    /// `dQ/dP`.
    pub fn ratio(&self) -> f64 {
        self.log_ratio().map_or(0.0, f64::exp)
    }
}

/// Walks the event-free segments of `(0, upto]`, handing each visitor the
/// excitation profile of every kernel. `extra` adds breakpoints.
fn for_each_segment(
    kernels: &[&Kernel],
    stream: &EventStream,
    upto: f64,
    extra: &[f64],
    mut visit: impl FnMut(f64, f64, &[Profile<'_>]),
) {
    let mut trackers: Vec<Tracker<'_>> = kernels.iter().map(|k| Tracker::new(k, stream.history(), 0.0)).collect();
    let needs_knots: Vec<Vec<f64>> = kernels
        .iter()
        .filter_map(|k| k.knot_times().map(|it| it.collect::<Vec<_>>()))
        .collect();
    let table_cutoff = kernels
        .iter()
        .filter(|k| k.has_compact_support())
        .map(|k| k.cutoff())
        .fold(0.0, f64::max);

    let mut cuts: Vec<f64> = Vec::new();
    let mut run = |a: f64, b: f64, trackers: &mut Vec<Tracker<'_>>| {
        if b <= a {
            return;
        }
        cuts.clear();
        cuts.push(a);
        cuts.extend(extra.iter().copied().filter(|&x| x > a && x < b));
        if !needs_knots.is_empty() {
            let lo = a - table_cutoff;
            for tau in stream.all_events().filter(|&t| t <= a && t >= lo) {
                for knots in &needs_knots {
                    cuts.extend(knots.iter().map(|k| tau + k).filter(|&x| x > a && x < b));
                }
            }
        }
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let profiles: Vec<Profile<'_>> = trackers.iter_mut().map(|t| t.profile(w[0])).collect();
            visit(w[0], w[1], &profiles);
        }
    };

    let mut prev = 0.0;
    for &tau in stream.times() {
        if tau >= upto {
            break;
        }
        run(prev, tau, &mut trackers);
        for t in trackers.iter_mut() {
            t.push(tau);
        }
        prev = tau;
    }
    run(prev, upto, &mut trackers);
}

/// `∫_0^upto λ_s ds` along `stream`.
///
/// Closed form per segment for constant rates and for linear rates with an
/// exponential kernel; adaptive quadrature otherwise.
pub fn compensator(model: &IntensityModel, stream: &EventStream, upto: f64) -> Result<f64, LikelihoodError> {
    if !(0.0..=stream.horizon()).contains(&upto) {
        return Err(LikelihoodError::Range { upto, horizon: stream.horizon() });
    }
    if model.is_poisson() {
        return Ok(model.rate.value(0.0) * upto);
    }
    let linear = match model.rate.shape() {
        RateShape::Linear { base, slope } => Some((base, slope)),
        _ => None,
    };
    let mut total = 0.0;
    for_each_segment(&[&model.kernel], stream, upto, &[], |a, b, profiles| {
        total += match (profiles[0], linear) {
            (Profile::Decaying { z0, decay, .. }, Some((base, slope))) => {
                base * (b - a) + slope * z0 * (-(-decay * (b - a)).exp_m1()) / decay
            }
            (profile, _) => {
                let f = |s: f64| model.rate.value(profile.at(s));
                let scale = f(a).max(1.0);
                integrate(f, a, b, SEGMENT_REL_TOL * (b - a) * scale)
            }
        };
    });
    Ok(total)
}

/// `log dQ/dP` on `[0, horizon]` with `target` as `Q` (intensity `λ̂`) and
/// `base` as `P` (intensity `λ`), both evaluated on `stream`.
pub fn girsanov_log_ratio(
    target: &IntensityModel,
    base: &IntensityModel,
    stream: &EventStream,
) -> Result<LikelihoodRatio, LikelihoodError> {
    if !(base.rate.lower_bound() > 0.0) {
        return Err(LikelihoodError::NonPositiveLowerBound(base.label.clone()));
    }
    let horizon = stream.horizon();
    let z_target = excitation_at_events(&target.kernel, stream);
    let z_base = excitation_at_events(&base.kernel, stream);
    let mut jump_term = 0.0;
    for ((&t, &zt), &zb) in stream.times().iter().zip(&z_target).zip(&z_base) {
        let lambda_hat = target.rate.value(zt);
        let lambda = base.rate.value(zb);
        if !(lambda > 0.0) {
            return Err(LikelihoodError::AbsoluteContinuity(t));
        }
        if !(lambda_hat > 0.0) {
            return Ok(LikelihoodRatio::Singular { event_time: t, horizon });
        }
        jump_term += lambda_hat.ln() - lambda.ln();
    }
    let compensator_diff = compensator(base, stream, horizon)? - compensator(target, stream, horizon)?;
    Ok(LikelihoodRatio::Regular(GirsanovBreakdown {
        compensator_diff,
        jump_term,
        log_ratio: compensator_diff + jump_term,
        horizon,
    }))
}

/// `λ − λ̂ + λ̂ log(λ̂/λ)`, the pointwise entropy density; `+∞` when `λ = 0 < λ̂`.
#[inline]
pub fn entropy_density(lambda: f64, lambda_hat: f64) -> f64 {
    if lambda_hat == 0.0 {
        return lambda;
    }
    if lambda == 0.0 {
        return f64::INFINITY;
    }
    lambda - lambda_hat + lambda_hat * (lambda_hat / lambda).ln()
}

/// Time integrals of the entropy density over the two halves of `(0, T]`.
pub fn entropy_integral(
    q_model: &IntensityModel,
    p_model: &IntensityModel,
    stream: &EventStream,
) -> (f64, f64) {
    let horizon = stream.horizon();
    let mid = 0.5 * horizon;
    let (mut first, mut second) = (0.0, 0.0);
    for_each_segment(
        &[&q_model.kernel, &p_model.kernel],
        stream,
        horizon,
        &[mid],
        |a, b, profiles| {
            let (pq, pp) = (profiles[0], profiles[1]);
            let f = |s: f64| entropy_density(p_model.rate.value(pp.at(s)), q_model.rate.value(pq.at(s)));
            let scale = f(a).abs().max(1.0);
            let v = integrate(f, a, b, SEGMENT_REL_TOL * (b - a) * scale);
            if b <= mid {
                first += v;
            } else {
                second += v;
            }
        },
    );
    (first, second)
}

/// Replica-averaged entropy-rate estimate with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub rate: f64,
    pub std_err: f64,
    pub replicas: usize,
    /// Second-half minus first-half time average, a nonstationarity indicator.
    pub half_difference: f64,
    /// `max kernel tail(burn_in) × mean event rate`: weight of the discarded past.
    pub truncation_bias: f64,
    pub per_replica: Vec<f64>,
}

/// Ergodic average of `λ_P − λ_Q + λ_Q log(λ_Q/λ_P)` along burned-in paths
/// simulated under `q_model`.
pub fn entropy_rate(
    q_model: &IntensityModel,
    p_model: &IntensityModel,
    cfg: &SimConfig,
) -> Result<EntropyEstimate, LikelihoodError> {
    if !(p_model.rate.lower_bound() > 0.0) {
        return Err(LikelihoodError::NonPositiveLowerBound(p_model.label.clone()));
    }
    cfg.validate()?;
    let horizon = cfg.horizon;
    let rows = map_replicas(cfg.replicas, |r| -> Result<_, LikelihoodError> {
        let path = burn_in_stationarize(q_model, cfg, r)?;
        let (first, second) = entropy_integral(q_model, p_model, &path);
        Ok((
            (first + second) / horizon,
            second / (0.5 * horizon) - first / (0.5 * horizon),
            path.len() as f64 / horizon,
        ))
    })?;
    let n = rows.len() as f64;
    let per_replica: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (rate, std_err) = mean_and_std_err(&per_replica);
    let half_difference = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let mean_rate = rows.iter().map(|r| r.2).sum::<f64>() / n;
    let tail = q_model.kernel.tail(cfg.burn_in).max(p_model.kernel.tail(cfg.burn_in));
    if rate < -3.0 * std_err {
        return Err(LikelihoodError::Sanity { rate, std_err });
    }
    Ok(EntropyEstimate {
        rate,
        std_err,
        replicas: cfg.replicas,
        half_difference,
        truncation_bias: tail * mean_rate,
        per_replica,
    })
}

/// Sample mean and its standard error (0 for a single sample).
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
