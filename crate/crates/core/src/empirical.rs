//! Functionals of the empirical process measure
//! `R_{t,ω}(f) = (1/t) ∫_0^t f(θ_s ω_t) ds`, where `ω_t` repeats the path on
//! `(0, t]` with period `t`.
//!
//! The integrand only changes when an event enters or leaves the window
//! `[s, s + L]`, i.e. at `s = τ` and `s = τ − L` (mod t), so the integral is an
//! exact finite sum over that partition.

use serde::{Deserialize, Serialize};

use crate::ldp::LdpError;
use crate::stream::EventStream;

/// Statistic of the event pattern inside a window of length `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowStatistic {
    /// `N[0, L]`
    Count,
    /// `1{N[0, L] ≥ m}`
    AtLeast { m: usize },
    /// `N[0, L]·1{N[0, L] ≥ min}`
    TruncatedCount { min: usize },
    /// Mean gap between consecutive events in the window, 0 with fewer than two.
    MeanGap,
    /// Smallest gap between consecutive events in the window, 0 with fewer than two.
    MinGap,
    Sum { terms: Vec<WindowStatistic> },
}

impl WindowStatistic {
    /// Evaluates on the sorted event positions inside the window.
    pub fn eval(&self, positions: &[f64]) -> f64 {
        let n = positions.len();
        match self {
            WindowStatistic::Count => n as f64,
            WindowStatistic::AtLeast { m } => f64::from(u8::from(n >= *m)),
            WindowStatistic::TruncatedCount { min } => {
                if n >= *min {
                    n as f64
                } else {
                    0.0
                }
            }
            WindowStatistic::MeanGap => {
                if n < 2 {
                    0.0
                } else {
                    (positions[n - 1] - positions[0]) / (n - 1) as f64
                }
            }
            WindowStatistic::MinGap => positions
                .windows(2)
                .map(|w| w[1] - w[0])
                .reduce(f64::min)
                .unwrap_or(0.0),
            WindowStatistic::Sum { terms } => terms.iter().map(|t| t.eval(positions)).sum(),
        }
    }
}

/// A window length together with the statistic evaluated on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFunctional {
    pub window: f64,
    pub statistic: WindowStatistic,
}

impl WindowFunctional {
    pub fn new(window: f64, statistic: WindowStatistic) -> Self {
        Self { window, statistic }
    }

    /// `N[0, L]`
    pub fn count(window: f64) -> Self {
        Self::new(window, WindowStatistic::Count)
    }
}

/// Events of `ω_t` over three periods, `(−t, 2t]`, sorted.
pub fn periodized(stream: &EventStream) -> Vec<f64> {
    let t = stream.horizon();
    let base = stream.times();
    let mut out = Vec::with_capacity(3 * base.len());
    out.extend(base.iter().map(|x| x - t));
    out.extend_from_slice(base);
    out.extend(base.iter().map(|x| x + t));
    out
}

/// `R_{t,ω}(f)` computed exactly over the piecewise-constant partition.
pub fn empirical_functional(stream: &EventStream, f: &WindowFunctional) -> Result<f64, LdpError> {
    let t = stream.horizon();
    let len = f.window;
    if !(len > 0.0 && len <= t) {
        return Err(LdpError::WindowTooLong { window: len, horizon: t });
    }
    let events = periodized(stream);
    let mut cuts: Vec<f64> = Vec::with_capacity(2 * stream.len() + 2);
    cuts.push(0.0);
    cuts.push(t);
    for &tau in stream.times() {
        cuts.push(tau.rem_euclid(t));
        cuts.push((tau - len).rem_euclid(t));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let s = 0.5 * (w[0] + w[1]);
        let lo = events.partition_point(|&x| x < s);
        let hi = events.partition_point(|&x| x <= s + len);
        let positions: Vec<f64> = events[lo..hi].iter().map(|x| x - s).collect();
        total += f.statistic.eval(&positions) * width;
    }
    Ok(total / t)
}
