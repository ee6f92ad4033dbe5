//! Finite realisations of a simple point process on `(0, T]` with an optional past.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("event times must be strictly increasing (violated at {0})")]
    NotIncreasing(f64),
    #[error("event time {time} outside (0, {horizon}]")]
    OutOfWindow { time: f64, horizon: f64 },
    #[error("history time {0} is positive")]
    HistoryInFuture(f64),
}

/// Sorted event times in `(0, horizon]` plus a history in `(−∞, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    horizon: f64,
    times: Vec<f64>,
    history: Vec<f64>,
}

fn check_increasing(xs: &[f64]) -> Result<(), StreamError> {
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(StreamError::NotIncreasing(w[1]));
        }
    }
    Ok(())
}

impl EventStream {
    pub fn new(horizon: f64, times: Vec<f64>, history: Vec<f64>) -> Result<Self, StreamError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(StreamError::Horizon(horizon));
        }
        check_increasing(&times)?;
        check_increasing(&history)?;
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0 && t <= horizon)) {
            return Err(StreamError::OutOfWindow { time: t, horizon });
        }
        if let Some(&t) = history.iter().find(|&&t| !(t <= 0.0)) {
            return Err(StreamError::HistoryInFuture(t));
        }
        Ok(Self { horizon, times, history })
    }

    pub fn empty(horizon: f64) -> Result<Self, StreamError> {
        Self::new(horizon, Vec::new(), Vec::new())
    }

    pub(crate) fn from_parts_unchecked(horizon: f64, times: Vec<f64>, history: Vec<f64>) -> Self {
        debug_assert!(Self::new(horizon, times.clone(), history.clone()).is_ok());
        Self { horizon, times, history }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// `N_T`
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// History followed by realised events, ascending.
    pub fn all_events(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().chain(self.times.iter()).copied()
    }

    /// `N(a, b]` over history and realised events.
    pub fn count(&self, a: f64, b: f64) -> usize {
        if b <= a {
            return 0;
        }
        let in_slice = |xs: &[f64]| xs.partition_point(|&x| x <= b) - xs.partition_point(|&x| x <= a);
        in_slice(&self.history) + in_slice(&self.times)
    }

    /// `N[a, b]`, closed on both ends.
    pub fn count_closed(&self, a: f64, b: f64) -> usize {
        if b < a {
            return 0;
        }
        let in_slice = |xs: &[f64]| xs.partition_point(|&x| x <= b) - xs.partition_point(|&x| x < a);
        in_slice(&self.history) + in_slice(&self.times)
    }

    /// `N_t = N(0, t]`
    pub fn counting(&self, t: f64) -> usize {
        self.count(0.0, t)
    }

    /// Same realisation restricted to `(0, upto]`.
    pub fn truncated(&self, upto: f64) -> Result<Self, StreamError> {
        let n = self.times.partition_point(|&t| t <= upto);
        Self::new(upto, self.times[..n].to_vec(), self.history.clone())
    }

    /// Shift `θ_{t0}`: the window `(t0, T]` becomes `(0, T − t0]` and everything
    /// at or before `t0` joins the history.
    pub fn shifted(&self, t0: f64) -> Result<Self, StreamError> {
        if !(t0 >= 0.0 && t0 < self.horizon) {
            return Err(StreamError::OutOfWindow { time: t0, horizon: self.horizon });
        }
        let split = self.times.partition_point(|&t| t <= t0);
        let history = self
            .all_events()
            .take(self.history.len() + split)
            .map(|t| t - t0)
            .collect();
        let times = self.times[split..].iter().map(|t| t - t0).collect();
        Self::new(self.horizon - t0, times, history)
    }

    /// Drops history events older than `keep` before time zero.
    pub fn with_history_trimmed(mut self, keep: f64) -> Self {
        let start = self.history.partition_point(|&t| t < -keep);
        self.history.drain(..start);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EventStream::new(1.0, vec![0.5, 0.5], vec![]).is_err());
        assert!(EventStream::new(1.0, vec![0.0], vec![]).is_err());
        assert!(EventStream::new(1.0, vec![1.5], vec![]).is_err());
        assert!(EventStream::new(1.0, vec![1.0], vec![-1.0, 0.0]).is_ok());
        assert!(EventStream::new(1.0, vec![], vec![0.1]).is_err());
        assert!(EventStream::new(0.0, vec![], vec![]).is_err());
    }

    #[test]
    fn counts() {
        let s = EventStream::new(5.0, vec![1.0, 2.0, 3.0, 5.0], vec![-2.0, 0.0]).unwrap();
        assert_eq!(s.counting(5.0), 4);
        assert_eq!(s.count(1.0, 3.0), 2);
        assert_eq!(s.count_closed(1.0, 3.0), 3);
        assert_eq!(s.count(-3.0, 0.0), 2);
        assert_eq!(s.counting(0.5), 0);
    }

    #[test]
    fn shift_moves_past_into_history() {
        let s = EventStream::new(4.0, vec![1.0, 2.0, 3.0], vec![-1.0]).unwrap();
        let w = s.shifted(2.0).unwrap();
        assert_eq!(w.horizon(), 2.0);
        assert_eq!(w.times(), &[1.0]);
        assert_eq!(w.history(), &[-3.0, -1.0, 0.0]);
        let t = s.truncated(2.5).unwrap();
        assert_eq!(t.times(), &[1.0, 2.0]);
    }
}
