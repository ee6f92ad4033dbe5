//! Accumulated excitation `Z_t = Σ_{τ} h(t − τ)`.
//!
//! Two evaluation routes exist: a direct sum over the events inside the kernel
//! cutoff, and an O(1) recursion for exponential kernels,
//! `Z(t) = Z(t_k⁺)·e^{−β(t − t_k)}`, `Z(t_k⁺) = Z(t_k) + a`.

use crate::models::Kernel;
use crate::stream::EventStream;

/// Direct sum over events strictly before `t` (the predictable convention).
pub fn excitation_before(kernel: &Kernel, events: &[f64], t: f64) -> f64 {
    if kernel.is_zero() {
        return 0.0;
    }
    let hi = events.partition_point(|&tau| tau < t);
    let lo = events[..hi].partition_point(|&tau| t - tau > kernel.cutoff());
    events[lo..hi].iter().map(|&tau| kernel.eval(t - tau)).sum()
}

/// Direct sum over events at or before `t` (the right limit `Z(t⁺)`).
pub fn excitation_after(kernel: &Kernel, events: &[f64], t: f64) -> f64 {
    if kernel.is_zero() {
        return 0.0;
    }
    let hi = events.partition_point(|&tau| tau <= t);
    let lo = events[..hi].partition_point(|&tau| t - tau > kernel.cutoff());
    events[lo..hi].iter().map(|&tau| kernel.eval(t - tau)).sum()
}

/// `Σ_{τ < t} h(t − τ)` over history and realised events of `stream`.
pub fn stream_excitation(kernel: &Kernel, stream: &EventStream, t: f64) -> f64 {
    excitation_before(kernel, stream.history(), t) + excitation_before(kernel, stream.times(), t)
}

/// Excitation just before each realised event, by the exponential recursion
/// when available and by direct sums otherwise.
pub fn excitation_at_events(kernel: &Kernel, stream: &EventStream) -> Vec<f64> {
    let mut tracker = Tracker::new(kernel, stream.history(), 0.0);
    stream
        .times()
        .iter()
        .map(|&t| {
            let z = tracker.value(t);
            tracker.push(t);
            z
        })
        .collect()
}

/// Incremental excitation state along a growing, time-ordered event list.
///
/// `value(t)` returns `Σ_{τ ≤ t} h(t − τ)` over the events pushed so far and
/// requires non-decreasing query times.
#[derive(Debug, Clone)]
pub(crate) struct Tracker<'k> {
    kernel: &'k Kernel,
    mode: Mode,
    events: Vec<f64>,
    live_start: usize,
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Zero,
    Exponential { amplitude: f64, decay: f64, anchor_t: f64, anchor_z: f64 },
    Direct,
}

impl<'k> Tracker<'k> {
    /// Starts at `t0` with `history` (all times ≤ `t0`).
    pub(crate) fn new(kernel: &'k Kernel, history: &[f64], t0: f64) -> Self {
        let mode = if kernel.is_zero() {
            Mode::Zero
        } else if let Some((amplitude, decay)) = kernel.as_exponential() {
            Mode::Exponential {
                amplitude,
                decay,
                anchor_t: t0,
                anchor_z: excitation_after(kernel, history, t0),
            }
        } else {
            Mode::Direct
        };
        let events = match mode {
            Mode::Direct => {
                let lo = history.partition_point(|&tau| t0 - tau > kernel.cutoff());
                history[lo..].to_vec()
            }
            _ => Vec::new(),
        };
        Self {
            kernel,
            mode,
            events,
            live_start: 0,
        }
    }

    pub(crate) fn value(&mut self, t: f64) -> f64 {
        match self.mode {
            Mode::Zero => 0.0,
            Mode::Exponential { decay, anchor_t, anchor_z, .. } => {
                anchor_z * (-decay * (t - anchor_t)).exp()
            }
            Mode::Direct => {
                let cutoff = self.kernel.cutoff();
                while self.live_start < self.events.len() && t - self.events[self.live_start] > cutoff {
                    self.live_start += 1;
                }
                self.events[self.live_start..]
                    .iter()
                    .map(|&tau| self.kernel.eval(t - tau))
                    .sum()
            }
        }
    }

    /// Records an event at `t`, after every event already pushed.
    pub(crate) fn push(&mut self, t: f64) {
        match &mut self.mode {
            Mode::Zero => {}
            Mode::Exponential { amplitude, decay, anchor_t, anchor_z } => {
                *anchor_z = *anchor_z * (-*decay * (t - *anchor_t)).exp() + *amplitude;
                *anchor_t = t;
            }
            Mode::Direct => self.events.push(t),
        }
    }

    /// Excitation on a segment `(a, b]` containing no events, given the state
    /// right after `a`.
    pub(crate) fn profile(&mut self, a: f64) -> Profile<'_> {
        match self.mode {
            Mode::Zero => Profile::Constant(0.0),
            Mode::Exponential { decay, .. } => Profile::Decaying { z0: self.value(a), decay, start: a },
            Mode::Direct => {
                self.value(a);
                Profile::Direct {
                    kernel: self.kernel,
                    events: &self.events[self.live_start..],
                }
            }
        }
    }
}

/// Excitation as a function of time on an event-free segment.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Profile<'a> {
    Constant(f64),
    Decaying { z0: f64, decay: f64, start: f64 },
    Direct { kernel: &'a Kernel, events: &'a [f64] },
}

impl Profile<'_> {
    #[inline]
    pub(crate) fn at(&self, s: f64) -> f64 {
        match *self {
            Profile::Constant(z) => z,
            Profile::Decaying { z0, decay, start } => z0 * (-decay * (s - start)).exp(),
            Profile::Direct { kernel, events } => events.iter().map(|&tau| kernel.eval(s - tau)).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Interpolation;

    #[test]
    fn strict_past_excludes_same_instant() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let ev = [1.0];
        assert_eq!(excitation_before(&k, &ev, 1.0), 0.0);
        assert_eq!(excitation_after(&k, &ev, 1.0), 1.0);
        assert!((excitation_before(&k, &ev, 1.5) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tracker_matches_direct_sums() {
        let kernels = [
            Kernel::exponential(0.8, 1.3).unwrap(),
            Kernel::power_law(0.5, 1.0, 2.5).unwrap(),
            Kernel::table(vec![(0.0, 1.0), (0.7, 0.4), (1.2, 0.0)], Interpolation::Linear).unwrap(),
        ];
        let history = [-3.0, -1.25, -0.5, 0.0];
        let times = [0.2, 0.21, 0.9, 1.7, 1.71, 3.3, 4.0];
        let stream = EventStream::new(5.0, times.to_vec(), history.to_vec()).unwrap();
        for k in &kernels {
            let rec = excitation_at_events(k, &stream);
            for (&t, z) in times.iter().zip(rec) {
                let direct = stream_excitation(k, &stream, t);
                assert!((z - direct).abs() <= 1e-12 * direct.max(1.0), "{z} vs {direct}");
            }
        }
    }
}
