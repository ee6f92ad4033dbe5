//! Exciting kernels `h`, rate functions `λ(·)` and the intensity model pairing them.
//!
//! A model defines the conditional intensity
//!
//! ```text
//! λ_t = λ( Σ_{τ < t} h(t − τ) )
//! ```
//!
//! where the sum runs over the strict past (history and realised events).
//! Kernels must be non-negative, non-increasing and integrable; rate functions
//! must be non-decreasing and Lipschitz. Both are validated at construction and
//! immutable afterwards.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tail mass beyond which a kernel is treated as zero.
pub const CUTOFF_TAIL_FRACTION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("invalid rate function: {0}")]
    Rate(String),
    #[error("rate function evaluated at negative excitation {0}")]
    NegativeExcitation(f64),
    #[error("supercritical: slope·‖h‖ = {0} ≥ 1 (hnorm ≥ 1)")]
    Supercritical(f64),
}

/// Interpolation rule between the knots of a tabulated kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Right-continuous step: `h(t) = v_i` on `[t_i, t_{i+1})`.
    Step,
    /// Piecewise linear between knots.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    /// `h(t) = amplitude · e^{−decay·t}`
    Exponential { amplitude: f64, decay: f64 },
    /// `h(t) = amplitude · (offset + t)^{−exponent}`
    PowerLaw { amplitude: f64, offset: f64, exponent: f64 },
    /// Compactly supported table; zero from the last knot onward.
    Table { knots: Vec<(f64, f64)>, interpolation: Interpolation },
}

/// The exciting function `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    l1_norm: f64,
    cutoff: f64,
}

impl Kernel {
    pub fn exponential(amplitude: f64, decay: f64) -> Result<Self, ModelError> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(ModelError::Kernel(format!("amplitude must be ≥ 0, got {amplitude}")));
        }
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(ModelError::Kernel(format!("decay must be > 0, got {decay}")));
        }
        let l1_norm = amplitude / decay;
        let cutoff = if amplitude == 0.0 {
            0.0
        } else {
            -CUTOFF_TAIL_FRACTION.ln() / decay
        };
        Ok(Self {
            shape: KernelShape::Exponential { amplitude, decay },
            l1_norm,
            cutoff,
        })
    }

    pub fn power_law(amplitude: f64, offset: f64, exponent: f64) -> Result<Self, ModelError> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(ModelError::Kernel(format!("amplitude must be ≥ 0, got {amplitude}")));
        }
        if !(offset > 0.0 && offset.is_finite()) {
            return Err(ModelError::Kernel(format!("offset must be > 0, got {offset}")));
        }
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(ModelError::Kernel(format!(
                "exponent must be > 1 for integrability, got {exponent}"
            )));
        }
        let l1_norm = amplitude * offset.powf(1.0 - exponent) / (exponent - 1.0);
        // tail(t)/tail(0) = (1 + t/offset)^{1−p}
        let cutoff = if amplitude == 0.0 {
            0.0
        } else {
            offset * (CUTOFF_TAIL_FRACTION.powf(-1.0 / (exponent - 1.0)) - 1.0)
        };
        Ok(Self {
            shape: KernelShape::PowerLaw { amplitude, offset, exponent },
            l1_norm,
            cutoff,
        })
    }

    /// Tabulated kernel. Knots must start at `t = 0`, have strictly increasing
    /// times and non-increasing, non-negative values.
    pub fn table(knots: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self, ModelError> {
        if knots.len() < 2 {
            return Err(ModelError::Kernel("table needs at least two knots".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(ModelError::Kernel("first knot must be at t = 0".into()));
        }
        for &(t, v) in &knots {
            if !t.is_finite() || !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::Kernel(format!("bad knot ({t}, {v})")));
            }
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ModelError::Kernel("knot times must be strictly increasing".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(ModelError::Kernel(format!(
                    "table kernel must be non-increasing: h({}) = {} > h({}) = {}",
                    w[1].0, w[1].1, w[0].0, w[0].1
                )));
            }
        }
        let cutoff = knots[knots.len() - 1].0;
        let mut kernel = Self {
            shape: KernelShape::Table { knots, interpolation },
            l1_norm: 0.0,
            cutoff,
        };
        kernel.l1_norm = kernel.table_integral_from(0.0);
        Ok(kernel)
    }

    /// The kernel `h ≡ 0`, reducing any model to a Poisson process.
    pub fn zero() -> Self {
        Self::exponential(0.0, 1.0).expect("zero kernel is valid")
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// `‖h‖_{L¹}`
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// Duration beyond which `h` is treated as zero.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.l1_norm == 0.0
    }

    /// Tabulated kernels vanish beyond their last knot.
    pub fn has_compact_support(&self) -> bool {
        matches!(self.shape, KernelShape::Table { .. })
    }

    /// `Some((amplitude, decay))` for exponential kernels, which admit an O(1)
    /// excitation recursion.
    pub fn as_exponential(&self) -> Option<(f64, f64)> {
        match self.shape {
            KernelShape::Exponential { amplitude, decay } => Some((amplitude, decay)),
            _ => None,
        }
    }

    /// Knot times of a tabulated kernel; the excitation is only piecewise smooth
    /// between `τ + knot` for past events `τ`.
    pub fn knot_times(&self) -> Option<impl Iterator<Item = f64> + '_> {
        match &self.shape {
            KernelShape::Table { knots, .. } => Some(knots.iter().map(|k| k.0)),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.cutoff {
            return 0.0;
        }
        match &self.shape {
            KernelShape::Exponential { amplitude, decay } => amplitude * (-decay * t).exp(),
            KernelShape::PowerLaw { amplitude, offset, exponent } => {
                amplitude * (offset + t).powf(-exponent)
            }
            KernelShape::Table { knots, interpolation } => {
                if t >= self.cutoff {
                    return 0.0;
                }
                let i = knots.partition_point(|k| k.0 <= t) - 1;
                let (t0, v0) = knots[i];
                match interpolation {
                    Interpolation::Step => v0,
                    Interpolation::Linear => {
                        let (t1, v1) = knots[i + 1];
                        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                    }
                }
            }
        }
    }

    /// `H(t) = ∫_t^∞ h(s) ds`; equals `l1_norm()` for `t ≤ 0`.
    pub fn tail(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.shape {
            KernelShape::Exponential { decay, .. } => self.l1_norm * (-decay * t).exp(),
            KernelShape::PowerLaw { offset, exponent, .. } => {
                self.l1_norm * (1.0 + t / offset).powf(1.0 - exponent)
            }
            KernelShape::Table { .. } => self.table_integral_from(t),
        }
    }

    fn table_integral_from(&self, from: f64) -> f64 {
        let KernelShape::Table { knots, interpolation } = &self.shape else {
            unreachable!()
        };
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= from {
                continue;
            }
            let a = t0.max(from);
            total += match interpolation {
                Interpolation::Step => v0 * (t1 - a),
                Interpolation::Linear => {
                    let va = v0 + (v1 - v0) * (a - t0) / (t1 - t0);
                    0.5 * (va + v1) * (t1 - a)
                }
            };
        }
        total
    }

    /// Time scale over which the kernel forgets the past; used to size burn-in.
    pub fn relaxation_time(&self) -> f64 {
        match &self.shape {
            KernelShape::Exponential { decay, .. } => 1.0 / decay,
            // time at which the tail has dropped by a factor e
            KernelShape::PowerLaw { offset, exponent, .. } => {
                offset * ((1.0 / (exponent - 1.0)).exp() - 1.0)
            }
            KernelShape::Table { .. } => self.cutoff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateShape {
    /// `λ(z) = base + slope·z`
    Linear { base: f64, slope: f64 },
    /// `λ(z) = base + (cap − base)(1 − e^{−z/scale})`
    Saturating { base: f64, cap: f64, scale: f64 },
    /// `λ(z) = min(base + z, cap)`
    ClippedLinear { base: f64, cap: f64 },
}

/// The rate function `λ(·)` mapping excitation to intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFn {
    shape: RateShape,
    lipschitz: f64,
    lower_bound: f64,
}

impl RateFn {
    pub fn linear(base: f64, slope: f64) -> Result<Self, ModelError> {
        check_non_negative("base", base)?;
        check_non_negative("slope", slope)?;
        Ok(Self {
            shape: RateShape::Linear { base, slope },
            lipschitz: slope,
            lower_bound: base,
        })
    }

    /// Constant rate `base`: a Poisson process whatever the kernel.
    pub fn constant(base: f64) -> Result<Self, ModelError> {
        Self::linear(base, 0.0)
    }

    pub fn saturating(base: f64, cap: f64, scale: f64) -> Result<Self, ModelError> {
        check_non_negative("base", base)?;
        if !(cap > base && cap.is_finite()) {
            return Err(ModelError::Rate(format!("cap must exceed base, got cap={cap}, base={base}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(ModelError::Rate(format!("scale must be > 0, got {scale}")));
        }
        Ok(Self {
            shape: RateShape::Saturating { base, cap, scale },
            lipschitz: (cap - base) / scale,
            lower_bound: base,
        })
    }

    pub fn clipped_linear(base: f64, cap: f64) -> Result<Self, ModelError> {
        check_non_negative("base", base)?;
        if !(cap >= base && cap.is_finite()) {
            return Err(ModelError::Rate(format!("cap must be ≥ base, got cap={cap}, base={base}")));
        }
        Ok(Self {
            shape: RateShape::ClippedLinear { base, cap },
            lipschitz: if cap > base { 1.0 } else { 0.0 },
            lower_bound: base,
        })
    }

    /// Overrides the recorded lower bound `c` with `λ(·) ≥ c`.
    pub fn with_lower_bound(mut self, c: f64) -> Result<Self, ModelError> {
        if !(0.0..=self.value(0.0)).contains(&c) {
            return Err(ModelError::Rate(format!(
                "lower bound {c} must lie in [0, λ(0) = {}]",
                self.value(0.0)
            )));
        }
        self.lower_bound = c;
        Ok(self)
    }

    pub fn shape(&self) -> RateShape {
        self.shape
    }

    /// The Lipschitz constant `α`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// `λ(0)`, the immigration rate `ν`.
    pub fn base(&self) -> f64 {
        match self.shape {
            RateShape::Linear { base, .. }
            | RateShape::Saturating { base, .. }
            | RateShape::ClippedLinear { base, .. } => base,
        }
    }

    /// `λ(z)/z → 0`. Linear rates with positive slope are not sublinear and are
    /// only admitted in the subcritical regime.
    pub fn is_sublinear(&self) -> bool {
        !matches!(self.shape, RateShape::Linear { slope, .. } if slope > 0.0)
    }

    /// Supremum of `λ`, if finite.
    pub fn sup(&self) -> Option<f64> {
        match self.shape {
            RateShape::Linear { base, slope } => (slope == 0.0).then_some(base),
            RateShape::Saturating { cap, .. } | RateShape::ClippedLinear { cap, .. } => Some(cap),
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64, ModelError> {
        if z < 0.0 || z.is_nan() {
            return Err(ModelError::NegativeExcitation(z));
        }
        Ok(self.value(z))
    }

    /// Unchecked evaluation for `z ≥ 0`.
    #[inline]
    pub(crate) fn value(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match self.shape {
            RateShape::Linear { base, slope } => base + slope * z,
            RateShape::Saturating { base, cap, scale } => base + (cap - base) * (-(-z / scale).exp_m1()),
            RateShape::ClippedLinear { base, cap } => (base + z).min(cap),
        }
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<(), ModelError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Rate(format!("{name} must be ≥ 0, got {v}")))
    }
}

/// A `(kernel, rate)` pair defining a Hawkes path law.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityModel {
    pub kernel: Kernel,
    pub rate: RateFn,
    pub label: String,
}

impl IntensityModel {
    /// Rejects linear rates in the explosion regime `slope·‖h‖ ≥ 1`.
    pub fn new(kernel: Kernel, rate: RateFn, label: impl Into<String>) -> Result<Self, ModelError> {
        if let RateShape::Linear { slope, .. } = rate.shape() {
            let branching = slope * kernel.l1_norm();
            if branching >= 1.0 {
                return Err(ModelError::Supercritical(branching));
            }
        }
        Ok(Self {
            kernel,
            rate,
            label: label.into(),
        })
    }

    /// Homogeneous Poisson process with the given rate.
    pub fn poisson(rate: f64) -> Result<Self, ModelError> {
        Self::new(Kernel::zero(), RateFn::constant(rate)?, format!("poisson({rate})"))
    }

    /// Linear Hawkes with `λ(z) = ν + z` and exponential kernel `a·e^{−βt}`.
    pub fn linear_exponential(nu: f64, amplitude: f64, decay: f64) -> Result<Self, ModelError> {
        Self::new(
            Kernel::exponential(amplitude, decay)?,
            RateFn::linear(nu, 1.0)?,
            format!("linear(nu={nu},a={amplitude},beta={decay})"),
        )
    }

    /// `slope·‖h‖` for linear rates.
    pub fn branching_ratio(&self) -> Option<f64> {
        match self.rate.shape() {
            RateShape::Linear { slope, .. } => Some(slope * self.kernel.l1_norm()),
            _ => None,
        }
    }

    /// Law-of-large-numbers mean `ν/(1 − slope·‖h‖)`, known in closed form for
    /// linear rates only.
    pub fn lln_mean(&self) -> Option<f64> {
        self.branching_ratio().map(|b| self.rate.base() / (1.0 - b))
    }

    /// Intensity is constant whatever the history.
    pub fn is_poisson(&self) -> bool {
        if self.kernel.is_zero() {
            return true;
        }
        match self.rate.shape() {
            RateShape::Linear { slope, .. } => slope == 0.0,
            RateShape::ClippedLinear { base, cap } => base == cap,
            RateShape::Saturating { .. } => false,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Burn-in of twenty relaxation times.
    pub fn default_burn_in(&self) -> f64 {
        if self.kernel.is_zero() {
            0.0
        } else {
            20.0 * self.kernel.relaxation_time()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn kernels() -> Vec<Kernel> {
        vec![
            Kernel::exponential(1.0, 2.0).unwrap(),
            Kernel::exponential(0.3, 0.7).unwrap(),
            Kernel::power_law(1.0, 1.0, 2.0).unwrap(),
            Kernel::power_law(0.5, 0.5, 3.5).unwrap(),
            Kernel::table(vec![(0.0, 1.0), (0.5, 0.6), (1.5, 0.2), (2.0, 0.0)], Interpolation::Linear)
                .unwrap(),
            Kernel::table(vec![(0.0, 1.0), (0.5, 0.6), (1.5, 0.2), (2.0, 0.2)], Interpolation::Step)
                .unwrap(),
        ]
    }

    fn rates() -> Vec<RateFn> {
        vec![
            RateFn::linear(1.0, 1.0).unwrap(),
            RateFn::linear(0.5, 0.3).unwrap(),
            RateFn::saturating(1.0, 3.0, 1.0).unwrap(),
            RateFn::saturating(0.2, 5.0, 0.25).unwrap(),
            RateFn::clipped_linear(1.0, 5.0).unwrap(),
            RateFn::clipped_linear(1.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn kernel_eval_examples() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        assert_eq!(k.eval(0.0), 1.0);
        assert_relative_eq!(k.eval(0.5), 0.367_879_441_171_442_3, max_relative = 1e-14);
        for k in kernels() {
            assert_eq!(k.eval(-1.0), 0.0);
            assert_eq!(k.eval(k.cutoff() * 1.0001 + 1.0), 0.0);
        }
    }

    #[test]
    fn kernel_l1_examples() {
        assert_eq!(Kernel::exponential(1.0, 2.0).unwrap().l1_norm(), 0.5);
        let unit = Kernel::table(vec![(0.0, 1.0), (1.0, 1.0)], Interpolation::Step).unwrap();
        assert_eq!(unit.l1_norm(), 1.0);
        let unit_lin = Kernel::table(vec![(0.0, 1.0), (1.0, 1.0)], Interpolation::Linear).unwrap();
        assert_eq!(unit_lin.l1_norm(), 1.0);
        assert_relative_eq!(Kernel::power_law(1.0, 1.0, 2.0).unwrap().l1_norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn kernel_tail_examples() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        assert_eq!(k.tail(0.0), 0.5);
        assert_eq!(k.tail(f64::INFINITY), 0.0);
        assert_relative_eq!(k.tail(1.0), 0.5 * (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(k.tail(1.0), 0.067_667_641_618_306_35, max_relative = 1e-12);
        for k in kernels() {
            assert_eq!(k.tail(0.0), k.l1_norm());
            assert!(k.tail(k.cutoff()) <= CUTOFF_TAIL_FRACTION * k.l1_norm() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rate_eval_examples() {
        assert_eq!(RateFn::linear(1.0, 1.0).unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(RateFn::clipped_linear(1.0, 5.0).unwrap().eval(10.0).unwrap(), 5.0);
        let s = RateFn::saturating(1.0, 3.0, 1.0).unwrap().eval(1.0).unwrap();
        assert_relative_eq!(s, 1.0 + 2.0 * (1.0 - (-1.0f64).exp()), max_relative = 1e-15);
        assert_relative_eq!(s, 2.264_241_117_657_115_4, max_relative = 1e-14);
        assert!(matches!(
            RateFn::linear(1.0, 1.0).unwrap().eval(-0.1),
            Err(ModelError::NegativeExcitation(_))
        ));
    }

    #[test]
    fn construction_rejects_invalid_shapes() {
        assert!(Kernel::power_law(1.0, 1.0, 1.0).is_err());
        assert!(Kernel::exponential(1.0, 0.0).is_err());
        assert!(Kernel::exponential(-1.0, 1.0).is_err());
        assert!(Kernel::table(vec![(0.0, 0.5), (1.0, 0.7)], Interpolation::Step).is_err());
        assert!(Kernel::table(vec![(0.1, 0.5), (1.0, 0.2)], Interpolation::Step).is_err());
        assert!(RateFn::saturating(2.0, 2.0, 1.0).is_err());
        assert!(RateFn::clipped_linear(2.0, 1.0).is_err());
        let err = IntensityModel::new(
            Kernel::exponential(1.2, 1.0).unwrap(),
            RateFn::linear(1.0, 1.0).unwrap(),
            "x",
        )
        .unwrap_err();
        assert!(err.to_string().contains("supercritical"));
        // exactly critical is rejected too
        assert!(IntensityModel::linear_exponential(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn sublinearity_flags() {
        assert!(!RateFn::linear(1.0, 1.0).unwrap().is_sublinear());
        assert!(RateFn::constant(1.0).unwrap().is_sublinear());
        assert!(RateFn::saturating(1.0, 3.0, 1.0).unwrap().is_sublinear());
        assert!(RateFn::clipped_linear(1.0, 3.0).unwrap().is_sublinear());
        let r = RateFn::saturating(1.0, 3.0, 1.0).unwrap();
        assert!(r.value(1e9) / 1e9 < 1e-8);
    }

    #[test]
    fn monotonicity_on_grid() {
        for k in kernels() {
            let mut prev = f64::INFINITY;
            for i in 0..2000 {
                let t = i as f64 * 0.005;
                let v = k.eval(t);
                assert!(v <= prev && v >= 0.0);
                prev = v;
            }
        }
        for r in rates() {
            let mut prev = 0.0;
            for i in 0..2000 {
                let v = r.value(i as f64 * 0.01);
                assert!(v >= prev && v >= r.lower_bound());
                prev = v;
            }
        }
    }

    /// Composite Gauss–Legendre quadrature; independent of the analytic tails.
    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683,
            0.538_469_310_105_683,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let c = a + (i as f64 + 0.5) * h;
                X.iter().zip(W).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn tail_matches_quadrature() {
        for k in kernels() {
            // Heavy power-law tails are integrated on a logarithmic substitution.
            let upper = k.cutoff();
            for i in 0..100 {
                let t = i as f64 * 0.05;
                let numeric = if let KernelShape::PowerLaw { offset, .. } = k.shape() {
                    let (lo, hi) = ((offset + t).ln(), (offset + upper).ln());
                    quad(|u| k.eval(u.exp() - offset) * u.exp(), lo, hi, 4000)
                } else if let Some(knots) = k.knot_times() {
                    let knots: Vec<f64> = knots.collect();
                    let mut s = 0.0;
                    for w in knots.windows(2) {
                        let (a, b) = (w[0].max(t), w[1]);
                        if b > a {
                            s += quad(|x| k.eval(x), a, b, 8);
                        }
                    }
                    s
                } else {
                    quad(|x| k.eval(x), t, upper, 4000)
                };
                assert!(
                    (k.tail(t) - numeric).abs() <= 1e-6 * k.l1_norm(),
                    "{:?} t={t}: {} vs {numeric}",
                    k.shape(),
                    k.tail(t)
                );
            }
        }
    }

    #[test]
    fn lipschitz_bound_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for r in rates() {
            for _ in 0..10_000 {
                let x: f64 = rng.random_range(0.0..20.0);
                let y: f64 = rng.random_range(0.0..20.0);
                let d = (r.value(x) - r.value(y)).abs();
                assert!(d <= r.lipschitz() * (x - y).abs() * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn lln_mean_and_poisson_flags() {
        let m = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
        assert_eq!(m.lln_mean(), Some(2.0));
        assert!(IntensityModel::poisson(3.0).unwrap().is_poisson());
        let clip = IntensityModel::new(
            Kernel::exponential(1.0, 2.0).unwrap(),
            RateFn::clipped_linear(1.0, 1.0).unwrap(),
            "c",
        )
        .unwrap();
        assert!(clip.is_poisson());
        assert!(clip.lln_mean().is_none());
    }

    proptest! {
        #[test]
        fn tail_is_non_increasing(a in 0.01f64..5.0, b in 0.05f64..5.0, s in 0.0f64..10.0, d in 0.0f64..10.0) {
            let k = Kernel::exponential(a, b).unwrap();
            prop_assert!(k.tail(s + d) <= k.tail(s));
            let p = Kernel::power_law(a, b, 1.0 + b).unwrap();
            prop_assert!(p.tail(s + d) <= p.tail(s));
        }
    }
}
