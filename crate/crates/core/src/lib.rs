//! Simulation and large-deviation analysis of nonlinear Hawkes processes.
//!
//! A Hawkes process has intensity `λ_t = λ(Σ_{τ<t} h(t − τ))` for an exciting
//! kernel `h` and a rate function `λ(·)`. This crate provides
//!
//! - [`models`]: kernels, rate functions and their validation,
//! - [`simulate`]: exact thinning simulation with reproducible replicas,
//! - [`likelihood`]: compensators, Girsanov log-likelihood ratios and
//!   relative-entropy rates between two models,
//! - [`ldp`] and [`empirical`]: rate functions, rare-event importance sampling
//!   and empirical-measure functionals,
//! - [`io`]: configuration, event-stream files and the batch task runner.

pub mod empirical;
pub mod excitation;
pub mod io;
pub mod ldp;
pub mod likelihood;
pub mod models;
pub mod quadrature;
pub mod simulate;
pub mod stream;

pub use empirical::{empirical_functional, WindowFunctional, WindowStatistic};
pub use ldp::{
    lln_estimate, mean_matched_proposal, rare_event_probability, rate_fn_minimum, Constraint, LinearRateParams,
    RareEventEstimate, Tail,
};
pub use likelihood::{compensator, entropy_rate, girsanov_log_ratio, GirsanovBreakdown, LikelihoodRatio};
pub use models::{IntensityModel, Interpolation, Kernel, RateFn};
pub use simulate::{burn_in_stationarize, intensity_at, simulate_path, SimConfig, Start};
pub use stream::EventStream;
