use hawkes_ldp::excitation::{excitation_at_events, excitation_before};
use hawkes_ldp::simulate::{burn_in_stationarize, simulate_replicas, simulate_start};
use hawkes_ldp::{intensity_at, simulate_path, EventStream, IntensityModel, Kernel, RateFn, SimConfig, Start};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

fn zero_kernel_model(nu: f64) -> IntensityModel {
    IntensityModel::new(Kernel::exponential(0.0, 1.0).unwrap(), RateFn::linear(nu, 1.0).unwrap(), "a=0").unwrap()
}

#[test]
fn burn_in_with_zero_kernel_gives_poisson_counts() {
    let model = zero_kernel_model(1.0);
    let cfg = SimConfig::new(11, 5.0).with_burn_in(10.0).with_replicas(4000);
    let paths = simulate_replicas(&model, &cfg, Start::BurnIn).unwrap();
    let poisson = Poisson::new(5.0).unwrap();

    // bins 0..=10 and a pooled tail
    let mut observed = [0usize; 12];
    for p in &paths {
        observed[p.len().min(11)] += 1;
    }
    let n = paths.len() as f64;
    let mut expected: Vec<f64> = (0..11).map(|k| n * poisson.pmf(k)).collect();
    expected.push(n - expected.iter().sum::<f64>());
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let p_value = 1.0 - ChiSquared::new(11.0).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi2 = {chi2}, p = {p_value}");
}

#[test]
fn burned_in_unit_window_has_stationary_mean() {
    // ν = 1, ‖h‖ = 0.5, so E N[0, 1] = 2 in stationarity
    let model = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
    let cfg = SimConfig::new(12, 1.0).with_burn_in(model.default_burn_in()).with_replicas(20_000);
    let counts: Vec<f64> = simulate_replicas(&model, &cfg, Start::BurnIn)
        .unwrap()
        .iter()
        .map(|p| p.len() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - 2.0).abs() <= 4.0 * se, "mean {mean} ± {se}");
}

#[test]
fn recursion_matches_direct_sums_on_long_paths() {
    let model = IntensityModel::linear_exponential(2.0, 1.5, 2.0).unwrap();
    let cfg = SimConfig::new(13, 300.0).with_burn_in(20.0);
    let path = burn_in_stationarize(&model, &cfg, 0).unwrap();
    assert!(path.len() >= 1000, "only {} events", path.len());
    let all: Vec<f64> = path.all_events().collect();
    let recursive = excitation_at_events(&model.kernel, &path);
    for (&t, &z) in path.times().iter().zip(&recursive) {
        let direct = excitation_before(&model.kernel, &all, t);
        assert!((z - direct).abs() <= 1e-9 * direct.max(1.0), "t = {t}: {z} vs {direct}");
    }
}

#[test]
fn intensity_is_predictable() {
    let model = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
    let path = simulate_path(&model, &SimConfig::new(14, 50.0), None, 0).unwrap();
    for &t in path.times() {
        let before = path.times().iter().copied().filter(|&s| s < t).collect::<Vec<_>>();
        let expected = model.rate.eval(excitation_before(&model.kernel, &before, t)).unwrap();
        assert_eq!(intensity_at(&model, &path, t), expected);
        // just after the event its own jump is included
        assert!(intensity_at(&model, &path, t + 1e-9) > expected);
    }
}

#[test]
fn replicas_are_reproducible_and_distinct() {
    let model = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
    let cfg = SimConfig::new(15, 20.0).with_replicas(8);
    let a = simulate_replicas(&model, &cfg, Start::Empty).unwrap();
    let b = simulate_replicas(&model, &cfg, Start::Empty).unwrap();
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    assert_eq!(simulate_start(&model, &cfg, Start::Empty, 3).unwrap(), a[3]);
}

#[test]
fn history_feeds_the_first_intensity() {
    let model = IntensityModel::linear_exponential(1.0, 1.0, 2.0).unwrap();
    let history = EventStream::new(1.0, vec![], vec![-0.1, 0.0]).unwrap();
    let path = simulate_path(&model, &SimConfig::new(16, 1.0), Some(&history), 0).unwrap();
    assert_eq!(path.history(), &[-0.1, 0.0]);
    let z0 = (-0.2f64).exp() + 1.0;
    assert!((intensity_at(&model, &path, 1e-12) - (1.0 + z0)).abs() < 1e-9);
}

#[test]
fn explosion_guard_trips() {
    let model = IntensityModel::linear_exponential(50.0, 1.0, 2.0).unwrap();
    let mut cfg = SimConfig::new(17, 100.0);
    cfg.max_events = 100;
    let err = simulate_path(&model, &cfg, None, 0).unwrap_err();
    assert!(err.to_string().contains("100"), "{err}");
}
