use proptest::prelude::*;
use sparsepois::model::{
    Component, Hypothesis, Means, ModelSpec, Regime, RngStream, ScenarioConfig, Sidedness, Sparsity,
};

fn spec(n: usize, lambda0: f64, sparsity: Sparsity, regime: Regime, sidedness: Sidedness) -> ModelSpec {
    ModelSpec::build(ScenarioConfig {
        n,
        means: Means::Constant { lambda0 },
        sparsity,
        regime,
        sidedness,
        require_unit_means: false,
    })
    .unwrap()
}

#[test]
fn null_draws_have_the_null_mean() {
    let s = spec(100_000, 15.0, Sparsity::Beta(0.5), Regime::SparseTwoSided { r: 0.5 }, Sidedness::TwoSided);
    let x = s.sample(RngStream::new(2024, 0), Hypothesis::Null);
    let mean = x.counts.iter().sum::<u64>() as f64 / 1e5;
    assert!((mean - 15.0).abs() < 0.05, "{mean}");
    assert!(x.labels.unwrap().iter().all(|c| *c == Component::Null));
}

#[test]
fn mixture_accounting() {
    let n = 100_000;
    let eps = 0.05;
    let s = spec(n, 4.0, Sparsity::Epsilon(eps), Regime::SparseTwoSided { r: 0.5 }, Sidedness::TwoSided);
    let x = s.sample(RngStream::new(9, 1), Hypothesis::Alternative);
    let labels = x.labels.unwrap();
    assert_eq!(labels.len(), n);
    let hits = labels.iter().filter(|c| **c != Component::Null).count() as f64 / n as f64;
    assert!((hits - eps).abs() <= 3.0 * (eps * (1.0 - eps) / n as f64).sqrt(), "{hits}");
    let up = labels.iter().filter(|c| **c == Component::Up).count() as f64;
    let down = labels.iter().filter(|c| **c == Component::Down).count() as f64;
    assert!((up / (up + down) - 0.5).abs() < 0.03);
}

#[test]
fn degenerate_one_sided_mixture() {
    let s = spec(2_000, 5.0, Sparsity::Epsilon(1.0), Regime::OneSidedDense { s: 0.0 }, Sidedness::OneSided);
    let x = s.sample(RngStream::new(1, 1), Hypothesis::Alternative);
    assert!(x.labels.unwrap().iter().all(|c| *c == Component::Up));
    let mean = x.counts.iter().sum::<u64>() as f64 / 2000.0;
    let want = 5.0 + 5f64.sqrt();
    assert!((mean - want).abs() < 4.0 * (want / 2000.0).sqrt(), "{mean}");
}

#[test]
fn small_means_down_component_is_zero() {
    let s = spec(20_000, 1.0, Sparsity::Epsilon(0.5), Regime::SmallMeans { gamma: 0.5 }, Sidedness::TwoSided);
    let x = s.sample(RngStream::new(4, 4), Hypothesis::Alternative);
    let labels = x.labels.unwrap();
    assert!(labels.contains(&Component::Down));
    for (c, k) in labels.iter().zip(&x.counts) {
        if *c == Component::Down {
            assert_eq!(*k, 0);
        }
    }
}

#[test]
fn zero_epsilon_is_the_null_model() {
    let s = spec(4, 1.0, Sparsity::Epsilon(0.0), Regime::DenseTwoSided { s: 0.0 }, Sidedness::TwoSided);
    let x = s.sample(RngStream::new(5, 5), Hypothesis::Alternative);
    assert!(x.labels.unwrap().iter().all(|c| *c == Component::Null));
}

#[test]
fn lambda_down_clamped_at_zero() {
    let s = spec(10, 2.0, Sparsity::Beta(0.5), Regime::DenseTwoSided { s: 0.5 }, Sidedness::TwoSided);
    for i in 0..10 {
        assert!(s.lambda_down()[i] >= 0.0);
        if s.delta()[i] >= s.lambdas()[i] {
            assert_eq!(s.lambda_down()[i], 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn sampling_is_a_pure_function_of_seed_and_stream(seed in any::<u64>(), stream in any::<u64>(), lam in 0.5f64..40.0) {
        let s = spec(200, lam, Sparsity::Epsilon(0.3), Regime::SparseTwoSided { r: 0.4 }, Sidedness::TwoSided);
        let a = s.sample(RngStream::new(seed, stream), Hypothesis::Alternative);
        let b = s.sample(RngStream::new(seed, stream), Hypothesis::Alternative);
        prop_assert_eq!(a, b);
    }
}
