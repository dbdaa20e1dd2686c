use nalgebra::DMatrix;
use topocausal::econometrics::granger_test;
use topocausal::synth::{simulate_var, white_noise, CrashFixture, VarSpec};

#[test]
fn same_seed_identical_across_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| CrashFixture::default().generate().unwrap())
    };
    let a = run(1);
    let b = run(8);
    assert_eq!(a.returns, b.returns);
    assert_eq!(a.prices, b.prices);
}

#[test]
fn fixture_prices_round_trip_to_returns() {
    let data = CrashFixture::default().generate().unwrap();
    assert_eq!(data.returns.n_days(), 500);
    assert_eq!(data.returns.n_instruments(), 20);
    assert_eq!(data.prices.n_days(), 501);
    let back = topocausal::market_data::log_returns(&data.prices).unwrap();
    for (x, y) in back.values().iter().zip(data.returns.values()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn independent_components_reject_at_nominal_rate() {
    let trials = 500;
    let mut rejections = 0;
    for seed in 0..trials {
        let spec = VarSpec {
            coefficients: vec![DMatrix::from_row_slice(2, 2, &[0.4, 0.0, 0.0, 0.4])],
            noise_cov: DMatrix::identity(2, 2),
            seed,
        };
        let x = simulate_var(&spec, 250).unwrap();
        if granger_test(&x[0], &x[1], 1).unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    assert!((0.025..=0.075).contains(&rate), "rate {rate}");
}

#[test]
fn white_noise_moments() {
    let w = white_noise(100_000, 42);
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64;
    assert!(mean.abs() < 0.01);
    assert!((var - 1.0).abs() < 0.02);
}
