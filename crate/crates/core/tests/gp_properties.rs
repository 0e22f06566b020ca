use nalgebra::DMatrix;
use proptest::prelude::*;
use stormbo_core::acquisition::expected_improvement;
use stormbo_core::gp::{self, kernel_se, log_marginal_likelihood, Dataset, GpModel, Hyperparams};

fn dataset_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=3, 1usize..=8).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(prop::collection::vec(0.0..=1.0f64, d), n),
            prop::collection::vec(-5.0..5.0f64, n),
        )
    })
}

fn hyper_strategy() -> impl Strategy<Value = Hyperparams> {
    (0.1..10.0f64, 0.05..2.0f64, 1e-4..1.0f64).prop_map(|(s, l, n)| Hyperparams::new(s, l, n).unwrap())
}

/// Posterior by explicit inversion of the full covariance, no factorization.
fn dense_posterior(inputs: &[Vec<f64>], z: &[f64], h: &Hyperparams, diag: f64, x: &[f64]) -> (f64, f64) {
    let n = inputs.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        kernel_se(&inputs[i], &inputs[j], h).unwrap() + if i == j { diag } else { 0.0 }
    });
    let inv = k.lu().try_inverse().unwrap();
    let ks: Vec<f64> = inputs.iter().map(|xi| kernel_se(x, xi, h).unwrap()).collect();
    let mut mean = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            mean += ks[i] * inv[(i, j)] * z[j];
            quad += ks[i] * inv[(i, j)] * ks[j];
        }
    }
    (mean, h.signal_variance - quad)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_symmetric_and_bounded(a in prop::collection::vec(0.0..=1.0f64, 3), b in prop::collection::vec(0.0..=1.0f64, 3), h in hyper_strategy()) {
        let k1 = kernel_se(&a, &b, &h).unwrap();
        let k2 = kernel_se(&b, &a, &h).unwrap();
        prop_assert_eq!(k1, k2);
        prop_assert!(k1 > 0.0 && k1 <= h.signal_variance);
    }

    #[test]
    fn factorized_posterior_matches_dense_inverse((inputs, z) in dataset_strategy(), h in hyper_strategy(), q in prop::collection::vec(0.0..=1.0f64, 3)) {
        let data = Dataset::new(inputs.clone(), z.clone()).unwrap();
        let model = GpModel::condition(&data, &h, false).unwrap();
        let x = &q[..data.dim()];
        let (m, v) = model.posterior_unclamped(x).unwrap();
        let (mo, vo) = dense_posterior(&inputs, &z, &h, h.noise_variance + model.jitter(), x);
        prop_assert!((m - mo).abs() < 1e-10 * (1.0 + mo.abs()), "{} vs {}", m, mo);
        prop_assert!((v - vo).abs() < 1e-10 * (1.0 + h.signal_variance), "{} vs {}", v, vo);
    }

    #[test]
    fn variance_nonnegative_and_barely_negative_before_clamp((inputs, z) in dataset_strategy(), q in prop::collection::vec(0.0..=1.0f64, 3)) {
        let h = Hyperparams::new(2.0, 0.3, 0.0).unwrap();
        let data = Dataset::new(inputs.clone(), z).unwrap();
        let model = GpModel::condition(&data, &h, true).unwrap();
        for x in inputs.iter().chain(std::iter::once(&q[..data.dim()].to_vec())) {
            let (_, raw) = model.posterior_unclamped(x).unwrap();
            prop_assert!(raw >= -1e-8 * h.signal_variance);
            prop_assert!(model.posterior(x).unwrap().1 >= 0.0);
        }
    }

    #[test]
    fn factor_reconstructs_kernel_matrix((inputs, z) in dataset_strategy(), h in hyper_strategy()) {
        let data = Dataset::new(inputs, z).unwrap();
        let model = GpModel::condition(&data, &h, true).unwrap();
        let kz = model.kz_matrix();
        let l = model.chol();
        let err = (l * l.transpose() - &kz).abs().max();
        prop_assert!(err <= 1e-8 * kz.abs().max());
        let y: Vec<f64> = data.targets().iter().map(|t| model.standardizer().forward(*t)).collect();
        let resid = (&kz * model.alpha()).iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(resid <= 1e-8 * (1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max)));
    }

    #[test]
    fn fit_never_below_init_lml((inputs, z) in dataset_strategy(), h in hyper_strategy(), seed in 0u64..1000) {
        let data = Dataset::new(inputs, z).unwrap();
        let opts = gp::FitOptions { restarts: 2, seed, standardize: true };
        let before = gp::standardized_lml(&data, &h).unwrap();
        let model = gp::fit_with(&data, &h, opts).unwrap();
        prop_assert!(model.lml() >= before - 1e-9);
    }

    #[test]
    fn raw_lml_is_finite((inputs, z) in dataset_strategy(), h in hyper_strategy()) {
        let data = Dataset::new(inputs, z).unwrap();
        prop_assert!(log_marginal_likelihood(&data, &h).unwrap().is_finite());
    }

    #[test]
    fn ei_nonnegative_and_monotone(mu in -50.0..50.0f64, sigma in 0.0..20.0f64, inc in -50.0..50.0f64, dm in 0.0..5.0f64, ds in 0.0..5.0f64) {
        let e = expected_improvement(mu, sigma, inc);
        prop_assert!(e >= 0.0);
        prop_assert!(expected_improvement(mu + dm, sigma, inc) >= e - 1e-12);
        prop_assert!(expected_improvement(mu, sigma + ds, inc) >= e - 1e-12);
    }
}
