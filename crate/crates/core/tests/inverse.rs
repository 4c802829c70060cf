mod common;

use bimlab::dataset::{rasterize, Cylinder, SceneSpec};
use bimlab::inverse::{landweber_step, power_iteration, rne, tista, BornIterative, Regularizer};
use bimlab::linalg::{norm1, norm2, norm2_sqr, CVector};
use bimlab::{Complex64, ContrastImage, MeasurementVector, ObservationMatrix, ProblemConfig};
use common::*;
use proptest::prelude::*;

fn instance(seed: u64, m: usize, n: usize) -> (ObservationMatrix, MeasurementVector) {
    let mut rng = rng(seed);
    let h = ObservationMatrix {
        h: random_matrix(&mut rng, m, n),
        bim_step: 1,
    };
    let e: CVector = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
    (h, MeasurementVector::new(e, 1, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ista_objective_never_increases(seed in 0u64..10_000, log_delta in -4.0f64..0.5, n_pow in 15usize..30) {
        let (h, e) = instance(seed, 30, 20);
        let gamma = power_iteration(h.view(), n_pow, seed).unwrap().gamma;
        let delta = 10f64.powf(log_delta);
        let objective = |t: &ContrastImage| {
            norm2_sqr((h.apply(t) - &e.data).view()) + 2.0 * delta / gamma * norm1(t.t.view())
        };
        let mut t = ContrastImage::zeros(20, 1);
        let mut previous = objective(&t);
        for _ in 0..6 {
            t = tista(&h, &e, gamma, Regularizer::SoftThreshold(delta), 1, &t).unwrap();
            let current = objective(&t);
            prop_assert!(current <= previous * (1.0 + 1e-12), "{current} > {previous}");
            previous = current;
        }
    }

    #[test]
    fn ista_is_scale_covariant(seed in 0u64..10_000, alpha_exp in -3i32..4) {
        // Powers of two keep every product exact.
        let alpha = 2f64.powi(alpha_exp);
        let (h, e) = instance(seed, 24, 16);
        let gamma = power_iteration(h.view(), 10, seed).unwrap().gamma;
        let scaled_e = MeasurementVector { data: e.data.mapv(|z| z * alpha), ..e.clone() };
        let t0 = ContrastImage::zeros(16, 1);
        let base = tista(&h, &e, gamma, Regularizer::SoftThreshold(0.05), 6, &t0).unwrap();
        let scaled = tista(&h, &scaled_e, gamma, Regularizer::SoftThreshold(0.05 * alpha), 6, &t0).unwrap();
        prop_assert_eq!(scaled.t, base.t.mapv(|z| z * alpha));
    }

    #[test]
    fn power_estimate_never_exceeds_sigma_max(seed in 0u64..10_000, m in 2usize..40, n in 2usize..30, n_pow in 1usize..25) {
        let mut rng = rng(seed);
        let h = random_matrix(&mut rng, m, n);
        let est = power_iteration(h.view(), n_pow, seed).unwrap();
        prop_assert!(est.sigma <= sigma_max(&h) * (1.0 + 1e-9));
        prop_assert!((est.gamma * est.sigma * est.sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn landweber_step_reduces_misfit(seed in 0u64..10_000) {
        // Tall matrices are full column rank with probability one.
        let (h, e) = instance(seed, 40, 12);
        let sigma = sigma_max(&h.h);
        let gamma = 1.0 / (sigma * sigma);
        let mut rng = rng(seed + 1);
        let t = ContrastImage::new((0..12).map(|_| complex_gaussian(&mut rng)).collect(), 12, 1).unwrap();
        let before = norm2((h.apply(&t) - &e.data).view());
        let after = norm2((h.apply(&landweber_step(&h, &t, &e, gamma).unwrap()) - &e.data).view());
        prop_assert!(after < before);
    }
}

#[test]
fn power_iteration_is_accurate_on_observation_matrices() {
    // Observation matrices have a decaying spectrum, unlike iid Gaussian
    // ones, so a few steps already land within a percent.
    let config = ProblemConfig {
        grid_nx: 16,
        grid_ny: 16,
        ..Default::default()
    };
    let solver = BornIterative::new(&config).unwrap();
    let h = bimlab::inverse::assemble_observation(&solver.model().ops, &solver.model().e_inc.as_total(), 1).unwrap();
    let truth = sigma_max(&h.h);
    let mut previous = 0.0;
    for n_pow in [1, 3, config.n_pow, 20] {
        let est = power_iteration(h.view(), n_pow, 1).unwrap();
        assert!(est.sigma <= truth * (1.0 + 1e-12));
        assert!(est.sigma >= previous * (1.0 - 1e-12), "not monotone at {n_pow}");
        previous = est.sigma;
    }
    let est = power_iteration(h.view(), config.n_pow, 1).unwrap();
    assert!((truth - est.sigma) / truth < 1e-2, "{} vs {truth}", est.sigma);
}

#[test]
fn weak_single_cylinder_is_recovered() {
    let config = ProblemConfig {
        grid_nx: 16,
        grid_ny: 16,
        ..Default::default()
    };
    let scene = SceneSpec {
        cylinders: vec![Cylinder {
            center_x: 0.2,
            center_y: -0.1,
            radius: 0.45,
            contrast: 0.05,
        }],
        seed: 0,
    };
    let truth = rasterize(&scene, &config);
    let solver = BornIterative::new(&config).unwrap();
    let e = solver.model().solve(&truth).unwrap();
    let out = solver.sbim(&e).unwrap();
    let final_rne = rne(out.final_image.t.as_slice().unwrap(), truth.t.as_slice().unwrap()).unwrap();
    assert!(final_rne < 50.0, "final RNE {final_rne}%");
    assert!(out.misfits.windows(2).all(|w| w[1] <= w[0]), "{:?}", out.misfits);
    assert_eq!(out.power_seeds.len(), 3);
}

#[test]
fn reconstruction_is_deterministic() {
    let config = ProblemConfig {
        grid_nx: 8,
        grid_ny: 8,
        tx_count: 4,
        rx_count: 8,
        ..Default::default()
    };
    let solver = BornIterative::new(&config).unwrap();
    let mut rng = rng(9);
    let e = MeasurementVector::new((0..32).map(|_| 1e-3 * complex_gaussian(&mut rng)).collect(), 4, 8).unwrap();
    let a = solver.sbim(&e).unwrap();
    let b = BornIterative::new(&config).unwrap().sbim(&e).unwrap();
    assert_eq!(a, b);
    assert!(a.gammas.iter().all(|g| g.is_finite() && *g > 0.0));
    let zero = Complex64::new(0.0, 0.0);
    assert!(a.final_image.t.iter().any(|z| *z != zero));
}
