mod common;

use common::*;
use mfrkhs::funcspace::{inner_product, FunctionSample};
use mfrkhs::kernels::{combine_gram, gram_matrices};
use mfrkhs::model::{fit, mse, predict_dataset, selected_variables};
use mfrkhs::solver::build_theta_quadratic;
use mfrkhs::FitConfig;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn sample(values: &[f64]) -> FunctionSample {
    FunctionSample::new(unit_grid(values.len()), values.to_vec()).unwrap()
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|m| {
        let v = || prop::collection::vec(-10.0f64..10.0, m);
        (v(), v(), v())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_bilinear_and_bounded((a, b, c) in triple(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let (fa, fb, fc) = (sample(&a), sample(&b), sample(&c));
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
        let lhs = inner_product(&sample(&mix), &fc).unwrap();
        let rhs = s * inner_product(&fa, &fc).unwrap() + t * inner_product(&fb, &fc).unwrap();
        let scale = 1.0 + (s.abs() + t.abs()) * 1e3;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        let ab = inner_product(&fa, &fb).unwrap();
        let aa = inner_product(&fa, &fa).unwrap();
        let bb = inner_product(&fb, &fb).unwrap();
        prop_assert!((ab - inner_product(&fb, &fa).unwrap()).abs() <= 1e-14 * (aa * bb).sqrt());
        prop_assert!(aa >= 0.0);
        prop_assert!(ab * ab <= aa * bb * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn grams_are_valid_kernels(seed in any::<u64>(), n in 2usize..9, p in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n, p, 8, 3);
        let grams = gram_matrices(&inst.specs, &inst.data.covariates).unwrap();
        for g in &grams {
            for i in 0..n {
                prop_assert_eq!(g[(i, i)], 1.0);
                for j in 0..n {
                    prop_assert_eq!(g[(i, j)], g[(j, i)]);
                    prop_assert!(g[(i, j)] > 0.0 && g[(i, j)] <= 1.0);
                }
            }
        }
        let theta = random_theta(&mut r, p);
        let k = combine_gram(&grams, &theta).unwrap();
        let eig = SymmetricEigen::new(k).eigenvalues;
        prop_assert!(eig.min() >= -1e-10 * eig.max().abs().max(1.0));
    }

    #[test]
    fn theta_quadratic_is_convex(seed in any::<u64>(), n in 2usize..7, p in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n, p, 12, 4);
        let u = random_u(&mut r, &inst);
        let quad = build_theta_quadratic(&u, &inst.data, &inst.specs, &inst.op, 0.5, 0.2).unwrap();
        let (lo, hi) = quad.eigen_range();
        prop_assert!(lo >= -1e-10 * hi.abs().max(1.0));
    }

    #[test]
    fn mse_is_nonnegative(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let g = unit_grid(9);
        let a: Vec<_> = (0..n).map(|_| random_sample(&mut r, &g, 1.0)).collect();
        let b: Vec<_> = (0..n).map(|_| random_sample(&mut r, &g, 1.0)).collect();
        prop_assert!(mse(&a, &b).unwrap() >= 0.0);
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rescaling_keeps_predictions_and_selection(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 5, 3, 10, 4);
        let model = fit(&inst.data, &inst.specs, &inst.op, &FitConfig::default()).unwrap();
        let scaled = model.rescaled(c);
        prop_assert_eq!(selected_variables(&model), selected_variables(&scaled));
        let a = predict_dataset(&model, &inst.data).unwrap();
        let b = predict_dataset(&scaled, &inst.data).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let scale = x.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            prop_assert!(max_abs_diff(x.values(), y.values()) <= 1e-12 * scale);
        }
    }
}
