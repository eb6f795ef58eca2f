//! Property-based checks of the standardization, fitting, scoring, and
//! posterior layers: invariances that must hold for every dataset, not just
//! the worked examples.

use std::collections::BTreeMap;

use proptest::prelude::*;

use subharmonic::{
    fit_submodel, generate_replicate, log_bf_bic, log_bf_exact, log_bf_laplace,
    posterior_probabilities, select_with_options, standardize, ErrorModel, FitSummary,
    GPriorSpec, Method, ModelId, ModelPrior, SimDesign, Variant, DEFAULT_ENUMERATION_CAP,
    DEFAULT_REL_TOL,
};

// Random dataset through the public generator: p standardized predictor
// columns and a noisy response.
fn random_raw(seed: u64, n: usize, p: usize, sigma: f64) -> subharmonic::RawData {
    let design = SimDesign {
        n,
        p,
        predictor_correlations: if p >= 2 {
            vec![((1, 2), 0.4)]
        } else {
            vec![]
        },
        true_mask: ModelId::from_indices(&[1]),
        intercept: 0.7,
        coef: 1.5,
        sigma,
        error: ErrorModel::Gaussian,
        replicates: 1,
        seed,
    };
    generate_replicate(&design, 0).unwrap()
}

// Synthetic fit summary for score-level properties; only (model, q, r2,
// r2_check) feed the Bayes factor formulas.
fn synthetic_fit(model: ModelId, r2: f64) -> FitSummary {
    FitSummary {
        model,
        q: model.q(),
        rss: 1.0 - r2,
        r2,
        r2_check: r2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // =========================================================================
    // Standardization
    // =========================================================================

    #[test]
    fn standardized_columns_have_zero_mean_unit_scale(
        seed in any::<u64>(),
        n in 12usize..40,
        p in 1usize..5,
    ) {
        let raw = random_raw(seed, n, p, 1.0);
        let data = standardize(&raw).unwrap();
        for j in 0..p {
            let column: Vec<f64> = (0..n).map(|i| data.x()[(i, j)]).collect();
            let mean = column.iter().sum::<f64>() / n as f64;
            let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            prop_assert!(mean.abs() < 1e-10);
            prop_assert!((var - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn standardization_is_idempotent(
        seed in any::<u64>(),
        n in 12usize..40,
        p in 1usize..5,
    ) {
        let raw = random_raw(seed, n, p, 1.0);
        let once = standardize(&raw).unwrap();
        let again = standardize(&subharmonic::RawData {
            columns: (0..p)
                .map(|j| (0..n).map(|i| once.x()[(i, j)]).collect())
                .collect(),
            names: raw.names.clone(),
            y: raw.y.clone(),
        })
        .unwrap();
        for j in 0..p {
            for i in 0..n {
                prop_assert!((once.x()[(i, j)] - again.x()[(i, j)]).abs() < 1e-12);
            }
        }
    }

    // =========================================================================
    // Least-squares fits
    // =========================================================================

    #[test]
    fn nested_models_have_monotone_r2(
        seed in any::<u64>(),
        n in 14usize..40,
        extra in 1usize..4,
    ) {
        let p = 1 + extra;
        let raw = random_raw(seed, n, p, 1.0);
        let data = standardize(&raw).unwrap();
        let sub = ModelId::from_indices(&[1]);
        let indices: Vec<usize> = (1..=p).collect();
        let sup = ModelId::from_indices(&indices);
        let sub_fit = fit_submodel(&data, sub).unwrap();
        let sup_fit = fit_submodel(&data, sup).unwrap();
        prop_assert!(sup.is_superset_of(sub));
        prop_assert!(sub_fit.r2 <= sup_fit.r2 + 1e-12);
        prop_assert!(sub_fit.rss + 1e-9 >= sup_fit.rss);
    }

    #[test]
    fn fits_are_invariant_under_affine_response_maps(
        seed in any::<u64>(),
        a in 0.1f64..10.0,
        b in -5.0f64..5.0,
    ) {
        let raw = random_raw(seed, 25, 3, 1.0);
        let mut shifted = raw.clone();
        for v in shifted.y.iter_mut() {
            *v = a * *v + b;
        }
        let data = standardize(&raw).unwrap();
        let data_shifted = standardize(&shifted).unwrap();
        for mask in [&[1usize][..], &[2], &[1, 3], &[1, 2, 3]] {
            let model = ModelId::from_indices(mask);
            let fit = fit_submodel(&data, model).unwrap();
            let fit_shifted = fit_submodel(&data_shifted, model).unwrap();
            prop_assert!((fit.r2 - fit_shifted.r2).abs() < 1e-10);
        }
    }

    #[test]
    fn fits_commute_with_column_permutation(
        seed in any::<u64>(),
        n in 14usize..40,
    ) {
        let raw = random_raw(seed, n, 3, 1.0);
        let mut swapped = raw.clone();
        swapped.columns.swap(0, 2);
        swapped.names.swap(0, 2);
        let data = standardize(&raw).unwrap();
        let data_swapped = standardize(&swapped).unwrap();
        // {1,2} in the original is {3,2} after swapping columns 1 and 3.
        let fit = fit_submodel(&data, ModelId::from_indices(&[1, 2])).unwrap();
        let fit_swapped = fit_submodel(&data_swapped, ModelId::from_indices(&[2, 3])).unwrap();
        prop_assert!((fit.r2 - fit_swapped.r2).abs() < 1e-10);
        prop_assert!((fit.rss - fit_swapped.rss).abs() < 1e-8);
    }

    // =========================================================================
    // Bayes factor scores
    // =========================================================================

    #[test]
    fn scores_increase_with_fit_quality(
        r_lo in 0.05f64..0.90,
        gap in 0.01f64..0.09,
        nu in -2.0f64..0.95,
    ) {
        let r_hi = r_lo + gap;
        let model = ModelId::from_indices(&[1, 2]);
        let lo = synthetic_fit(model, r_lo);
        let hi = synthetic_fit(model, r_hi);
        let full = synthetic_fit(ModelId::from_indices(&[1, 2, 3, 4]), 0.97);
        let (n, p) = (30, 4);

        let bic_lo = log_bf_bic(&lo, &full, n, p).unwrap().value;
        let bic_hi = log_bf_bic(&hi, &full, n, p).unwrap().value;
        prop_assert!(bic_lo <= bic_hi + 1e-10);

        // Integrability at g = 0 needs nu > -k, so non-positive nu requires
        // a sharpness exponent.
        let k = if nu > 0.0 { 0.0 } else { 3.0 };
        let gspec = GPriorSpec::new(nu, k, Variant::Centered).unwrap();
        let exact_lo = log_bf_exact(&lo, &full, n, &gspec).unwrap().value;
        let exact_hi = log_bf_exact(&hi, &full, n, &gspec).unwrap().value;
        prop_assert!(exact_lo <= exact_hi + 1e-8);
    }

    #[test]
    fn laplace_scores_increase_with_fit_quality_past_the_threshold(
        r_lo in 0.20f64..0.90,
        gap in 0.01f64..0.09,
        nu in -2.0f64..0.95,
    ) {
        // The closed-form approximation is asymptotic in n R^2 and is
        // monotone in R^2 only above (q - nu) / (n - 1); below that the
        // approximation error dominates. Here the threshold is at most
        // (2 + 2) / 29, so 0.20 clears it for every sampled nu.
        let r_hi = r_lo + gap;
        let model = ModelId::from_indices(&[1, 2]);
        let lo = synthetic_fit(model, r_lo);
        let hi = synthetic_fit(model, r_hi);
        let full = synthetic_fit(ModelId::from_indices(&[1, 2, 3, 4]), 0.97);
        let laplace_lo = log_bf_laplace(&lo, &full, 30, 4, nu).unwrap().value;
        let laplace_hi = log_bf_laplace(&hi, &full, 30, 4, nu).unwrap().value;
        prop_assert!(laplace_lo <= laplace_hi + 1e-10);
    }

    // =========================================================================
    // Posterior probabilities
    // =========================================================================

    #[test]
    fn posteriors_normalize_and_stay_in_range(
        log_bfs in prop::collection::vec(-300.0f64..300.0, 1..20),
    ) {
        let scores: BTreeMap<ModelId, f64> = log_bfs
            .iter()
            .enumerate()
            .map(|(i, &v)| (ModelId(i as u32 + 1), v))
            .collect();
        let posterior = posterior_probabilities(&scores, &ModelPrior::UniformNonNull).unwrap();
        let total: f64 = posterior.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for &value in posterior.values() {
            prop_assert!((0.0..=1.0).contains(&value));
        }
    }

    #[test]
    fn posterior_ratios_track_score_differences(
        log_bfs in prop::collection::vec(-30.0f64..30.0, 2..12),
    ) {
        let scores: BTreeMap<ModelId, f64> = log_bfs
            .iter()
            .enumerate()
            .map(|(i, &v)| (ModelId(i as u32 + 1), v))
            .collect();
        let posterior = posterior_probabilities(&scores, &ModelPrior::UniformNonNull).unwrap();
        let pairs: Vec<(ModelId, f64)> = scores.iter().map(|(m, &s)| (*m, s)).collect();
        for window in pairs.windows(2) {
            let (m_a, s_a) = window[0];
            let (m_b, s_b) = window[1];
            let p_a = posterior[&m_a];
            let p_b = posterior[&m_b];
            if p_a > 1e-12 && p_b > 1e-12 {
                prop_assert!(((p_a.ln() - p_b.ln()) - (s_a - s_b)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn posteriors_are_invariant_under_score_shifts(
        log_bfs in prop::collection::vec(-50.0f64..50.0, 1..12),
        shift in -100.0f64..100.0,
    ) {
        let scores: BTreeMap<ModelId, f64> = log_bfs
            .iter()
            .enumerate()
            .map(|(i, &v)| (ModelId(i as u32 + 1), v))
            .collect();
        let shifted: BTreeMap<ModelId, f64> =
            scores.iter().map(|(m, &v)| (*m, v + shift)).collect();
        let base = posterior_probabilities(&scores, &ModelPrior::UniformNonNull).unwrap();
        let moved = posterior_probabilities(&shifted, &ModelPrior::UniformNonNull).unwrap();
        for (m, &value) in &base {
            prop_assert!((value - moved[m]).abs() < 1e-12);
        }
    }

    // =========================================================================
    // End-to-end ranking invariance
    // =========================================================================

    #[test]
    fn rankings_survive_affine_response_maps(
        seed in any::<u64>(),
        a in 0.2f64..5.0,
        b in -3.0f64..3.0,
    ) {
        let raw = random_raw(seed, 24, 3, 1.0);
        let mut shifted = raw.clone();
        for v in shifted.y.iter_mut() {
            *v = a * *v + b;
        }
        let data = standardize(&raw).unwrap();
        let data_shifted = standardize(&shifted).unwrap();
        let gspec = GPriorSpec::new(0.5, 0.0, Variant::Centered).unwrap();
        let methods = [Method::LaplacePhi, Method::Bic];
        let report = select_with_options(
            &data,
            &gspec,
            &methods,
            &ModelPrior::UniformNonNull,
            DEFAULT_REL_TOL,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        let report_shifted = select_with_options(
            &data_shifted,
            &gspec,
            &methods,
            &ModelPrior::UniformNonNull,
            DEFAULT_REL_TOL,
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        for method in methods {
            prop_assert_eq!(&report.rankings[&method], &report_shifted.rankings[&method]);
        }
    }
}
