mod common;

use std::sync::OnceLock;

use betachart_core::fit::*;
use betachart_core::stream::stream;
use betachart_core::Error;
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Term-by-term log-likelihood with an independent log-gamma.
fn loglik_oracle(beta: &[f64], gamma: &[f64], x: &DMatrix<f64>, z: &DMatrix<f64>, y: &[f64]) -> f64 {
    (0..y.len())
        .map(|t| {
            let mu = logistic((0..beta.len()).map(|i| x[(t, i)] * beta[i]).sum());
            let s = logistic((0..gamma.len()).map(|i| z[(t, i)] * gamma[i]).sum());
            let phi = (1.0 - s * s) / (s * s);
            ln_gamma(phi) - ln_gamma(mu * phi) - ln_gamma((1.0 - mu) * phi)
                + (mu * phi - 1.0) * y[t].ln()
                + ((1.0 - mu) * phi - 1.0) * (1.0 - y[t]).ln()
        })
        .sum()
}

#[test]
fn uniform_model_has_zero_loglik() {
    let ones = DMatrix::from_element(5, 1, 1.0);
    let data = Dataset::new(vec![0.1, 0.25, 0.5, 0.8, 0.97], ones.clone(), ones).unwrap();
    let g0 = (1.0f64 / 3.0).sqrt();
    let gamma = (g0 / (1.0 - g0)).ln();
    let l = loglik(&[0.0], &[gamma], &ModelSpec::intercept_only(), &data).unwrap();
    assert!(l.abs() < 1e-12, "{l}");
}

#[test]
fn single_observation_beta_2_2() {
    // μ = 0.5, σ² = 0.2 is Beta(2, 2); f(0.5) = 1.5
    let ones = DMatrix::from_element(4, 1, 1.0);
    let data = Dataset::new(vec![0.5; 4], ones.clone(), ones).unwrap();
    let s = 0.2f64.sqrt();
    let l = loglik(&[0.0], &[(s / (1.0 - s)).ln()], &ModelSpec::intercept_only(), &data).unwrap();
    assert!((l / 4.0 - 1.5f64.ln()).abs() < 1e-12);
}

#[test]
fn tire_loglik_matches_summation_oracle() {
    let data = tire_dataset();
    let l = loglik(&TABLE_BETA, &TABLE_GAMMA, &tire_spec(), &data).unwrap();
    let o = loglik_oracle(&TABLE_BETA, &TABLE_GAMMA, data.x(), data.z(), data.y());
    assert!((l - o).abs() < 1e-4, "{l} vs {o}");
}

#[test]
fn loglik_rejects_wrong_lengths() {
    let data = tire_dataset();
    assert!(matches!(loglik(&[0.0; 5], &TABLE_GAMMA, &tire_spec(), &data), Err(Error::Usage(_))));
    assert!(score(&TABLE_BETA, &[f64::NAN; 3], &tire_spec(), &data).is_err());
}

#[test]
fn score_matches_finite_differences_on_120_points() {
    let spec = sim_spec();
    for id in 1..=6u8 {
        let sim = Sim::preset(id, 200, 100 + id as u64);
        let data = sim.dataset(&mut stream(1, id as u64, 0));
        let mut rng = stream(2, id as u64, 0);
        for _ in 0..20 {
            let theta: Vec<f64> = sim.truth().iter().map(|v| v + 0.2 * rng.sample::<f64, _>(StandardNormal)).collect();
            let (b, g) = theta.split_at(3);
            let an = score(b, g, &spec, &data).unwrap();
            for j in 0..6 {
                let h = 1e-6 * theta[j].abs().max(1.0);
                let mut up = theta.clone();
                let mut dn = theta.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (loglik(&up[..3], &up[3..], &spec, &data).unwrap() - loglik(&dn[..3], &dn[3..], &spec, &data).unwrap())
                    / (2.0 * h);
                let scale = an[j].abs().max(1.0);
                assert!((an[j] - fd).abs() <= 1e-5 * scale, "scenario {id} j {j}: {} vs {fd}", an[j]);
            }
        }
    }
}

#[test]
fn mean_score_sign_follows_monotonicity() {
    let ones = DMatrix::from_element(6, 1, 1.0);
    let y = vec![0.2, 0.3, 0.4, 0.4, 0.5, 0.6];
    let data = Dataset::new(y, ones.clone(), ones).unwrap();
    let spec = ModelSpec::intercept_only();
    let below = score(&[-2.0], &[-1.0], &spec, &data).unwrap();
    let above = score(&[1.0], &[-1.0], &spec, &data).unwrap();
    assert!(below[0] > 0.0 && above[0] < 0.0);
}

#[test]
fn tire_fit_reproduces_dispersion_submodel() {
    let data = tire_dataset();
    let spec = tire_spec();
    let fit = fit_betareg(&spec, &data).unwrap();
    for (g, t) in fit.gamma_hat.iter().zip(TABLE_GAMMA) {
        assert!((g - t).abs() < 0.02, "{g} vs {t}");
    }
    let rows = inference(&fit, &spec, &data).unwrap();
    for (r, se) in rows[6..].iter().zip(TABLE_GAMMA_SE) {
        assert!(((r.std_error - se) / se).abs() < 0.15, "{r:?}");
    }
    // mean intercept: estimate -3.5807, se 0.2140, z -16.73 in the table
    assert!((rows[0].estimate + 3.5807).abs() < 0.02);
    assert!(((rows[0].std_error - 0.2140) / 0.2140).abs() < 0.15);
    assert!((rows[0].z_stat + 16.73).abs() < 0.5);
    let g = score(&fit.beta_hat, &fit.gamma_hat, &spec, &data).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-5));
}

#[test]
fn tire_lr_test() {
    let spec = tire_spec();
    let full = fit_betareg(&spec, &tire_dataset()).unwrap();
    let reduced = fit_betareg(&spec.constant_dispersion(), &tire_constant_dispersion()).unwrap();
    let lr = lr_constant_dispersion(&full, &reduced).unwrap();
    assert_eq!(lr.df, 2);
    assert!((lr.stat - 6.9016).abs() < 0.02, "{lr:?}");
    assert!((lr.p_value - 0.0317).abs() < 0.001);
    assert!((lr.p_value - (-lr.stat / 2.0).exp()).abs() < 1e-12);
}

#[test]
fn lr_identical_fits_and_mismatch() {
    let spec = tire_spec();
    let full = fit_betareg(&spec, &tire_dataset()).unwrap();
    let same = lr_constant_dispersion(&full, &full).unwrap();
    assert_eq!((same.stat, same.df, same.p_value), (0.0, 0, 1.0));
    let mut other = full.clone();
    other.spec.mean_cols.pop();
    assert!(matches!(lr_constant_dispersion(&full, &other), Err(Error::Usage(_))));
}

#[test]
fn zero_estimate_has_unit_p_value() {
    let mut fit = fit_betareg(&tire_spec(), &tire_dataset()).unwrap();
    fit.beta_hat[1] = 0.0;
    let rows = inference(&fit, &tire_spec(), &tire_dataset()).unwrap();
    assert_eq!((rows[1].z_stat, rows[1].p_value), (0.0, 1.0));
}

#[test]
fn fit_refuses_boundary_responses() {
    let ones = DMatrix::from_element(5, 1, 1.0);
    let e = Dataset::new(vec![0.2, 0.3, 1.0, 0.4, 0.5], ones.clone(), ones).unwrap_err();
    assert!(matches!(&e, Error::Data(m) if m.contains("row 3") && m.contains("boundary")), "{e}");
}

#[test]
fn rank_deficient_design_is_rejected() {
    let x = DMatrix::from_fn(10, 3, |t, j| if j == 2 { 2.0 * t as f64 } else if j == 1 { t as f64 } else { 1.0 });
    let z = DMatrix::from_element(10, 1, 1.0);
    assert!(matches!(Design::new(x, z), Err(Error::RankDeficient { .. })));
}

#[test]
fn non_convergence_reports_last_iterate() {
    let opts = FitOptions { max_iter: 1, ..FitOptions::default() };
    match fit_betareg_with(&tire_spec(), &tire_dataset(), &opts) {
        Err(Error::FitNonConvergence { iterations, last_iterate, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(last_iterate.len(), 9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn ols_intercept_only_is_the_mean() {
    let ones = DMatrix::from_element(4, 1, 1.0);
    let data = Dataset::new(vec![0.1, 0.2, 0.4, 0.5], ones.clone(), ones).unwrap();
    let o = fit_ols(&data).unwrap();
    assert!((o.coef[0] - 0.3).abs() < 1e-15);
    assert!(!o.degenerate && o.resid_sd > 0.0);
}

#[test]
fn ols_exact_fit_is_flagged() {
    let x = DMatrix::from_fn(8, 2, |t, j| if j == 0 { 1.0 } else { t as f64 });
    let y: Vec<f64> = (0..8).map(|t| 0.1 + 0.05 * t as f64).collect();
    let data = Dataset::new(y, x, DMatrix::from_element(8, 1, 1.0)).unwrap();
    assert!(fit_ols(&data).unwrap().degenerate);
}

#[test]
fn ols_matches_qr_oracle() {
    let mut rng = stream(9, 9, 0);
    for case in 0..20 {
        let (n, k) = (30 + case, 1 + case % 5);
        let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() * 4.0 - 2.0 });
        let y: Vec<f64> = (0..n).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
        let data = Dataset::new(y.clone(), x.clone(), DMatrix::from_element(n, 1, 1.0)).unwrap();
        let ours = fit_ols(&data).unwrap();
        let qr = x.clone().qr();
        let qty = qr.q().transpose() * nalgebra::DVector::from_vec(y);
        let coef = qr.r().solve_upper_triangular(&qty).unwrap();
        for i in 0..k {
            assert!((ours.coef[i] - coef[i]).abs() < 1e-10);
        }
    }
}

struct McStudy {
    estimates: Vec<Vec<f64>>,
    std_errors: Vec<Vec<f64>>,
}

/// 500 fits of Scenario 3 at n = 1000.
fn scenario3_study() -> &'static McStudy {
    static STUDY: OnceLock<McStudy> = OnceLock::new();
    STUDY.get_or_init(|| {
        let sim = Sim::preset(3, 1000, 33);
        let spec = sim_spec();
        let mut estimates = Vec::new();
        let mut std_errors = Vec::new();
        for r in 0..500 {
            let data = sim.dataset(&mut stream(33, 1, r));
            let fit = fit_betareg(&spec, &data).unwrap();
            let v = fit.vcov.as_ref().unwrap();
            std_errors.push((0..6).map(|i| v[(i, i)].sqrt()).collect());
            estimates.push(fit.theta());
        }
        McStudy { estimates, std_errors }
    })
}

#[test]
fn scenario3_estimates_within_three_standard_errors() {
    let study = scenario3_study();
    let truth = Sim::preset(3, 1000, 33).truth();
    for i in 0..6 {
        let inside = study
            .estimates
            .iter()
            .zip(&study.std_errors)
            .filter(|(e, s)| (e[i] - truth[i]).abs() <= 3.0 * s[i])
            .count();
        assert!(inside as f64 >= 0.99 * 500.0, "coefficient {i}: {inside}/500");
    }
}

#[test]
fn scenario3_standard_errors_match_monte_carlo_spread() {
    let study = scenario3_study();
    let m = study.estimates.len() as f64;
    for i in 0..6 {
        let mean = study.estimates.iter().map(|e| e[i]).sum::<f64>() / m;
        let var = study.estimates.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se2 = study.std_errors.iter().map(|s| s[i] * s[i]).sum::<f64>() / m;
        assert!(((se2 - var) / var).abs() < 0.25, "coefficient {i}: se² {se2} vs var {var}");
    }
}

#[test]
fn lr_null_rejection_rate() {
    // Scenario 3 mean structure, dispersion slopes zero
    let sim = Sim::new([-1.35, 1.0, 1.0], [-1.15, 0.0, 0.0], 500, 55);
    let spec = sim_spec();
    let reduced_spec = spec.constant_dispersion();
    let mut rejected = 0;
    for r in 0..2000 {
        let data = sim.dataset(&mut stream(55, 2, r));
        let opts = FitOptions { compute_vcov: false, ..FitOptions::default() };
        let full = fit_betareg_with(&spec, &data, &opts).unwrap();
        let reduced = fit_betareg_with(&reduced_spec, &sim.constant_dispersion(&data), &opts).unwrap();
        if lr_constant_dispersion(&full, &reduced).unwrap().p_value < 0.05 {
            rejected += 1;
        }
    }
    let rate = rejected as f64 / 2000.0;
    assert!((rate - 0.05).abs() <= 0.015, "rejection rate {rate}");
}

#[test]
fn restriction_matches_full_fit_when_slopes_vanish() {
    // Identical responses at each dispersion level: the full fit's slopes
    // estimate close to zero and the two optima nearly coincide.
    let sim = Sim::new([-1.35, 1.0, 1.0], [-1.15, 0.0, 0.0], 2000, 8);
    let data = sim.dataset(&mut stream(8, 8, 8));
    let full = fit_betareg(&sim_spec(), &data).unwrap();
    let red = fit_betareg(&sim_spec().constant_dispersion(), &sim.constant_dispersion(&data)).unwrap();
    assert!(full.loglik >= red.loglik);
    for i in 0..3 {
        assert!((full.beta_hat[i] - red.beta_hat[i]).abs() < 0.05);
    }
    assert!(full.gamma_hat[1].abs() < 0.2 && full.gamma_hat[2].abs() < 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn fitted_model_invariants(id in 1u8..=6, seed in 0u64..1_000_000) {
        let sim = Sim::preset(id, 120, seed);
        let data = sim.dataset(&mut stream(seed, 77, 0));
        let spec = sim_spec();
        let full = fit_betareg(&spec, &data).unwrap();
        let red = fit_betareg(&spec.constant_dispersion(), &sim.constant_dispersion(&data)).unwrap();
        prop_assert!(red.loglik <= full.loglik + 1e-8);

        let g = score(&full.beta_hat, &full.gamma_hat, &spec, &data).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() < 1e-5));
        prop_assert!(full.mu_hat.iter().chain(&full.sigma_hat).all(|&v| v > 0.0 && v < 1.0));

        let v = full.vcov.as_ref().unwrap();
        for i in 0..6 {
            prop_assert!(v[(i, i)] >= 0.0);
            for j in 0..6 {
                prop_assert!((v[(i, j)] - v[(j, i)]).abs() <= 1e-10 * v[(i, i)].abs().max(v[(j, j)].abs()).max(1.0));
            }
        }
        let start = loglik(&sim.beta, &sim.gamma, &spec, &data).unwrap();
        prop_assert!(full.loglik >= start - 1e-8);
    }
}
