use proptest::prelude::*;
use sparse_ula::analytic::{
    collision_prob_exact, collision_prob_gap, collision_prob_numeric, crossover_thresholds, lobe_collision_prob,
    AnalyticScenario, InterferenceLaw, TwoLobeModel,
};
use sparse_ula::ArrayConfig;

fn ula(m: usize, eta: f64) -> ArrayConfig {
    ArrayConfig::new(m, eta).unwrap()
}

/// Sign of the collocated-minus-sparse gap, with tiny values counted as zero.
fn sign(x: f64) -> i8 {
    if x.abs() < 1e-12 {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Collocated-minus-sparse gap with `n_max` taken as the unfloored `eta s - alpha/(2M)`.
fn smooth_gap(m: f64, eta: f64, alpha: f64, s: f64) -> f64 {
    let p_col = (4.0 * alpha * m * s - alpha * alpha) / (4.0 * s * s * m * m);
    let n = eta * s - alpha / (2.0 * m);
    let p_eta = alpha * ((2.0 * n + 1.0) * s - alpha / (4.0 * m * eta) - n * (n + 1.0) / eta) / (s * s * m * eta);
    p_col - p_eta
}

#[test]
fn gap_sign_pattern_across_thresholds() {
    let alpha = 1.6;
    for (m, eta) in [(16, 5.5), (32, 4.0), (8, 2.5)] {
        let array = ula(m, eta);
        let th = crossover_thresholds(&array, alpha).unwrap();
        let mut runs: Vec<(i8, f64)> = Vec::new();
        for i in 1..=20_000 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 20_000.0;
            let s = sign(collision_prob_gap(&array, alpha, theta).unwrap());
            if runs.last().map(|r| r.0) != Some(s) {
                runs.push((s, theta));
            }
        }
        let signs: Vec<i8> = runs.iter().map(|r| r.0).collect();
        assert_eq!(signs, vec![0, 1, -1], "M={m} eta={eta}");
        assert!((runs[1].1 - th.theta_lower).abs() < 1e-4, "M={m} eta={eta}: lower flip at {}", runs[1].1);
        // The floor in n_max moves the upper flip below the threshold, never above it.
        let early = th.theta_upper - runs[2].1;
        assert!((0.0..4f64.to_radians()).contains(&early), "M={m} eta={eta}: upper flip {early} rad early");

        // Without the floor the gap changes sign exactly at the upper threshold.
        let su = th.theta_upper.sin();
        let (mf, h) = (m as f64, 1e-7);
        assert!(smooth_gap(mf, eta, alpha, su - h) > 0.0 && smooth_gap(mf, eta, alpha, su + h) < 0.0);
        assert!(smooth_gap(mf, eta, alpha, su).abs() < 1e-12);
    }
}

#[test]
fn closed_form_agrees_with_quadrature_away_from_edges() {
    for &(m, eta) in &[(16, 2.0), (32, 4.0), (16, 8.0), (32, 5.5)] {
        let array = ula(m, eta);
        for deg in [3.0, 7.0, 12.0, 25.0, 41.0, 58.0] {
            let theta = f64::to_radians(deg);
            let s = theta.sin();
            let frac = eta * s - (eta * s).round();
            if frac.abs() < 1.6 / (2.0 * m as f64) + 1e-3 {
                continue;
            }
            let closed = lobe_collision_prob(&array, 1.6, theta).unwrap();
            let numeric = collision_prob_numeric(&array, 1.6, theta, |_| 0.5 / s).unwrap();
            assert!((closed - numeric).abs() < 1e-6, "M={m} eta={eta} {deg} deg: {closed} vs {numeric}");
        }
    }
}

/// Direct two-dimensional midpoint quadrature on a grid of (x_i, x_k).
fn brute_force_collision(array: &ArrayConfig, alpha: f64, theta_max: f64, n: usize) -> f64 {
    let s = theta_max.sin();
    let t = alpha / (array.elements() as f64 * array.eta());
    let order = array.max_lobe_order();
    let h = 2.0 * s / n as f64;
    let mut hits = 0usize;
    for i in 0..n {
        let xi = -s + h * (i as f64 + 0.5);
        for k in 0..n {
            let d = xi - (-s + h * (k as f64 + 0.5));
            if (-order..=order).any(|l| (d - 2.0 * l as f64 / array.eta()).abs() <= t) {
                hits += 1;
            }
        }
    }
    hits as f64 / (n * n) as f64
}

#[test]
fn exact_lobe_sum_matches_brute_force() {
    for &(eta, deg) in &[(4.0, 10.0), (5.5, 30.0), (2.0, 60.0), (1.0, 20.0)] {
        let array = ula(16, eta);
        let theta = f64::to_radians(deg);
        let brute = brute_force_collision(&array, 1.6, theta, 3000);
        let exact = collision_prob_exact(&array, 1.6, theta).unwrap();
        assert!((brute - exact).abs() < 2e-3, "eta={eta} {deg} deg: {brute} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collision_probability_is_a_probability(m in 2usize..64, eta in 1.0f64..10.0, alpha in 0.0f64..2.0,
                                              theta in 0.001f64..std::f64::consts::FRAC_PI_2) {
        let array = ula(m, eta);
        for p in [lobe_collision_prob(&array, alpha, theta).unwrap(), collision_prob_exact(&array, alpha, theta).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn thresholds_are_ordered(m in 2usize..128, eta in 1.01f64..12.0, alpha in 0.01f64..2.0) {
        let th = crossover_thresholds(&ula(m, eta), alpha).unwrap();
        prop_assert!(0.0 < th.theta_lower && th.theta_lower < th.theta_upper);
        prop_assert!(th.theta_upper <= std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn more_users_lower_the_rate_distribution(users in 2usize..60, rate in 0.01f64..12.0) {
        let model = TwoLobeModel::with_analytic_main_gain(32, 1.6, 5e-3).unwrap();
        let array = ula(32, 4.0);
        let theta = f64::to_radians(10.0);
        let law = |k| InterferenceLaw::new(&AnalyticScenario::new(k, array, theta, 100.0).unwrap(), &model).unwrap();
        prop_assert!(law(users).binomial_cdf(rate) <= law(users + 1).binomial_cdf(rate) + 1e-12);
    }
}
