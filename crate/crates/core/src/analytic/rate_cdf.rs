//! Rate distribution of one user under the two-level pattern model with LoS
//! channels, MRC and equal normalized SNR.
//!
//! Each of the `K - 1` interferers independently lands in a lobe with
//! probability `p`, contributing `g_main`, and otherwise contributes `g_side`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::collision::lobe_collision_prob;
use super::two_lobe::TwoLobeModel;
use crate::array::{ArrayConfig, ANGLE_SLACK};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticScenario {
    users: usize,
    array: ArrayConfig,
    theta_max: f64,
    snr_linear: f64,
}

impl AnalyticScenario {
    pub fn new(users: usize, array: ArrayConfig, theta_max: f64, snr_linear: f64) -> Result<Self> {
        if users == 0 {
            return Err(Error::param("users", "need at least one user"));
        }
        if !(theta_max > 0.0 && theta_max <= FRAC_PI_2 + ANGLE_SLACK) {
            return Err(Error::param("theta_max", format!("must lie in (0, pi/2], got {theta_max}")));
        }
        if !(snr_linear > 0.0) || !snr_linear.is_finite() {
            return Err(Error::param("snr", format!("must be positive and finite, got {snr_linear}")));
        }
        Ok(Self {
            users,
            array,
            theta_max: theta_max.min(FRAC_PI_2),
            snr_linear,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn snr_linear(&self) -> f64 {
        self.snr_linear
    }
}

/// The Bernoulli interference law for one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceLaw {
    pub interferers: usize,
    pub snr_linear: f64,
    pub elements: usize,
    pub g_main: f64,
    pub g_side: f64,
    pub collision_prob: f64,
}

impl InterferenceLaw {
    /// Law with the closed-form collision probability for uniform angles.
    pub fn new(scenario: &AnalyticScenario, model: &TwoLobeModel) -> Result<Self> {
        let p = lobe_collision_prob(&scenario.array, model.alpha(), scenario.theta_max)?;
        Self::with_collision_prob(scenario, model, p)
    }

    pub fn with_collision_prob(scenario: &AnalyticScenario, model: &TwoLobeModel, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("collision_prob", format!("must lie in [0, 1], got {p}")));
        }
        Ok(Self {
            interferers: scenario.users - 1,
            snr_linear: scenario.snr_linear,
            elements: scenario.array.elements(),
            g_main: model.g_main(),
            g_side: model.g_side(),
            collision_prob: p,
        })
    }

    /// Interference budget `Y = 1/(2^R - 1) - 1/(P M)`: the rate is at most `R`
    /// exactly when the summed correlations reach `Y`.
    pub fn interference_budget(&self, rate: f64) -> f64 {
        1.0 / (rate * std::f64::consts::LN_2).exp_m1() - 1.0 / (self.snr_linear * self.elements as f64)
    }

    /// Rate of the user when `hits` interferers sit in a lobe.
    pub fn rate_with_hits(&self, hits: usize) -> f64 {
        let m = self.elements as f64;
        let load = hits as f64 * self.g_main + (self.interferers - hits) as f64 * self.g_side;
        let sinr = self.snr_linear * m / (m * self.snr_linear * load + 1.0);
        crate::beamform::rate_from_sinr(sinr)
    }

    /// Binomial CDF `Pr(rate <= R)`.
    pub fn binomial_cdf(&self, rate: f64) -> f64 {
        if !(rate > 0.0) {
            return 0.0;
        }
        let y = self.interference_budget(rate);
        let n_hits = ((y - self.interferers as f64 * self.g_side) / (self.g_main - self.g_side)).floor();
        if n_hits < 0.0 {
            return 1.0;
        }
        if n_hits >= self.interferers as f64 {
            return 0.0;
        }
        (1.0 - binomial_lower_tail(self.interferers, self.collision_prob, n_hits as usize)).clamp(0.0, 1.0)
    }

    /// Normal approximation of the summed correlations.
    pub fn gaussian_cdf(&self, rate: f64) -> Result<f64> {
        if self.interferers == 0 {
            return Err(Error::param("users", "the normal approximation needs at least two users"));
        }
        if !(rate > 0.0) {
            return Ok(0.0);
        }
        let k1 = self.interferers as f64;
        let p = self.collision_prob;
        let spread = self.g_main - self.g_side;
        let mean = k1 * (self.g_side + spread * p);
        let var = k1 * spread * spread * p * (1.0 - p);
        let y = self.interference_budget(rate);
        if var == 0.0 {
            return Ok(if y > mean {
                0.0
            } else if y < mean {
                1.0
            } else {
                0.5
            });
        }
        Ok(0.5 * libm::erfc((y - mean) / (2.0 * var).sqrt()))
    }

    /// Rates at which the binomial CDF jumps, ascending.
    pub fn atoms(&self) -> Vec<f64> {
        let mut r: Vec<f64> = (0..=self.interferers).map(|h| self.rate_with_hits(h)).collect();
        r.sort_by(f64::total_cmp);
        r
    }
}

/// `Pr(Binomial(n, p) <= upto)` with terms accumulated in log space.
pub fn binomial_lower_tail(n: usize, p: f64, upto: usize) -> f64 {
    if upto >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n_fact = libm::lgamma(n as f64 + 1.0);
    (0..=upto)
        .map(|q| {
            let qf = q as f64;
            let ln_choose = ln_n_fact - libm::lgamma(qf + 1.0) - libm::lgamma((n - q) as f64 + 1.0);
            (ln_choose + qf * lp + (n - q) as f64 * lq).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// `Pr(rate <= rate_threshold)` from the binomial interference law.
pub fn rate_cdf_binomial(scenario: &AnalyticScenario, model: &TwoLobeModel, rate_threshold: f64) -> Result<f64> {
    Ok(InterferenceLaw::new(scenario, model)?.binomial_cdf(rate_threshold))
}

/// `Pr(rate <= rate_threshold)` under the normal approximation; needs `K >= 2`.
pub fn rate_cdf_gaussian(scenario: &AnalyticScenario, model: &TwoLobeModel, rate_threshold: f64) -> Result<f64> {
    InterferenceLaw::new(scenario, model)?.gaussian_cdf(rate_threshold)
}
