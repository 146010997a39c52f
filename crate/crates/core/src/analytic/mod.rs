//! Closed-form analysis under the two-level pattern model: lobe fitting,
//! collision probabilities, rate CDFs and sparse/collocated crossover.

pub mod collision;
pub mod rate_cdf;
pub mod two_lobe;

pub use collision::{
    collision_prob_exact, collision_prob_gap, collision_prob_numeric, collocated_collision_prob, crossover_thresholds,
    lobe_collision_prob, lobe_collision_prob_general, per_lobe_prob, CrossoverThresholds,
};
pub use rate_cdf::{binomial_lower_tail, rate_cdf_binomial, rate_cdf_gaussian, AnalyticScenario, InterferenceLaw};
pub use two_lobe::{
    analytic_main_gain, fit_two_lobe, two_lobe_gain, TwoLobeFit, TwoLobeModel, DEFAULT_FIT_GRID,
};
