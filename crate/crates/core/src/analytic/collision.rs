//! Probability that two users fall inside each other's main or grating lobe,
//! and the angular-spread window in which a sparse array collides less often
//! than the collocated one.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::array::{ArrayConfig, ANGLE_SLACK};
use crate::error::{Error, Result};

const NUMERIC_TABLE: usize = 1 << 16;
const NUMERIC_OUTER: usize = 1 << 15;

fn check(alpha: f64, theta_max: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("must lie in [0, 2], got {alpha}")));
    }
    if !(theta_max > 0.0 && theta_max <= FRAC_PI_2 + ANGLE_SLACK) {
        return Err(Error::param("theta_max", format!("must lie in (0, pi/2], got {theta_max}")));
    }
    Ok(theta_max.min(FRAC_PI_2).sin())
}

/// Collision probability for uniform angles on a collocated array (`eta = 1`).
pub fn collocated_collision_prob(elements: usize, alpha: f64, theta_max: f64) -> Result<f64> {
    let s = check(alpha, theta_max)?;
    let m = elements as f64;
    if s < alpha / (2.0 * m) {
        return Ok(1.0);
    }
    Ok(((4.0 * alpha * m * s - alpha * alpha) / (4.0 * s * s * m * m)).clamp(0.0, 1.0))
}

/// Closed-form collision probability for `sin(theta)` uniform on `[-sin theta_max, sin theta_max]`.
///
/// Lobes straddling the edge of the difference support are ignored; use
/// [`collision_prob_exact`] for the full sum. The collocated array goes through
/// [`collocated_collision_prob`].
pub fn lobe_collision_prob(array: &ArrayConfig, alpha: f64, theta_max: f64) -> Result<f64> {
    if array.is_collocated() {
        return collocated_collision_prob(array.elements(), alpha, theta_max);
    }
    lobe_collision_prob_general(array, alpha, theta_max)
}

/// The closed form without the collocated short-cut.
pub fn lobe_collision_prob_general(array: &ArrayConfig, alpha: f64, theta_max: f64) -> Result<f64> {
    let s = check(alpha, theta_max)?;
    let m = array.elements() as f64;
    let eta = array.eta();
    if s < alpha / (2.0 * m * eta) {
        return Ok(1.0);
    }
    let n = (eta * s - alpha / (2.0 * m)).floor();
    let p = alpha * ((2.0 * n + 1.0) * s - alpha / (4.0 * m * eta) - n * (n + 1.0) / eta) / (s * s * m * eta);
    Ok(p.clamp(0.0, 1.0))
}

/// Contribution of lobe `n` (0 is the main lobe) to the collision probability, uniform angles.
pub fn per_lobe_prob(n: i64, array: &ArrayConfig, alpha: f64, theta_max: f64) -> Result<f64> {
    let s = check(alpha, theta_max)?;
    if n.abs() > array.max_lobe_order() {
        return Err(Error::param("n", format!("lobe order {n} exceeds floor(eta) = {}", array.max_lobe_order())));
    }
    let eta = array.eta();
    let t = alpha / (array.elements() as f64 * eta);
    if n == 0 {
        return Ok(if 2.0 * s < t { 1.0 } else { (4.0 * t * s - t * t) / (4.0 * s * s) });
    }
    let order = n.unsigned_abs() as f64;
    let inner_edge = eta * s - t * eta / 2.0;
    let outer_edge = eta * s + t * eta / 2.0;
    Ok(if order <= inner_edge {
        t * (s - order / eta) / (s * s)
    } else if order < outer_edge {
        (s + t / 2.0 - order / eta).powi(2) / (2.0 * s * s)
    } else {
        0.0
    })
}

/// Sum of [`per_lobe_prob`] over every lobe, including the ones straddling the support edge.
pub fn collision_prob_exact(array: &ArrayConfig, alpha: f64, theta_max: f64) -> Result<f64> {
    let order = array.max_lobe_order();
    let mut p = 0.0;
    for n in -order..=order {
        p += per_lobe_prob(n, array, alpha, theta_max)?;
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Collision probability by direct 2-D integration of `f(x_i) f(x_k)` over the lobe bands,
/// for an arbitrary density of `x = sin(theta)` on `[-sin theta_max, sin theta_max]`.
pub fn collision_prob_numeric(
    array: &ArrayConfig,
    alpha: f64,
    theta_max: f64,
    pdf: impl Fn(f64) -> f64,
) -> Result<f64> {
    let s = check(alpha, theta_max)?;
    let t = alpha / (array.elements() as f64 * array.eta());

    // Cumulative table of the density (trapezoid rule).
    let h = 2.0 * s / NUMERIC_TABLE as f64;
    let mut cdf = Vec::with_capacity(NUMERIC_TABLE + 1);
    cdf.push(0.0);
    let mut prev = pdf(-s);
    for i in 1..=NUMERIC_TABLE {
        let cur = pdf(-s + h * i as f64);
        if !(cur >= 0.0) || !(prev >= 0.0) || !cur.is_finite() {
            return Err(Error::param("pdf", "density must be finite and non-negative on the support"));
        }
        cdf.push(cdf[i - 1] + 0.5 * h * (prev + cur));
        prev = cur;
    }
    let total = cdf[NUMERIC_TABLE];
    if (total - 1.0).abs() > 1e-3 {
        return Err(Error::param("pdf", format!("density integrates to {total}, not 1")));
    }
    let cdf_at = |x: f64| -> f64 {
        let u = ((x + s) / h).clamp(0.0, NUMERIC_TABLE as f64);
        let i = (u as usize).min(NUMERIC_TABLE - 1);
        let frac = u - i as f64;
        (cdf[i] + frac * (cdf[i + 1] - cdf[i])) / total
    };

    let order = array.max_lobe_order();
    let centers: Vec<f64> = (-order..=order)
        .map(|n| 2.0 * n as f64 / array.eta())
        .filter(|c| c.abs() <= 2.0 * s + t)
        .collect();

    let dx = 2.0 * s / NUMERIC_OUTER as f64;
    let mut mass = 0.0;
    let mut acc = 0.0;
    for j in 0..NUMERIC_OUTER {
        let xk = -s + dx * (j as f64 + 0.5);
        let w = pdf(xk);
        mass += w;
        // x_i - x_k - c in [-t, t]
        let inner: f64 = centers.iter().map(|c| cdf_at(xk + c + t) - cdf_at(xk + c - t)).sum();
        acc += w * inner;
    }
    Ok((acc / mass).clamp(0.0, 1.0))
}

/// `p_col - p(eta)`: positive where the sparse array collides less often.
pub fn collision_prob_gap(array: &ArrayConfig, alpha: f64, theta_max: f64) -> Result<f64> {
    if array.is_collocated() {
        return Err(Error::param("eta", "the gap compares a sparse array (eta > 1) with the collocated one"));
    }
    Ok(collocated_collision_prob(array.elements(), alpha, theta_max)? - lobe_collision_prob(array, alpha, theta_max)?)
}

/// Angular spreads bounding the window where the sparse array wins, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverThresholds {
    pub theta_lower: f64,
    pub theta_upper: f64,
}

pub fn crossover_thresholds(array: &ArrayConfig, alpha: f64) -> Result<CrossoverThresholds> {
    if array.is_collocated() {
        return Err(Error::param("eta", "crossover thresholds need a sparse array (eta > 1)"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 2], got {alpha}")));
    }
    let m = array.elements() as f64;
    let eta = array.eta();
    let ratio = alpha / m;
    // eta^2 - (alpha/M)(eta^2 + 1 - alpha/M), factored.
    let discriminant = (1.0 - ratio) * (eta * eta - ratio);
    if discriminant < 0.0 {
        return Err(Error::NoCrossover {
            eta,
            elements: array.elements(),
            alpha,
            discriminant,
        });
    }
    let sin_lower = alpha / (2.0 * m * eta);
    let sin_upper = ((eta + discriminant.sqrt()) / (2.0 * eta)).min(1.0);
    Ok(CrossoverThresholds {
        theta_lower: sin_lower.asin(),
        theta_upper: sin_upper.asin(),
    })
}
