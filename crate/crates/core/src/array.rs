//! Uniform linear array geometry.
//!
//! Elements sit at `m * d` for `m = 0..M`, with spacing `d = eta * lambda / 2`.
//! `eta = 1` is the collocated (half-wavelength) array, `eta > 1` a sparse one.
//! All angles are radians. The beam pattern is expressed in the spatial angle
//! difference `delta = sin(theta_k) - sin(theta_i)`, which lives in `[-2, 2]`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelVector;
use crate::error::{Error, Result};

/// Below this `|sin(pi * eta * delta / 2)|` the pattern is at a lobe center.
const LOBE_CENTER_EPS: f64 = 1e-9;

/// Element count and spacing (in half wavelengths) of a ULA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    elements: usize,
    eta: f64,
}

impl ArrayConfig {
    pub fn new(elements: usize, eta: f64) -> Result<Self> {
        if elements < 2 {
            return Err(Error::param("elements", format!("need at least 2 elements, got {elements}")));
        }
        if !eta.is_finite() || eta < 1.0 {
            return Err(Error::param("eta", format!("spacing parameter must be finite and >= 1, got {eta}")));
        }
        Ok(Self { elements, eta })
    }

    /// Number of elements `M`.
    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Spacing parameter `eta` (spacing is `eta * lambda / 2`).
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_collocated(&self) -> bool {
        self.eta == 1.0
    }

    /// Largest grating-lobe order, `floor(eta)`.
    pub fn max_lobe_order(&self) -> i64 {
        self.eta.floor() as i64
    }

    /// Beam pattern evaluated on a raw spatial angle difference.
    ///
    /// `|sin(pi M eta delta / 2) / (M sin(pi eta delta / 2))|^2`, with the removable
    /// singularities at `delta = 2n / eta` mapped to their limit 1.
    pub fn pattern(&self, delta: f64) -> f64 {
        // Periodic in eta * delta with period 2; reduce to [-1, 1) first.
        let u = (self.eta * delta + 1.0).rem_euclid(2.0) - 1.0;
        let half_phase = FRAC_PI_2 * u;
        let den = half_phase.sin();
        if den.abs() < LOBE_CENTER_EPS {
            // Numerator vanishes together with the denominator here, so this is a
            // main or grating lobe peak.
            return 1.0;
        }
        let m = self.elements as f64;
        let ratio = (m * half_phase).sin() / (m * den);
        (ratio * ratio).min(1.0)
    }
}

/// An angle of arrival in `[-pi/2, pi/2]`, kept together with its sine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialAngle {
    theta: f64,
    sin_theta: f64,
}

/// Rounding allowance on `pi/2` for angles converted from degrees.
pub(crate) const ANGLE_SLACK: f64 = 1e-12;

impl SpatialAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() > FRAC_PI_2 + ANGLE_SLACK {
            return Err(Error::param("theta", format!("angle must lie in [-pi/2, pi/2], got {theta}")));
        }
        let theta = theta.clamp(-FRAC_PI_2, FRAC_PI_2);
        Ok(Self {
            theta,
            sin_theta: theta.sin(),
        })
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sin_theta(&self) -> f64 {
        self.sin_theta
    }
}

/// `delta = sin(theta_k) - sin(theta_i)`, restricted to `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpatialAngleDifference(f64);

impl SpatialAngleDifference {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta.abs() > 2.0 + 1e-12 {
            return Err(Error::param("delta", format!("spatial angle difference must lie in [-2, 2], got {delta}")));
        }
        Ok(Self(delta.clamp(-2.0, 2.0)))
    }

    /// Difference seen by user `k` from user `i`.
    pub fn between(k: SpatialAngle, i: SpatialAngle) -> Self {
        Self(k.sin_theta - i.sin_theta)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Array response `a(theta)`: element `m` is `exp(j pi eta m sin(theta))`.
pub fn steering_vector(array: &ArrayConfig, angle: SpatialAngle) -> ChannelVector {
    steering_from_sine(array, angle.sin_theta())
}

pub(crate) fn steering_from_sine(array: &ArrayConfig, sin_theta: f64) -> ChannelVector {
    let step = PI * array.eta() * sin_theta;
    ChannelVector::from(
        (0..array.elements())
            .map(|m| Complex64::from_polar(1.0, step * m as f64))
            .collect::<Vec<_>>(),
    )
}

/// Normalized squared correlation of two LoS users separated by `delta`.
pub fn beam_gain(array: &ArrayConfig, delta: SpatialAngleDifference) -> f64 {
    array.pattern(delta.value())
}

/// `|h_k^H h_i|^2 / (||h_k||^2 ||h_i||^2)`.
pub fn correlation_from_channels(h_k: &ChannelVector, h_i: &ChannelVector) -> Result<f64> {
    if h_k.len() != h_i.len() {
        return Err(Error::DimensionMismatch {
            expected: h_k.len(),
            actual: h_i.len(),
        });
    }
    let nk = h_k.norm_sqr();
    let ni = h_i.norm_sqr();
    if nk == 0.0 || ni == 0.0 {
        return Err(Error::DegenerateChannel("correlation of a zero-norm channel".into()));
    }
    Ok((h_k.inner(h_i).norm_sqr() / (nk * ni)).clamp(0.0, 1.0))
}

/// Null-to-null width of the main lobe in the delta domain, `4 / (M eta)`.
pub fn main_lobe_beamwidth(array: &ArrayConfig) -> f64 {
    4.0 / (array.elements() as f64 * array.eta())
}

/// Grating-lobe centers `2n / eta` for `n = +-1 ..= +-floor(eta)`, ascending.
///
/// For the collocated array this yields the end-fire points `+-2`.
pub fn grating_lobe_positions(array: &ArrayConfig) -> Vec<SpatialAngleDifference> {
    let order = array.max_lobe_order();
    (-order..=order)
        .filter(|&n| n != 0)
        .map(|n| 2.0 * n as f64 / array.eta())
        .filter(|d| d.abs() <= 2.0 + 1e-12)
        .map(|d| SpatialAngleDifference(d.clamp(-2.0, 2.0)))
        .collect()
}
