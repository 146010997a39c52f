//! Per-user channel vectors: pure line of sight and one-ring Rician multipath.

use std::f64::consts::TAU;
use std::ops::Index;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{steering_from_sine, ArrayConfig, SpatialAngle};
use crate::error::{Error, Result};

/// Length-`M` complex channel of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelVector(Vec<Complex64>);

impl ChannelVector {
    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self^H other`.
    pub fn inner(&self, other: &ChannelVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> ChannelVector {
        ChannelVector(self.0.iter().map(|z| z * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    fn axpy(&mut self, factor: Complex64, other: &ChannelVector) {
        for (y, x) in self.0.iter_mut().zip(&other.0) {
            *y += factor * x;
        }
    }
}

impl From<Vec<Complex64>> for ChannelVector {
    fn from(v: Vec<Complex64>) -> Self {
        ChannelVector(v)
    }
}

impl Index<usize> for ChannelVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Direction and complex path gain of an active user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPlacement {
    pub angle: SpatialAngle,
    pub path_gain: Complex64,
}

impl UserPlacement {
    pub fn new(angle: SpatialAngle, path_gain: Complex64) -> Result<Self> {
        if !(path_gain.norm() > 0.0) || !path_gain.norm().is_finite() {
            return Err(Error::param("path_gain", "active users need a finite nonzero path gain"));
        }
        Ok(Self { angle, path_gain })
    }

    /// Unit path gain; the user's power is carried by the normalized SNR instead.
    pub fn unit(angle: SpatialAngle) -> Self {
        Self {
            angle,
            path_gain: Complex64::new(1.0, 0.0),
        }
    }
}

/// One-ring scattering geometry: `paths` scatterers on a ring of radius
/// `ring_radius` whose center sits `center_range` away from the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneRingParams {
    paths: usize,
    ring_radius: f64,
    center_range: f64,
    rician_k_db: f64,
}

impl OneRingParams {
    pub fn new(paths: usize, ring_radius: f64, center_range: f64, rician_k_db: f64) -> Result<Self> {
        if paths == 0 {
            return Err(Error::param("paths", "need at least one scattered path"));
        }
        if !(ring_radius > 0.0) || !ring_radius.is_finite() {
            return Err(Error::param("ring_radius", format!("must be positive, got {ring_radius}")));
        }
        if !(center_range > ring_radius) || !center_range.is_finite() {
            return Err(Error::param(
                "center_range",
                format!("ring must not enclose the array: range {center_range} <= radius {ring_radius}"),
            ));
        }
        if !rician_k_db.is_finite() {
            return Err(Error::param("rician_k_db", format!("Rician factor must be finite, got {rician_k_db}")));
        }
        Ok(Self {
            paths,
            ring_radius,
            center_range,
            rician_k_db,
        })
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn ring_radius(&self) -> f64 {
        self.ring_radius
    }

    pub fn center_range(&self) -> f64 {
        self.center_range
    }

    pub fn rician_k_db(&self) -> f64 {
        self.rician_k_db
    }

    pub fn rician_k_linear(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }

    /// Half angular spread `asin(R / r)` subtended by the ring.
    pub fn angular_spread(&self) -> f64 {
        (self.ring_radius / self.center_range).asin()
    }
}

/// `h = beta * a(theta)`.
pub fn los_channel(array: &ArrayConfig, user: &UserPlacement) -> ChannelVector {
    steering_from_sine(array, user.angle.sin_theta()).scaled(user.path_gain)
}

/// One draw of the one-ring channel together with the scatterer directions used.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRingDraw {
    pub channel: ChannelVector,
    pub path_angles: Vec<f64>,
}

/// Rician one-ring channel.
///
/// The LoS component carries `K/(1+K)` of the power and each of the `L` scattered
/// paths `1/((1+K) L)`. Scatterer angles are uniform on `theta_k +- asin(R/r)`
/// with uniform phases, so `E||h||^2 = |beta|^2 M`.
pub fn one_ring_channel<R: Rng + ?Sized>(
    array: &ArrayConfig,
    user: &UserPlacement,
    params: &OneRingParams,
    rng: &mut R,
) -> Result<ChannelVector> {
    one_ring_draw(array, user, params, rng).map(|d| d.channel)
}

pub fn one_ring_draw<R: Rng + ?Sized>(
    array: &ArrayConfig,
    user: &UserPlacement,
    params: &OneRingParams,
    rng: &mut R,
) -> Result<OneRingDraw> {
    let k = params.rician_k_linear();
    if !k.is_finite() {
        return Err(Error::param("rician_k_db", "Rician factor overflows to infinity"));
    }
    let los_amp = (k / (1.0 + k)).sqrt();
    let path_amp = (1.0 / ((1.0 + k) * params.paths as f64)).sqrt();
    let spread = params.angular_spread();
    let theta = user.angle.theta();

    let mut h = los_channel(array, user).scaled(Complex64::new(los_amp, 0.0));
    let mut path_angles = Vec::with_capacity(params.paths);
    for _ in 0..params.paths {
        let angle = theta + rng.random_range(-spread..=spread);
        let phase = rng.random_range(0.0..TAU);
        let a = steering_from_sine(array, angle.sin());
        h.axpy(user.path_gain * Complex64::from_polar(path_amp, phase), &a);
        path_angles.push(angle);
    }
    Ok(OneRingDraw { channel: h, path_angles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ula(m: usize, eta: f64) -> ArrayConfig {
        ArrayConfig::new(m, eta).unwrap()
    }

    fn placement(theta: f64) -> UserPlacement {
        UserPlacement::unit(SpatialAngle::new(theta).unwrap())
    }

    #[test]
    fn los_examples() {
        let h = los_channel(&ula(4, 1.0), &placement(0.0));
        assert!(h.entries().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let user = UserPlacement::new(SpatialAngle::new(0.0).unwrap(), Complex64::new(0.0, 2.0)).unwrap();
        let h = los_channel(&ula(2, 1.0), &user);
        assert_eq!(h.entries(), &[Complex64::new(0.0, 2.0); 2]);
    }

    #[test]
    fn param_validation() {
        assert!(OneRingParams::new(0, 5.0, 40.0, 20.0).is_err());
        assert!(OneRingParams::new(10, 0.0, 40.0, 20.0).is_err());
        assert!(OneRingParams::new(10, 5.0, 4.0, 20.0).is_err());
        assert!(OneRingParams::new(10, 5.0, 40.0, f64::INFINITY).is_err());
        assert!(OneRingParams::new(10, 5.0, 40.0, f64::NAN).is_err());
        assert!(UserPlacement::new(SpatialAngle::new(0.0).unwrap(), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn huge_rician_factor_recovers_los() {
        let array = ula(16, 4.0);
        let user = placement(0.2);
        let params = OneRingParams::new(10, 5.0, 40.0, 300.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = one_ring_channel(&array, &user, &params, &mut rng).unwrap();
        let los = los_channel(&array, &user);
        let diff: f64 = h.entries().iter().zip(los.entries()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() / los.norm_sqr().sqrt() < 1e-6);
    }

    #[test]
    fn path_angles_stay_on_the_ring() {
        let array = ula(32, 4.0);
        let params = OneRingParams::new(10, 5.0, 40.0, 20.0).unwrap();
        let spread = params.angular_spread();
        assert_abs_diff_eq!(spread.to_degrees(), 7.18, epsilon = 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for draw in 0..200 {
            let theta = -0.17 + 0.0017 * draw as f64;
            let d = one_ring_draw(&array, &placement(theta), &params, &mut rng).unwrap();
            assert_eq!(d.path_angles.len(), 10);
            assert!(d.path_angles.iter().all(|a| (a - theta).abs() <= spread + 1e-15));
        }
    }

    #[test]
    fn mean_power_is_normalized() {
        let array = ula(8, 4.0);
        let params = OneRingParams::new(10, 5.0, 40.0, 0.0).unwrap();
        let user = UserPlacement::new(SpatialAngle::new(0.1).unwrap(), Complex64::from_polar(1.5, 0.3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let mean: f64 = (0..draws)
            .map(|_| one_ring_channel(&array, &user, &params, &mut rng).unwrap().norm_sqr() / 8.0)
            .sum::<f64>()
            / draws as f64;
        assert!((mean / 2.25 - 1.0).abs() < 0.02, "mean power {mean}");
    }

    #[test]
    fn same_seed_same_channel() {
        let array = ula(8, 2.0);
        let params = OneRingParams::new(10, 5.0, 40.0, 20.0).unwrap();
        let a = one_ring_channel(&array, &placement(0.05), &params, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = one_ring_channel(&array, &placement(0.05), &params, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn los_norm_identity(m in 2usize..64, eta in 1.0f64..8.0, theta in -1.5f64..1.5,
                             mag in 0.01f64..10.0, phase in 0.0f64..std::f64::consts::TAU) {
            let user = UserPlacement::new(SpatialAngle::new(theta).unwrap(), Complex64::from_polar(mag, phase)).unwrap();
            let h = los_channel(&ula(m, eta), &user);
            let expect = mag * mag * m as f64;
            prop_assert!((h.norm_sqr() - expect).abs() <= 1e-12 * expect);
        }
    }
}
