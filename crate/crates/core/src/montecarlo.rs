//! Randomized experiments: user drops, spatial-angle-difference histograms and
//! empirical rate distributions.
//!
//! Drop `i` draws everything from stream `i` of the scenario seed, so results
//! do not depend on how drops are scheduled across threads.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{lobe_collision_prob, TwoLobeModel};
use crate::array::{ArrayConfig, SpatialAngle, ANGLE_SLACK};
use crate::beamform::{rate_from_sinr, user_sinr, Beamformer, UplinkSnapshot};
use crate::channel::{los_channel, one_ring_channel, OneRingParams, UserPlacement};
use crate::error::{Error, Result};
use crate::exec::{Execution, StreamFactory};
use crate::series::{DistributionSeries, SeriesKind};
use crate::stats::EmpiricalCdf;

pub const DEFAULT_DROPS: u64 = 100_000;

/// Fraction of singular drops above which a warning is logged.
pub const SINGULAR_WARN_FRACTION: f64 = 1e-3;

const HISTOGRAM_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelKind {
    Los,
    OneRing(OneRingParams),
}

/// Which user's rate a drop records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordedUser {
    #[default]
    First,
    /// A user chosen uniformly at random per drop.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub users: usize,
    /// Radians.
    pub theta_max: f64,
    pub snr_db: f64,
    pub beamformer: Beamformer,
    pub channel: ChannelKind,
    pub drops: u64,
    pub seed: u64,
    #[serde(default)]
    pub recorded: RecordedUser,
}

impl Scenario {
    /// LoS, MRC, first user recorded.
    pub fn los_mrc(array: ArrayConfig, users: usize, theta_max: f64, snr_db: f64, drops: u64, seed: u64) -> Self {
        Self {
            array,
            users,
            theta_max,
            snr_db,
            beamformer: Beamformer::Mrc,
            channel: ChannelKind::Los,
            drops,
            seed,
            recorded: RecordedUser::First,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::param("drops", "need at least one drop"));
        }
        if self.users == 0 {
            return Err(Error::param("users", "need at least one user"));
        }
        validate_theta_max(self.theta_max)?;
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", format!("must be finite, got {}", self.snr_db)));
        }
        if self.beamformer == Beamformer::Zf && self.users > self.array.elements() {
            return Err(Error::ZfDimension {
                interferers: self.users - 1,
                antennas: self.array.elements(),
            });
        }
        Ok(())
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Users and channels of drop `index`, plus the user whose rate is recorded.
    pub fn drop_snapshot(&self, index: u64) -> Result<(UplinkSnapshot, usize)> {
        let mut rng = StreamFactory::new(self.seed).stream(index);
        self.draw(&mut rng)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<(UplinkSnapshot, usize)> {
        let angles = sample_user_angles(self.users, self.theta_max, rng)?;
        let mut channels = Vec::with_capacity(self.users);
        for angle in angles {
            let user = UserPlacement::unit(angle);
            channels.push(match &self.channel {
                ChannelKind::Los => los_channel(&self.array, &user),
                ChannelKind::OneRing(params) => one_ring_channel(&self.array, &user, params, rng)?,
            });
        }
        let recorded = match self.recorded {
            RecordedUser::First => 0,
            RecordedUser::Uniform => rng.random_range(0..self.users),
        };
        Ok((UplinkSnapshot::with_common_snr(channels, self.snr_linear())?, recorded))
    }

    fn meta(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut m = serde_json::Map::new();
        m.insert("elements".into(), json!(self.array.elements()));
        m.insert("eta".into(), json!(self.array.eta()));
        m.insert("users".into(), json!(self.users));
        m.insert("theta_max_deg".into(), json!(self.theta_max.to_degrees()));
        m.insert("snr_db".into(), json!(self.snr_db));
        m.insert("beamformer".into(), json!(self.beamformer.name()));
        m.insert("channel".into(), serde_json::to_value(self.channel).unwrap_or_default());
        m.insert("drops".into(), json!(self.drops));
        m.insert("seed".into(), json!(self.seed));
        m
    }
}

fn validate_theta_max(theta_max: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2 + ANGLE_SLACK).contains(&theta_max) {
        Ok(())
    } else {
        Err(Error::param("theta_max", format!("must lie in [0, pi/2], got {theta_max}")))
    }
}

/// `k` i.i.d. angles uniform on `[-theta_max, theta_max]`.
pub fn sample_user_angles<R: Rng + ?Sized>(k: usize, theta_max: f64, rng: &mut R) -> Result<Vec<SpatialAngle>> {
    validate_theta_max(theta_max)?;
    (0..k)
        .map(|_| SpatialAngle::new(rng.random_range(-theta_max..=theta_max)))
        .collect()
}

/// `pairs` draws of `sin(theta_k) - sin(theta_i)` for independent uniform angles.
pub fn delta_samples(pairs: u64, theta_max: f64, seed: u64, exec: Execution) -> Result<Vec<f64>> {
    validate_theta_max(theta_max)?;
    let streams = StreamFactory::new(seed);
    let chunks = pairs.div_ceil(HISTOGRAM_CHUNK);
    let parts = exec.map(chunks, |c| {
        let mut rng = streams.stream(c);
        let n = HISTOGRAM_CHUNK.min(pairs - c * HISTOGRAM_CHUNK);
        (0..n)
            .map(|_| {
                let a = rng.random_range(-theta_max..=theta_max).sin();
                let b = rng.random_range(-theta_max..=theta_max).sin();
                a - b
            })
            .collect::<Vec<f64>>()
    });
    Ok(parts.concat())
}

/// Density histogram of the spatial angle difference on `[-2 sin theta_max, 2 sin theta_max]`.
///
/// The meta block records the pair count, the largest `|delta|` and the 99.9%
/// quantile of `|delta|`.
pub fn delta_histogram(pairs: u64, theta_max: f64, bins: usize, seed: u64, exec: Execution) -> Result<DistributionSeries> {
    if bins < 16 {
        return Err(Error::param("bins", format!("need at least 16 bins, got {bins}")));
    }
    if pairs == 0 {
        return Err(Error::param("pairs", "need at least one pair"));
    }
    if !(theta_max > 0.0) {
        return Err(Error::param("theta_max", "the histogram needs a positive angular spread"));
    }
    let samples = delta_samples(pairs, theta_max, seed, exec)?;
    let edge = 2.0 * theta_max.sin();
    let width = 2.0 * edge / bins as f64;
    let mut counts = vec![0u64; bins];
    for &d in &samples {
        let b = ((d + edge) / width).floor() as isize;
        counts[b.clamp(0, bins as isize - 1) as usize] += 1;
    }
    let scale = 1.0 / (pairs as f64 * width);
    let points = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| (-edge + (b as f64 + 0.5) * width, c as f64 * scale))
        .collect();
    let abs = EmpiricalCdf::new(&samples.iter().map(|d| d.abs()).collect::<Vec<_>>());
    Ok(DistributionSeries::new(format!("delta-pdf theta_max={:.4}deg", theta_max.to_degrees()), SeriesKind::Pdf, points)
        .with_meta("pairs", pairs)
        .with_meta("bins", bins)
        .with_meta("seed", seed)
        .with_meta("theta_max_deg", theta_max.to_degrees())
        .with_meta("bin_width", width)
        .with_meta("max_abs_delta", abs.quantile(1.0))
        .with_meta("abs_delta_q999", abs.quantile(0.999)))
}

/// Per-drop SINR and rate of the recorded user.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSamples {
    pub sinrs: Vec<f64>,
    pub rates: Vec<f64>,
    /// Drops whose zero-forcing interference matrix was singular; recorded as rate 0.
    pub singular_drops: u64,
}

impl RateSamples {
    pub fn cdf(&self) -> EmpiricalCdf {
        EmpiricalCdf::new(&self.rates)
    }

    pub fn cdf_series(&self, label: impl Into<String>) -> DistributionSeries {
        DistributionSeries::new(label, SeriesKind::Cdf, self.cdf().steps())
            .with_meta("samples", self.rates.len())
            .with_meta("singular_drops", self.singular_drops)
    }
}

/// Rates of the recorded user over all drops of the scenario.
pub fn simulate_rates(scenario: &Scenario, exec: Execution) -> Result<RateSamples> {
    scenario.validate()?;
    let streams = StreamFactory::new(scenario.seed);
    let per_drop = exec.map(scenario.drops, |i| -> Result<Option<f64>> {
        let mut rng = streams.stream(i);
        let (snapshot, user) = scenario.draw(&mut rng)?;
        match user_sinr(scenario.beamformer, &snapshot, user) {
            Ok(sinr) => Ok(Some(sinr)),
            Err(Error::SingularInterference { condition, .. }) => {
                log::debug!("drop {i}: singular interference matrix (condition {condition:.3e})");
                Ok(None)
            }
            Err(e) => Err(e),
        }
    });
    let mut sinrs = Vec::with_capacity(per_drop.len());
    let mut singular_drops = 0;
    for r in per_drop {
        match r? {
            Some(s) => sinrs.push(s),
            None => {
                singular_drops += 1;
                sinrs.push(0.0);
            }
        }
    }
    if singular_drops as f64 > SINGULAR_WARN_FRACTION * scenario.drops as f64 {
        log::warn!(
            "{singular_drops} of {} drops had a singular interference matrix and were recorded at rate 0",
            scenario.drops
        );
    }
    let rates = sinrs.iter().map(|&s| rate_from_sinr(s)).collect();
    Ok(RateSamples {
        sinrs,
        rates,
        singular_drops,
    })
}

/// Empirical rate CDF of the scenario, with the scenario echoed in the meta block.
pub fn simulate_rate_cdf(scenario: &Scenario, exec: Execution) -> Result<DistributionSeries> {
    let samples = simulate_rates(scenario, exec)?;
    let label = format!("simulated {} eta={}", scenario.beamformer.name(), scenario.array.eta());
    let mut series = samples.cdf_series(label);
    series.meta.extend(scenario.meta());
    Ok(series)
}

/// Rates of the two-level surrogate system: every interferer independently
/// contributes `g_main` with probability `p` and `g_side` otherwise.
pub fn simulate_two_lobe_rates_with_prob(
    scenario: &Scenario,
    model: &TwoLobeModel,
    collision_prob: f64,
    exec: Execution,
) -> Result<RateSamples> {
    scenario.validate()?;
    if scenario.channel != ChannelKind::Los || scenario.beamformer != Beamformer::Mrc {
        return Err(Error::param("scenario", "the two-lobe surrogate only models LoS channels with MRC"));
    }
    if !(0.0..=1.0).contains(&collision_prob) {
        return Err(Error::param("collision_prob", format!("must lie in [0, 1], got {collision_prob}")));
    }
    let streams = StreamFactory::new(scenario.seed);
    let m = scenario.array.elements() as f64;
    let snr = scenario.snr_linear();
    let sinrs = exec.map(scenario.drops, |i| {
        let mut rng = streams.stream(i);
        let load: f64 = (1..scenario.users)
            .map(|_| {
                if rng.random_bool(collision_prob) {
                    model.g_main()
                } else {
                    model.g_side()
                }
            })
            .sum();
        snr * m / (snr * m * load + 1.0)
    });
    let rates = sinrs.iter().map(|&s| rate_from_sinr(s)).collect();
    Ok(RateSamples {
        sinrs,
        rates,
        singular_drops: 0,
    })
}

/// As [`simulate_two_lobe_rates_with_prob`] with the closed-form collision probability.
pub fn simulate_two_lobe_rates(scenario: &Scenario, model: &TwoLobeModel, exec: Execution) -> Result<RateSamples> {
    let p = lobe_collision_prob(&scenario.array, model.alpha(), scenario.theta_max)?;
    simulate_two_lobe_rates_with_prob(scenario, model, p, exec)
}

pub fn simulate_two_lobe_rate_cdf(scenario: &Scenario, model: &TwoLobeModel, exec: Execution) -> Result<DistributionSeries> {
    let samples = simulate_two_lobe_rates(scenario, model, exec)?;
    let mut series = samples.cdf_series(format!("two-lobe simulated eta={}", scenario.array.eta()));
    series.meta.extend(scenario.meta());
    series.meta.insert("alpha".into(), json!(model.alpha()));
    series.meta.insert("g_main".into(), json!(model.g_main()));
    series.meta.insert("g_side".into(), json!(model.g_side()));
    Ok(series)
}

/// Unit-gain LoS channel of every angle, for callers that build snapshots by hand.
pub fn los_channels(array: &ArrayConfig, angles: &[SpatialAngle]) -> Vec<crate::channel::ChannelVector> {
    angles
        .iter()
        .map(|&a| los_channel(array, &UserPlacement::new(a, Complex64::new(1.0, 0.0)).expect("unit gain")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig3(eta: f64, drops: u64) -> Scenario {
        Scenario::los_mrc(ArrayConfig::new(32, eta).unwrap(), 18, 10f64.to_radians(), 20.0, drops, 11)
    }

    #[test]
    fn angles_in_the_zero_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = sample_user_angles(100, 1e-9, &mut rng).unwrap();
        assert!(a.iter().all(|x| x.theta().abs() <= 1e-9));
        assert!(sample_user_angles(3, 2.0, &mut rng).is_err());
    }

    #[test]
    fn angle_mean_is_zero() {
        let t = 10f64.to_radians();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let a = sample_user_angles(n, t, &mut rng).unwrap();
        let mean = a.iter().map(|x| x.theta()).sum::<f64>() / n as f64;
        let se = t / 3f64.sqrt() / (n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn angles_are_reproducible() {
        let a = sample_user_angles(50, 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_user_angles(50, 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_support_and_mass() {
        let t = 10f64.to_radians();
        let h = delta_histogram(200_000, t, 64, 3, Execution::default()).unwrap();
        h.validate().unwrap();
        assert_abs_diff_eq!(h.histogram_mass(), 1.0, epsilon = 1e-9);
        assert!(h.meta["max_abs_delta"].as_f64().unwrap() <= 2.0 * t.sin());
        assert!(h.meta["abs_delta_q999"].as_f64().unwrap() < 0.36);
        assert!(delta_histogram(10, t, 15, 3, Execution::default()).is_err());
    }

    #[test]
    fn histogram_is_symmetric() {
        let h = delta_histogram(400_000, 30f64.to_radians(), 32, 8, Execution::default()).unwrap();
        let v: Vec<f64> = h.values().collect();
        let width = h.meta["bin_width"].as_f64().unwrap();
        for b in 0..16 {
            let (l, r) = (v[b], v[31 - b]);
            // Poisson standard error of the bin difference, as a density.
            let se = ((l + r) * width * 400_000.0).sqrt() / (400_000.0 * width);
            assert!((l - r).abs() < 5.0 * se + 1e-12, "bin {b}: {l} vs {r}");
        }
    }

    #[test]
    fn validation_happens_before_running() {
        let mut s = fig3(4.0, 0);
        assert!(simulate_rates(&s, Execution::Sequential).is_err());
        s.drops = 10;
        s.beamformer = Beamformer::Zf;
        s.array = ArrayConfig::new(4, 1.0).unwrap();
        assert!(matches!(simulate_rates(&s, Execution::Sequential), Err(Error::ZfDimension { .. })));
    }

    #[test]
    fn single_user_rate_is_deterministic() {
        let mut s = fig3(4.0, 500);
        s.users = 1;
        let r = simulate_rates(&s, Execution::default()).unwrap();
        for &x in &r.rates {
            assert_abs_diff_eq!(x, 3201f64.log2(), epsilon = 1e-9);
        }
        let series = simulate_rate_cdf(&s, Execution::default()).unwrap();
        assert_eq!(series.points.len(), 1);
        assert_eq!(series.points[0].1, 1.0);
    }

    #[test]
    fn drop_snapshot_matches_simulation() {
        let s = fig3(4.0, 20);
        let r = simulate_rates(&s, Execution::Sequential).unwrap();
        for i in [0u64, 7, 19] {
            let (snap, user) = s.drop_snapshot(i).unwrap();
            assert_eq!(user_sinr(Beamformer::Mrc, &snap, user).unwrap(), r.sinrs[i as usize]);
        }
    }

    #[test]
    fn two_lobe_extremes() {
        let s = fig3(4.0, 200);
        let model = TwoLobeModel::with_analytic_main_gain(32, 1.6, 5e-3).unwrap();
        let m = 32.0;
        let snr = 100.0;
        let none = simulate_two_lobe_rates_with_prob(&s, &model, 0.0, Execution::Sequential).unwrap();
        let expect = (1.0 + snr * m / (17.0 * model.g_side() * snr * m + 1.0)).log2();
        assert!(none.rates.iter().all(|&r| (r - expect).abs() < 1e-12));
        let all = simulate_two_lobe_rates_with_prob(&s, &model, 1.0, Execution::Sequential).unwrap();
        let expect = (1.0 + snr * m / (17.0 * model.g_main() * snr * m + 1.0)).log2();
        assert!(all.rates.iter().all(|&r| (r - expect).abs() < 1e-12));

        let mut zf = s;
        zf.beamformer = Beamformer::Zf;
        assert!(simulate_two_lobe_rates(&zf, &model, Execution::Sequential).is_err());
    }
}
