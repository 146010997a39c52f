//! Linear receive beamforming for the multi-user uplink.
//!
//! Noise power is normalized to one, so every user enters through its
//! normalized SNR `|beta_k|^2 P_k / sigma^2`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelVector;
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, CONDITION_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beamformer {
    Mrc,
    Zf,
    Mmse,
}

impl Beamformer {
    pub const ALL: [Beamformer; 3] = [Beamformer::Mrc, Beamformer::Zf, Beamformer::Mmse];

    pub fn name(&self) -> &'static str {
        match self {
            Beamformer::Mrc => "mrc",
            Beamformer::Zf => "zf",
            Beamformer::Mmse => "mmse",
        }
    }
}

impl fmt::Display for Beamformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Beamformer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrc" => Ok(Beamformer::Mrc),
            "zf" => Ok(Beamformer::Zf),
            "mmse" => Ok(Beamformer::Mmse),
            other => Err(Error::param("beamformer", format!("unknown beamformer `{other}` (expected mrc, zf or mmse)"))),
        }
    }
}

/// Channels of all `K` users plus their normalized SNRs (linear).
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSnapshot {
    channels: Vec<ChannelVector>,
    snr: Vec<f64>,
}

impl UplinkSnapshot {
    pub fn new(channels: Vec<ChannelVector>, snr: Vec<f64>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::param("channels", "need at least one user"));
        };
        let m = first.len();
        if m == 0 {
            return Err(Error::param("channels", "channels must have at least one entry"));
        }
        if snr.len() != channels.len() {
            return Err(Error::DimensionMismatch {
                expected: channels.len(),
                actual: snr.len(),
            });
        }
        if let Some(h) = channels.iter().find(|h| h.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: h.len(),
            });
        }
        if channels.iter().any(|h| !h.is_finite()) {
            return Err(Error::param("channels", "channel entries must be finite"));
        }
        if let Some(p) = snr.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::param("snr", format!("normalized SNR must be positive and finite, got {p}")));
        }
        Ok(Self { channels, snr })
    }

    /// Every user at the same normalized SNR.
    pub fn with_common_snr(channels: Vec<ChannelVector>, snr: f64) -> Result<Self> {
        let k = channels.len();
        Self::new(channels, vec![snr; k])
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn antennas(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channels(&self) -> &[ChannelVector] {
        &self.channels
    }

    pub fn snr(&self) -> &[f64] {
        &self.snr
    }

    fn interferers(&self, user: usize) -> impl Iterator<Item = (usize, &ChannelVector)> {
        self.channels.iter().enumerate().filter(move |(i, _)| *i != user)
    }
}

/// Per-user SINR (linear) and rate (bits/s/Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub beamformer: Beamformer,
    pub per_user_sinr: Vec<f64>,
    pub per_user_rate: Vec<f64>,
}

/// `log2(1 + sinr)`.
pub fn rate_from_sinr(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

pub fn sinr_mrc(snapshot: &UplinkSnapshot) -> Result<SinrReport> {
    report(Beamformer::Mrc, snapshot)
}

pub fn sinr_zf(snapshot: &UplinkSnapshot) -> Result<SinrReport> {
    report(Beamformer::Zf, snapshot)
}

pub fn sinr_mmse(snapshot: &UplinkSnapshot) -> Result<SinrReport> {
    report(Beamformer::Mmse, snapshot)
}

pub fn sinr_report(beamformer: Beamformer, snapshot: &UplinkSnapshot) -> Result<SinrReport> {
    report(beamformer, snapshot)
}

fn report(beamformer: Beamformer, snapshot: &UplinkSnapshot) -> Result<SinrReport> {
    let per_user_sinr = (0..snapshot.users())
        .map(|k| user_sinr(beamformer, snapshot, k))
        .collect::<Result<Vec<_>>>()?;
    let per_user_rate = per_user_sinr.iter().map(|&g| rate_from_sinr(g)).collect();
    Ok(SinrReport {
        beamformer,
        per_user_sinr,
        per_user_rate,
    })
}

/// SINR of a single user under the given beamformer.
pub fn user_sinr(beamformer: Beamformer, snapshot: &UplinkSnapshot, user: usize) -> Result<f64> {
    if user >= snapshot.users() {
        return Err(Error::param("user", format!("user {user} out of range for {} users", snapshot.users())));
    }
    match beamformer {
        Beamformer::Mrc => mrc(snapshot, user),
        Beamformer::Zf => zf(snapshot, user),
        Beamformer::Mmse => mmse(snapshot, user),
    }
}

fn nonzero_norm(h: &ChannelVector, user: usize) -> Result<f64> {
    let n = h.norm_sqr();
    if n > 0.0 {
        Ok(n)
    } else {
        Err(Error::DegenerateChannel(format!("user {user} has a zero-norm channel")))
    }
}

fn mrc(s: &UplinkSnapshot, k: usize) -> Result<f64> {
    let hk = &s.channels[k];
    let nk = nonzero_norm(hk, k)?;
    let interference: f64 = s.interferers(k).map(|(i, hi)| s.snr[i] * hk.inner(hi).norm_sqr()).sum::<f64>() / nk;
    Ok(s.snr[k] * nk / (interference + 1.0))
}

struct ZfProjection {
    interferers: Vec<usize>,
    weights: Vec<Complex64>,
    residual_energy: f64,
}

/// Projection of `h_k` onto the orthogonal complement of the interferer span.
fn zf_projection(s: &UplinkSnapshot, k: usize) -> Result<ZfProjection> {
    let hk = &s.channels[k];
    let nk = nonzero_norm(hk, k)?;
    let interferers: Vec<usize> = (0..s.users()).filter(|&i| i != k).collect();
    if interferers.len() >= s.antennas() {
        return Err(Error::ZfDimension {
            interferers: interferers.len(),
            antennas: s.antennas(),
        });
    }
    if interferers.is_empty() {
        return Ok(ZfProjection {
            interferers,
            weights: Vec::new(),
            residual_energy: nk,
        });
    }
    let cols: Vec<&[Complex64]> = interferers.iter().map(|&i| s.channels[i].entries()).collect();
    let gram = HermitianMatrix::gram(&cols);
    let chol = gram.cholesky().map_err(|_| Error::SingularInterference {
        user: k,
        condition: f64::INFINITY,
    })?;
    let condition = chol.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularInterference { user: k, condition });
    }
    let b: Vec<Complex64> = interferers.iter().map(|&i| s.channels[i].inner(hk)).collect();
    let residual_energy = (nk - chol.quad_inverse(&b)).max(0.0);
    if residual_energy * CONDITION_LIMIT <= nk {
        return Err(Error::SingularInterference {
            user: k,
            condition: nk / residual_energy,
        });
    }
    Ok(ZfProjection {
        interferers,
        weights: chol.solve(&b),
        residual_energy,
    })
}

fn zf(s: &UplinkSnapshot, k: usize) -> Result<f64> {
    Ok(s.snr[k] * zf_projection(s, k)?.residual_energy)
}

fn mmse_covariance(s: &UplinkSnapshot, k: usize) -> HermitianMatrix {
    let mut c = HermitianMatrix::identity(s.antennas());
    for (i, hi) in s.interferers(k) {
        c.add_outer(s.snr[i], hi.entries());
    }
    c
}

fn mmse(s: &UplinkSnapshot, k: usize) -> Result<f64> {
    nonzero_norm(&s.channels[k], k)?;
    let chol = mmse_covariance(s, k).cholesky()?;
    Ok(s.snr[k] * chol.quad_inverse(s.channels[k].entries()))
}

/// Unit-norm receive combiner `v_k` realizing the beamformer's SINR.
pub fn combiner(beamformer: Beamformer, snapshot: &UplinkSnapshot, user: usize) -> Result<ChannelVector> {
    if user >= snapshot.users() {
        return Err(Error::param("user", format!("user {user} out of range")));
    }
    let hk = &snapshot.channels[user];
    let v: Vec<Complex64> = match beamformer {
        Beamformer::Mrc => hk.entries().to_vec(),
        Beamformer::Zf => {
            let proj = zf_projection(snapshot, user)?;
            let mut v = hk.entries().to_vec();
            for (w, &i) in proj.weights.iter().zip(&proj.interferers) {
                for (vm, hm) in v.iter_mut().zip(snapshot.channels[i].entries()) {
                    *vm -= hm * w;
                }
            }
            v
        }
        Beamformer::Mmse => {
            nonzero_norm(hk, user)?;
            mmse_covariance(snapshot, user).cholesky()?.solve(hk.entries())
        }
    };
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateChannel(format!("combiner of user {user} vanishes")));
    }
    Ok(ChannelVector::from(v.into_iter().map(|z| z / norm).collect::<Vec<_>>()))
}
