//! Sparse and collocated uniform linear arrays in the multi-user uplink.
//!
//! * [`array`]: geometry, steering vectors and the normalized beam pattern.
//! * [`channel`]: LoS and Rician one-ring channels.
//! * [`beamform`]: MRC, ZF and MMSE receive SINRs.
//! * [`analytic`]: two-level pattern model, collision probabilities and rate CDFs.
//! * [`montecarlo`]: seeded, optionally parallel simulation of user drops.
//! * [`series`], [`stats`]: output series and empirical distribution tools.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod array;
pub mod beamform;
pub mod channel;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod montecarlo;
pub mod series;
pub mod stats;

pub use array::{ArrayConfig, SpatialAngle, SpatialAngleDifference};
pub use beamform::{Beamformer, SinrReport, UplinkSnapshot};
pub use channel::{ChannelVector, OneRingParams, UserPlacement};
pub use error::{Error, Result};
pub use exec::Execution;
pub use montecarlo::{ChannelKind, RecordedUser, Scenario};
pub use series::{DistributionSeries, SeriesDocument, SeriesKind};
