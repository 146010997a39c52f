//! Command-line flags, the TOML run file, and their merge into a validated [`RunConfig`].
//!
//! Angles arrive in degrees and are converted to radians here, once. Flags
//! override values from the file; anything left unset takes the defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use sparse_ula::analytic::DEFAULT_FIT_GRID;
use sparse_ula::montecarlo::DEFAULT_DROPS;
use sparse_ula::{ArrayConfig, Beamformer, ChannelKind, Execution, OneRingParams, RecordedUser};

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "sparse-ula", version, about = "Sparse vs collocated ULA analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Beam pattern with null and grating-lobe positions.
    Beampattern,
    /// Histogram of the spatial angle difference between two random users.
    DeltaDist,
    /// Simulated rate CDFs, plus the analytic curves for LoS channels with MRC.
    RateCdf,
    /// Angular-spread window in which the sparse array collides less often.
    Crossover,
    /// Least-squares two-level fit of the beam pattern.
    FitLobes,
    /// Analytic rate CDFs (binomial and normal approximation) without simulation.
    AnalyticCdf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Beampattern => "beampattern",
            Command::DeltaDist => "delta-dist",
            Command::RateCdf => "rate-cdf",
            Command::Crossover => "crossover",
            Command::FitLobes => "fit-lobes",
            Command::AnalyticCdf => "analytic-cdf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelChoice {
    Los,
    OneRing,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// TOML run file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo drops.
    #[arg(long, global = true)]
    pub drops: Option<u64>,
    /// Output path; JSON goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the extension of --out.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub elements: Option<usize>,
    /// Spacing in half wavelengths; repeat for several arrays.
    #[arg(long, global = true)]
    pub eta: Vec<f64>,
    #[arg(long, global = true)]
    pub users: Option<usize>,
    /// Maximum user angle in degrees.
    #[arg(long = "theta-max", global = true)]
    pub theta_max_deg: Option<f64>,
    /// Normalized transmit SNR in dB.
    #[arg(long, global = true)]
    pub snr_db: Option<f64>,
    /// Repeat for several receivers.
    #[arg(long, global = true, value_parser = parse_beamformer)]
    pub beamformer: Vec<Beamformer>,
    #[arg(long, global = true, value_enum)]
    pub channel: Option<ChannelChoice>,
    /// Two-lobe band parameter; fitted when omitted.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub g_main: Option<f64>,
    #[arg(long, global = true)]
    pub g_side: Option<f64>,
    /// Pairs drawn for the angle-difference histogram.
    #[arg(long, global = true)]
    pub pairs: Option<u64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Samples in curve outputs.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Add the normal approximation to analytic rate CDFs.
    #[arg(long, global = true)]
    pub gaussian: bool,
    /// Worker threads (0: all cores, 1: sequential).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// -v for info, -vv for debug logging.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

fn parse_beamformer(s: &str) -> Result<Beamformer, String> {
    s.parse().map_err(|e: sparse_ula::Error| e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub drops: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub array: ArraySection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub one_ring: OneRingSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub elements: Option<usize>,
    pub eta: Option<OneOrMany<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub users: Option<usize>,
    pub theta_max_deg: Option<f64>,
    pub snr_db: Option<f64>,
    pub beamformer: Option<OneOrMany<Beamformer>>,
    pub channel: Option<ChannelChoice>,
    pub recorded: Option<RecordedUser>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneRingSection {
    pub paths: Option<usize>,
    pub ring_radius_m: Option<f64>,
    pub center_range_m: Option<f64>,
    pub rician_k_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub alpha: Option<f64>,
    pub g_main: Option<f64>,
    pub g_side: Option<f64>,
    pub fit_grid: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub points: Option<usize>,
    pub pairs: Option<u64>,
    pub bins: Option<usize>,
    pub gaussian: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "config: schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Two-lobe parameters given by the user; missing ones come from the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOverrides {
    pub alpha: Option<f64>,
    pub g_main: Option<f64>,
    pub g_side: Option<f64>,
    pub fit_grid: usize,
}

/// Fully resolved run parameters. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub drops: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub arrays: Vec<ArrayConfig>,
    pub users: usize,
    pub theta_max: f64,
    pub snr_db: f64,
    pub beamformers: Vec<Beamformer>,
    pub channel: ChannelKind,
    pub recorded: RecordedUser,
    pub model: ModelOverrides,
    pub points: usize,
    pub pairs: u64,
    pub bins: usize,
    pub gaussian: bool,
    pub exec: Execution,
}

impl RunConfig {
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Merges flags over the run file over defaults and validates the result.
pub fn resolve(flags: &Flags) -> CliResult<RunConfig> {
    let file = match &flags.config {
        Some(path) => Some(FileConfig::load(path)?),
        None => None,
    };
    let f = file.as_ref();

    let out = flags.out.clone().or_else(|| f.and_then(|c| c.out.clone()));
    let format = match flags.format.or(f.and_then(|c| c.format)) {
        Some(fmt) => fmt,
        None => match out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            Some(ext) if ext.eq_ignore_ascii_case("json") || out.is_none() => Format::Json,
            None => Format::Json,
            Some(ext) => return Err(invalid(format!("cannot infer the format of `.{ext}`; pass --format"))),
        },
    };
    if format == Format::Csv && out.is_none() {
        return Err(invalid("CSV output needs --out"));
    }

    let elements = flags.elements.or(f.and_then(|c| c.array.elements)).unwrap_or(32);
    let etas = if !flags.eta.is_empty() {
        flags.eta.clone()
    } else {
        f.and_then(|c| c.array.eta.clone()).map(OneOrMany::into_vec).unwrap_or_else(|| vec![4.0])
    };
    if etas.is_empty() {
        return Err(invalid("at least one eta is required"));
    }
    let arrays = etas
        .iter()
        .map(|&eta| ArrayConfig::new(elements, eta))
        .collect::<Result<Vec<_>, _>>()?;

    let sc = f.map(|c| &c.scenario);
    let users = flags.users.or(sc.and_then(|s| s.users)).unwrap_or(18);
    if users == 0 {
        return Err(invalid("users must be at least 1"));
    }
    let theta_max_deg = flags.theta_max_deg.or(sc.and_then(|s| s.theta_max_deg)).unwrap_or(10.0);
    if !(theta_max_deg > 0.0 && theta_max_deg <= 90.0) {
        return Err(invalid(format!("theta-max must lie in (0, 90] degrees, got {theta_max_deg}")));
    }
    let snr_db = flags.snr_db.or(sc.and_then(|s| s.snr_db)).unwrap_or(20.0);
    if !snr_db.is_finite() {
        return Err(invalid("snr-db must be finite"));
    }
    let beamformers = if !flags.beamformer.is_empty() {
        flags.beamformer.clone()
    } else {
        sc.and_then(|s| s.beamformer.clone())
            .map(OneOrMany::into_vec)
            .unwrap_or_else(|| vec![Beamformer::Mrc])
    };
    if beamformers.is_empty() {
        return Err(invalid("at least one beamformer is required"));
    }

    let ring = f.map(|c| &c.one_ring);
    let channel = match flags.channel.or(sc.and_then(|s| s.channel)).unwrap_or(ChannelChoice::Los) {
        ChannelChoice::Los => ChannelKind::Los,
        ChannelChoice::OneRing => ChannelKind::OneRing(OneRingParams::new(
            ring.and_then(|r| r.paths).unwrap_or(10),
            ring.and_then(|r| r.ring_radius_m).unwrap_or(5.0),
            ring.and_then(|r| r.center_range_m).unwrap_or(40.0),
            ring.and_then(|r| r.rician_k_db).unwrap_or(20.0),
        )?),
    };

    let m = f.map(|c| &c.model);
    let model = ModelOverrides {
        alpha: flags.alpha.or(m.and_then(|m| m.alpha)),
        g_main: flags.g_main.or(m.and_then(|m| m.g_main)),
        g_side: flags.g_side.or(m.and_then(|m| m.g_side)),
        fit_grid: m.and_then(|m| m.fit_grid).unwrap_or(DEFAULT_FIT_GRID),
    };

    let o = f.map(|c| &c.output);
    let points = flags.points.or(o.and_then(|o| o.points)).unwrap_or(4001);
    if points < 2 {
        return Err(invalid("points must be at least 2"));
    }
    let drops = flags.drops.or(f.and_then(|c| c.drops)).unwrap_or(DEFAULT_DROPS);
    if drops == 0 {
        return Err(invalid("drops must be at least 1"));
    }

    let exec = match flags.threads.or(f.and_then(|c| c.threads)) {
        None => Execution::default(),
        Some(1) => Execution::Sequential,
        Some(n) => Execution::with_threads(n),
    };

    Ok(RunConfig {
        seed: flags.seed.or(f.and_then(|c| c.seed)).unwrap_or(0),
        drops,
        out,
        format,
        arrays,
        users,
        theta_max: theta_max_deg.to_radians(),
        snr_db,
        beamformers,
        channel,
        recorded: sc.and_then(|s| s.recorded).unwrap_or_default(),
        model,
        points,
        pairs: flags.pairs.or(o.and_then(|o| o.pairs)).unwrap_or(1_000_000),
        bins: flags.bins.or(o.and_then(|o| o.bins)).unwrap_or(64),
        gaussian: flags.gaussian || o.and_then(|o| o.gaussian).unwrap_or(false),
        exec,
    })
}
