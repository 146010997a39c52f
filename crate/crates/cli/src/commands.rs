use serde_json::{json, Map, Value};
use sparse_ula::analytic::{
    analytic_main_gain, collision_prob_gap, crossover_thresholds, fit_two_lobe, two_lobe_gain, AnalyticScenario,
    InterferenceLaw, TwoLobeModel,
};
use sparse_ula::array::{grating_lobe_positions, main_lobe_beamwidth};
use sparse_ula::montecarlo::{delta_histogram, simulate_rate_cdf};
use sparse_ula::{ArrayConfig, Beamformer, ChannelKind, DistributionSeries, Scenario, SeriesDocument, SeriesKind};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};

/// A document to write, and possibly a failure to report once it is written.
pub struct Report {
    pub document: SeriesDocument,
    pub failure: Option<CliError>,
}

impl From<SeriesDocument> for Report {
    fn from(document: SeriesDocument) -> Self {
        Report { document, failure: None }
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<Report> {
    let mut report = match command {
        Command::Beampattern => beampattern(cfg).map(Report::from),
        Command::DeltaDist => delta_dist(cfg).map(Report::from),
        Command::RateCdf => rate_cdf(cfg).map(Report::from),
        Command::Crossover => crossover(cfg),
        Command::FitLobes => fit_lobes(cfg).map(Report::from),
        Command::AnalyticCdf => analytic_cdf(cfg).map(Report::from),
    }?;
    let doc = &mut report.document;
    doc.command = command.name().to_string();
    let mut meta = run_meta(cfg);
    meta.append(&mut doc.meta);
    doc.meta = meta;
    for s in &doc.series {
        s.validate()?;
    }
    Ok(report)
}

fn run_meta(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("elements".into(), json!(cfg.arrays[0].elements()));
    m.insert("eta".into(), json!(cfg.arrays.iter().map(|a| a.eta()).collect::<Vec<_>>()));
    m.insert("users".into(), json!(cfg.users));
    m.insert("theta_max_deg".into(), json!(cfg.theta_max.to_degrees()));
    m.insert("snr_db".into(), json!(cfg.snr_db));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// User overrides on top of a fit, fitting only when something is missing.
fn model_for(cfg: &RunConfig, array: &ArrayConfig) -> CliResult<TwoLobeModel> {
    let o = cfg.model;
    let m = array.elements();
    let fitted = match (o.alpha, o.g_main, o.g_side) {
        (Some(_), Some(_), Some(_)) => None,
        _ => Some(fit_two_lobe(array, o.fit_grid)?.model),
    };
    let alpha = o.alpha.or(fitted.map(|f| f.alpha())).unwrap_or_default();
    let g_main = match (o.g_main, o.alpha) {
        (Some(g), _) => g,
        (None, Some(a)) => analytic_main_gain(m, a),
        (None, None) => fitted.map(|f| f.g_main()).unwrap_or_default(),
    };
    let g_side = o.g_side.or(fitted.map(|f| f.g_side())).unwrap_or_default();
    Ok(TwoLobeModel::new(alpha, g_main, g_side)?)
}

fn model_meta(series: DistributionSeries, model: &TwoLobeModel) -> DistributionSeries {
    series
        .with_meta("alpha", model.alpha())
        .with_meta("g_main", model.g_main())
        .with_meta("g_side", model.g_side())
}

fn beampattern(cfg: &RunConfig) -> CliResult<SeriesDocument> {
    let mut doc = SeriesDocument::new("");
    for array in &cfg.arrays {
        let (m, eta) = (array.elements(), array.eta());
        let points = grid(-2.0, 2.0, cfg.points).map(|d| (d, array.pattern(d))).collect();
        doc.series.push(
            DistributionSeries::new(format!("pattern eta={eta}"), SeriesKind::Curve, points)
                .with_meta("eta", eta)
                .with_meta("beamwidth", main_lobe_beamwidth(array)),
        );
        // Zeros of sin(pi M eta delta / 2) that are not lobe centers.
        let step = 2.0 / (m as f64 * eta);
        let reach = (2.0 / step + 1e-9).floor() as i64;
        let nulls: Vec<(f64, f64)> = (-reach..=reach)
            .filter(|k| k.rem_euclid(m as i64) != 0)
            .map(|k| (k as f64 * step, 0.0))
            .collect();
        doc.series.push(
            DistributionSeries::new(format!("nulls eta={eta}"), SeriesKind::Markers, nulls)
                .with_meta("eta", eta)
                .with_meta("first_null", step),
        );
        let lobes = grating_lobe_positions(array).into_iter().map(|d| (d.value(), 1.0)).collect();
        doc.series
            .push(DistributionSeries::new(format!("grating lobes eta={eta}"), SeriesKind::Markers, lobes).with_meta("eta", eta));
    }
    Ok(doc)
}

fn delta_dist(cfg: &RunConfig) -> CliResult<SeriesDocument> {
    let mut doc = SeriesDocument::new("");
    doc.series
        .push(delta_histogram(cfg.pairs, cfg.theta_max, cfg.bins, cfg.seed, cfg.exec)?);
    Ok(doc)
}

fn scenarios(cfg: &RunConfig) -> CliResult<Vec<Scenario>> {
    let mut out = Vec::new();
    for array in &cfg.arrays {
        for &beamformer in &cfg.beamformers {
            let s = Scenario {
                array: *array,
                users: cfg.users,
                theta_max: cfg.theta_max,
                snr_db: cfg.snr_db,
                beamformer,
                channel: cfg.channel,
                drops: cfg.drops,
                seed: cfg.seed,
                recorded: cfg.recorded,
            };
            s.validate()?;
            out.push(s);
        }
    }
    Ok(out)
}

fn rate_cdf(cfg: &RunConfig) -> CliResult<SeriesDocument> {
    let scenarios = scenarios(cfg)?;
    let with_analytic = cfg.channel == ChannelKind::Los && cfg.beamformers.contains(&Beamformer::Mrc);
    let mut doc = SeriesDocument::new("");
    for s in &scenarios {
        log::info!("simulating {} drops: {} eta={}", s.drops, s.beamformer, s.array.eta());
        doc.series.push(simulate_rate_cdf(s, cfg.exec)?);
    }
    if with_analytic {
        for array in &cfg.arrays {
            doc.series.extend(analytic_series(cfg, array, cfg.gaussian)?);
        }
    }
    Ok(doc)
}

fn analytic_cdf(cfg: &RunConfig) -> CliResult<SeriesDocument> {
    let mut doc = SeriesDocument::new("");
    for array in &cfg.arrays {
        doc.series.extend(analytic_series(cfg, array, true)?);
    }
    Ok(doc)
}

/// Binomial CDF and, on request, its normal approximation on a rate grid that
/// brackets every jump of the binomial curve.
fn analytic_series(cfg: &RunConfig, array: &ArrayConfig, gaussian: bool) -> CliResult<Vec<DistributionSeries>> {
    let model = model_for(cfg, array)?;
    let scenario = AnalyticScenario::new(cfg.users, *array, cfg.theta_max, cfg.snr_linear())?;
    let law = InterferenceLaw::new(&scenario, &model)?;
    let atoms = law.atoms();
    let top = atoms[atoms.len() - 1] + 0.5;
    let mut xs: Vec<f64> = grid(0.0, top, cfg.points).collect();
    for a in &atoms {
        let eps = 1e-9 * a.max(1.0);
        xs.extend([a - eps, *a]);
    }
    xs.retain(|x| *x >= 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let eta = array.eta();
    let p = law.collision_prob;
    let binomial = DistributionSeries::new(
        format!("binomial eta={eta}"),
        SeriesKind::Cdf,
        xs.iter().map(|&r| (r, law.binomial_cdf(r))).collect(),
    );
    let mut out = vec![model_meta(binomial, &model).with_meta("collision_prob", p).with_meta("eta", eta)];
    if gaussian {
        if cfg.users < 2 {
            log::warn!("normal approximation skipped: it needs at least two users");
        } else {
            let points = xs.iter().map(|&r| law.gaussian_cdf(r).map(|f| (r, f))).collect::<Result<Vec<_>, _>>()?;
            let normal = DistributionSeries::new(format!("normal eta={eta}"), SeriesKind::Cdf, points);
            out.push(model_meta(normal, &model).with_meta("collision_prob", p).with_meta("eta", eta));
        }
    }
    Ok(out)
}

fn crossover(cfg: &RunConfig) -> CliResult<Report> {
    let mut doc = SeriesDocument::new("");
    let mut failure = None;
    for array in &cfg.arrays {
        if array.is_collocated() {
            return Err(CliError::Validation("crossover compares a sparse array with the collocated one; eta must exceed 1".into()));
        }
        let eta = array.eta();
        let alpha = model_for(cfg, array)?.alpha();
        let sweep = grid(0.0, 90.0, cfg.points + 1)
            .skip(1)
            .map(|deg| Ok((deg, collision_prob_gap(array, alpha, deg.to_radians())?)))
            .collect::<Result<Vec<_>, sparse_ula::Error>>()?;
        doc.series.push(
            DistributionSeries::new(format!("collision gap eta={eta}"), SeriesKind::Curve, sweep)
                .with_meta("eta", eta)
                .with_meta("alpha", alpha),
        );
        match crossover_thresholds(array, alpha) {
            Ok(th) => {
                let (lo, hi) = (th.theta_lower.to_degrees(), th.theta_upper.to_degrees());
                doc.series.push(
                    DistributionSeries::new(format!("thresholds eta={eta}"), SeriesKind::Markers, vec![(lo, 0.0), (hi, 0.0)])
                        .with_meta("eta", eta)
                        .with_meta("regime", "crossover")
                        .with_meta("theta_lower_deg", lo)
                        .with_meta("theta_upper_deg", hi),
                );
            }
            Err(e @ sparse_ula::Error::NoCrossover { .. }) => {
                log::warn!("{e}");
                doc.series.push(
                    DistributionSeries::new(format!("thresholds eta={eta}"), SeriesKind::Markers, Vec::new())
                        .with_meta("eta", eta)
                        .with_meta("regime", "no-crossover")
                        .with_meta("reason", e.to_string()),
                );
                failure = Some(e.into());
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report { document: doc, failure })
}

fn fit_lobes(cfg: &RunConfig) -> CliResult<SeriesDocument> {
    let mut doc = SeriesDocument::new("");
    for array in &cfg.arrays {
        let fit = fit_two_lobe(array, cfg.model.fit_grid)?;
        let eta = array.eta();
        let m = fit.model;
        let xs: Vec<f64> = grid(-2.0, 2.0, cfg.points).collect();
        let exact = DistributionSeries::new(
            format!("pattern eta={eta}"),
            SeriesKind::Curve,
            xs.iter().map(|&d| (d, array.pattern(d))).collect(),
        );
        let approx = DistributionSeries::new(
            format!("two-lobe eta={eta}"),
            SeriesKind::Curve,
            xs.iter().map(|&d| (d, two_lobe_gain(&m, array, d))).collect(),
        );
        doc.series.push(exact.with_meta("eta", eta));
        doc.series.push(
            model_meta(approx, &m)
                .with_meta("eta", eta)
                .with_meta("rms_error_db", fit.rms_error_db)
                .with_meta("sse_linear", fit.sse_linear)
                .with_meta("grid_points", fit.grid_points),
        );
    }
    Ok(doc)
}
