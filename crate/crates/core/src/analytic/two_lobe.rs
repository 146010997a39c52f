//! Piecewise-constant two-level surrogate of the beam pattern.

use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::error::{Error, Result};

/// Default number of uniform delta samples used by [`fit_two_lobe`].
pub const DEFAULT_FIT_GRID: usize = 1 << 14;

/// Smallest number of grid samples required across one main-lobe width.
pub const MIN_SAMPLES_PER_LOBE: f64 = 64.0;

/// Pattern values are floored here before taking decibels, so exact nulls stay finite.
const DB_FLOOR: f64 = 1e-12;

const ALPHA_STEP: f64 = 1e-3;

/// Lobe gain `g_main` within `t = alpha / (M eta)` of every lobe center, `g_side` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLobeModel {
    alpha: f64,
    g_main: f64,
    g_side: f64,
}

impl TwoLobeModel {
    pub fn new(alpha: f64, g_main: f64, g_side: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&alpha) {
            return Err(Error::param("alpha", format!("must lie in [0, 2], got {alpha}")));
        }
        if !(g_main > 0.0 && g_main <= 1.0) {
            return Err(Error::param("g_main", format!("must lie in (0, 1], got {g_main}")));
        }
        if !(g_side >= 0.0 && g_side < g_main) {
            return Err(Error::param("g_side", format!("must lie in [0, g_main), got {g_side}")));
        }
        Ok(Self { alpha, g_main, g_side })
    }

    /// Model whose lobe gain is the pattern value half way to the band edge,
    /// `|sin(pi alpha / 4) / (M sin(pi alpha / (4 M)))|^2`.
    pub fn with_analytic_main_gain(elements: usize, alpha: f64, g_side: f64) -> Result<Self> {
        Self::new(alpha, analytic_main_gain(elements, alpha), g_side)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn g_main(&self) -> f64 {
        self.g_main
    }

    pub fn g_side(&self) -> f64 {
        self.g_side
    }

    /// Band half-width `t = alpha / (M eta)`.
    pub fn half_width(&self, array: &ArrayConfig) -> f64 {
        self.alpha / (array.elements() as f64 * array.eta())
    }
}

/// `|sin(pi alpha / 4) / (M sin(pi alpha / (4 M)))|^2`; equals 1 at `alpha = 0`.
pub fn analytic_main_gain(elements: usize, alpha: f64) -> f64 {
    let m = elements as f64;
    let x = std::f64::consts::FRAC_PI_4 * alpha;
    if x == 0.0 {
        return 1.0;
    }
    let r = x.sin() / (m * (x / m).sin());
    r * r
}

/// Distance from `delta` to the closest lobe center `2n / eta`, `|n| <= floor(eta)`.
pub(crate) fn distance_to_lobe(array: &ArrayConfig, delta: f64) -> f64 {
    let order = array.max_lobe_order() as f64;
    let n = (delta * array.eta() / 2.0).round().clamp(-order, order);
    (delta - 2.0 * n / array.eta()).abs()
}

/// Two-level approximation of the pattern at `delta`.
pub fn two_lobe_gain(model: &TwoLobeModel, array: &ArrayConfig, delta: f64) -> f64 {
    if distance_to_lobe(array, delta) <= model.half_width(array) {
        model.g_main
    } else {
        model.g_side
    }
}

/// Fitted model with its residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLobeFit {
    pub model: TwoLobeModel,
    /// Root-mean-square fit error in dB over the grid (the minimized objective).
    pub rms_error_db: f64,
    /// Sum of squared linear-scale errors over the grid.
    pub sse_linear: f64,
    pub grid_points: usize,
}

/// Least-squares fit of the two-level model on a uniform grid of `grid_points` deltas in `[-2, 2]`.
///
/// The residual is measured in dB. `alpha` is scanned on a `1e-3` grid, the lobe
/// gain follows [`analytic_main_gain`], and the sidelobe level is the mean pattern
/// value outside the bands.
pub fn fit_two_lobe(array: &ArrayConfig, grid_points: usize) -> Result<TwoLobeFit> {
    let m = array.elements() as f64;
    let step = 4.0 / (grid_points.max(2) - 1) as f64;
    let per_lobe = (4.0 / (m * array.eta())) / step;
    if grid_points < 3 || per_lobe < MIN_SAMPLES_PER_LOBE {
        return Err(Error::param(
            "grid_points",
            format!("{grid_points} points resolve only {per_lobe:.1} samples per main lobe (need {MIN_SAMPLES_PER_LOBE})"),
        ));
    }

    // Sort the grid by distance to the nearest lobe; every band is then a prefix
    // and each alpha costs O(1) through prefix sums.
    let mut samples: Vec<(f64, f64, f64)> = (0..grid_points)
        .map(|i| {
            let delta = -2.0 + step * i as f64;
            let g = array.pattern(delta);
            (distance_to_lobe(array, delta), g, 10.0 * g.max(DB_FLOOR).log10())
        })
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = samples.len();
    let mut sum_lin = vec![0.0; n + 1];
    let mut sum_db = vec![0.0; n + 1];
    let mut sum_db2 = vec![0.0; n + 1];
    for (i, &(_, g, db)) in samples.iter().enumerate() {
        sum_lin[i + 1] = sum_lin[i] + g;
        sum_db[i + 1] = sum_db[i] + db;
        sum_db2[i + 1] = sum_db2[i] + db * db;
    }
    let sq_dev = |lo: usize, hi: usize, level_db: f64| {
        let count = (hi - lo) as f64;
        (sum_db2[hi] - sum_db2[lo]) - 2.0 * level_db * (sum_db[hi] - sum_db[lo]) + count * level_db * level_db
    };

    let steps = (2.0 / ALPHA_STEP).round() as usize;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut inside = 0usize;
    for j in 1..=steps {
        let alpha = j as f64 * ALPHA_STEP;
        let t = alpha / (m * array.eta());
        while inside < n && samples[inside].0 <= t {
            inside += 1;
        }
        if inside == n {
            break;
        }
        let g_main = analytic_main_gain(array.elements(), alpha);
        let g_side = (sum_lin[n] - sum_lin[inside]) / (n - inside) as f64;
        if !(g_side < g_main) {
            continue;
        }
        let cost = sq_dev(0, inside, 10.0 * g_main.log10()) + sq_dev(inside, n, 10.0 * g_side.max(DB_FLOOR).log10());
        if best.is_none_or(|b| cost < b.0) {
            best = Some((cost, alpha, g_main, g_side));
        }
    }
    let (cost, alpha, g_main, g_side) =
        best.ok_or_else(|| Error::param("grid_points", "no admissible lobe width on this grid"))?;
    let model = TwoLobeModel::new(alpha, g_main, g_side)?;
    let sse_linear = samples
        .iter()
        .map(|&(dist, g, _)| {
            let level = if dist <= model.half_width(array) { g_main } else { g_side };
            (g - level).powi(2)
        })
        .sum();
    Ok(TwoLobeFit {
        model,
        rms_error_db: (cost.max(0.0) / n as f64).sqrt(),
        sse_linear,
        grid_points,
    })
}
