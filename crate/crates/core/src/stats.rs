//! Empirical distribution helpers: ECDFs, quantiles, Kolmogorov-Smirnov
//! distances and a pool-adjacent-violators fit for trend tests.

/// Empirical CDF over a sorted copy of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// NaN samples are dropped.
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `x` with `eval(x) >= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        if n == 0 {
            return f64::NAN;
        }
        let rank = (q.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    /// `(x, F(x))` at each distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    /// Sup distance to a reference CDF.
    ///
    /// Both functions are treated as right-continuous step or continuous functions;
    /// they are compared just left and right of every sample and of every reference
    /// jump in `atoms`.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64, atoms: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &c in self.sorted.iter().chain(atoms) {
            let eps = 1e-10 * c.abs().max(1.0);
            for x in [c - eps, c + eps] {
                worst = worst.max((self.eval(x) - cdf(x)).abs());
            }
        }
        worst
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    a.samples()
        .iter()
        .chain(b.samples())
        .map(|&x| (a.eval(x) - b.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic two-sample KS rejection threshold at significance `level`.
pub fn ks_two_sample_critical(level: f64, n: usize, m: usize) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Largest `|f(x) - g(x)|` over the given points.
pub fn sup_distance(points: &[f64], f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&x| (f(x) - g(x)).abs()).fold(0.0, f64::max)
}

/// Weighted least-squares nonincreasing fit (pool adjacent violators).
pub fn isotonic_nonincreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 + m2 * w2) / w, w, l1 + l2);
        }
    }
    blocks.into_iter().flat_map(|(m, _, l)| std::iter::repeat_n(m, l)).collect()
}
