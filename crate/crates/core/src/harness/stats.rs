//! Confidence intervals and paired comparisons.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `errors` out of `n` trials at 95%.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = errors as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Error-rate estimate with its Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rate {
    pub errors: u64,
    pub n: u64,
}

impl Rate {
    pub fn new(errors: u64, n: u64) -> Self {
        Self { errors, n }
    }

    pub fn value(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.errors as f64 / self.n as f64
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.n)
    }

    pub fn halfwidth(&self) -> f64 {
        let (lo, hi) = self.interval();
        0.5 * (hi - lo)
    }

    /// True when the two 95% intervals do not overlap and `self` is lower.
    pub fn below(&self, other: &Rate) -> bool {
        self.interval().1 < other.interval().0
    }
}

/// Sample mean with a normal-approximation 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub halfwidth: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                halfwidth: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let halfwidth = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self { mean, halfwidth, n }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.halfwidth
    }

    /// The 95% interval excludes zero.
    pub fn excludes_zero(&self) -> bool {
        self.lower() > 0.0 || self.upper() < 0.0
    }
}

/// Per-frame differences `a_t - b_t` summarised by their mean and 95% interval.
pub fn paired_difference(a: &[f64], b: &[f64]) -> MeanEstimate {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    MeanEstimate::from_samples(&d)
}
