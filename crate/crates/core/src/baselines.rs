//! Reference receivers: pilot-only linear MMSE, the genie-aided detector,
//! full-CSI maximum likelihood, and the analytic error floor.

use num_complex::Complex;

use crate::channel::{ChannelParams, FadingTrace, PilotPattern, Symbol};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::mixture_bp::Hypothesis;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MmseConfig {
    /// Pilots within `window` symbols of the target (either side) are used.
    pub window: usize,
}

impl MmseConfig {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("MMSE window must be at least 1".into()));
        }
        Ok(Self { window })
    }

    /// Default window of two pilot periods.
    pub fn for_pattern(pattern: &PilotPattern) -> Self {
        Self {
            window: 2 * pattern.period,
        }
    }
}

/// Wiener estimates of the desired channel and their per-antenna error variance.
#[derive(Clone, Debug, PartialEq)]
pub struct MmseEstimate<T> {
    pub h: Vec<CVec<T>>,
    pub err_var: Vec<T>,
}

/// Linear MMSE estimate of `h_i` from the pilot observations within the window.
///
/// Pilot observations are `y_j = h_j + h'_j x'_j + n_j`; the interferer term is
/// white with variance `sigma_hp2` because `x'` is i.i.d. and zero mean, so the
/// pilot covariance is `sigma_h2 alpha^|j-k| + (sigma_hp2 + sigma_n2) delta_jk`.
/// Antennas are processed independently with the same weights.
pub fn mmse_estimate_full<T: Real>(
    y: &[CVec<T>],
    pilots: &[bool],
    p: &ChannelParams<T>,
    cfg: &MmseConfig,
) -> Result<MmseEstimate<T>> {
    if y.len() != pilots.len() {
        return Err(Error::DimensionMismatch("observations and pilot mask".into()));
    }
    let pilot_idx: Vec<usize> = (0..pilots.len()).filter(|&i| pilots[i]).collect();
    let white = p.sigma_hp2 + p.sigma_n2;
    let lag = |a: usize, b: usize| p.alpha.powi((a as i32 - b as i32).abs());
    let mut h = Vec::with_capacity(y.len());
    let mut err_var = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let lo = i.saturating_sub(cfg.window);
        let hi = i + cfg.window;
        let used: Vec<usize> = pilot_idx.iter().copied().filter(|&j| j >= lo && j <= hi).collect();
        if used.is_empty() {
            return Err(Error::NoPilotsInWindow { index: i });
        }
        let k = used.len();
        let r = CMat::from_fn(k, k, |a, b| {
            let mut v = p.sigma_h2 * lag(used[a], used[b]);
            if a == b {
                v = v + white;
            }
            Complex::new(v, T::zero())
        });
        let c = CVec::from_fn(k, |a| Complex::new(p.sigma_h2 * lag(i, used[a]), T::zero()));
        let w = match r.cholesky() {
            Ok(chol) => chol.solve(&c),
            // noiseless with coincident information: fall back to the nearest pilot
            Err(_) => {
                let near = (0..k).min_by_key(|&a| (used[a] as i64 - i as i64).abs()).unwrap();
                let mut w = CVec::zeros(k);
                w[near] = Complex::new(lag(i, used[near]), T::zero());
                w
            }
        };
        let est = CVec::from_fn(p.n_rx, |ant| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..k {
                acc = acc + y[used[a]][ant] * w[a].conj();
            }
            acc
        });
        let explained = c.dot(&w).re;
        h.push(est);
        err_var.push((p.sigma_h2 - explained).max(T::zero()));
    }
    Ok(MmseEstimate { h, err_var })
}

/// Channel estimates only; see [`mmse_estimate_full`].
pub fn mmse_estimate<T: Real>(
    y: &[CVec<T>],
    pilots: &[bool],
    p: &ChannelParams<T>,
    cfg: &MmseConfig,
) -> Result<Vec<CVec<T>>> {
    Ok(mmse_estimate_full(y, pilots, p, cfg)?.h)
}

/// Maximal-ratio combining with the estimate: `sign(Re(h^H y))`, ties to `+1`.
pub fn mmse_detect<T: Real>(h_hat: &[CVec<T>], y: &[CVec<T>]) -> Result<Vec<Symbol>> {
    if h_hat.len() != y.len() {
        return Err(Error::DimensionMismatch("estimates and observations".into()));
    }
    Ok(h_hat
        .iter()
        .zip(y)
        .map(|(h, y)| if h.dot(y).re >= T::zero() { 1 } else { -1 })
        .collect())
}

/// Soft output of the MMSE receiver for decoding: the interferer, the noise
/// and the estimation error are treated as one white Gaussian term, giving
/// `4 Re(h^H y) / (sigma_hp2 + sigma_n2 + err_var)`.
pub fn mmse_llr<T: Real>(est: &MmseEstimate<T>, y: &[CVec<T>], p: &ChannelParams<T>) -> Vec<T> {
    est.h
        .iter()
        .zip(&est.err_var)
        .zip(y)
        .map(|((h, v), y)| {
            let n0 = (p.sigma_hp2 + p.sigma_n2 + *v).max(T::lit(1e-12));
            T::lit(4.0) * h.dot(y).re / n0
        })
        .collect()
}

/// Genie's view of one symbol: conditional means of both channels given their
/// neighbours, and the conditional variance factor `v` such that the residual
/// of a channel with variance `s` has variance `v s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenieEstimate<T> {
    pub h: CVec<T>,
    pub hp: CVec<T>,
    pub var_factor: T,
}

/// Conditional law of `(h_i, h'_i)` given the neighbouring coefficients.
/// Interior symbols use both neighbours; the ends use the one that exists.
pub fn genie_estimate<T: Real>(trace: &FadingTrace<T>, i: usize, alpha: T) -> GenieEstimate<T> {
    let l = trace.len();
    let a2 = alpha * alpha;
    let has_prev = i > 0;
    let has_next = i + 1 < l;
    let combine = |seq: &[CVec<T>]| match (has_prev, has_next) {
        (true, true) => (&seq[i - 1] + &seq[i + 1]).scale(alpha / (T::one() + a2)),
        (true, false) => seq[i - 1].scale(alpha),
        (false, true) => seq[i + 1].scale(alpha),
        (false, false) => CVec::zeros(seq[i].len()),
    };
    let var_factor = match (has_prev, has_next) {
        (true, true) => (T::one() - a2) / (T::one() + a2),
        (false, false) => T::one(),
        _ => T::one() - a2,
    };
    GenieEstimate {
        h: combine(&trace.h),
        hp: combine(&trace.hp),
        var_factor,
    }
}

/// Joint decisions of the genie-aided receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenieDecisions {
    pub x: Vec<Symbol>,
    pub xp: Vec<Symbol>,
}

/// Joint ML detection of `(x_i, x'_i)` given the genie's channel estimates.
/// The residual noise covariance does not depend on the hypothesis, so ML is
/// minimum distance; ties go to the first hypothesis in `Hypothesis::ALL`.
pub fn genie_detect<T: Real>(trace: &FadingTrace<T>, y: &[CVec<T>], p: &ChannelParams<T>) -> Result<GenieDecisions> {
    if trace.len() != y.len() {
        return Err(Error::DimensionMismatch("trace and observations".into()));
    }
    let mut out = GenieDecisions {
        x: Vec::with_capacity(y.len()),
        xp: Vec::with_capacity(y.len()),
    };
    for i in 0..y.len() {
        let g = genie_estimate(trace, i, p.alpha);
        let hyp = min_distance(&y[i], &g.h, &g.hp);
        out.x.push(hyp.x);
        out.xp.push(hyp.xp);
    }
    Ok(out)
}

fn sq_dist<T: Real>(y: &CVec<T>, h: &CVec<T>, hp: &CVec<T>, hyp: Hypothesis) -> T {
    let (x, xp) = (T::from_i8(hyp.x).unwrap(), T::from_i8(hyp.xp).unwrap());
    (0..y.len())
        .map(|a| (y[a] - h[a].scale(x) - hp[a].scale(xp)).norm_sqr())
        .fold(T::zero(), |s, v| s + v)
}

fn min_distance<T: Real>(y: &CVec<T>, h: &CVec<T>, hp: &CVec<T>) -> Hypothesis {
    let mut best = Hypothesis::ALL[0];
    let mut best_d = T::infinity();
    for hyp in Hypothesis::ALL {
        let d = sq_dist(y, h, hp, hyp);
        if d < best_d {
            best_d = d;
            best = hyp;
        }
    }
    best
}

/// Symbol-by-symbol ML with the true channels known, `x'` marginalized.
/// With zero noise this is minimum distance over the four points.
pub fn full_csi_ml_detect<T: Real>(trace: &FadingTrace<T>, y: &[CVec<T>], p: &ChannelParams<T>) -> Result<Vec<Symbol>> {
    if trace.len() != y.len() {
        return Err(Error::DimensionMismatch("trace and observations".into()));
    }
    let out = (0..y.len())
        .map(|i| {
            let (h, hp) = (&trace.h[i], &trace.hp[i]);
            if p.sigma_n2 <= T::zero() {
                return min_distance(&y[i], h, hp).x;
            }
            let score = |x: Symbol| {
                let a = -sq_dist(&y[i], h, hp, Hypothesis { x, xp: 1 }) / p.sigma_n2;
                let b = -sq_dist(&y[i], h, hp, Hypothesis { x, xp: -1 }) / p.sigma_n2;
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            };
            if score(1) >= score(-1) {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(out)
}

/// Parameters of the analytic floor (dual receive antennas).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorParams<T> {
    pub alpha: T,
    pub sigma_h2: T,
    pub sigma_hp2: T,
    pub sigma_n2: T,
}

impl<T: Real> FloorParams<T> {
    /// Residual noise variance `(1-a^2)/(1+a^2) (sigma_h2 + sigma_hp2) + sigma_n2`.
    pub fn residual_variance(&self) -> T {
        let a2 = self.alpha * self.alpha;
        (T::one() - a2) / (T::one() + a2) * (self.sigma_h2 + self.sigma_hp2) + self.sigma_n2
    }

    /// `(mu_1, mu_2)`.
    pub fn mus(&self) -> (T, T) {
        let a2 = self.alpha * self.alpha;
        let st = self.residual_variance();
        let mu = |s: T| {
            let num = a2 * s;
            let den = num + (T::one() + a2) * st;
            if den <= T::zero() {
                T::one()
            } else {
                (num / den).sqrt()
            }
        };
        (mu(self.sigma_h2), mu(self.sigma_h2 + self.sigma_hp2))
    }
}

impl<T: Real> TryFrom<&ChannelParams<T>> for FloorParams<T> {
    type Error = Error;

    fn try_from(p: &ChannelParams<T>) -> Result<Self> {
        if p.n_rx != 2 {
            return Err(Error::InvalidConfig(format!(
                "the analytic floor is defined for 2 receive antennas, got {}",
                p.n_rx
            )));
        }
        Ok(Self {
            alpha: p.alpha,
            sigma_h2: p.sigma_h2,
            sigma_hp2: p.sigma_hp2,
            sigma_n2: p.sigma_n2,
        })
    }
}

/// Approximate genie-aided error probability with two receive antennas:
/// `((1-mu_1)/2)^2 (2+mu_1) + ((1-mu_2)/2)^2 (2+mu_2)`.
pub fn analytic_error_floor<T: Real>(fp: &FloorParams<T>) -> T {
    let (m1, m2) = fp.mus();
    let two = T::lit(2.0);
    let term = |m: T| ((T::one() - m) / two).powi(2) * (two + m);
    term(m1) + term(m2)
}
