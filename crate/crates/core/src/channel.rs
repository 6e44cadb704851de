//! Fading-channel and frame generation.
//!
//! Received vector at symbol `i`:
//!
//! ```text
//! y_i = h_i x_i + h'_i x'_i + n_i
//! ```
//!
//! with `h` (desired user) and `h'` (interferer) independent stationary
//! complex Gaussian processes, BPSK symbols and white CSCG noise.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::gaussian::sample_white;
use crate::linalg::CVec;
use crate::scalar::Real;

/// BPSK symbol, `+1` or `-1`.
pub type Symbol = i8;

/// Statistical model of the link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams<T> {
    /// One-step correlation of the Gauss-Markov fading.
    pub alpha: T,
    /// Desired-channel variance per antenna.
    pub sigma_h2: T,
    /// Interferer-channel variance per antenna.
    pub sigma_hp2: T,
    /// Noise variance per antenna.
    pub sigma_n2: T,
    pub n_rx: usize,
}

impl<T: Real> ChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.sigma_h2 > T::zero()) {
            return Err(Error::InvalidConfig("sigma_h2 must be positive".into()));
        }
        if !(self.sigma_hp2 >= T::zero()) || !(self.sigma_n2 >= T::zero()) {
            return Err(Error::InvalidConfig("variances must be non-negative".into()));
        }
        if self.n_rx == 0 {
            return Err(Error::InvalidConfig("n_rx must be at least 1".into()));
        }
        Ok(())
    }

    /// Parameters from SNR = sigma_h2/sigma_n2 and SIR = sigma_h2/sigma_hp2
    /// (both in dB) with `sigma_h2 = 1`. An infinite dB value means a zero
    /// variance.
    pub fn from_db(alpha: T, snr_db: T, sir_db: T, n_rx: usize) -> Self {
        let from_db = |db: T| {
            if db == T::infinity() {
                T::zero()
            } else {
                T::lit(10.0).powf(-db / T::lit(10.0))
            }
        };
        Self {
            alpha,
            sigma_h2: T::one(),
            sigma_hp2: from_db(sir_db),
            sigma_n2: from_db(snr_db),
            n_rx,
        }
    }

    /// Stacked state dimension `2 n_rx`.
    pub fn state_dim(&self) -> usize {
        2 * self.n_rx
    }
}

/// Periodic pilot placement: a pilot at every index `i` with
/// `i % period == offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PilotPattern {
    pub period: usize,
    pub offset: usize,
}

impl PilotPattern {
    pub fn new(period: usize, offset: usize) -> Result<Self> {
        if period == 0 || offset >= period {
            return Err(Error::InvalidConfig(format!(
                "pilot pattern needs period >= 1 and offset < period (got {period}, {offset})"
            )));
        }
        Ok(Self { period, offset })
    }

    pub fn is_pilot(&self, i: usize) -> bool {
        i % self.period == self.offset
    }

    pub fn mask(&self, l: usize) -> Vec<bool> {
        (0..l).map(|i| self.is_pilot(i)).collect()
    }

    /// Frame length needed to carry `n_data` data symbols.
    pub fn frame_len_for(&self, n_data: usize) -> usize {
        let mut l = 0;
        let mut placed = 0;
        while placed < n_data {
            if !self.is_pilot(l) {
                placed += 1;
            }
            l += 1;
        }
        l
    }
}

/// Desired and interferer channel vectors over one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingTrace<T> {
    pub h: Vec<CVec<T>>,
    pub hp: Vec<CVec<T>>,
}

impl<T: Real> FadingTrace<T> {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Stacked `g_i = [h_i; h'_i]`.
    pub fn stacked(&self, i: usize) -> CVec<T> {
        self.h[i].stack(&self.hp[i])
    }
}

/// Everything about one transmitted frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRealization<T> {
    pub x: Vec<Symbol>,
    pub xp: Vec<Symbol>,
    pub pilots: Vec<bool>,
    pub trace: FadingTrace<T>,
    pub y: Vec<CVec<T>>,
}

impl<T> FrameRealization<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Stationary AR(1) sequence of `n`-vectors with per-entry variance `var`.
pub fn gen_ar1<T: Real, R: Rng + ?Sized>(rng: &mut R, alpha: T, var: T, n: usize, l: usize) -> Vec<CVec<T>> {
    let innov = (T::one() - alpha * alpha).max(T::zero()).sqrt();
    let mut out = Vec::with_capacity(l);
    let mut cur = sample_white(rng, var, n);
    out.push(cur.clone());
    for _ in 1..l {
        let w = sample_white(rng, var, n);
        let mut next = cur.scale(alpha);
        next.axpy(innov, &w);
        out.push(next.clone());
        cur = next;
    }
    out
}

/// First-order Gauss-Markov fading for both users, stationary from the first
/// sample: `h_i = alpha h_{i-1} + sqrt(1 - alpha^2) w_i`.
pub fn gen_gauss_markov<T: Real, R: Rng + ?Sized>(rng: &mut R, p: &ChannelParams<T>, l: usize) -> FadingTrace<T> {
    assert!(l >= 1, "frame length must be positive");
    let h = gen_ar1(rng, p.alpha, p.sigma_h2, p.n_rx, l);
    let hp = gen_ar1(rng, p.alpha, p.sigma_hp2, p.n_rx, l);
    FadingTrace { h, hp }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0<T: Real>(x: T) -> T {
    T::lit(libm::j0(x.to_f64().unwrap()))
}

/// Clarke (Jakes) fading by frequency-domain synthesis: white Gaussian DFT
/// bins shaped by the Jakes Doppler spectrum, then an inverse transform.
///
/// Each bin carries the exact power of the U-shaped spectrum
/// `1 / (pi fd sqrt(1 - (f/fd)^2))` over its width (closed form through the
/// arcsine CDF), so the integrable band-edge singularities need no special
/// handling. The grid is padded to at least four times the trace length and is
/// fine enough to resolve the Doppler band.
pub struct ClarkeGenerator<T: Real> {
    len: usize,
    amplitude: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> ClarkeGenerator<T> {
    pub fn new(fd_norm: T, sigma2: T, l: usize) -> Result<Self> {
        if !(fd_norm > T::zero() && fd_norm < T::lit(0.5)) {
            return Err(Error::InvalidConfig(format!(
                "normalized Doppler {fd_norm} outside (0, 0.5)"
            )));
        }
        assert!(l >= 1, "frame length must be positive");
        let fd = fd_norm.to_f64().unwrap();
        let mut n = (4 * l).max(64);
        if fd >= 1e-3 {
            n = n.max((32.0 / fd).ceil() as usize);
        }
        let n = n.next_power_of_two();
        let cdf = |f: f64| 0.5 + (f / fd).clamp(-1.0, 1.0).asin() / std::f64::consts::PI;
        let half_bin = 0.5 / n as f64;
        let amplitude = (0..n)
            .map(|k| {
                let f = if k < n / 2 {
                    k as f64 / n as f64
                } else {
                    k as f64 / n as f64 - 1.0
                };
                let power = (cdf(f + half_bin) - cdf(f - half_bin)).max(0.0);
                (T::lit(power * n as f64) * sigma2).sqrt()
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            len: l,
            amplitude,
            fft: planner.plan_fft_inverse(n),
        })
    }

    /// One antenna's trace.
    pub fn sample_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex<T>> {
        let n = self.amplitude.len();
        let half = T::lit(0.5).sqrt();
        let mut buf: Vec<Complex<T>> = self
            .amplitude
            .iter()
            .map(|&a| Complex::new(T::standard_normal(rng), T::standard_normal(rng)).scale(a * half))
            .collect();
        self.fft.process(&mut buf);
        let norm = T::from_usize(n).unwrap().sqrt().recip();
        buf.truncate(self.len);
        buf.into_iter().map(|z| z.scale(norm)).collect()
    }

    /// `n_rx` independent antennas.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n_rx: usize) -> Vec<CVec<T>> {
        let per_antenna: Vec<Vec<Complex<T>>> = (0..n_rx).map(|_| self.sample_scalar(rng)).collect();
        (0..self.len)
            .map(|i| CVec::from_fn(n_rx, |a| per_antenna[a][i]))
            .collect()
    }
}

/// Clarke-model trace with autocorrelation `sigma2 J0(2 pi fd_norm k)` per antenna.
pub fn gen_clarke<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    fd_norm: T,
    sigma2: T,
    n_rx: usize,
    l: usize,
) -> Result<Vec<CVec<T>>> {
    Ok(ClarkeGenerator::new(fd_norm, sigma2, l)?.sample(rng, n_rx))
}

/// Uniform `+1` / `-1`.
pub fn random_symbol<R: Rng + ?Sized>(rng: &mut R) -> Symbol {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Desired-user symbols: `+1` at pilots, i.i.d. uniform elsewhere.
pub fn gen_symbols<R: Rng + ?Sized>(rng: &mut R, pattern: &PilotPattern, l: usize) -> (Vec<Symbol>, Vec<bool>) {
    assert!(l >= 1, "frame length must be positive");
    let pilots = pattern.mask(l);
    let x = pilots.iter().map(|&p| if p { 1 } else { random_symbol(rng) }).collect();
    (x, pilots)
}

/// Interferer symbols: i.i.d. uniform with no pilot structure.
pub fn gen_interferer_symbols<R: Rng + ?Sized>(rng: &mut R, l: usize) -> Vec<Symbol> {
    (0..l).map(|_| random_symbol(rng)).collect()
}

/// Noisy observations `y_i = h_i x_i + h'_i x'_i + n_i`.
pub fn simulate_frame<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    p: &ChannelParams<T>,
    trace: FadingTrace<T>,
    x: Vec<Symbol>,
    xp: Vec<Symbol>,
    pilots: Vec<bool>,
) -> Result<FrameRealization<T>> {
    let l = x.len();
    if xp.len() != l || pilots.len() != l || trace.h.len() != l || trace.hp.len() != l {
        return Err(Error::DimensionMismatch(
            "frame components have different lengths".into(),
        ));
    }
    let y = (0..l)
        .map(|i| {
            let mut yi = sample_white(rng, p.sigma_n2, p.n_rx);
            yi.axpy(T::from_i8(x[i]).unwrap(), &trace.h[i]);
            yi.axpy(T::from_i8(xp[i]).unwrap(), &trace.hp[i]);
            yi
        })
        .collect();
    Ok(FrameRealization {
        x,
        xp,
        pilots,
        trace,
        y,
    })
}
