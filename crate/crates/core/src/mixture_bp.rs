//! Forward/backward Gaussian-mixture message passing over the channel chain.
//!
//! The hidden state at symbol `i` is the stacked channel `g_i = [h_i; h'_i]`
//! (dimension `2 n_rx`). Given a hypothesis `(x, x')` the observation is linear
//! in the state, `y_i = Z g_i + n_i` with `Z = [x I, x' I]`, so each mixture
//! component runs one Kalman step per hypothesis. The forward message at `i` is
//! `p(g_i | y_0..y_{i-1})`, the backward message `p(g_i | y_{i+1}..y_{l-1})`;
//! both start from the stationary prior `CN(0, Q)`.
//!
//! Symbol posteriors combine the two messages with the local observation:
//!
//! ```text
//! P(x_i | y) ∝ p(x_i) sum_{x'} p(x') ∫ p(y_i | g, x_i, x') fwd(g) bwd(g) / prior(g) dg
//! ```

use num_complex::Complex;

use crate::channel::{ChannelParams, Symbol};
use crate::error::{Error, Result};
use crate::gaussian::{
    cn_logpdf_factored, fuse_information, GaussianDensity, GaussianMixture, InformationForm, MixtureComponent,
    REPAIR_FLOOR,
};
use crate::linalg::{CMat, CVec, Cholesky};
use crate::scalar::{LogAccumulator, Real};

/// Joint symbol hypothesis `(x_i, x'_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub x: Symbol,
    pub xp: Symbol,
}

impl Hypothesis {
    /// Enumeration order used everywhere: `(+,+), (+,-), (-,+), (-,-)`.
    pub const ALL: [Hypothesis; 4] = [
        Hypothesis { x: 1, xp: 1 },
        Hypothesis { x: 1, xp: -1 },
        Hypothesis { x: -1, xp: 1 },
        Hypothesis { x: -1, xp: -1 },
    ];

    /// `Z = [x, x'] ⊗ I_{n_rx}`.
    pub fn observation_matrix<T: Real>(&self, n_rx: usize) -> CMat<T> {
        let (x, xp) = (T::from_i8(self.x).unwrap(), T::from_i8(self.xp).unwrap());
        CMat::from_fn(n_rx, 2 * n_rx, |a, b| {
            let v = if b == a {
                x
            } else if b == a + n_rx {
                xp
            } else {
                T::zero()
            };
            Complex::new(v, T::zero())
        })
    }
}

/// Prior (or posterior) probability that a BPSK symbol is `+1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolPrior<T> {
    pub p_plus: T,
}

impl<T: Real> SymbolPrior<T> {
    pub fn uniform() -> Self {
        Self { p_plus: T::lit(0.5) }
    }

    pub fn pilot() -> Self {
        Self { p_plus: T::one() }
    }

    /// From `log P(+1) / P(-1)`.
    pub fn from_llr(llr: T) -> Self {
        Self {
            p_plus: T::one() / (T::one() + (-llr).exp()),
        }
    }

    /// `log P(x = s)`, `-inf` for an impossible symbol.
    pub fn log_prob(&self, s: Symbol) -> T {
        let p = if s > 0 { self.p_plus } else { T::one() - self.p_plus };
        p.ln()
    }

    /// `log P(+1) / P(-1)` with the probability clamped to `[1e-12, 1 - 1e-12]`.
    pub fn llr(&self) -> T {
        let eps = T::lit(POSTERIOR_FLOOR);
        let p = self.p_plus.max(eps).min(T::one() - eps);
        (p / (T::one() - p)).ln()
    }

    /// Hard decision, ties to `+1`.
    pub fn decision(&self) -> Symbol {
        if self.p_plus >= T::lit(0.5) {
            1
        } else {
            -1
        }
    }
}

/// Posterior probabilities are kept inside `[POSTERIOR_FLOOR, 1 - POSTERIOR_FLOOR]`
/// when turned into log-likelihood ratios.
pub const POSTERIOR_FLOOR: f64 = 1e-12;

/// How a message is brought back to a bounded number of components after
/// each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// Keep the `cap` heaviest components.
    Prune,
    /// Moment-match everything into one Gaussian.
    Collapse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig<T> {
    /// Receiver's model of the link (its `alpha` is the assumed correlation).
    pub params: ChannelParams<T>,
    /// Maximum number of mixture components per message.
    pub cap: usize,
    pub reduction: Reduction,
    /// Keep the per-symbol channel posterior mixtures (pruned to `cap`).
    pub channel_posteriors: bool,
}

/// Smallest interferer variance the receiver assumes, relative to `sigma_h2`.
pub const INTERFERER_VARIANCE_FLOOR: f64 = 1e-8;
/// Smallest noise variance the receiver assumes, relative to `sigma_h2`.
pub const NOISE_VARIANCE_FLOOR: f64 = 1e-10;

impl<T: Real> DetectorConfig<T> {
    /// Receiver configuration with the default cap of 8 components.
    ///
    /// Zero interferer or noise variances are lifted to small floors so the
    /// stationary prior and the innovation covariance stay invertible.
    pub fn new(params: ChannelParams<T>) -> Self {
        let mut params = params;
        params.sigma_hp2 = params
            .sigma_hp2
            .max(T::lit(INTERFERER_VARIANCE_FLOOR) * params.sigma_h2);
        params.sigma_n2 = params.sigma_n2.max(T::lit(NOISE_VARIANCE_FLOOR) * params.sigma_h2);
        Self {
            params,
            cap: 8,
            reduction: Reduction::Prune,
            channel_posteriors: true,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        assert!(cap >= 1, "component cap must be at least 1");
        self.cap = cap;
        self
    }

    /// No limit on the number of components (exact inference; exponential cost).
    pub fn unbounded(self) -> Self {
        self.with_cap(usize::MAX)
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn with_channel_posteriors(mut self, keep: bool) -> Self {
        self.channel_posteriors = keep;
        self
    }

    /// `Q = diag(sigma_h2 I, sigma_hp2 I)`.
    pub fn state_covariance(&self) -> CMat<T> {
        let n = self.params.n_rx;
        let d: Vec<T> = (0..2 * n)
            .map(|i| {
                if i < n {
                    self.params.sigma_h2
                } else {
                    self.params.sigma_hp2
                }
            })
            .collect();
        CMat::from_real_diag(&d)
    }

    /// Stationary prior `CN(0, Q)`.
    pub fn stationary_prior(&self) -> GaussianDensity<T> {
        GaussianDensity::zero_mean(self.state_covariance())
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.cap == 0 {
            return Err(Error::InvalidConfig("component cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-frame detector result.
#[derive(Clone, Debug)]
pub struct DetectorOutput<T> {
    /// `P(x_i = +1 | y)`.
    pub post_x: Vec<SymbolPrior<T>>,
    /// `log p(y | x_i=+1) / p(y | x_i=-1)` with the symbol's own prior removed.
    pub extrinsic_llr: Vec<T>,
    /// Channel posteriors `p(g_i | y)`; empty unless requested.
    pub g_post: Vec<GaussianMixture<T>>,
    /// Posterior means of `g_i`.
    pub g_mmse: Vec<CVec<T>>,
    /// Number of pair fusions that fell back to the product form.
    pub fallback_fusions: usize,
}

impl<T: Real> DetectorOutput<T> {
    /// Hard decisions, ties to `+1`.
    pub fn decisions(&self) -> Vec<Symbol> {
        self.post_x.iter().map(|p| p.decision()).collect()
    }
}

fn sign<T: Real>(s: Symbol) -> T {
    if s > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `Z v` for a stacked `v = [a; b]`: `x a + x' b`.
fn z_times<T: Real>(hyp: Hypothesis, v: &CVec<T>, n: usize) -> CVec<T> {
    let (x, xp) = (sign::<T>(hyp.x), sign::<T>(hyp.xp));
    CVec::from_fn(n, |a| v[a].scale(x) + v[n + a].scale(xp))
}

/// Innovation statistics of one component under one hypothesis.
struct Innovation<T: Real> {
    log_like: T,
    /// `K Z^H`.
    kzh: CMat<T>,
    chol: Cholesky<T>,
    residual: CVec<T>,
}

fn innovation<T: Real>(
    density: &GaussianDensity<T>,
    hyp: Hypothesis,
    y: &CVec<T>,
    sigma_n2: T,
    n: usize,
) -> Result<Innovation<T>> {
    let k = &density.cov;
    let (x, xp) = (sign::<T>(hyp.x), sign::<T>(hyp.xp));
    let m = 2 * n;
    let kzh = CMat::from_fn(m, n, |r, a| k[(r, a)].scale(x) + k[(r, n + a)].scale(xp));
    let mut s = CMat::from_fn(n, n, |a, b| kzh[(a, b)].scale(x) + kzh[(n + a, b)].scale(xp));
    s.add_diag(sigma_n2);
    let chol = s.hermitian_part().cholesky().map_err(|_| Error::SingularInnovation)?;
    let residual = y - &z_times(hyp, &density.mean, n);
    let log_like = cn_logpdf_factored(&residual, &chol);
    Ok(Innovation {
        log_like,
        kzh,
        chol,
        residual,
    })
}

/// Innovations for every hypothesis in [`Hypothesis::ALL`] order. `Z` and `-Z`
/// share the innovation covariance, so each factorization serves two
/// hypotheses.
fn innovations<T: Real>(
    density: &GaussianDensity<T>,
    y: &CVec<T>,
    sigma_n2: T,
    n: usize,
) -> Result<[Innovation<T>; 4]> {
    let k = &density.cov;
    let log_pi_n = T::from_usize(n).unwrap() * T::PI().ln();
    let half = |hyp: Hypothesis| -> Result<(Innovation<T>, Innovation<T>)> {
        let (x, xp) = (sign::<T>(hyp.x), sign::<T>(hyp.xp));
        let kzh = CMat::from_fn(2 * n, n, |r, a| k[(r, a)].scale(x) + k[(r, n + a)].scale(xp));
        let mut s = CMat::from_fn(n, n, |a, b| kzh[(a, b)].scale(x) + kzh[(n + a, b)].scale(xp));
        s.add_diag(sigma_n2);
        let chol = s.hermitian_part().cholesky().map_err(|_| Error::SingularInnovation)?;
        let norm = -log_pi_n - chol.log_det();
        let zm = z_times(hyp, &density.mean, n);
        let r_pos = y - &zm;
        let r_neg = y + &zm;
        let neg = Innovation {
            log_like: norm - chol.quad_form(&r_neg),
            kzh: kzh.scale(-T::one()),
            chol: chol.clone(),
            residual: r_neg,
        };
        let pos = Innovation {
            log_like: norm - chol.quad_form(&r_pos),
            kzh,
            chol,
            residual: r_pos,
        };
        Ok((pos, neg))
    };
    let (plus, plus_neg) = half(Hypothesis::ALL[0])?;
    let (mixed, mixed_neg) = half(Hypothesis::ALL[1])?;
    Ok([plus, mixed, mixed_neg, plus_neg])
}

/// Measurement update: `(m + G e, K - G Z K)` with `G = K Z^H S^{-1}`.
fn condition<T: Real>(density: &GaussianDensity<T>, inn: &Innovation<T>, with_cov: bool) -> (CVec<T>, Option<CMat<T>>) {
    let m = density.mean.len();
    let n = inn.residual.len();
    let w = inn.chol.solve(&inn.residual);
    let mut mean = density.mean.clone();
    for r in 0..m {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..n {
            acc = acc + inn.kzh[(r, a)] * w[a];
        }
        mean[r] = mean[r] + acc;
    }
    if !with_cov {
        return (mean, None);
    }
    // K - (K Z^H) S^{-1} (K Z^H)^H, via the whitened factor L^{-1} (K Z^H)^H
    let mut white = CMat::zeros(n, m);
    for r in 0..m {
        let col = CVec::from_fn(n, |a| inn.kzh[(r, a)].conj());
        let z = inn.chol.forward(&col);
        for a in 0..n {
            white[(a, r)] = z[a];
        }
    }
    let mut cov = density.cov.clone();
    for r in 0..m {
        for c in 0..m {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..n {
                acc = acc + white[(a, r)].conj() * white[(a, c)];
            }
            cov[(r, c)] = cov[(r, c)] - acc;
        }
    }
    (mean, Some(cov))
}

/// Prediction `g' = alpha g + sqrt(1 - alpha^2) u`: mean `alpha m`, covariance
/// `alpha^2 K + (1 - alpha^2) Q`, followed by covariance repair.
fn predict<T: Real>(mean: CVec<T>, cov: CMat<T>, alpha: T, q: &CMat<T>) -> GaussianDensity<T> {
    let a2 = alpha * alpha;
    let mut next = cov.scale(a2);
    next.axpy(T::one() - a2, q);
    GaussianDensity {
        mean: mean.scale(alpha),
        cov: next.repair_psd(T::lit(REPAIR_FLOOR)),
    }
}

/// One forward step of a single component under one hypothesis: the
/// likelihood of `y_prev` and the predicted component for the next symbol.
///
/// The returned log weight is `msg.log_weight + log_like`; symbol priors are
/// applied by the caller.
pub fn predict_update<T: Real>(
    msg: &MixtureComponent<T>,
    hyp: Hypothesis,
    y_prev: &CVec<T>,
    cfg: &DetectorConfig<T>,
) -> Result<(T, MixtureComponent<T>)> {
    let n = cfg.params.n_rx;
    if msg.density.dim() != 2 * n || y_prev.len() != n {
        return Err(Error::DimensionMismatch("predict_update operands".into()));
    }
    let inn = innovation(&msg.density, hyp, y_prev, cfg.params.sigma_n2, n)?;
    let (mean, cov) = condition(&msg.density, &inn, true);
    let density = predict(mean, cov.unwrap(), cfg.params.alpha, &cfg.state_covariance());
    Ok((
        inn.log_like,
        MixtureComponent {
            log_weight: msg.log_weight + inn.log_like,
            density,
        },
    ))
}

struct Candidate<T: Real> {
    parent: usize,
    log_weight: T,
    inn: Innovation<T>,
}

/// One step of the recursion: expands `msg` over the hypotheses for the
/// symbol at `y`, then reduces.
fn step<T: Real>(
    msg: &GaussianMixture<T>,
    y: &CVec<T>,
    desired: SymbolPrior<T>,
    interferer: SymbolPrior<T>,
    cfg: &DetectorConfig<T>,
    q: &CMat<T>,
) -> Result<GaussianMixture<T>> {
    let n = cfg.params.n_rx;
    let mut cands = Vec::with_capacity(msg.len() * 4);
    for (j, comp) in msg.components().iter().enumerate() {
        let inns = innovations(&comp.density, y, cfg.params.sigma_n2, n)?;
        for (hyp, inn) in Hypothesis::ALL.into_iter().zip(inns) {
            let lp = desired.log_prob(hyp.x) + interferer.log_prob(hyp.xp);
            if lp == T::neg_infinity() {
                continue;
            }
            cands.push(Candidate {
                parent: j,
                log_weight: comp.log_weight + lp + inn.log_like,
                inn,
            });
        }
    }
    let complete = |c: &Candidate<T>| {
        let parent = &msg.components()[c.parent].density;
        let (mean, cov) = condition(parent, &c.inn, true);
        MixtureComponent {
            log_weight: c.log_weight,
            density: predict(mean, cov.unwrap(), cfg.params.alpha, q),
        }
    };
    match cfg.reduction {
        Reduction::Prune => {
            if cands.len() > cfg.cap {
                // same selection rule as GaussianMixture::prune, applied before
                // the (weight-independent) Kalman completion
                let mut order: Vec<usize> = (0..cands.len()).collect();
                order.sort_by(|&a, &b| {
                    cands[b]
                        .log_weight
                        .partial_cmp(&cands[a].log_weight)
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut keep = vec![false; cands.len()];
                for &i in &order[..cfg.cap] {
                    keep[i] = true;
                }
                let comps = cands
                    .iter()
                    .zip(keep)
                    .filter_map(|(c, k)| k.then(|| complete(c)))
                    .collect();
                GaussianMixture::new(comps).normalize()
            } else {
                GaussianMixture::new(cands.iter().map(complete).collect()).normalize()
            }
        }
        Reduction::Collapse => {
            let full = GaussianMixture::new(cands.iter().map(complete).collect()).normalize()?;
            let mut d = full.collapse();
            d.cov = d.cov.repair_psd(T::lit(REPAIR_FLOOR));
            Ok(GaussianMixture::single(d))
        }
    }
}

fn check_inputs<T: Real>(obs: &[CVec<T>], priors: &[SymbolPrior<T>], cfg: &DetectorConfig<T>) -> Result<()> {
    cfg.validate()?;
    if obs.len() != priors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations but {} priors",
            obs.len(),
            priors.len()
        )));
    }
    if obs.iter().any(|y| y.len() != cfg.params.n_rx) {
        return Err(Error::DimensionMismatch(
            "observation dimension differs from n_rx".into(),
        ));
    }
    Ok(())
}

/// Forward messages with explicit priors for both users.
pub fn forward_pass_with_priors<T: Real>(
    obs: &[CVec<T>],
    desired: &[SymbolPrior<T>],
    interferer: &[SymbolPrior<T>],
    cfg: &DetectorConfig<T>,
) -> Result<Vec<GaussianMixture<T>>> {
    check_inputs(obs, desired, cfg)?;
    if interferer.len() != obs.len() {
        return Err(Error::DimensionMismatch("interferer priors".into()));
    }
    let q = cfg.state_covariance();
    let mut out = Vec::with_capacity(obs.len());
    if obs.is_empty() {
        return Ok(out);
    }
    out.push(GaussianMixture::single(cfg.stationary_prior()));
    for i in 1..obs.len() {
        let next = step(&out[i - 1], &obs[i - 1], desired[i - 1], interferer[i - 1], cfg, &q)?;
        out.push(next);
    }
    Ok(out)
}

/// `p(g_i | y_0..y_{i-1})` for every `i`; the interferer prior is uniform.
pub fn forward_pass<T: Real>(
    obs: &[CVec<T>],
    priors: &[SymbolPrior<T>],
    cfg: &DetectorConfig<T>,
) -> Result<Vec<GaussianMixture<T>>> {
    let uniform = vec![SymbolPrior::uniform(); obs.len()];
    forward_pass_with_priors(obs, priors, &uniform, cfg)
}

/// `p(g_i | y_{i+1}..y_{l-1})` for every `i`: the forward recursion on the
/// time-reversed frame (the stationary AR(1) law is reversible).
pub fn backward_pass<T: Real>(
    obs: &[CVec<T>],
    priors: &[SymbolPrior<T>],
    cfg: &DetectorConfig<T>,
) -> Result<Vec<GaussianMixture<T>>> {
    let uniform = vec![SymbolPrior::uniform(); obs.len()];
    backward_pass_with_priors(obs, priors, &uniform, cfg)
}

pub fn backward_pass_with_priors<T: Real>(
    obs: &[CVec<T>],
    desired: &[SymbolPrior<T>],
    interferer: &[SymbolPrior<T>],
    cfg: &DetectorConfig<T>,
) -> Result<Vec<GaussianMixture<T>>> {
    let rev_obs: Vec<CVec<T>> = obs.iter().rev().cloned().collect();
    let rev_des: Vec<SymbolPrior<T>> = desired.iter().rev().copied().collect();
    let rev_int: Vec<SymbolPrior<T>> = interferer.iter().rev().copied().collect();
    let mut msgs = forward_pass_with_priors(&rev_obs, &rev_des, &rev_int, cfg)?;
    msgs.reverse();
    Ok(msgs)
}

/// Combines forward and backward messages with each observation into symbol
/// and channel posteriors.
pub fn symbol_posteriors<T: Real>(
    obs: &[CVec<T>],
    priors: &[SymbolPrior<T>],
    fwd: &[GaussianMixture<T>],
    bwd: &[GaussianMixture<T>],
    cfg: &DetectorConfig<T>,
) -> Result<DetectorOutput<T>> {
    check_inputs(obs, priors, cfg)?;
    if fwd.len() != obs.len() || bwd.len() != obs.len() {
        return Err(Error::DimensionMismatch("message sequences".into()));
    }
    let n = cfg.params.n_rx;
    let sigma_n2 = cfg.params.sigma_n2;
    let prior_info = InformationForm::from_density(&cfg.stationary_prior())?;
    let log_half = T::lit(0.5).ln();
    let llr_cap = {
        let eps = T::lit(POSTERIOR_FLOOR);
        ((T::one() - eps) / eps).ln()
    };

    let mut out = DetectorOutput {
        post_x: Vec::with_capacity(obs.len()),
        extrinsic_llr: Vec::with_capacity(obs.len()),
        g_post: Vec::new(),
        g_mmse: Vec::with_capacity(obs.len()),
        fallback_fusions: 0,
    };

    for i in 0..obs.len() {
        let y = &obs[i];
        let f_info: Vec<InformationForm<T>> = fwd[i]
            .components()
            .iter()
            .map(|c| InformationForm::from_density(&c.density))
            .collect::<Result<_>>()?;
        let b_info: Vec<InformationForm<T>> = bwd[i]
            .components()
            .iter()
            .map(|c| InformationForm::from_density(&c.density))
            .collect::<Result<_>>()?;
        let f_total = fwd[i].log_total();
        let b_total = bwd[i].log_total();

        // per desired-symbol sign, without p(x_i)
        let mut ext_plus = LogAccumulator::new();
        let mut ext_minus = LogAccumulator::new();
        let mut weighted_means: Vec<(T, CVec<T>)> = Vec::new();
        let mut post_comps: Vec<MixtureComponent<T>> = Vec::new();
        let lp_plus = priors[i].log_prob(1);
        let lp_minus = priors[i].log_prob(-1);

        for (fc, fi) in fwd[i].components().iter().zip(&f_info) {
            for (bc, bi) in bwd[i].components().iter().zip(&b_info) {
                let fusion = match fuse_information(fi, bi, Some(&prior_info)) {
                    Ok(f) => f,
                    Err(Error::IndefiniteFusion) => {
                        out.fallback_fusions += 1;
                        fuse_information(fi, bi, None)?
                    }
                    Err(e) => return Err(e),
                };
                let pair_lw = fc.log_weight - f_total + bc.log_weight - b_total + fusion.log_scale;
                let inns = innovations(&fusion.fused, y, sigma_n2, n)?;
                for (hyp, inn) in Hypothesis::ALL.into_iter().zip(inns) {
                    let lw = pair_lw + log_half + inn.log_like;
                    let lp = if hyp.x > 0 { lp_plus } else { lp_minus };
                    if hyp.x > 0 {
                        ext_plus.add(lw);
                    } else {
                        ext_minus.add(lw);
                    }
                    let full = lw + lp;
                    if full == T::neg_infinity() {
                        continue;
                    }
                    let (mean, cov) = condition(&fusion.fused, &inn, cfg.channel_posteriors);
                    if let Some(cov) = cov {
                        post_comps.push(MixtureComponent {
                            log_weight: full,
                            density: GaussianDensity {
                                mean: mean.clone(),
                                cov: cov.repair_psd(T::lit(REPAIR_FLOOR)),
                            },
                        });
                    }
                    weighted_means.push((full, mean));
                }
            }
        }

        let (lext_p, lext_m) = (ext_plus.value(), ext_minus.value());
        let ext = (lext_p - lext_m).max(-llr_cap).min(llr_cap);
        out.extrinsic_llr.push(if ext.is_nan() { T::zero() } else { ext });

        let lpost_p = lext_p + lp_plus;
        let lpost_m = lext_m + lp_minus;
        let p_plus = if lpost_m == T::neg_infinity() {
            T::one()
        } else if lpost_p == T::neg_infinity() {
            T::zero()
        } else {
            T::one() / (T::one() + (lpost_m - lpost_p).exp())
        };
        out.post_x.push(SymbolPrior { p_plus });

        let mut total = LogAccumulator::new();
        for (lw, _) in &weighted_means {
            total.add(*lw);
        }
        let total = total.value();
        let mut mmse = CVec::zeros(2 * n);
        for (lw, m) in &weighted_means {
            mmse.axpy((*lw - total).exp(), m);
        }
        out.g_mmse.push(mmse);

        if cfg.channel_posteriors {
            let mix = GaussianMixture::new(post_comps);
            let mix = if mix.len() > cfg.cap {
                mix.prune(cfg.cap)?
            } else {
                mix.normalize()?
            };
            out.g_post.push(mix);
        }
    }
    Ok(out)
}

/// Forward pass, backward pass and symbol posteriors for one frame.
pub fn detect_frame<T: Real>(
    obs: &[CVec<T>],
    priors: &[SymbolPrior<T>],
    cfg: &DetectorConfig<T>,
) -> Result<DetectorOutput<T>> {
    let fwd = forward_pass(obs, priors, cfg)?;
    let bwd = backward_pass(obs, priors, cfg)?;
    symbol_posteriors(obs, priors, &fwd, &bwd, cfg)
}

/// Priors for an uncoded frame: pilots certain, data uniform.
pub fn pilot_priors<T: Real>(pilots: &[bool]) -> Vec<SymbolPrior<T>> {
    pilots
        .iter()
        .map(|&p| {
            if p {
                SymbolPrior::pilot()
            } else {
                SymbolPrior::uniform()
            }
        })
        .collect()
}
