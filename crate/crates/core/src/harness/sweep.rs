//! Seeded Monte Carlo sweeps.
//!
//! Trial `t` of every point draws its channels, symbols and noise from the
//! substreams `(seed, t, purpose)`, so the output depends only on the
//! configuration and the seed. SNR points and receivers share the same trial
//! draws, which makes comparisons between them paired.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{
    analytic_error_floor, full_csi_ml_detect, genie_detect, mmse_detect, mmse_estimate_full, mmse_llr, FloorParams,
    MmseConfig,
};
use crate::channel::{
    gen_ar1, gen_interferer_symbols, gen_symbols, simulate_frame, ChannelParams, ClarkeGenerator, FadingTrace,
    FrameRealization, PilotPattern, Symbol,
};
use crate::error::{Error, Result};
use crate::harness::config::{ChannelKind, ExperimentConfig, Mode, Receiver};
use crate::harness::stats::{MeanEstimate, Rate};
use crate::ldpc::{decode, hard_decision, joint_receive, CodeSpec, CodedLayout, LdpcCode, Schedule};
use crate::linalg::CVec;
use crate::mixture_bp::{detect_frame, pilot_priors, DetectorConfig, Reduction};
use crate::rng::{Purpose, RandomStream};
use rand::Rng;

/// Decoder iterations of the MMSE + separate decoding baseline.
pub const SEPARATE_DECODER_ITERS: usize = 50;

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub sir_db: f64,
    pub receiver: String,
    pub metric_name: String,
    pub value: f64,
    pub ci95_halfwidth: f64,
    pub n_bits_or_frames: u64,
    pub seed: u64,
}

impl SweepRow {
    fn rate(
        cfg: &ExperimentConfig,
        snr_db: f64,
        receiver: impl Into<String>,
        metric: impl Into<String>,
        r: Rate,
    ) -> Self {
        Self {
            snr_db,
            sir_db: cfg.sir_db,
            receiver: receiver.into(),
            metric_name: metric.into(),
            value: r.value(),
            ci95_halfwidth: r.halfwidth(),
            n_bits_or_frames: r.n,
            seed: cfg.seed,
        }
    }

    fn mean(
        cfg: &ExperimentConfig,
        snr_db: f64,
        receiver: impl Into<String>,
        metric: impl Into<String>,
        m: MeanEstimate,
    ) -> Self {
        Self {
            snr_db,
            sir_db: cfg.sir_db,
            receiver: receiver.into(),
            metric_name: metric.into(),
            value: m.mean,
            ci95_halfwidth: m.halfwidth,
            n_bits_or_frames: m.n as u64,
            seed: cfg.seed,
        }
    }
}

/// Writes rows as CSV with a header line.
pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(())
}

/// Runs the sweep selected by `cfg.mode`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    match cfg.mode {
        Mode::Uncoded => run_uncoded_sweep(cfg),
        Mode::Coded => run_coded_sweep(cfg),
        Mode::Mse => run_mse_sweep(cfg),
        Mode::Mismatch => run_mismatch_sweep(cfg),
        Mode::Floor => run_floor_curve(cfg),
        Mode::Components => run_components(cfg),
    }
}

fn thread_pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n: usize = std::env::var("RX_THREADS").ok()?.trim().parse().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    })
    .as_ref()
}

/// Runs `f` for every trial index in parallel; results come back in trial order.
pub fn par_trials<R, F>(trials: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64) -> Result<R> + Sync + Send,
{
    let job = || (0..trials as u64).into_par_iter().map(&f).collect::<Result<Vec<R>>>();
    match thread_pool() {
        Some(pool) => pool.install(job),
        None => job(),
    }
}

/// How fading traces are drawn for a sweep.
pub enum ChannelSource {
    GaussMarkov {
        alpha: f64,
    },
    /// Unit-power generator; the interferer trace is rescaled.
    Clarke(ClarkeGenerator<f64>),
}

impl ChannelSource {
    pub fn new(kind: ChannelKind, alpha: f64, l: usize) -> Result<Self> {
        Ok(match kind {
            ChannelKind::GaussMarkov => ChannelSource::GaussMarkov { alpha },
            ChannelKind::Clarke { fd_norm } => ChannelSource::Clarke(ClarkeGenerator::new(fd_norm, 1.0, l)?),
        })
    }

    /// Desired and interferer traces of trial `trial`.
    pub fn trace(&self, seed: u64, trial: u64, p: &ChannelParams<f64>, l: usize) -> FadingTrace<f64> {
        let mut rh = RandomStream::substream(seed, trial, Purpose::DesiredChannel);
        let mut rhp = RandomStream::substream(seed, trial, Purpose::InterfererChannel);
        match self {
            ChannelSource::GaussMarkov { alpha } => FadingTrace {
                h: gen_ar1(&mut rh, *alpha, p.sigma_h2, p.n_rx, l),
                hp: gen_ar1(&mut rhp, *alpha, p.sigma_hp2, p.n_rx, l),
            },
            ChannelSource::Clarke(g) => {
                let scale = |v: Vec<CVec<f64>>, s: f64| v.into_iter().map(|c| c.scale(s.sqrt())).collect();
                FadingTrace {
                    h: scale(g.sample(&mut rh, p.n_rx), p.sigma_h2),
                    hp: scale(g.sample(&mut rhp, p.n_rx), p.sigma_hp2),
                }
            }
        }
    }
}

fn finish_frame(
    seed: u64,
    trial: u64,
    p: &ChannelParams<f64>,
    trace: FadingTrace<f64>,
    x: Vec<Symbol>,
    pilots: Vec<bool>,
) -> Result<FrameRealization<f64>> {
    let l = x.len();
    let xp = gen_interferer_symbols(&mut RandomStream::substream(seed, trial, Purpose::InterfererSymbols), l);
    let mut noise = RandomStream::substream(seed, trial, Purpose::Noise);
    simulate_frame(&mut noise, p, trace, x, xp, pilots)
}

/// Uncoded frame of trial `trial`: pilots per `pattern`, uniform data.
pub fn uncoded_frame(
    seed: u64,
    trial: u64,
    p: &ChannelParams<f64>,
    source: &ChannelSource,
    pattern: &PilotPattern,
    l: usize,
) -> Result<FrameRealization<f64>> {
    let (x, pilots) = gen_symbols(
        &mut RandomStream::substream(seed, trial, Purpose::DesiredSymbols),
        pattern,
        l,
    );
    let trace = source.trace(seed, trial, p, l);
    finish_frame(seed, trial, p, trace, x, pilots)
}

fn pattern(cfg: &ExperimentConfig) -> Result<PilotPattern> {
    PilotPattern::new(cfg.pilot_period, 0)
}

fn mmse_config(cfg: &ExperimentConfig, pattern: &PilotPattern) -> Result<MmseConfig> {
    match cfg.mmse_window {
        Some(w) => MmseConfig::new(w),
        None => Ok(MmseConfig::for_pattern(pattern)),
    }
}

/// Detector at the given cap; a cap of 1 uses moment-matched collapse.
fn detector(assumed: ChannelParams<f64>, cap: usize) -> DetectorConfig<f64> {
    let det = DetectorConfig::new(assumed)
        .with_cap(cap)
        .with_channel_posteriors(false);
    if cap == 1 {
        det.with_reduction(Reduction::Collapse)
    } else {
        det
    }
}

fn count_errors(x: &[Symbol], xhat: &[Symbol], pilots: &[bool]) -> u64 {
    x.iter()
        .zip(xhat)
        .zip(pilots)
        .filter(|((a, b), &p)| !p && a != b)
        .count() as u64
}

/// Uncoded receiver under test.
#[derive(Clone, Debug, PartialEq)]
pub enum UncodedReceiver {
    Bp { cap: usize },
    Mmse,
    Genie,
    FullCsi,
}

impl UncodedReceiver {
    pub fn from_receiver(r: Receiver, cap: usize) -> Self {
        match r {
            Receiver::Bp => UncodedReceiver::Bp { cap },
            Receiver::Mmse => UncodedReceiver::Mmse,
            Receiver::Genie => UncodedReceiver::Genie,
            Receiver::FullCsi => UncodedReceiver::FullCsi,
        }
    }
}

/// Per-frame data-bit error counts of several receivers at one SNR point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointErrors {
    /// Data bits per frame.
    pub bits_per_frame: u64,
    /// `errors[r][t]`: errors of receiver `r` in trial `t`.
    pub errors: Vec<Vec<u64>>,
}

impl PointErrors {
    pub fn rate(&self, r: usize) -> Rate {
        let e = self.errors[r].iter().sum();
        Rate::new(e, self.bits_per_frame * self.errors[r].len() as u64)
    }

    /// Per-frame bit error rates of receiver `r`.
    pub fn frame_rates(&self, r: usize) -> Vec<f64> {
        self.errors[r]
            .iter()
            .map(|&e| e as f64 / self.bits_per_frame as f64)
            .collect()
    }
}

/// Simulates `cfg.trials` uncoded frames at one SNR with true correlation
/// `true_alpha` and runs every receiver on each.
pub fn simulate_uncoded_point(
    cfg: &ExperimentConfig,
    snr_db: f64,
    true_alpha: f64,
    receivers: &[UncodedReceiver],
) -> Result<PointErrors> {
    let pattern = pattern(cfg)?;
    let l = cfg.frame_len;
    let truth = ChannelParams {
        alpha: true_alpha,
        ..cfg.true_params(snr_db)
    };
    let assumed = cfg.assumed_params(snr_db);
    let source = ChannelSource::new(cfg.channel, true_alpha, l)?;
    let mmse_cfg = mmse_config(cfg, &pattern)?;
    let bits_per_frame = pattern.mask(l).iter().filter(|&&p| !p).count() as u64;
    let per_trial = par_trials(cfg.trials, |t| {
        let f = uncoded_frame(cfg.seed, t, &truth, &source, &pattern, l)?;
        receivers
            .iter()
            .map(|r| {
                let xhat = match r {
                    UncodedReceiver::Bp { cap } => {
                        let det = detector(assumed, *cap);
                        detect_frame(&f.y, &pilot_priors(&f.pilots), &det)?.decisions()
                    }
                    UncodedReceiver::Mmse => {
                        let est = mmse_estimate_full(&f.y, &f.pilots, &assumed, &mmse_cfg)?;
                        mmse_detect(&est.h, &f.y)?
                    }
                    UncodedReceiver::Genie => genie_detect(&f.trace, &f.y, &assumed)?.x,
                    UncodedReceiver::FullCsi => full_csi_ml_detect(&f.trace, &f.y, &assumed)?,
                };
                Ok(count_errors(&f.x, &xhat, &f.pilots))
            })
            .collect::<Result<Vec<u64>>>()
    })?;
    let errors = (0..receivers.len())
        .map(|r| per_trial.iter().map(|v| v[r]).collect())
        .collect();
    Ok(PointErrors { bits_per_frame, errors })
}

fn uncoded_rows(cfg: &ExperimentConfig, true_alpha: f64, metric: &str) -> Result<Vec<SweepRow>> {
    let receivers: Vec<UncodedReceiver> = cfg
        .receivers
        .iter()
        .map(|&r| UncodedReceiver::from_receiver(r, cfg.cap))
        .collect();
    let mut rows = Vec::new();
    for &snr in &cfg.snr_grid_db {
        let pe = simulate_uncoded_point(cfg, snr, true_alpha, &receivers)?;
        for (k, r) in cfg.receivers.iter().enumerate() {
            rows.push(SweepRow::rate(cfg, snr, r.name(), metric, pe.rate(k)));
        }
    }
    Ok(rows)
}

/// Uncoded BER of each configured receiver per SNR point (data positions only).
pub fn run_uncoded_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    uncoded_rows(cfg, cfg.alpha, "ber")
}

/// Model-mismatch BER: the channel follows the true model while the receivers
/// assume `alpha_assumed`. Gauss-Markov channels sweep `alpha_grid` (metric
/// `ber_alpha=<a>`); a Clarke channel gives one block (metric `ber_fd=<fd>`).
pub fn run_mismatch_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    match cfg.channel {
        ChannelKind::GaussMarkov => {
            let mut rows = Vec::new();
            for &a in &cfg.alpha_grid {
                rows.extend(uncoded_rows(cfg, a, &format!("ber_alpha={a}"))?);
            }
            Ok(rows)
        }
        ChannelKind::Clarke { fd_norm } => uncoded_rows(cfg, cfg.alpha, &format!("ber_fd={fd_norm}")),
    }
}

/// BER of the detector at each cap of `cap_grid` (cap 1 collapses to one Gaussian).
pub fn run_components(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let receivers: Vec<UncodedReceiver> = cfg.cap_grid.iter().map(|&c| UncodedReceiver::Bp { cap: c }).collect();
    let mut rows = Vec::new();
    for &snr in &cfg.snr_grid_db {
        let pe = simulate_uncoded_point(cfg, snr, cfg.alpha, &receivers)?;
        for (k, c) in cfg.cap_grid.iter().enumerate() {
            rows.push(SweepRow::rate(cfg, snr, format!("bp_cap{c}"), "ber", pe.rate(k)));
        }
    }
    Ok(rows)
}

/// Per-frame normalized channel-estimation error `mean_i |h_hat_i - h_i|^2 / (n_rx sigma_h2)`
/// over data positions (over all positions when the frame has no data).
fn frame_nmse(h_hat: &[CVec<f64>], f: &FrameRealization<f64>, p: &ChannelParams<f64>) -> f64 {
    let n = p.n_rx;
    let data: Vec<usize> = (0..f.len()).filter(|&i| !f.pilots[i]).collect();
    let idx: Vec<usize> = if data.is_empty() { (0..f.len()).collect() } else { data };
    let sum: f64 = idx
        .iter()
        .map(|&i| {
            let e = (0..n).map(|a| (h_hat[i][a] - f.trace.h[i][a]).norm_sqr()).sum::<f64>();
            e / (n as f64 * p.sigma_h2)
        })
        .sum();
    sum / idx.len() as f64
}

/// Per-frame normalized MSE of the BP (posterior mean) and MMSE channel estimates.
pub fn simulate_mse_point(cfg: &ExperimentConfig, snr_db: f64) -> Result<Vec<(Receiver, Vec<f64>)>> {
    let pattern = pattern(cfg)?;
    let l = cfg.frame_len;
    let truth = cfg.true_params(snr_db);
    let assumed = cfg.assumed_params(snr_db);
    let source = ChannelSource::new(cfg.channel, cfg.alpha, l)?;
    let mmse_cfg = mmse_config(cfg, &pattern)?;
    let receivers: Vec<Receiver> = cfg
        .receivers
        .iter()
        .copied()
        .filter(|r| matches!(r, Receiver::Bp | Receiver::Mmse))
        .collect();
    let det = detector(assumed, cfg.cap);
    let per_trial = par_trials(cfg.trials, |t| {
        let f = uncoded_frame(cfg.seed, t, &truth, &source, &pattern, l)?;
        receivers
            .iter()
            .map(|r| {
                let h_hat: Vec<CVec<f64>> = match r {
                    Receiver::Bp => detect_frame(&f.y, &pilot_priors(&f.pilots), &det)?
                        .g_mmse
                        .iter()
                        .map(|g| g.segment(0, truth.n_rx))
                        .collect(),
                    _ => mmse_estimate_full(&f.y, &f.pilots, &assumed, &mmse_cfg)?.h,
                };
                Ok(frame_nmse(&h_hat, &f, &truth))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(receivers
        .iter()
        .enumerate()
        .map(|(k, &r)| (r, per_trial.iter().map(|v| v[k]).collect()))
        .collect())
}

/// Normalized channel-estimation MSE per SNR point for `bp` and `mmse`
/// (metric `nmse`, normal-approximation interval over frames).
pub fn run_mse_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &snr in &cfg.snr_grid_db {
        for (r, samples) in simulate_mse_point(cfg, snr)? {
            rows.push(SweepRow::mean(
                cfg,
                snr,
                r.name(),
                "nmse",
                MeanEstimate::from_samples(&samples),
            ));
        }
    }
    Ok(rows)
}

/// The code used by coded sweeps.
pub fn coded_code(cfg: &ExperimentConfig) -> Result<LdpcCode> {
    LdpcCode::construct(cfg.code_seed, &CodeSpec::irregular_500_250())
}

/// Outcome of one coded frame for one receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodedOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
}

/// Coded receiver under test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CodedReceiver {
    Bp(Schedule),
    MmseSeparate,
}

impl CodedReceiver {
    pub fn name(&self) -> String {
        match self {
            CodedReceiver::Bp(s) => format!("bp_{s}"),
            CodedReceiver::MmseSeparate => "mmse_sep".to_string(),
        }
    }
}

/// Simulates `cfg.trials` coded frames (one codeword per frame) at one SNR
/// and returns `outcomes[r][t]`.
pub fn simulate_coded_point(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
    snr_db: f64,
    receivers: &[CodedReceiver],
) -> Result<Vec<Vec<CodedOutcome>>> {
    let pattern = pattern(cfg)?;
    let layout = CodedLayout::new(pattern, code.n());
    let l = layout.frame_len();
    let truth = cfg.true_params(snr_db);
    let assumed = cfg.assumed_params(snr_db);
    let source = ChannelSource::new(cfg.channel, cfg.alpha, l)?;
    let mmse_cfg = mmse_config(cfg, &pattern)?;
    let det = detector(assumed, cfg.cap);
    let data = layout.data_positions();
    let per_trial = par_trials(cfg.trials, |t| {
        let mut bits = RandomStream::substream(cfg.seed, t, Purpose::InfoBits);
        let info: Vec<u8> = (0..code.k()).map(|_| bits.random_range(0..2u8)).collect();
        let cw = code.encoder.encode(&info)?;
        let x = layout.symbols(&cw);
        let trace = source.trace(cfg.seed, t, &truth, l);
        let f = finish_frame(cfg.seed, t, &truth, trace, x, layout.pilots())?;
        receivers
            .iter()
            .map(|r| {
                let decided = match r {
                    CodedReceiver::Bp(s) => joint_receive(&f.y, &f.pilots, code, &det, *s)?.info_bits,
                    CodedReceiver::MmseSeparate => {
                        let est = mmse_estimate_full(&f.y, &f.pilots, &assumed, &mmse_cfg)?;
                        let llr = mmse_llr(&est, &f.y, &assumed);
                        let llr_data: Vec<f64> = data.iter().map(|&i| llr[i]).collect();
                        let dec = decode(&code.h, &llr_data, SEPARATE_DECODER_ITERS);
                        code.encoder.extract(&hard_decision(&dec.llr_post))
                    }
                };
                let bit_errors = info.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
                Ok(CodedOutcome {
                    frame_error: bit_errors > 0,
                    bit_errors,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..receivers.len())
        .map(|r| per_trial.iter().map(|v| v[r]).collect())
        .collect())
}

/// Frame and information-bit error rates after joint detection and decoding,
/// one block per schedule (`bp_<i_det>:<i_dec>`), plus the MMSE + separate
/// decoding baseline (`mmse_sep`).
pub fn run_coded_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let code = coded_code(cfg)?;
    let mut receivers = Vec::new();
    if cfg.receivers.contains(&Receiver::Bp) {
        receivers.extend(cfg.schedules.iter().map(|&s| CodedReceiver::Bp(s)));
    }
    if cfg.receivers.contains(&Receiver::Mmse) {
        receivers.push(CodedReceiver::MmseSeparate);
    }
    let mut rows = Vec::new();
    for &snr in &cfg.snr_grid_db {
        let outcomes = simulate_coded_point(cfg, &code, snr, &receivers)?;
        for (r, o) in receivers.iter().zip(&outcomes) {
            let frames = o.len() as u64;
            let fe = o.iter().filter(|c| c.frame_error).count() as u64;
            let be = o.iter().map(|c| c.bit_errors).sum();
            rows.push(SweepRow::rate(cfg, snr, r.name(), "fer", Rate::new(fe, frames)));
            rows.push(SweepRow::rate(
                cfg,
                snr,
                r.name(),
                "ber",
                Rate::new(be, frames * code.k() as u64),
            ));
        }
    }
    Ok(rows)
}

/// Closed-form error floor on the SNR grid (no simulation).
pub fn run_floor_curve(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    Ok(cfg
        .snr_grid_db
        .iter()
        .map(|&snr| {
            let p = cfg.true_params(snr);
            let fp = FloorParams {
                alpha: p.alpha,
                sigma_h2: p.sigma_h2,
                sigma_hp2: p.sigma_hp2,
                sigma_n2: p.sigma_n2,
            };
            SweepRow {
                snr_db: snr,
                sir_db: cfg.sir_db,
                receiver: "analytic".into(),
                metric_name: "floor".into(),
                value: analytic_error_floor(&fp),
                ci95_halfwidth: 0.0,
                n_bits_or_frames: 0,
                seed: cfg.seed,
            }
        })
        .collect())
}
