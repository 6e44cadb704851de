//! Experiment configuration and its `key = value` text form.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::ldpc::Schedule;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    GaussMarkov,
    Clarke { fd_norm: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Uncoded,
    Coded,
    Mse,
    Mismatch,
    Floor,
    Components,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uncoded" => Mode::Uncoded,
            "coded" => Mode::Coded,
            "mse" => Mode::Mse,
            "mismatch" => Mode::Mismatch,
            "floor" => Mode::Floor,
            "components" => Mode::Components,
            _ => return Err(Error::Parse(format!("unknown mode '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Receiver {
    Bp,
    Mmse,
    Genie,
    FullCsi,
}

impl Receiver {
    pub fn name(&self) -> &'static str {
        match self {
            Receiver::Bp => "bp",
            Receiver::Mmse => "mmse",
            Receiver::Genie => "genie",
            Receiver::FullCsi => "full_csi",
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "bp" => Receiver::Bp,
            "mmse" => Receiver::Mmse,
            "genie" => Receiver::Genie,
            "full_csi" | "full-csi" => Receiver::FullCsi,
            other => return Err(Error::Parse(format!("unknown receiver '{other}'"))),
        })
    }
}

/// Everything that determines a sweep; together with the seed it fixes the output.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub snr_grid_db: Vec<f64>,
    pub sir_db: f64,
    /// True channel correlation.
    pub alpha: f64,
    /// Correlation the receivers assume.
    pub alpha_assumed: f64,
    pub channel: ChannelKind,
    pub pilot_period: usize,
    pub frame_len: usize,
    pub n_rx: usize,
    pub cap: usize,
    pub trials: usize,
    pub seed: u64,
    pub schedules: Vec<Schedule>,
    pub receivers: Vec<Receiver>,
    /// True correlations swept by the mismatch mode (Gauss-Markov channel).
    pub alpha_grid: Vec<f64>,
    /// Component caps swept by the components mode; a cap of 1 collapses.
    pub cap_grid: Vec<usize>,
    /// Seed of the LDPC code instance.
    pub code_seed: u64,
    /// Half-width of the MMSE pilot window; two pilot periods when unset.
    pub mmse_window: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for a mode: 25% pilots, `l = 200`, `alpha = 0.99`, SIR 3 dB,
    /// two receive antennas, eight components.
    pub fn new(mode: Mode) -> Self {
        let receivers = match mode {
            Mode::Uncoded | Mode::Mismatch => vec![Receiver::Bp, Receiver::Mmse, Receiver::Genie, Receiver::FullCsi],
            Mode::Mse | Mode::Coded => vec![Receiver::Bp, Receiver::Mmse],
            Mode::Components => vec![Receiver::Bp],
            Mode::Floor => vec![],
        };
        Self {
            mode,
            snr_grid_db: (0..=6).map(|k| 5.0 * k as f64).collect(),
            sir_db: 3.0,
            alpha: 0.99,
            alpha_assumed: 0.99,
            channel: ChannelKind::GaussMarkov,
            pilot_period: 4,
            frame_len: 200,
            n_rx: 2,
            cap: 8,
            trials: 100,
            seed: 1,
            schedules: vec![Schedule::separate(), Schedule::joint()],
            receivers,
            alpha_grid: vec![0.95, 0.97, 0.99, 0.995, 0.999],
            cap_grid: vec![1, 2, 4, 8],
            code_seed: 1,
            mmse_window: None,
        }
    }

    /// Channel statistics at one SNR with the true correlation.
    pub fn true_params(&self, snr_db: f64) -> ChannelParams<f64> {
        ChannelParams::from_db(self.alpha, snr_db, self.sir_db, self.n_rx)
    }

    /// The receivers' model at one SNR.
    pub fn assumed_params(&self, snr_db: f64) -> ChannelParams<f64> {
        ChannelParams::from_db(self.alpha_assumed, snr_db, self.sir_db, self.n_rx)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return bad("SNR grid must be non-empty".into());
        }
        if self.sir_db.is_nan() {
            return bad("SIR must be a number".into());
        }
        for (name, a) in [("alpha", self.alpha), ("alpha-assumed", self.alpha_assumed)] {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("{name} {a} outside [0, 1]"));
            }
        }
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("alpha grid entries must lie in [0, 1]".into());
        }
        if let ChannelKind::Clarke { fd_norm } = self.channel {
            if !(fd_norm > 0.0 && fd_norm < 0.5) {
                return bad(format!("normalized Doppler {fd_norm} outside (0, 0.5)"));
            }
        }
        if self.pilot_period == 0 || self.frame_len == 0 || self.n_rx == 0 {
            return bad("pilot period, frame length and antenna count must be positive".into());
        }
        if self.cap == 0 || self.cap_grid.is_empty() || self.cap_grid.contains(&0) {
            return bad("component caps must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.mmse_window == Some(0) {
            return bad("MMSE window must be at least 1".into());
        }
        if self.mode == Mode::Floor && self.n_rx != 2 {
            return bad("the analytic floor needs n_rx = 2".into());
        }
        if self.mode == Mode::Coded && self.schedules.is_empty() {
            return bad("coded mode needs at least one schedule".into());
        }
        Ok(())
    }

    /// Applies one setting. Keys match the command-line flag names without
    /// the leading dashes; `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let num = |v: &str| -> Result<f64> { v.parse::<f64>().map_err(|e| Error::Parse(format!("{key}: '{v}': {e}"))) };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|e| Error::Parse(format!("{key}: '{v}': {e}")))
        };
        match key.as_str() {
            "snr" => self.snr_grid_db = parse_grid(value)?,
            "sir-db" | "sir" => self.sir_db = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "alpha-assumed" => self.alpha_assumed = num(value)?,
            "channel" => {
                self.channel = match value {
                    "gm" | "gauss-markov" | "gauss_markov" => ChannelKind::GaussMarkov,
                    "clarke" => ChannelKind::Clarke {
                        fd_norm: match self.channel {
                            ChannelKind::Clarke { fd_norm } => fd_norm,
                            ChannelKind::GaussMarkov => DEFAULT_FD,
                        },
                    },
                    other => return Err(Error::Parse(format!("unknown channel '{other}'"))),
                }
            }
            "fd" => {
                let fd = num(value)?;
                self.channel = ChannelKind::Clarke { fd_norm: fd };
            }
            "pilot-period" => self.pilot_period = count(value)?,
            "frame-len" => self.frame_len = count(value)?,
            "n-rx" => self.n_rx = count(value)?,
            "cap" => self.cap = count(value)?,
            "trials" => self.trials = count(value)?,
            "seed" => self.seed = value.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
            "code-seed" => self.code_seed = value.parse().map_err(|e| Error::Parse(format!("code-seed: {e}")))?,
            "schedule" => {
                self.schedules = value
                    .split(',')
                    .map(|s| s.trim().parse::<Schedule>())
                    .collect::<Result<_>>()?
            }
            "receivers" => {
                self.receivers = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "alpha-grid" => self.alpha_grid = parse_list(value, num)?,
            "caps" => self.cap_grid = parse_list(value, count)?,
            "mmse-window" => self.mmse_window = Some(count(value)?),
            _ => return Err(Error::Parse(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }
}

/// Normalized Doppler used when `channel = clarke` is given without `fd`.
pub const DEFAULT_FD: f64 = 0.02;

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(|s| f(s.trim())).collect()
}

/// `a:b:step` (inclusive of `b` up to rounding), a comma list, or one value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("grid '{s}': {e}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => parse_list(s, num),
        3 => {
            let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
                return Err(Error::Parse(format!("grid '{s}' needs a <= b and step > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| a + step * k as f64).collect())
        }
        _ => Err(Error::Parse(format!("grid '{s}' is not a:b:step"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:40:5").unwrap().len(), 9);
        assert_eq!(parse_grid("10,20,30").unwrap(), vec![10.0, 20.0, 30.0]);
        assert_eq!(parse_grid("7").unwrap(), vec![7.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert!(parse_grid("5:0:1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn settings_apply() {
        let mut c = ExperimentConfig::new(Mode::Uncoded);
        c.apply_text(
            "# comment\nsnr = 10:20:10\nsir_db = inf\nchannel = clarke\nreceivers = bp, mmse\nschedule = 5:10\n",
        )
        .unwrap();
        assert_eq!(c.snr_grid_db, vec![10.0, 20.0]);
        assert_eq!(c.sir_db, f64::INFINITY);
        assert_eq!(c.channel, ChannelKind::Clarke { fd_norm: DEFAULT_FD });
        assert_eq!(c.receivers, vec![Receiver::Bp, Receiver::Mmse]);
        assert_eq!(c.schedules, vec![Schedule::joint()]);
        c.set("fd", "0.03").unwrap();
        assert_eq!(c.channel, ChannelKind::Clarke { fd_norm: 0.03 });
        c.validate().unwrap();
    }

    #[test]
    fn bad_settings() {
        let mut c = ExperimentConfig::new(Mode::Uncoded);
        assert!(c.set("colour", "blue").is_err());
        assert!(c.set("trials", "-3").is_err());
        assert!(c.apply_text("alpha 0.9").is_err());
        c.set("alpha", "1.5").unwrap();
        assert!(c.validate().is_err());
        let mut f = ExperimentConfig::new(Mode::Floor);
        f.n_rx = 1;
        assert!(f.validate().is_err());
    }
}
