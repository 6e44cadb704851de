//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::harness::sweep::{run, write_csv};

#[derive(Parser, Debug)]
#[command(
    name = "gmbp",
    version,
    about = "Monte Carlo sweeps of the mixture BP receiver and its baselines; writes CSV"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Uncoded BER per receiver.
    Uncoded(Flags),
    /// Frame/bit error rates with the LDPC code.
    Coded(Flags),
    /// Normalized channel-estimation MSE.
    Mse(Flags),
    /// BER under a mismatched channel model.
    Mismatch(Flags),
    /// Closed-form error floor.
    Floor(Flags),
    /// BER versus the mixture component cap.
    Components(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// SNR grid in dB: `a:b:step`, a comma list or one value.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long = "sir-db", allow_hyphen_values = true)]
    sir_db: Option<String>,
    /// True one-step channel correlation.
    #[arg(long)]
    alpha: Option<String>,
    /// Correlation assumed by the receivers.
    #[arg(long = "alpha-assumed")]
    alpha_assumed: Option<String>,
    /// True correlations swept by `mismatch` (comma list).
    #[arg(long = "alpha-grid")]
    alpha_grid: Option<String>,
    /// `gm` (Gauss-Markov) or `clarke`.
    #[arg(long)]
    channel: Option<String>,
    /// Normalized Doppler of the Clarke channel.
    #[arg(long)]
    fd: Option<String>,
    #[arg(long = "pilot-period")]
    pilot_period: Option<String>,
    #[arg(long = "frame-len")]
    frame_len: Option<String>,
    /// Receive antennas.
    #[arg(long = "n-rx")]
    n_rx: Option<String>,
    /// Mixture component cap.
    #[arg(long)]
    cap: Option<String>,
    /// Caps swept by `components` (comma list).
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Seed of the LDPC code instance.
    #[arg(long = "code-seed")]
    code_seed: Option<String>,
    /// Detection:decoding iteration schedules, `IDET:IDEC[,IDET:IDEC...]`.
    #[arg(long)]
    schedule: Option<String>,
    /// Comma list from bp, mmse, genie, full_csi.
    #[arg(long)]
    receivers: Option<String>,
    /// Half-width of the MMSE pilot window in symbols.
    #[arg(long = "mmse-window")]
    mmse_window: Option<String>,
    /// Output CSV file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn settings(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("snr", &self.snr),
            ("sir-db", &self.sir_db),
            ("alpha", &self.alpha),
            ("alpha-assumed", &self.alpha_assumed),
            ("alpha-grid", &self.alpha_grid),
            ("channel", &self.channel),
            ("fd", &self.fd),
            ("pilot-period", &self.pilot_period),
            ("frame-len", &self.frame_len),
            ("n-rx", &self.n_rx),
            ("cap", &self.cap),
            ("caps", &self.caps),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("code-seed", &self.code_seed),
            ("schedule", &self.schedule),
            ("receivers", &self.receivers),
            ("mmse-window", &self.mmse_window),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn build_config(mode: Mode, flags: &Flags) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(mode);
    if let Some(path) = &flags.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for (k, v) in flags.settings() {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (program name first), runs the sweep and writes CSV.
/// Returns 0 on success, 2 on usage or configuration errors and 1 when the
/// simulation or the output fails.
pub fn cli_main<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (mode, flags) = match &cli.command {
        Command::Uncoded(f) => (Mode::Uncoded, f),
        Command::Coded(f) => (Mode::Coded, f),
        Command::Mse(f) => (Mode::Mse, f),
        Command::Mismatch(f) => (Mode::Mismatch, f),
        Command::Floor(f) => (Mode::Floor, f),
        Command::Components(f) => (Mode::Components, f),
    };
    let cfg = match build_config(mode, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let rows = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &flags.out {
        Some(path) => File::create(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                write_csv(&rows, &mut w)?;
                w.flush().map_err(|e| Error::Parse(e.to_string()))
            }),
        None => write_csv(&rows, io::stdout().lock()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
