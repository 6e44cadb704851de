//! Iterative exchange of extrinsic information between the channel detector
//! and the LDPC decoder.

use super::code::LdpcCode;
use super::decode::{clamp_llr, decode, hard_decision};
use crate::channel::{PilotPattern, Symbol};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::mixture_bp::{detect_frame, DetectorConfig, SymbolPrior};

/// `i_det` detector/decoder exchanges with `i_dec` decoder iterations each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub i_det: usize,
    pub i_dec: usize,
}

impl Schedule {
    pub fn new(i_det: usize, i_dec: usize) -> Result<Self> {
        if i_det == 0 || i_dec == 0 {
            return Err(Error::InvalidConfig("schedule counts must be at least 1".into()));
        }
        Ok(Self { i_det, i_dec })
    }

    /// Detect once, then decode: `(1, 50)`.
    pub fn separate() -> Self {
        Self { i_det: 1, i_dec: 50 }
    }

    /// Five exchanges of ten decoder iterations.
    pub fn joint() -> Self {
        Self { i_det: 5, i_dec: 10 }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.i_det, self.i_dec)
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("schedule '{s}' is not IDET:IDEC")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("schedule '{s}': {e}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

/// Placement of a codeword in a frame: pilots per the pattern, code bits in
/// order on the remaining positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodedLayout {
    pub pattern: PilotPattern,
    pub n_code: usize,
}

impl CodedLayout {
    pub fn new(pattern: PilotPattern, n_code: usize) -> Self {
        Self { pattern, n_code }
    }

    pub fn frame_len(&self) -> usize {
        self.pattern.frame_len_for(self.n_code)
    }

    pub fn pilots(&self) -> Vec<bool> {
        self.pattern.mask(self.frame_len())
    }

    /// Frame positions of the code bits, in codeword order.
    pub fn data_positions(&self) -> Vec<usize> {
        (0..self.frame_len()).filter(|&i| !self.pattern.is_pilot(i)).collect()
    }

    /// Symbols for a codeword: bit `b` maps to `1 - 2b`, pilots are `+1`.
    pub fn symbols(&self, codeword: &[u8]) -> Vec<Symbol> {
        assert_eq!(codeword.len(), self.n_code, "codeword length differs from layout");
        let mut x = vec![1; self.frame_len()];
        for (&pos, &b) in self.data_positions().iter().zip(codeword) {
            x[pos] = 1 - 2 * (b & 1) as Symbol;
        }
        x
    }
}

/// Result of [`joint_receive`].
#[derive(Clone, Debug, PartialEq)]
pub struct JointOutput {
    pub info_bits: Vec<u8>,
    /// Hard decisions on the whole codeword after the last decoding round.
    pub codeword: Vec<u8>,
    pub valid: bool,
    /// Detector runs performed.
    pub exchanges: usize,
    pub fallback_fusions: usize,
}

/// Joint detection and decoding of one coded frame.
///
/// Each exchange runs the detector with the current bit priors (uniform the
/// first time), passes its extrinsic LLRs at the data positions to a freshly
/// started decoder for `i_dec` iterations, and feeds the decoder's extrinsic
/// LLRs back as symbol priors. Stops early once the decoder output is a
/// codeword.
pub fn joint_receive(
    obs: &[CVec<f64>],
    pilots: &[bool],
    code: &LdpcCode,
    cfg: &DetectorConfig<f64>,
    sched: Schedule,
) -> Result<JointOutput> {
    if obs.len() != pilots.len() {
        return Err(Error::DimensionMismatch("observations and pilot mask".into()));
    }
    let data: Vec<usize> = (0..pilots.len()).filter(|&i| !pilots[i]).collect();
    if data.len() != code.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} data positions for a length-{} code",
            data.len(),
            code.n()
        )));
    }
    let mut priors: Vec<SymbolPrior<f64>> = pilots
        .iter()
        .map(|&p| {
            if p {
                SymbolPrior::pilot()
            } else {
                SymbolPrior::uniform()
            }
        })
        .collect();
    let mut out = JointOutput {
        info_bits: Vec::new(),
        codeword: Vec::new(),
        valid: false,
        exchanges: 0,
        fallback_fusions: 0,
    };
    for _ in 0..sched.i_det {
        let det = detect_frame(obs, &priors, cfg)?;
        out.exchanges += 1;
        out.fallback_fusions += det.fallback_fusions;
        let llr_in: Vec<f64> = data.iter().map(|&i| clamp_llr(det.extrinsic_llr[i])).collect();
        let dec = decode(&code.h, &llr_in, sched.i_dec);
        out.codeword = hard_decision(&dec.llr_post);
        out.valid = dec.valid;
        if dec.valid {
            break;
        }
        for (&i, &e) in data.iter().zip(&dec.llr_ext) {
            priors[i] = SymbolPrior::from_llr(e);
        }
    }
    out.info_bits = code.encoder.extract(&out.codeword);
    Ok(out)
}
