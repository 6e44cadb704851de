//! Gaussian-mixture belief-propagation receiver for BPSK over time-correlated
//! Rayleigh fading with one co-channel interferer, plus reference receivers,
//! an LDPC code with iterative detection/decoding, and a Monte Carlo harness.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod ldpc;
pub mod linalg;
pub mod mixture_bp;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use rng::{Purpose, RandomStream};
pub use scalar::Real;

/// `f64` instantiations of the generic types.
pub type CVec = linalg::CVec<f64>;
pub type CMat = linalg::CMat<f64>;
pub type GaussianDensity = gaussian::GaussianDensity<f64>;
pub type MixtureComponent = gaussian::MixtureComponent<f64>;
pub type GaussianMixture = gaussian::GaussianMixture<f64>;
pub type ChannelParams = channel::ChannelParams<f64>;
pub type FadingTrace = channel::FadingTrace<f64>;
pub type FrameRealization = channel::FrameRealization<f64>;
pub type SymbolPrior = mixture_bp::SymbolPrior<f64>;
pub type DetectorConfig = mixture_bp::DetectorConfig<f64>;
pub type DetectorOutput = mixture_bp::DetectorOutput<f64>;
pub type MmseEstimate = baselines::MmseEstimate<f64>;
pub type FloorParams = baselines::FloorParams<f64>;
