//! Circularly-symmetric complex Gaussian densities and mixtures of them.
//!
//! Mixture weights are kept as natural logs throughout; likelihoods of
//! competing hypotheses routinely differ by hundreds of nats.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, Cholesky};
use crate::scalar::{LogAccumulator, Real};

/// Hermitian tolerance (max elementwise `|K - K^H|`) for covariance checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed negative eigenvalue, relative to the trace, for PSD checks.
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalue floor, relative to the trace, applied by covariance repair.
pub const REPAIR_FLOOR: f64 = 1e-12;

/// `CN(mean, cov)`: proper complex Gaussian with `E[(x-m)(x-m)^H] = cov`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDensity<T> {
    pub mean: CVec<T>,
    pub cov: CMat<T>,
}

impl<T: Real> GaussianDensity<T> {
    pub fn new(mean: CVec<T>, cov: CMat<T>) -> Result<Self> {
        if !cov.is_square() || cov.rows() != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries, covariance is {}x{}",
                mean.len(),
                cov.rows(),
                cov.cols()
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn zero_mean(cov: CMat<T>) -> Self {
        Self {
            mean: CVec::zeros(cov.rows()),
            cov,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_pdf(&self, x: &CVec<T>) -> Result<T> {
        cn_logpdf(x, &self.mean, &self.cov)
    }

    /// Hermitian and PSD within [`HERMITIAN_TOL`] / [`PSD_TOL`], finite mean.
    pub fn is_valid(&self) -> bool {
        self.mean.is_finite() && self.cov.is_finite() && self.cov.is_psd(T::lit(HERMITIAN_TOL), T::lit(PSD_TOL))
    }
}

/// `log CN(x; mean, cov) = -r log(pi) - log det(cov) - (x-m)^H cov^{-1} (x-m)`.
pub fn cn_logpdf<T: Real>(x: &CVec<T>, mean: &CVec<T>, cov: &CMat<T>) -> Result<T> {
    if x.len() != mean.len() || cov.rows() != x.len() || !cov.is_square() {
        return Err(Error::DimensionMismatch("cn_logpdf arguments".into()));
    }
    let chol = cov.cholesky()?;
    Ok(cn_logpdf_factored(&(x - mean), &chol))
}

/// Log-density of the residual `x - m` given a Cholesky factor of the covariance.
pub fn cn_logpdf_factored<T: Real>(residual: &CVec<T>, chol: &Cholesky<T>) -> T {
    let r = T::from_usize(residual.len()).unwrap();
    -r * T::PI().ln() - chol.log_det() - chol.quad_form(residual)
}

/// Zero-mean CSCG draw with covariance `cov`; real and imaginary parts each
/// carry half the variance.
pub fn sample_cscg<T: Real, R: Rng + ?Sized>(rng: &mut R, cov: &CMat<T>) -> CVec<T> {
    let n = cov.rows();
    let half = T::lit(0.5).sqrt();
    let z = CVec::from_fn(n, |_| {
        Complex::new(T::standard_normal(rng), T::standard_normal(rng)).scale(half)
    });
    cov.psd_factor().mul_vec(&z)
}

/// `n` i.i.d. `CN(0, var)` entries.
pub fn sample_white<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T, n: usize) -> CVec<T> {
    let s = (var * T::lit(0.5)).sqrt();
    CVec::from_fn(n, |_| {
        Complex::new(T::standard_normal(rng), T::standard_normal(rng)).scale(s)
    })
}

/// Precision-form view of a Gaussian: `Lambda = K^{-1}`, `eta = Lambda m`,
/// plus `log det K` and `m^H Lambda m`.
#[derive(Clone, Debug)]
pub struct InformationForm<T> {
    pub precision: CMat<T>,
    pub info: CVec<T>,
    pub log_det_cov: T,
    pub mean_quad: T,
}

impl<T: Real> InformationForm<T> {
    pub fn from_density(d: &GaussianDensity<T>) -> Result<Self> {
        let chol = d.cov.cholesky()?;
        let info = chol.solve(&d.mean);
        let mean_quad = d.mean.dot(&info).re;
        Ok(Self {
            precision: chol.inverse(),
            info,
            log_det_cov: chol.log_det(),
            mean_quad,
        })
    }
}

/// Result of multiplying (and dividing) Gaussian densities: the product equals
/// `exp(log_scale) * fused` pointwise.
#[derive(Clone, Debug)]
pub struct Fusion<T> {
    pub log_scale: T,
    pub fused: GaussianDensity<T>,
}

/// `N_f * N_b / N_prior` (or `N_f * N_b` without a prior) in precision form.
pub fn fuse_information<T: Real>(
    f: &InformationForm<T>,
    b: &InformationForm<T>,
    prior: Option<&InformationForm<T>>,
) -> Result<Fusion<T>> {
    let mut precision = &f.precision + &b.precision;
    let mut info = &f.info + &b.info;
    let mut log_scale = -f.log_det_cov - b.log_det_cov - f.mean_quad - b.mean_quad;
    let r = T::from_usize(info.len()).unwrap();
    match prior {
        Some(p) => {
            precision.axpy(-T::one(), &p.precision);
            info.axpy(-T::one(), &p.info);
            log_scale = log_scale + p.log_det_cov + p.mean_quad;
        }
        None => log_scale = log_scale - r * T::PI().ln(),
    }
    let chol = precision
        .hermitian_part()
        .cholesky()
        .map_err(|_| Error::IndefiniteFusion)?;
    let mean = chol.solve(&info);
    log_scale = log_scale - chol.log_det() + info.dot(&mean).re;
    Ok(Fusion {
        log_scale,
        fused: GaussianDensity {
            mean,
            cov: chol.inverse(),
        },
    })
}

/// `N_f * N_b / N_prior = exp(log_scale) * N_fused`.
///
/// Fails with [`Error::IndefiniteFusion`] when `Lambda_f + Lambda_b - Lambda_prior`
/// is not positive definite; [`fuse_product`] is the fallback.
pub fn fuse_quotient<T: Real>(
    f: &GaussianDensity<T>,
    b: &GaussianDensity<T>,
    prior: &GaussianDensity<T>,
) -> Result<Fusion<T>> {
    if f.dim() != b.dim() || f.dim() != prior.dim() {
        return Err(Error::DimensionMismatch("fusion operands".into()));
    }
    fuse_information(
        &InformationForm::from_density(f)?,
        &InformationForm::from_density(b)?,
        Some(&InformationForm::from_density(prior)?),
    )
}

/// `N_f * N_b = exp(log_scale) * N_fused`.
pub fn fuse_product<T: Real>(f: &GaussianDensity<T>, b: &GaussianDensity<T>) -> Result<Fusion<T>> {
    if f.dim() != b.dim() {
        return Err(Error::DimensionMismatch("fusion operands".into()));
    }
    fuse_information(
        &InformationForm::from_density(f)?,
        &InformationForm::from_density(b)?,
        None,
    )
}

/// One weighted term of a mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent<T> {
    /// Natural log of the (possibly unnormalized) weight; `-inf` is zero weight.
    pub log_weight: T,
    pub density: GaussianDensity<T>,
}

/// Weighted sum of complex Gaussian densities.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture<T> {
    components: Vec<MixtureComponent<T>>,
}

impl<T: Real> GaussianMixture<T> {
    pub fn new(components: Vec<MixtureComponent<T>>) -> Self {
        Self { components }
    }

    pub fn single(density: GaussianDensity<T>) -> Self {
        Self {
            components: vec![MixtureComponent {
                log_weight: T::zero(),
                density,
            }],
        }
    }

    pub fn components(&self) -> &[MixtureComponent<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<MixtureComponent<T>> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.density.dim())
    }

    pub fn log_weights(&self) -> impl Iterator<Item = T> + '_ {
        self.components.iter().map(|c| c.log_weight)
    }

    /// `logsumexp` of the log weights.
    pub fn log_total(&self) -> T {
        let mut acc = LogAccumulator::new();
        for c in &self.components {
            acc.add(c.log_weight);
        }
        acc.value()
    }

    /// Shifts log weights so they sum to one.
    pub fn normalize(mut self) -> Result<Self> {
        let total = self.log_total();
        if !total.is_finite() {
            return Err(Error::EmptyMixture);
        }
        for c in &mut self.components {
            c.log_weight = c.log_weight - total;
        }
        Ok(self)
    }

    /// Keeps the `cap` heaviest components (ties: lower index first), in their
    /// original order, then renormalizes.
    pub fn prune(self, cap: usize) -> Result<Self> {
        assert!(cap >= 1, "component cap must be at least 1");
        if self.components.len() <= cap {
            return self.normalize();
        }
        let mut order: Vec<usize> = (0..self.components.len()).collect();
        order.sort_by(|&a, &b| {
            let (wa, wb) = (self.components[a].log_weight, self.components[b].log_weight);
            wb.partial_cmp(&wa).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut keep = vec![false; self.components.len()];
        for &i in &order[..cap] {
            keep[i] = true;
        }
        let components = self
            .components
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        Self { components }.normalize()
    }

    /// Normalized linear weights.
    pub fn weights(&self) -> Vec<T> {
        let total = self.log_total();
        self.components.iter().map(|c| (c.log_weight - total).exp()).collect()
    }

    /// Mixture mean `sum_j rho_j m_j`.
    pub fn mean(&self) -> CVec<T> {
        let mut mean = CVec::zeros(self.dim());
        for (w, c) in self.weights().into_iter().zip(&self.components) {
            mean.axpy(w, &c.density.mean);
        }
        mean
    }

    /// Single Gaussian with the mixture's first two moments.
    pub fn collapse(&self) -> GaussianDensity<T> {
        let weights = self.weights();
        let mean = self.mean();
        let n = self.dim();
        let mut cov = CMat::zeros(n, n);
        for (w, c) in weights.into_iter().zip(&self.components) {
            if w == T::zero() {
                continue;
            }
            cov.axpy(w, &c.density.cov);
            let d = &c.density.mean - &mean;
            cov.axpy(w, &CMat::outer(&d));
        }
        GaussianDensity {
            mean,
            cov: cov.hermitian_part(),
        }
    }

    /// Density of the mixture at `x`.
    pub fn log_pdf(&self, x: &CVec<T>) -> Result<T> {
        let total = self.log_total();
        let mut acc = LogAccumulator::new();
        for c in &self.components {
            acc.add(c.log_weight - total + c.density.log_pdf(x)?);
        }
        Ok(acc.value())
    }

    /// One draw from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec<T> {
        let weights = self.weights();
        let u = T::from_f64(rng.random::<f64>()).unwrap();
        let mut acc = T::zero();
        let mut pick = self.components.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc = acc + *w;
            if u < acc {
                pick = i;
                break;
            }
        }
        let d = &self.components[pick].density;
        &d.mean + &sample_cscg(rng, &d.cov)
    }
}

/// Free-function form of [`GaussianMixture::normalize`].
pub fn mixture_normalize<T: Real>(m: GaussianMixture<T>) -> Result<GaussianMixture<T>> {
    m.normalize()
}

/// Free-function form of [`GaussianMixture::prune`].
pub fn mixture_prune<T: Real>(m: GaussianMixture<T>, cap: usize) -> Result<GaussianMixture<T>> {
    m.prune(cap)
}

/// Free-function form of [`GaussianMixture::collapse`].
pub fn mixture_collapse<T: Real>(m: &GaussianMixture<T>) -> GaussianDensity<T> {
    m.collapse()
}
