//! Independent reference computations for the integration tests. These use
//! nalgebra's dense complex linear algebra and brute-force enumeration only.
#![allow(dead_code)]

use gmbp::linalg::{CMat, CVec};
use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

pub fn to_na_vec(v: &CVec<f64>) -> DVector<C64> {
    DVector::from_iterator(v.len(), v.iter().copied())
}

pub fn to_na_mat(m: &CMat<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// log CN(x; 0, cov) through nalgebra's Cholesky.
pub fn na_logpdf(x: &DVector<C64>, cov: &DMatrix<C64>) -> f64 {
    let r = x.len() as f64;
    let chol = cov.clone().cholesky().expect("oracle covariance must be PD");
    let l = chol.l();
    let logdet: f64 = 2.0 * (0..x.len()).map(|i| l[(i, i)].re.ln()).sum::<f64>();
    let z = chol.solve(x);
    let quad = x.dotc(&z).re;
    -r * std::f64::consts::PI.ln() - logdet - quad
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub struct Model {
    pub alpha: f64,
    pub sh2: f64,
    pub shp2: f64,
    pub sn2: f64,
}

/// Covariance of one antenna's observation sequence given both symbol sequences.
fn obs_cov(m: &Model, x: &[i8], xp: &[i8]) -> DMatrix<C64> {
    let l = x.len();
    DMatrix::from_fn(l, l, |i, j| {
        let rho = m.alpha.powi((i as i32 - j as i32).abs());
        let v = (x[i] * x[j]) as f64 * m.sh2 * rho
            + (xp[i] * xp[j]) as f64 * m.shp2 * rho
            + if i == j { m.sn2 } else { 0.0 };
        Complex::new(v, 0.0)
    })
}

fn symbols(bits: usize, l: usize) -> Vec<i8> {
    (0..l).map(|i| if bits >> i & 1 == 0 { 1 } else { -1 }).collect()
}

/// `P(x_i = +1 | y)` by enumerating every desired and interferer sequence.
/// `y[i]` holds the `n_rx` antennas at symbol `i`; antennas are independent
/// given the symbols.
pub fn brute_force_posteriors(m: &Model, y: &[Vec<C64>], p_plus: &[f64]) -> Vec<f64> {
    let l = y.len();
    let n_rx = y[0].len();
    let mut terms: Vec<(Vec<i8>, f64)> = Vec::new();
    for xb in 0..(1usize << l) {
        let x = symbols(xb, l);
        let lp: f64 = (0..l)
            .map(|i| {
                if x[i] > 0 {
                    p_plus[i].ln()
                } else {
                    (1.0 - p_plus[i]).ln()
                }
            })
            .sum();
        if lp == f64::NEG_INFINITY {
            continue;
        }
        for xpb in 0..(1usize << l) {
            let xp = symbols(xpb, l);
            let cov = obs_cov(m, &x, &xp);
            let mut ll = lp + l as f64 * 0.5f64.ln();
            for a in 0..n_rx {
                let ya = DVector::from_iterator(l, (0..l).map(|i| y[i][a]));
                ll += na_logpdf(&ya, &cov);
            }
            terms.push((x.clone(), ll));
        }
    }
    (0..l)
        .map(|i| {
            let plus: Vec<f64> = terms.iter().filter(|t| t.0[i] > 0).map(|t| t.1).collect();
            let all: Vec<f64> = terms.iter().map(|t| t.1).collect();
            (log_sum_exp(&plus) - log_sum_exp(&all)).exp()
        })
        .collect()
}

/// Exact `p(g_k | y_0..y_{k-1})` for `n_rx = 1` as (log weight, mean, cov)
/// terms, one per symbol-pair prefix, by joint Gaussian conditioning.
pub fn brute_force_predictive(
    m: &Model,
    y: &[C64],
    p_plus: &[f64],
    xp_plus: &[f64],
    k: usize,
) -> Vec<(f64, DVector<C64>, DMatrix<C64>)> {
    let mut out = Vec::new();
    let lag = |a: usize, b: usize| m.alpha.powi((a as i32 - b as i32).abs());
    for xb in 0..(1usize << k) {
        let x = symbols(xb, k);
        for xpb in 0..(1usize << k) {
            let xp = symbols(xpb, k);
            let mut lp = 0.0;
            for i in 0..k {
                lp += if x[i] > 0 {
                    p_plus[i].ln()
                } else {
                    (1.0 - p_plus[i]).ln()
                };
                lp += if xp[i] > 0 {
                    xp_plus[i].ln()
                } else {
                    (1.0 - xp_plus[i]).ln()
                };
            }
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let q = DMatrix::from_diagonal(&DVector::from_vec(vec![
                Complex::new(m.sh2, 0.0),
                Complex::new(m.shp2, 0.0),
            ]));
            if k == 0 {
                out.push((0.0, DVector::zeros(2), q));
                continue;
            }
            let syy = obs_cov(m, &x, &xp);
            let sgy = DMatrix::from_fn(2, k, |r, j| {
                let v = if r == 0 {
                    x[j] as f64 * m.sh2
                } else {
                    xp[j] as f64 * m.shp2
                } * lag(k, j);
                Complex::new(v, 0.0)
            });
            let yv = DVector::from_iterator(k, y[..k].iter().copied());
            let chol = syy.clone().cholesky().unwrap();
            let mean = &sgy * chol.solve(&yv);
            let cov = &q - &sgy * chol.solve(&sgy.adjoint());
            out.push((lp + na_logpdf(&yv, &syy), mean, cov));
        }
    }
    let lws: Vec<f64> = out.iter().map(|t| t.0).collect();
    let total = log_sum_exp(&lws);
    for t in &mut out {
        t.0 -= total;
    }
    out
}

/// Density of a (log weight, mean, cov) mixture at `g`.
pub fn mixture_pdf(terms: &[(f64, DVector<C64>, DMatrix<C64>)], g: &DVector<C64>) -> f64 {
    terms
        .iter()
        .map(|(lw, mean, cov)| (lw + na_logpdf(&(g - mean), cov)).exp())
        .sum()
}

/// Distribution of `g_i` given `y_{i-1}` under one hypothesis, by building the
/// joint covariance of `(g_{i-1}, g_i, y_{i-1})` from its linear generative
/// map and taking the Schur complement.
pub fn joint_conditioning(
    mean: &DVector<C64>,
    cov: &DMatrix<C64>,
    q: &DMatrix<C64>,
    z: &DMatrix<C64>,
    alpha: f64,
    sn2: f64,
    y: &DVector<C64>,
) -> (DVector<C64>, DMatrix<C64>) {
    let m = mean.len();
    let n = z.nrows();
    let dim = 2 * m + n;
    // [g_prev; g_next; y] = A [g_prev; u; noise] with independent blocks
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    let c = |v: f64| Complex::new(v, 0.0);
    for i in 0..m {
        a[(i, i)] = c(1.0);
        a[(m + i, i)] = c(alpha);
        a[(m + i, m + i)] = c((1.0 - alpha * alpha).sqrt());
    }
    for r in 0..n {
        for j in 0..m {
            a[(2 * m + r, j)] = z[(r, j)];
        }
        a[(2 * m + r, 2 * m + r)] = c(1.0);
    }
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    d.view_mut((0, 0), (m, m)).copy_from(cov);
    d.view_mut((m, m), (m, m)).copy_from(q);
    for r in 0..n {
        d[(2 * m + r, 2 * m + r)] = c(sn2);
    }
    let mut mu = DVector::<C64>::zeros(dim);
    mu.rows_mut(0, m).copy_from(mean);
    let joint_mean = &a * &mu;
    let joint = &a * d * a.adjoint();
    let s_gg = joint.view((m, m), (m, m)).clone_owned();
    let s_gy = joint.view((m, 2 * m), (m, n)).clone_owned();
    let s_yy = joint.view((2 * m, 2 * m), (n, n)).clone_owned();
    let chol = s_yy.cholesky().unwrap();
    let resid = y - joint_mean.rows(2 * m, n);
    let cond_mean = joint_mean.rows(m, m) + &s_gy * chol.solve(&resid);
    let cond_cov = s_gg - &s_gy * chol.solve(&s_gy.adjoint());
    (cond_mean, cond_cov)
}

use gmbp::channel::{gen_gauss_markov, gen_interferer_symbols, simulate_frame, ChannelParams};
use gmbp::mixture_bp::SymbolPrior;
use rand::Rng;

/// Small random frame for the enumeration oracles: random correlation, SNR
/// and SIR, roughly a third of the positions pilots.
pub struct TinyInstance {
    pub params: ChannelParams<f64>,
    pub y: Vec<CVec<f64>>,
    pub priors: Vec<SymbolPrior<f64>>,
}

pub fn tiny_instance<R: Rng>(rng: &mut R, l: usize, n_rx: usize) -> TinyInstance {
    let alpha = rng.random_range(0.5..0.999);
    let snr_db = rng.random_range(0.0..25.0);
    let sir_db = rng.random_range(0.0..10.0);
    let params = ChannelParams::from_db(alpha, snr_db, sir_db, n_rx);
    let pilots: Vec<bool> = (0..l).map(|_| rng.random_bool(0.3)).collect();
    let x: Vec<i8> = pilots
        .iter()
        .map(|&p| if p || rng.random_bool(0.5) { 1 } else { -1 })
        .collect();
    let xp = gen_interferer_symbols(rng, l);
    let trace = gen_gauss_markov(rng, &params, l);
    let frame = simulate_frame(rng, &params, trace, x, xp, pilots.clone()).unwrap();
    let priors = gmbp::mixture_bp::pilot_priors(&pilots);
    TinyInstance {
        params,
        y: frame.y,
        priors,
    }
}

impl TinyInstance {
    pub fn model(&self) -> Model {
        Model {
            alpha: self.params.alpha,
            sh2: self.params.sigma_h2,
            shp2: self.params.sigma_hp2,
            sn2: self.params.sigma_n2,
        }
    }

    pub fn y_rows(&self) -> Vec<Vec<C64>> {
        self.y.iter().map(|v| v.as_slice().to_vec()).collect()
    }

    pub fn p_plus(&self) -> Vec<f64> {
        self.priors.iter().map(|p| p.p_plus).collect()
    }
}
