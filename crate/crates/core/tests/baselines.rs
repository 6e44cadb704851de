use gmbp::baselines::*;
use gmbp::channel::{
    gen_gauss_markov, gen_interferer_symbols, gen_symbols, simulate_frame, ChannelParams, FrameRealization,
    PilotPattern,
};
use gmbp::RandomStream;
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

fn frame(seed: u64, p: &ChannelParams<f64>, period: usize, l: usize) -> FrameRealization<f64> {
    let mut rng = RandomStream::new(seed);
    let trace = gen_gauss_markov(&mut rng, p, l);
    let (x, pilots) = gen_symbols(&mut rng, &PilotPattern::new(period, 0).unwrap(), l);
    let xp = gen_interferer_symbols(&mut rng, l);
    simulate_frame(&mut rng, p, trace, x, xp, pilots).unwrap()
}

#[test]
fn mmse_matches_gaussian_conditioning() {
    let mut rng = RandomStream::new(100);
    for trial in 0..50u64 {
        let p = ChannelParams {
            alpha: rng.random_range(0.5..1.0),
            sigma_h2: rng.random_range(0.5..2.0),
            sigma_hp2: rng.random_range(0.0..1.0),
            sigma_n2: rng.random_range(0.01..1.0),
            n_rx: 2,
        };
        let period = 2 + (trial % 4) as usize;
        let f = frame(trial, &p, period, 40);
        let cfg = MmseConfig::for_pattern(&PilotPattern::new(period, 0).unwrap());
        let est = mmse_estimate_full(&f.y, &f.pilots, &p, &cfg).unwrap();
        for i in 0..40 {
            // joint covariance of (h_i, pilot observations in the window), one antenna
            let used: Vec<usize> = (0..40)
                .filter(|&j| f.pilots[j] && (j as i64 - i as i64).unsigned_abs() as usize <= cfg.window)
                .collect();
            let k = used.len();
            let cov = |a: usize, b: usize| p.sigma_h2 * p.alpha.powi((a as i32 - b as i32).abs());
            let syy = DMatrix::from_fn(k, k, |a, b| {
                let noise = if a == b { p.sigma_hp2 + p.sigma_n2 } else { 0.0 };
                Complex::new(cov(used[a], used[b]) + noise, 0.0)
            });
            let shy = DMatrix::from_fn(1, k, |_, b| Complex::new(cov(i, used[b]), 0.0));
            let inv = syy.try_inverse().unwrap();
            for ant in 0..2 {
                let yv = DVector::from_iterator(k, used.iter().map(|&j| f.y[j][ant]));
                let expect = (&shy * &inv * yv)[(0, 0)];
                assert!((est.h[i][ant] - expect).norm() <= 1e-10 * expect.norm().max(1.0));
            }
            let var = p.sigma_h2 - (&shy * &inv * shy.adjoint())[(0, 0)].re;
            assert!((est.err_var[i] - var).abs() < 1e-10);
        }
    }
}

#[test]
fn genie_matches_neighbour_conditioning() {
    let mut rng = RandomStream::new(7);
    for _ in 0..50 {
        let alpha: f64 = rng.random_range(0.0..0.999);
        let p = ChannelParams {
            alpha,
            sigma_h2: 1.3,
            sigma_hp2: 0.4,
            sigma_n2: 0.1,
            n_rx: 2,
        };
        let trace = gen_gauss_markov(&mut rng, &p, 3);
        // (h_0, h_1, h_2) has covariance s alpha^|j-k|; condition h_1 on (h_0, h_2)
        let g = genie_estimate(&trace, 1, alpha);
        for (s, seq, est) in [(p.sigma_h2, &trace.h, &g.h), (p.sigma_hp2, &trace.hp, &g.hp)] {
            let c = DMatrix::from_fn(3, 3, |a, b| s * alpha.powi((a as i32 - b as i32).abs()));
            let s_oo = DMatrix::from_fn(2, 2, |a, b| c[(2 * a, 2 * b)]);
            let s_to = DMatrix::from_fn(1, 2, |_, b| c[(1, 2 * b)]);
            let inv = s_oo.try_inverse().unwrap();
            let var = c[(1, 1)] - (&s_to * &inv * s_to.transpose())[(0, 0)];
            assert!((g.var_factor * s - var).abs() < 1e-12);
            let w = &s_to * &inv;
            for ant in 0..2 {
                let expect = seq[0][ant] * w[(0, 0)] + seq[2][ant] * w[(0, 1)];
                assert!((est[ant] - expect).norm() < 1e-12);
            }
        }
    }
}

fn errors(a: &[i8], b: &[i8], pilots: &[bool]) -> usize {
    (0..a.len()).filter(|&i| !pilots[i] && a[i] != b[i]).count()
}

#[test]
fn coherent_combining_matches_textbook_rayleigh_ber() {
    // known channel, no interferer, 5 dB per antenna
    let snr = 10f64.powf(0.5);
    let p = ChannelParams {
        alpha: 0.0,
        sigma_h2: 1.0,
        sigma_hp2: 0.0,
        sigma_n2: 1.0 / snr,
        n_rx: 2,
    };
    let (mut errs, mut bits) = (0usize, 0usize);
    for t in 0..1250u64 {
        let f = frame(1000 + t, &p, 1000, 801);
        let d = mmse_detect(&f.trace.h, &f.y).unwrap();
        errs += errors(&d, &f.x, &f.pilots);
        bits += f.pilots.iter().filter(|&&q| !q).count();
    }
    let ber = errs as f64 / bits as f64;
    let mu = (snr / (1.0 + snr)).sqrt();
    let expect = ((1.0 - mu) / 2.0).powi(2) * (2.0 + mu);
    let sd = (expect * (1.0 - expect) / bits as f64).sqrt();
    assert!(bits >= 1_000_000);
    assert!((ber - expect).abs() < 2.0 * sd, "{ber} vs {expect}");
}

#[test]
fn full_csi_beats_genie() {
    let p = ChannelParams::from_db(0.99, 20.0, 0.0, 2);
    let (mut e_ml, mut e_genie, mut bits) = (0usize, 0usize, 0usize);
    let mut diffs = Vec::new();
    for t in 0..5000u64 {
        let f = frame(t, &p, 4, 267);
        let ml = full_csi_ml_detect(&f.trace, &f.y, &p).unwrap();
        let g = genie_detect(&f.trace, &f.y, &p).unwrap();
        let (a, b) = (errors(&ml, &f.x, &f.pilots), errors(&g.x, &f.x, &f.pilots));
        e_ml += a;
        e_genie += b;
        diffs.push(b as f64 - a as f64);
        bits += f.pilots.iter().filter(|&&q| !q).count();
    }
    assert!(bits >= 1_000_000);
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(e_ml < e_genie);
    assert!(mean > 1.96 * sd / n.sqrt(), "ml {e_ml} genie {e_genie}");
}

fn genie_ber(p: &ChannelParams<f64>, frames: u64, l: usize, seed: u64) -> f64 {
    let (mut errs, mut bits) = (0usize, 0usize);
    for t in 0..frames {
        let f = frame(seed + t, p, 1_000_000, l);
        let g = genie_detect(&f.trace, &f.y, p).unwrap();
        errs += errors(&g.x, &f.x, &f.pilots);
        bits += f.pilots.iter().filter(|&&q| !q).count();
    }
    errs as f64 / bits as f64
}

/// Dual-branch Rayleigh MRC error probability for branch SNR `g`.
fn mrc2(g: f64) -> f64 {
    let mu = (g / (1.0 + g)).sqrt();
    ((1.0 - mu) / 2.0).powi(2) * (2.0 + mu)
}

#[test]
fn interior_genie_ber_matches_two_sided_estimate_quality() {
    // With both neighbours known the estimate carries power 2 a^2 s / (1 + a^2)
    // against the residual variance.
    let p = ChannelParams::from_db(0.99, 40.0, 3.0, 2);
    let st = FloorParams::try_from(&p).unwrap().residual_variance();
    let a2 = p.alpha * p.alpha;
    let g = |s: f64| 2.0 * a2 * s / ((1.0 + a2) * st);
    let expect = mrc2(g(p.sigma_h2)) + mrc2(g(p.sigma_h2 + p.sigma_hp2));
    let ber = genie_ber(&p, 3000, 1000, 50_000);
    assert!((ber / expect - 1.0).abs() < 0.3, "simulated {ber}, expected {expect}");
}

#[test]
fn analytic_floor_matches_one_sided_genie() {
    // In two-symbol frames every symbol has a single neighbour; that genie
    // reproduces the closed-form floor.
    let p = ChannelParams::from_db(0.99, 60.0, 3.0, 2);
    let floor = analytic_error_floor(&FloorParams::try_from(&p).unwrap());
    let ber = genie_ber(&p, 1_000_000, 2, 0);
    assert!((ber / floor - 1.0).abs() < 0.3, "simulated {ber}, analytic {floor}");
}
