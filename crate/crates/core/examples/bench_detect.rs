//! Per-frame detector timing.

use gmbp::channel::*;
use gmbp::mixture_bp::*;
use gmbp::RandomStream;
use std::time::Instant;

fn main() {
    let params = ChannelParams::from_db(0.99, 20.0, 3.0, 2);
    let pattern = PilotPattern::new(4, 0).unwrap();
    for (l, cap) in [(200, 8), (667, 8)] {
        let cfg = DetectorConfig::new(params).with_cap(cap).with_channel_posteriors(false);
        let n = 20;
        let (mut t_f, mut t_b, mut t_p) = (0.0, 0.0, 0.0);
        for s in 0..n {
            let mut rng = RandomStream::new(s);
            let trace = gen_gauss_markov(&mut rng, &params, l);
            let (x, pilots) = gen_symbols(&mut rng, &pattern, l);
            let xp = gen_interferer_symbols(&mut rng, l);
            let f = simulate_frame(&mut rng, &params, trace, x, xp, pilots).unwrap();
            let priors = pilot_priors(&f.pilots);
            let t = Instant::now();
            let fwd = forward_pass(&f.y, &priors, &cfg).unwrap();
            t_f += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let bwd = backward_pass(&f.y, &priors, &cfg).unwrap();
            t_b += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let _ = symbol_posteriors(&f.y, &priors, &fwd, &bwd, &cfg).unwrap();
            t_p += t.elapsed().as_secs_f64();
        }
        let ms = |t: f64| t * 1e3 / n as f64;
        println!(
            "l={l} cap={cap}: forward {:.1} backward {:.1} posteriors {:.1} ms/frame",
            ms(t_f),
            ms(t_b),
            ms(t_p)
        );
    }
}
