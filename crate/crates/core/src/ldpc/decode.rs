//! Flooding sum-product decoding with the tanh rule.

use super::matrix::SparseParityMatrix;

/// LLRs are `log P(bit = 0) / P(bit = 1)` and are kept inside `±LLR_CLAMP`.
pub const LLR_CLAMP: f64 = 50.0;

pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// Hard decision, bit 0 for a non-negative LLR.
pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub llr_post: Vec<f64>,
    /// `llr_post - llr_in`: what the decoder adds to its input.
    pub llr_ext: Vec<f64>,
    pub valid: bool,
    pub iterations: usize,
}

impl DecodeResult {
    pub fn decisions(&self) -> Vec<u8> {
        hard_decision(&self.llr_post)
    }
}

/// Sum-product decoding for at most `iters` iterations; stops as soon as the
/// hard decisions satisfy every check. Inputs are clamped to `±LLR_CLAMP`
/// first and the extrinsic output is taken against the clamped input.
pub fn decode(h: &SparseParityMatrix, llr_in: &[f64], iters: usize) -> DecodeResult {
    assert_eq!(llr_in.len(), h.cols(), "LLR length differs from code length");
    let input: Vec<f64> = llr_in.iter().map(|&x| clamp_llr(x)).collect();

    // edge e belongs to check c; offsets[c]..offsets[c+1] are its edges
    let mut offsets = Vec::with_capacity(h.rows() + 1);
    let mut edge_var = Vec::with_capacity(h.edges());
    offsets.push(0);
    for c in 0..h.rows() {
        edge_var.extend_from_slice(h.check(c));
        offsets.push(edge_var.len());
    }
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| input[v]).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut post = input.clone();
    let mut valid = h.is_codeword(&hard_decision(&post));
    let mut done = 0;
    let mut tanh_buf = Vec::new();
    let mut prefix = Vec::new();

    while done < iters {
        done += 1;
        for c in 0..h.rows() {
            let (lo, hi) = (offsets[c], offsets[c + 1]);
            tanh_buf.clear();
            tanh_buf.extend(v2c[lo..hi].iter().map(|&m| (0.5 * m).tanh()));
            // products excluding self via prefix and suffix products
            prefix.clear();
            let mut acc = 1.0;
            for &t in &tanh_buf {
                prefix.push(acc);
                acc *= t;
            }
            let mut suffix = 1.0;
            for j in (0..tanh_buf.len()).rev() {
                let p = (prefix[j] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                c2v[lo + j] = clamp_llr(2.0 * p.atanh());
                suffix *= tanh_buf[j];
            }
        }
        post.copy_from_slice(&input);
        for (e, &v) in edge_var.iter().enumerate() {
            post[v] += c2v[e];
        }
        for (e, &v) in edge_var.iter().enumerate() {
            v2c[e] = clamp_llr(post[v] - c2v[e]);
        }
        for p in post.iter_mut() {
            *p = clamp_llr(*p);
        }
        valid = h.is_codeword(&hard_decision(&post));
        if valid {
            break;
        }
    }
    let llr_ext = post.iter().zip(&input).map(|(p, i)| p - i).collect();
    DecodeResult {
        llr_post: post,
        llr_ext,
        valid,
        iterations: done,
    }
}
