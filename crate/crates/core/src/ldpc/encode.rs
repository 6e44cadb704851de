//! Systematic encoding by Gaussian elimination over GF(2).

use super::matrix::SparseParityMatrix;
use crate::error::{Error, Result};

/// Dense GF(2) row packed into 64-bit words.
#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Precomputed systematic encoder: information bits sit at the non-pivot
/// columns of the reduced row echelon form of `H`, and each parity bit is the
/// XOR of a fixed subset of information bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoder {
    n: usize,
    info_cols: Vec<usize>,
    /// `(pivot column, indices into info_cols)` per row.
    parity: Vec<(usize, Vec<usize>)>,
}

impl Encoder {
    /// Fails with [`Error::RankDeficient`] unless `H` has full row rank.
    pub fn new(h: &SparseParityMatrix) -> Result<Self> {
        let (m, n) = (h.rows(), h.cols());
        let mut rows: Vec<BitRow> = h
            .checks()
            .iter()
            .map(|vars| {
                let mut r = BitRow::zeros(n);
                for &v in vars {
                    r.set(v);
                }
                r
            })
            .collect();
        let mut pivots = Vec::with_capacity(m);
        let mut rank = 0;
        for col in 0..n {
            if rank == m {
                break;
            }
            let Some(p) = (rank..m).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor(&pivot_row);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rank < m {
            return Err(Error::RankDeficient);
        }
        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let info_cols: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity = pivots
            .iter()
            .zip(&rows)
            .map(|(&pc, row)| {
                let deps = info_cols
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| row.get(c))
                    .map(|(j, _)| j)
                    .collect();
                (pc, deps)
            })
            .collect();
        Ok(Self { n, info_cols, parity })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_cols.len()
    }

    /// Codeword positions carrying the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_cols
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::DimensionMismatch(format!(
                "{} information bits for dimension {}",
                info.len(),
                self.k()
            )));
        }
        let mut cw = vec![0u8; self.n];
        for (&c, &b) in self.info_cols.iter().zip(info) {
            cw[c] = b & 1;
        }
        for (pc, deps) in &self.parity {
            cw[*pc] = deps.iter().fold(0u8, |s, &j| s ^ (info[j] & 1));
        }
        Ok(cw)
    }

    /// Information bits of a codeword (or of any hard-decision word).
    pub fn extract(&self, word: &[u8]) -> Vec<u8> {
        self.info_cols.iter().map(|&c| word[c]).collect()
    }
}

/// One-shot systematic encoding; builds the encoder each call.
pub fn encode(h: &SparseParityMatrix, info: &[u8]) -> Result<Vec<u8>> {
    Encoder::new(h)?.encode(info)
}
