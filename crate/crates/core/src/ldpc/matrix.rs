//! Sparse parity-check matrices and the alist text format.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix stored as adjacency lists both ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseParityMatrix {
    rows: usize,
    cols: usize,
    check_adj: Vec<Vec<usize>>,
    var_adj: Vec<Vec<usize>>,
}

impl SparseParityMatrix {
    /// Builds from per-check variable lists. Rejects out-of-range indices,
    /// duplicate edges and empty rows or columns.
    pub fn from_checks(cols: usize, mut check_adj: Vec<Vec<usize>>) -> Result<Self> {
        let rows = check_adj.len();
        let mut var_adj = vec![Vec::new(); cols];
        for (c, vars) in check_adj.iter_mut().enumerate() {
            vars.sort_unstable();
            if vars.is_empty() {
                return Err(Error::InvalidConfig(format!("check {c} has no edges")));
            }
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidConfig(format!("check {c} has a repeated edge")));
            }
            for &v in vars.iter() {
                if v >= cols {
                    return Err(Error::InvalidConfig(format!("variable index {v} out of range")));
                }
                var_adj[v].push(c);
            }
        }
        if let Some(v) = var_adj.iter().position(|a| a.is_empty()) {
            return Err(Error::InvalidConfig(format!("variable {v} has no edges")));
        }
        Ok(Self {
            rows,
            cols,
            check_adj,
            var_adj,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Variables in check `c`, ascending.
    pub fn check(&self, c: usize) -> &[usize] {
        &self.check_adj[c]
    }

    /// Checks on variable `v`, ascending.
    pub fn var(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.check_adj
    }

    pub fn edges(&self) -> usize {
        self.check_adj.iter().map(Vec::len).sum()
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        self.var_adj.iter().map(Vec::len).collect()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.check_adj.iter().map(Vec::len).collect()
    }

    /// `H c` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        assert_eq!(bits.len(), self.cols, "word length differs from code length");
        self.check_adj
            .iter()
            .map(|vars| vars.iter().fold(0u8, |s, &v| s ^ (bits[v] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.check_adj
            .iter()
            .all(|vars| vars.iter().fold(0u8, |s, &v| s ^ (bits[v] & 1)) == 0)
    }

    /// Number of distinct 4-cycles (pairs of checks sharing two variables).
    pub fn count_4cycles(&self) -> usize {
        let mut total = 0;
        let mut shared = vec![0usize; self.rows];
        for c in 0..self.rows {
            for &v in &self.check_adj[c] {
                for &c2 in &self.var_adj[v] {
                    if c2 > c {
                        shared[c2] += 1;
                    }
                }
            }
            for c2 in c + 1..self.rows {
                let s = shared[c2];
                total += s * s.saturating_sub(1) / 2;
                shared[c2] = 0;
            }
        }
        total
    }

    /// MacKay's alist format, 1-based indices, rows padded with zeros.
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        let max_col = self.var_adj.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.check_adj.iter().map(Vec::len).max().unwrap_or(0);
        let _ = writeln!(s, "{} {}", self.cols, self.rows);
        let _ = writeln!(s, "{} {}", max_col, max_row);
        let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{}", join(&mut self.var_adj.iter().map(Vec::len)));
        let _ = writeln!(s, "{}", join(&mut self.check_adj.iter().map(Vec::len)));
        for (adj, width) in [(&self.var_adj, max_col), (&self.check_adj, max_row)] {
            for list in adj.iter() {
                let mut it = list.iter().map(|x| x + 1).chain(std::iter::repeat(0)).take(width);
                let _ = writeln!(s, "{}", join(&mut it));
            }
        }
        s
    }

    /// Parses the alist format; zero padding is optional.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next_nums = |what: &str| -> Result<Vec<usize>> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{what}: {e}"))))
                .collect()
        };
        let dims = next_nums("dimensions")?;
        if dims.len() != 2 {
            return Err(Error::Parse("dimension line needs two numbers".into()));
        }
        let (cols, rows) = (dims[0], dims[1]);
        next_nums("maximum degrees")?;
        let col_deg = next_nums("column degrees")?;
        let row_deg = next_nums("row degrees")?;
        if col_deg.len() != cols || row_deg.len() != rows {
            return Err(Error::Parse("degree list length differs from dimensions".into()));
        }
        let mut col_lists = Vec::with_capacity(cols);
        for (v, &d) in col_deg.iter().enumerate() {
            let list: Vec<usize> = next_nums("column list")?.into_iter().filter(|&x| x != 0).collect();
            if list.len() != d {
                return Err(Error::Parse(format!(
                    "column {} lists {} entries, degree {d}",
                    v + 1,
                    list.len()
                )));
            }
            col_lists.push(list);
        }
        let mut checks = Vec::with_capacity(rows);
        for (c, &d) in row_deg.iter().enumerate() {
            let list: Vec<usize> = next_nums("row list")?.into_iter().filter(|&x| x != 0).collect();
            if list.len() != d {
                return Err(Error::Parse(format!(
                    "row {} lists {} entries, degree {d}",
                    c + 1,
                    list.len()
                )));
            }
            checks.push(list.into_iter().map(|x| x - 1).collect::<Vec<_>>());
        }
        let h = Self::from_checks(cols, checks).map_err(|e| Error::Parse(e.to_string()))?;
        for (v, list) in col_lists.iter().enumerate() {
            let mut sorted: Vec<usize> = list.iter().map(|x| x - 1).collect();
            sorted.sort_unstable();
            if sorted != h.var_adj[v] {
                return Err(Error::Parse(format!("column {} disagrees with the row lists", v + 1)));
            }
        }
        Ok(h)
    }
}
