//! Degree distributions and random code construction.

use rand::seq::SliceRandom;
use rand::Rng;

use super::encode::Encoder;
use super::matrix::SparseParityMatrix;
use crate::error::{Error, Result};
use crate::rng::{Purpose, RandomStream};

/// Code length, dimension and edge-perspective degree distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    /// `(degree, fraction of edges)` on the variable side.
    pub lambda: Vec<(usize, f64)>,
    /// `(degree, fraction of edges)` on the check side.
    pub rho: Vec<(usize, f64)>,
}

const FRACTION_TOL: f64 = 1e-3;

impl CodeSpec {
    /// The rate-1/2 irregular (500, 250) code.
    pub fn irregular_500_250() -> Self {
        Self {
            n: 500,
            k: 250,
            lambda: vec![(3, 0.9867), (4, 0.0133)],
            rho: vec![(4, 0.0027), (5, 0.0565), (6, 0.8332), (7, 0.1023), (8, 0.0053)],
        }
    }

    /// Regular `(dv, dc)` code of length `n`.
    pub fn regular(n: usize, k: usize, dv: usize, dc: usize) -> Self {
        Self {
            n,
            k,
            lambda: vec![(dv, 1.0)],
            rho: vec![(dc, 1.0)],
        }
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidConfig(format!(
                "need 0 < k < n, got k={} n={}",
                self.k, self.n
            )));
        }
        for (name, dist) in [("lambda", &self.lambda), ("rho", &self.rho)] {
            if dist.is_empty() || dist.iter().any(|&(d, f)| d == 0 || !(f >= 0.0)) {
                return Err(Error::InvalidConfig(format!("{name} has an invalid entry")));
            }
            let total: f64 = dist.iter().map(|&(_, f)| f).sum();
            if (total - 1.0).abs() > FRACTION_TOL {
                return Err(Error::InvalidConfig(format!("{name} fractions sum to {total}")));
            }
        }
        let design_rate = 1.0 - inverse_mean(&self.rho) / inverse_mean(&self.lambda);
        let rate = self.k as f64 / self.n as f64;
        if (design_rate - rate).abs() > 0.02 {
            return Err(Error::InvalidConfig(format!(
                "degree distributions give rate {design_rate:.4}, k/n is {rate:.4}"
            )));
        }
        if self.lambda.iter().any(|&(d, _)| d > self.m()) {
            return Err(Error::InvalidConfig(
                "variable degree exceeds the number of checks".into(),
            ));
        }
        Ok(())
    }

    /// Mean variable-node degree `1 / sum(lambda_d / d)`.
    pub fn mean_variable_degree(&self) -> f64 {
        1.0 / inverse_mean(&self.lambda)
    }

    /// Node counts per variable degree, ascending in degree.
    pub fn variable_degree_counts(&self) -> Vec<(usize, usize)> {
        node_counts(&self.lambda, self.n)
    }

    /// Node counts per check degree, adjusted so the socket total equals the
    /// variable side.
    pub fn check_degree_counts(&self) -> Vec<(usize, usize)> {
        let edges: usize = self.variable_degree_counts().iter().map(|&(d, c)| d * c).sum();
        let mut counts = node_counts(&self.rho, self.m());
        let mut total: usize = counts.iter().map(|&(d, c)| d * c).sum();
        // move single checks one degree up or down, always from the most
        // populated degree, until the socket totals agree
        while total != edges {
            let up = total < edges;
            let idx = (0..counts.len())
                .filter(|&i| counts[i].1 > 0 && (up || counts[i].0 > 1))
                .max_by_key(|&i| (counts[i].1, usize::MAX - i))
                .expect("at least one check degree");
            let d = counts[idx].0;
            let nd = if up { d + 1 } else { d - 1 };
            counts[idx].1 -= 1;
            match counts.iter().position(|&(dd, _)| dd == nd) {
                Some(j) => counts[j].1 += 1,
                None => counts.push((nd, 1)),
            }
            counts.sort_unstable();
            counts.retain(|&(_, c)| c > 0);
            total = if up { total + 1 } else { total - 1 };
        }
        counts
    }
}

fn inverse_mean(dist: &[(usize, f64)]) -> f64 {
    dist.iter().map(|&(d, f)| f / d as f64).sum()
}

/// Edge fractions to node counts summing to `total`, largest-remainder rounding.
fn node_counts(dist: &[(usize, f64)], total: usize) -> Vec<(usize, usize)> {
    let inv = inverse_mean(dist);
    let exact: Vec<f64> = dist.iter().map(|&(d, f)| total as f64 * (f / d as f64) / inv).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    let mut out: Vec<(usize, usize)> = dist
        .iter()
        .map(|&(d, _)| d)
        .zip(counts)
        .filter(|&(_, c)| c > 0)
        .collect();
    out.sort_unstable();
    out
}

const MAX_ATTEMPTS: u64 = 64;
const SWAP_ROUNDS: usize = 200;

/// Random code with the degree histogram of the `CodeSpec`, repeated edges removed,
/// 4-cycles removed where edge swaps allow, and full row rank.
pub fn construct_code(seed: u64, spec: &CodeSpec) -> Result<SparseParityMatrix> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = RandomStream::substream(seed, attempt, Purpose::CodeConstruction);
        let Some(h) = sample_graph(&mut rng, spec) else {
            continue;
        };
        if Encoder::new(&h).is_ok() {
            return Ok(h);
        }
    }
    Err(Error::ConstructionFailed(format!(
        "no full-rank simple graph after {MAX_ATTEMPTS} attempts"
    )))
}

/// Edge list as `(variable, check)` pairs.
struct Graph {
    edges: Vec<(usize, usize)>,
    var_adj: Vec<Vec<usize>>,
    check_adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(edges: Vec<(usize, usize)>, n: usize, m: usize) -> Self {
        let mut g = Self {
            edges,
            var_adj: vec![Vec::new(); n],
            check_adj: vec![Vec::new(); m],
        };
        for &(v, c) in &g.edges {
            g.var_adj[v].push(c);
            g.check_adj[c].push(v);
        }
        g
    }

    fn multiplicity(&self, v: usize, c: usize) -> usize {
        self.var_adj[v].iter().filter(|&&x| x == c).count()
    }

    /// Does edge `(v, c)` lie on a 4-cycle (or duplicate another edge)?
    fn is_bad(&self, v: usize, c: usize) -> bool {
        if self.multiplicity(v, c) > 1 {
            return true;
        }
        for &u in &self.check_adj[c] {
            if u == v {
                continue;
            }
            for &c2 in &self.var_adj[u] {
                if c2 != c && self.var_adj[v].contains(&c2) {
                    return true;
                }
            }
        }
        false
    }

    fn remove(&mut self, v: usize, c: usize) {
        let i = self.var_adj[v].iter().position(|&x| x == c).unwrap();
        self.var_adj[v].swap_remove(i);
        let j = self.check_adj[c].iter().position(|&x| x == v).unwrap();
        self.check_adj[c].swap_remove(j);
    }

    fn add(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c);
        self.check_adj[c].push(v);
    }

    /// Swaps the check ends of edges `a` and `b`; keeps the swap only when
    /// both new edges are simple and 4-cycle free, or when `lenient` and both
    /// new edges are at least simple.
    fn try_swap(&mut self, a: usize, b: usize, lenient: bool) -> bool {
        let (va, ca) = self.edges[a];
        let (vb, cb) = self.edges[b];
        if ca == cb || va == vb {
            return false;
        }
        if self.var_adj[va].contains(&cb) || self.var_adj[vb].contains(&ca) {
            return false;
        }
        self.remove(va, ca);
        self.remove(vb, cb);
        self.add(va, cb);
        self.add(vb, ca);
        let ok = if lenient {
            true
        } else {
            !self.is_bad(va, cb) && !self.is_bad(vb, ca)
        };
        if ok {
            self.edges[a] = (va, cb);
            self.edges[b] = (vb, ca);
        } else {
            self.remove(va, cb);
            self.remove(vb, ca);
            self.add(va, ca);
            self.add(vb, cb);
        }
        ok
    }
}

fn sample_graph<R: Rng + ?Sized>(rng: &mut R, spec: &CodeSpec) -> Option<SparseParityMatrix> {
    let (n, m) = (spec.n, spec.m());
    let mut var_sockets = Vec::new();
    let mut v = 0;
    for (d, count) in spec.variable_degree_counts() {
        for _ in 0..count {
            var_sockets.extend(std::iter::repeat(v).take(d));
            v += 1;
        }
    }
    let mut check_sockets = Vec::new();
    let mut c = 0;
    for (d, count) in spec.check_degree_counts() {
        for _ in 0..count {
            check_sockets.extend(std::iter::repeat(c).take(d));
            c += 1;
        }
    }
    // spread the degrees over the index range rather than grouping them
    let mut var_perm: Vec<usize> = (0..n).collect();
    var_perm.shuffle(rng);
    let mut check_perm: Vec<usize> = (0..m).collect();
    check_perm.shuffle(rng);
    check_sockets.shuffle(rng);
    let edges: Vec<(usize, usize)> = var_sockets
        .iter()
        .zip(&check_sockets)
        .map(|(&v, &c)| (var_perm[v], check_perm[c]))
        .collect();
    let mut g = Graph::new(edges, n, m);
    let e = g.edges.len();

    // repeated edges first; these must all go
    for _ in 0..SWAP_ROUNDS {
        let dup: Vec<usize> = (0..e)
            .filter(|&i| g.multiplicity(g.edges[i].0, g.edges[i].1) > 1)
            .collect();
        if dup.is_empty() {
            break;
        }
        for i in dup {
            let (v, c) = g.edges[i];
            if g.multiplicity(v, c) > 1 {
                let j = rng.random_range(0..e);
                g.try_swap(i, j, true);
            }
        }
    }
    if (0..e).any(|i| g.multiplicity(g.edges[i].0, g.edges[i].1) > 1) {
        return None;
    }

    // then 4-cycles, as far as swaps allow
    for _ in 0..SWAP_ROUNDS {
        let bad: Vec<usize> = (0..e).filter(|&i| g.is_bad(g.edges[i].0, g.edges[i].1)).collect();
        if bad.is_empty() {
            break;
        }
        for i in bad {
            let (v, c) = g.edges[i];
            if !g.is_bad(v, c) {
                continue;
            }
            for _ in 0..20 {
                let j = rng.random_range(0..e);
                if g.try_swap(i, j, false) {
                    break;
                }
            }
        }
    }
    SparseParityMatrix::from_checks(n, g.check_adj).ok()
}

/// A parity-check matrix together with its systematic encoder.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    pub h: SparseParityMatrix,
    pub encoder: Encoder,
}

impl LdpcCode {
    pub fn new(h: SparseParityMatrix) -> Result<Self> {
        let encoder = Encoder::new(&h)?;
        Ok(Self { h, encoder })
    }

    pub fn construct(seed: u64, spec: &CodeSpec) -> Result<Self> {
        Self::new(construct_code(seed, spec)?)
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn k(&self) -> usize {
        self.encoder.k()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irregular_counts() {
        let spec = CodeSpec::irregular_500_250();
        spec.validate().unwrap();
        assert_eq!(spec.variable_degree_counts(), vec![(3, 495), (4, 5)]);
        assert_eq!(
            spec.check_degree_counts(),
            vec![(4, 1), (5, 17), (6, 209), (7, 22), (8, 1)]
        );
        assert!((spec.mean_variable_degree() - 3.0101).abs() < 1e-3);
    }

    #[test]
    fn largest_remainder_rounding() {
        // exact node shares 1/3 each of 10 -> 3.33: one extra to the first
        assert_eq!(
            node_counts(&[(2, 0.25), (4, 0.5), (2, 0.25)], 10)
                .iter()
                .map(|x| x.1)
                .sum::<usize>(),
            10
        );
        assert_eq!(node_counts(&[(3, 0.5), (6, 0.5)], 9), vec![(3, 6), (6, 3)]);
    }

    #[test]
    fn check_sockets_are_balanced() {
        // socket totals on both sides agree after rounding and adjustment
        let spec = CodeSpec {
            n: 20,
            k: 10,
            lambda: vec![(3, 0.7), (4, 0.3)],
            rho: vec![(6, 0.5), (7, 0.5)],
        };
        let edges: usize = spec.variable_degree_counts().iter().map(|&(d, c)| d * c).sum();
        let checks = spec.check_degree_counts();
        assert_eq!(checks.iter().map(|&(d, c)| d * c).sum::<usize>(), edges);
        assert_eq!(checks.iter().map(|&(_, c)| c).sum::<usize>(), 10);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = CodeSpec::irregular_500_250();
        s.lambda[0].1 = 0.5;
        assert!(s.validate().is_err());
        let mut s = CodeSpec::irregular_500_250();
        s.k = 100;
        assert!(s.validate().is_err());
        assert!(CodeSpec::regular(12, 12, 3, 6).validate().is_err());
    }

    #[test]
    fn regular_toy_code() {
        let h = construct_code(3, &CodeSpec::regular(12, 6, 3, 6)).unwrap();
        assert!(h.var_degrees().iter().all(|&d| d == 3));
        assert!(h.check_degrees().iter().all(|&d| d == 6));
    }

    #[test]
    fn construction_is_deterministic() {
        let spec = CodeSpec::irregular_500_250();
        assert_eq!(construct_code(9, &spec).unwrap(), construct_code(9, &spec).unwrap());
        assert_ne!(construct_code(9, &spec).unwrap(), construct_code(10, &spec).unwrap());
    }
}
