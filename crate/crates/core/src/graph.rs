// SPDX-License-Identifier: Apache-2.0

//! Erdős–Rényi graphs with contaminated nodes: the subset seminorm, the
//! trimmed-subgraph estimator of the edge probability and the samplers.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, config, domain, Error, Result};
use crate::interval::{wilson_type_bounds, ConfidenceInterval, Method};

pub const DEFAULT_EXACT_LIMIT: usize = 14;
pub const DEFAULT_RESTARTS: usize = 50;
pub const DEFAULT_ER_C: f64 = 3.0;
/// Objectives closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Symmetric 0/1 matrix with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut a = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                a.set(i, j, true);
            }
        }
        a
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(domain("node", i.max(j) as f64, "index out of range"));
            }
            if i == j {
                return Err(domain("node", i as f64, "self-loops are not allowed"));
            }
            a.set(i, j, true);
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`; ignored on the diagonal.
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        if i != j {
            self.cells[i * self.n + j] = v;
            self.cells[j * self.n + i] = v;
        }
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Parses an "i j" per line edge list. Blank lines and lines starting
    /// with `#` are skipped. Without `n`, the node count is the largest index
    /// plus one.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i, j)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected two node indices, got `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        let inferred = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
        Self::from_edges(n.unwrap_or(inferred), &edges)
    }

    fn row_mask(&self, i: usize) -> u64 {
        (0..self.n)
            .filter(|&j| self.get(i, j))
            .fold(0u64, |acc, j| acc | (1 << j))
    }
}

impl fmt::Display for AdjacencyMatrix {
    /// Writes the edge list format read by [`AdjacencyMatrix::parse_edge_list`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.edges() {
            writeln!(f, "{i} {j}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSearchConfig {
    pub exact_limit: usize,
    /// Allow a local search when the instance exceeds `exact_limit`.
    pub heuristic: bool,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SubsetSearchConfig {
    fn default() -> Self {
        Self {
            exact_limit: DEFAULT_EXACT_LIMIT,
            heuristic: false,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

impl SubsetSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.exact_limit < 4 {
            return Err(config("exact_limit", "must be at least 4"));
        }
        if self.exact_limit > 24 {
            return Err(config("exact_limit", "exhaustive tables above 24 nodes are too large"));
        }
        Ok(())
    }
}

/// `sup_{S' ⊆ restrict} |Σ_{i≠j ∈ S'} B_ij|` for a square matrix `b`.
///
/// Exhaustive up to `cfg.exact_limit` nodes; beyond that a 1-flip local
/// search gives a lower bound if `cfg.heuristic` is set.
pub fn u_norm(b: &[Vec<f64>], restrict: &[usize], cfg: &SubsetSearchConfig) -> Result<f64> {
    cfg.validate()?;
    let n = b.len();
    if b.iter().any(|row| row.len() != n) {
        return Err(domain("B", n as f64, "matrix must be square"));
    }
    if let Some(&bad) = restrict.iter().find(|&&i| i >= n) {
        return Err(domain("restrict", bad as f64, "node index out of range"));
    }
    let k = restrict.len();
    let w = |x: usize, y: usize| b[restrict[x]][restrict[y]] + b[restrict[y]][restrict[x]];
    if k <= cfg.exact_limit {
        let mut sums = vec![0.0f64; 1 << k];
        let mut best: f64 = 0.0;
        for mask in 1usize..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let mut add = 0.0;
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                add += w(low, j);
                r &= r - 1;
            }
            sums[mask] = sums[rest] + add;
            best = best.max(sums[mask].abs());
        }
        return Ok(best);
    }
    if !cfg.heuristic {
        return Err(Error::Size(format!(
            "{k} nodes exceed exact_limit = {}",
            cfg.exact_limit
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: f64 = 0.0;
    for sign in [1.0, -1.0] {
        for _ in 0..cfg.restarts.max(1) {
            let mut inside: Vec<bool> = (0..k).map(|_| rng.random_bool(0.5)).collect();
            let mut total: f64 = pair_sum(&inside, &w);
            loop {
                let mut improved = false;
                for x in 0..k {
                    let delta: f64 = (0..k).filter(|&y| y != x && inside[y]).map(|y| w(x, y)).sum();
                    let next = if inside[x] { total - delta } else { total + delta };
                    if sign * next > sign * total + TIE_TOL {
                        inside[x] = !inside[x];
                        total = next;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            best = best.max(total.abs());
        }
    }
    Ok(best)
}

fn pair_sum(inside: &[bool], w: &impl Fn(usize, usize) -> f64) -> f64 {
    let mut s = 0.0;
    for x in 0..inside.len() {
        for y in x + 1..inside.len() {
            if inside[x] && inside[y] {
                s += w(x, y);
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSearchResult {
    /// Selected nodes in increasing order.
    pub nodes: Vec<usize>,
    pub objective: f64,
    pub p_hat: f64,
    /// `false` when the local search produced the answer.
    pub certified: bool,
}

/// Smallest admissible subset size `⌈3n/4⌉`.
pub fn min_subset_size(n: usize) -> usize {
    (3 * n).div_ceil(4)
}

fn mask_nodes(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn within_mean(edges: u64, k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        2.0 * edges as f64 / (k * (k - 1)) as f64
    }
}

/// Replaces `best` when `cand` is better, or tied and lexicographically smaller.
fn consider(best: &mut Option<(f64, Vec<usize>)>, obj: f64, nodes: Vec<usize>) {
    let replace = match best {
        None => true,
        Some((b, bn)) => obj < *b - TIE_TOL || ((obj - *b).abs() <= TIE_TOL && nodes < *bn),
    };
    if replace {
        *best = Some((obj, nodes));
    }
}

fn exact_search(a: &AdjacencyMatrix) -> SubsetSearchResult {
    let n = a.n();
    let rows: Vec<u64> = (0..n).map(|i| a.row_mask(i)).collect();
    let full = (1u64 << n) - 1;
    let mut edges = vec![0u64; 1 << n];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        edges[mask as usize] = edges[rest as usize] + (rows[low] & rest).count_ones() as u64;
    }
    let k_min = min_subset_size(n);
    let mut best = None;
    for s in 0..=full {
        let k = s.count_ones() as usize;
        if k < k_min {
            continue;
        }
        let p_hat = within_mean(edges[s as usize], k);
        let mut obj: f64 = 0.0;
        let mut sub = s;
        loop {
            let kk = sub.count_ones() as f64;
            let dev = 2.0 * edges[sub as usize] as f64 - kk * (kk - 1.0) * p_hat;
            obj = obj.max(dev.abs());
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & s;
        }
        consider(&mut best, obj, mask_nodes(s));
    }
    let (objective, nodes) = best.expect("the full node set is always admissible");
    let p_hat = subgraph_mean(a, &nodes);
    SubsetSearchResult {
        nodes,
        objective,
        p_hat,
        certified: true,
    }
}

fn subgraph_mean(a: &AdjacencyMatrix, nodes: &[usize]) -> f64 {
    let mut e = 0u64;
    for (x, &i) in nodes.iter().enumerate() {
        for &j in &nodes[x + 1..] {
            e += a.get(i, j) as u64;
        }
    }
    within_mean(e, nodes.len())
}

/// `‖(A - p̂_S J)_{S×S}‖_U` with `p̂_S` the within-`S` edge density.
pub fn subset_objective(a: &AdjacencyMatrix, nodes: &[usize], cfg: &SubsetSearchConfig) -> Result<f64> {
    let p_hat = subgraph_mean(a, nodes);
    let n = a.n();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) as u8 as f64 - p_hat).collect())
        .collect();
    u_norm(&b, nodes, cfg)
}

fn heuristic_search(a: &AdjacencyMatrix, cfg: &SubsetSearchConfig) -> Result<SubsetSearchResult> {
    let n = a.n();
    let k_min = min_subset_size(n);
    let inner = SubsetSearchConfig {
        heuristic: true,
        restarts: 4,
        ..cfg.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes: Vec<usize> = if restart == 0 {
            order
        } else {
            order.shuffle(&mut rng);
            let mut v = order[..k_min].to_vec();
            v.sort_unstable();
            v
        };
        let mut obj = subset_objective(a, &nodes, &inner)?;
        loop {
            let mut moved = false;
            let outside: Vec<usize> = (0..n).filter(|i| nodes.binary_search(i).is_err()).collect();
            let mut candidates: Vec<Vec<usize>> = Vec::new();
            if nodes.len() > k_min {
                for x in 0..nodes.len() {
                    let mut c = nodes.clone();
                    c.remove(x);
                    candidates.push(c);
                }
            }
            for &o in &outside {
                let mut c = nodes.clone();
                c.push(o);
                c.sort_unstable();
                candidates.push(c.clone());
                for x in 0..nodes.len() {
                    let mut s = nodes.clone();
                    s[x] = o;
                    s.sort_unstable();
                    candidates.push(s);
                }
            }
            for c in candidates {
                let v = subset_objective(a, &c, &inner)?;
                if v < obj - TIE_TOL {
                    nodes = c;
                    obj = v;
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
        consider(&mut best, obj, nodes);
    }
    let (objective, nodes) = best.expect("at least one restart runs");
    let p_hat = subgraph_mean(a, &nodes);
    Ok(SubsetSearchResult {
        nodes,
        objective,
        p_hat,
        certified: false,
    })
}

/// The subset `Ŝ` minimizing the seminorm objective over `|S| >= ⌈3n/4⌉`.
pub fn find_s_hat(a: &AdjacencyMatrix, cfg: &SubsetSearchConfig) -> Result<SubsetSearchResult> {
    cfg.validate()?;
    if a.n() == 0 {
        return Err(domain("n", 0.0, "graph has no nodes"));
    }
    if a.n() <= cfg.exact_limit {
        Ok(exact_search(a))
    } else if cfg.heuristic {
        log::warn!("{} nodes exceed the exact limit; result is not certified", a.n());
        heuristic_search(a, cfg)
    } else {
        Err(Error::Size(format!(
            "{} nodes exceed exact_limit = {}",
            a.n(),
            cfg.exact_limit
        )))
    }
}

/// Edge density inside `Ŝ`.
pub fn er_estimate(a: &AdjacencyMatrix, cfg: &SubsetSearchConfig) -> Result<f64> {
    Ok(find_s_hat(a, cfg)?.p_hat)
}

/// `{p : |p̂ - p| <= C(sqrt(p(1-p)/n) + 1/n)}`.
pub fn er_conservative_ci(
    a: &AdjacencyMatrix,
    alpha: f64,
    c: f64,
    cfg: &SubsetSearchConfig,
) -> Result<ConfidenceInterval> {
    if !(c > 0.0) {
        return Err(domain("C", c, "must be positive"));
    }
    let p_hat = er_estimate(a, cfg)?;
    Ok(er_interval_around(p_hat, a.n(), alpha, c))
}

pub(crate) fn er_interval_around(p_hat: f64, n: usize, alpha: f64, c: f64) -> ConfidenceInterval {
    let nf = n as f64;
    let (lower, upper) = wilson_type_bounds(p_hat, c / nf.sqrt(), c / nf);
    ConfidenceInterval::new(lower, upper, alpha, Method::ErConservative)
}

/// Edge law for pairs touching a contaminated node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeStrategy {
    AllOnes,
    AllZeros,
    Bernoulli(f64),
}

impl FromStr for EdgeStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-ones" => Ok(Self::AllOnes),
            "all-zeros" => Ok(Self::AllZeros),
            _ => {
                let q = s
                    .strip_prefix("bernoulli:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        config("q_strategy", format!("unknown edge strategy `{s}`"))
                    })?;
                check_range("q_edge", q, 0.0, 1.0)?;
                Ok(Self::Bernoulli(q))
            }
        }
    }
}

impl fmt::Display for EdgeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AllOnes => write!(f, "all-ones"),
            Self::AllZeros => write!(f, "all-zeros"),
            Self::Bernoulli(q) => write!(f, "bernoulli:{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedGraph {
    pub adjacency: AdjacencyMatrix,
    pub contaminated: Vec<bool>,
}

/// One uniform draw per pair `i < j` in row-major order, compared against a
/// pair-dependent probability. Every sampler here consumes the stream this
/// way, so they agree draw for draw when their edge laws agree.
fn fill_pairs<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    mut edge: impl FnMut(usize, usize, f64) -> bool,
) -> AdjacencyMatrix {
    let mut a = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.random();
            if edge(i, j, u) {
                a.set(i, j, true);
            }
        }
    }
    a
}

pub fn sample_er<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<AdjacencyMatrix> {
    check_range("p", p, 0.0, 1.0)?;
    Ok(fill_pairs(n, rng, |_, _, u| u < p))
}

/// Node contamination with a given set of contaminated nodes.
pub fn sample_node_contaminated_planted<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    contaminated: &[bool],
    strategy: EdgeStrategy,
    rng: &mut R,
) -> Result<ContaminatedGraph> {
    check_range("p", p, 0.0, 1.0)?;
    if contaminated.len() != n {
        return Err(domain("contaminated", contaminated.len() as f64, "need one flag per node"));
    }
    let adjacency = fill_pairs(n, rng, |i, j, u| {
        if contaminated[i] || contaminated[j] {
            match strategy {
                EdgeStrategy::AllOnes => true,
                EdgeStrategy::AllZeros => false,
                EdgeStrategy::Bernoulli(q) => u < q,
            }
        } else {
            u < p
        }
    });
    Ok(ContaminatedGraph {
        adjacency,
        contaminated: contaminated.to_vec(),
    })
}

/// Two-step sampler: `z_i ~ Bernoulli(eps)`, then edges. With `eps = 0` no
/// labels are drawn, so the output equals [`sample_er`] on the same stream.
pub fn sample_node_contaminated<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    eps: f64,
    strategy: EdgeStrategy,
    rng: &mut R,
) -> Result<ContaminatedGraph> {
    check_range("eps", eps, 0.0, 1.0)?;
    let labels: Vec<bool> = if eps == 0.0 {
        vec![false; n]
    } else {
        (0..n).map(|_| rng.random_bool(eps)).collect()
    };
    sample_node_contaminated_planted(n, p, &labels, strategy, rng)
}

/// Two-community block model: `z_i ~ Bernoulli(eta)`, edges with probability
/// `p1` inside community 0, `p2` inside community 1 and `q` across.
pub fn sample_sbm<R: Rng + ?Sized>(
    n: usize,
    p1: f64,
    p2: f64,
    q: f64,
    eta: f64,
    rng: &mut R,
) -> Result<ContaminatedGraph> {
    for (name, v) in [("p1", p1), ("p2", p2), ("q", q), ("eta", eta)] {
        check_range(name, v, 0.0, 1.0)?;
    }
    let z: Vec<bool> = (0..n).map(|_| rng.random_bool(eta)).collect();
    let adjacency = fill_pairs(n, rng, |i, j, u| match (z[i], z[j]) {
        (false, false) => u < p1,
        (true, true) => u < p2,
        _ => u < q,
    });
    Ok(ContaminatedGraph {
        adjacency,
        contaminated: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SubsetSearchConfig {
        SubsetSearchConfig::default()
    }

    #[test]
    fn u_norm_of_constant_block() {
        let b = vec![vec![2.0; 5]; 5];
        assert_eq!(u_norm(&b, &[0, 2, 4], &cfg()).unwrap(), 12.0);
        let zero = vec![vec![0.0; 5]; 5];
        assert_eq!(u_norm(&zero, &[0, 1, 2, 3, 4], &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn u_norm_size_limit() {
        let b = vec![vec![1.0; 20]; 20];
        let all: Vec<usize> = (0..20).collect();
        assert!(matches!(u_norm(&b, &all, &cfg()), Err(Error::Size(_))));
        let h = SubsetSearchConfig {
            heuristic: true,
            ..cfg()
        };
        assert_eq!(u_norm(&b, &all, &h).unwrap(), 380.0);
    }

    #[test]
    fn trivial_estimates() {
        assert_eq!(er_estimate(&AdjacencyMatrix::complete(8), &cfg()).unwrap(), 1.0);
        assert_eq!(er_estimate(&AdjacencyMatrix::empty(8), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // Every subset of the complete graph has objective 0.
        let r = find_s_hat(&AdjacencyMatrix::complete(8), &cfg()).unwrap();
        assert_eq!(r.nodes, vec![0, 1, 2, 3, 4, 5]);
        assert!(r.certified);
    }

    #[test]
    fn edge_list_round_trip() {
        let a = AdjacencyMatrix::from_edges(5, &[(0, 1), (3, 1), (2, 4)]).unwrap();
        let text = a.to_string();
        assert_eq!(text, "0 1\n1 3\n2 4\n");
        assert_eq!(AdjacencyMatrix::parse_edge_list(&text, Some(5)).unwrap(), a);
        assert_eq!(AdjacencyMatrix::parse_edge_list("# c\n0 1\n\n", None).unwrap().n(), 2);
        assert!(AdjacencyMatrix::parse_edge_list("0 1 2", None).is_err());
        assert!(AdjacencyMatrix::from_edges(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn strategies_parse() {
        assert_eq!("all-ones".parse::<EdgeStrategy>().unwrap(), EdgeStrategy::AllOnes);
        assert_eq!(
            "bernoulli:0.25".parse::<EdgeStrategy>().unwrap(),
            EdgeStrategy::Bernoulli(0.25)
        );
        assert!("bernoulli:2".parse::<EdgeStrategy>().is_err());
        assert!("sometimes".parse::<EdgeStrategy>().is_err());
    }

    #[test]
    fn zero_contamination_matches_er() {
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        let er = sample_er(15, 0.4, &mut r1).unwrap();
        let nc = sample_node_contaminated(15, 0.4, 0.0, EdgeStrategy::AllOnes, &mut r2).unwrap();
        assert_eq!(er, nc.adjacency);
    }

    #[test]
    fn planted_strategies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut flags = vec![false; 6];
        flags[2] = true;
        let g = sample_node_contaminated_planted(6, 0.0, &flags, EdgeStrategy::AllOnes, &mut rng)
            .unwrap();
        assert_eq!(g.adjacency.edges(), vec![(0, 2), (1, 2), (2, 3), (2, 4), (2, 5)]);
    }
}
