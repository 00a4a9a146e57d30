//! Receive antenna selection: pick `n_s` of the `n_r` available antennas
//! once per channel realization, before detection.
//!
//! Three rules are provided:
//!
//! - COAS keeps the columns with the largest squared norms (capacity
//!   oriented, linear scan).
//! - ACAS minimizes the worst pairwise cosine similarity between selected
//!   columns (decorrelation, exhaustive subset scan).
//! - EDAS maximizes the minimum squared Euclidean distance between all
//!   distinct noiseless transmission hypotheses (error-rate oriented,
//!   exhaustive subset scan).
//!
//! Subset scans run in lexicographic order and ties keep the first (i.e.
//! lexicographically smallest) subset, so results are fully deterministic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelMatrix;
use crate::modem::Constellation;

/// Hard ceiling on antenna counts for the exhaustive scans.
pub const MAX_ANTENNAS: usize = 24;
/// Default cap on the number of subsets a scan may visit.
pub const DEFAULT_SUBSET_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("invalid dimensions: requested {n_s} of {n_r} antennas")]
    Dimension { n_r: usize, n_s: usize },
    #[error("subset scan too large: C({n},{k}) = {count} exceeds cap {cap}")]
    TooLarge {
        n: usize,
        k: usize,
        count: u128,
        cap: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    #[default]
    None,
    Coas,
    Acas,
    Edas,
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionMethod::None => "none",
            SelectionMethod::Coas => "coas",
            SelectionMethod::Acas => "acas",
            SelectionMethod::Edas => "edas",
        })
    }
}

/// Outcome of one selection: the chosen column indices (zero-based) and the
/// achieved objective value.
///
/// COAS orders indices by descending column norm (that order defines which
/// physical antenna carries which index bits); ACAS and EDAS return them
/// ascending. `score` is Σ‖g‖² for COAS, the minimax cosine similarity for
/// ACAS, the max-min squared distance for EDAS, and 0 for `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    pub indices: Vec<usize>,
    pub score: f64,
}

impl SelectionResult {
    /// The selected channel columns, in selection order.
    pub fn submatrix(&self, g: &ChannelMatrix) -> ChannelMatrix {
        g.select_columns(&self.indices)
    }
}

/// Dispatches to the configured rule. `SelectionMethod::None` keeps all
/// antennas and therefore requires `n_s` to equal the column count.
pub fn select(
    method: SelectionMethod,
    g: &ChannelMatrix,
    n_s: usize,
    constellation: &Constellation,
) -> Result<SelectionResult, SelectionError> {
    match method {
        SelectionMethod::None => {
            if n_s != g.n_antennas() {
                return Err(SelectionError::Dimension {
                    n_r: g.n_antennas(),
                    n_s,
                });
            }
            Ok(SelectionResult {
                method,
                indices: (0..n_s).collect(),
                score: 0.0,
            })
        }
        SelectionMethod::Coas => select_coas(g, n_s),
        SelectionMethod::Acas => select_acas(g, n_s),
        SelectionMethod::Edas => select_edas(g, n_s, constellation),
    }
}

/// Keeps the `n_s` columns with the largest squared Frobenius norms,
/// ordered descending; equal norms keep the lower original index first.
pub fn select_coas(g: &ChannelMatrix, n_s: usize) -> Result<SelectionResult, SelectionError> {
    let n_r = g.n_antennas();
    if n_s == 0 || n_s > n_r {
        return Err(SelectionError::Dimension { n_r, n_s });
    }
    let norms: Vec<f64> = (0..n_r).map(|l| g.col_norm_sq(l)).collect();
    let mut order: Vec<usize> = (0..n_r).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order.truncate(n_s);
    let score = order.iter().map(|&l| norms[l]).sum();
    Ok(SelectionResult {
        method: SelectionMethod::Coas,
        indices: order,
        score,
    })
}

/// Minimizes, over all `C(n_r, n_s)` subsets, the maximum pairwise cosine
/// similarity `|g_i^H g_j| / (‖g_i‖‖g_j‖)` between selected columns.
///
/// A zero-norm column has no direction; its similarity to anything is
/// treated as 1 (worst case) and the event is logged.
pub fn select_acas(g: &ChannelMatrix, n_s: usize) -> Result<SelectionResult, SelectionError> {
    let n_r = g.n_antennas();
    if n_s < 2 || n_s > n_r {
        return Err(SelectionError::Dimension { n_r, n_s });
    }
    let norms: Vec<f64> = (0..n_r).map(|l| g.col_norm_sq(l).sqrt()).collect();
    let mut sim = vec![0.0f64; n_r * n_r];
    for i in 0..n_r {
        for j in i + 1..n_r {
            let value = if norms[i] == 0.0 || norms[j] == 0.0 {
                log::warn!("degenerate zero-norm column in ACAS; treating similarity as 1");
                1.0
            } else {
                inner_product(g.column(i), g.column(j)).norm() / (norms[i] * norms[j])
            };
            sim[i * n_r + j] = value;
            sim[j * n_r + i] = value;
        }
    }

    let mut it = enumerate_subsets(n_r, n_s)?;
    let mut best_score = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    while it.advance() {
        let subset = it.current();
        let mut worst: f64 = 0.0;
        'pairs: for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                worst = worst.max(sim[i * n_r + j]);
                if worst >= best_score {
                    break 'pairs;
                }
            }
        }
        if worst < best_score {
            best_score = worst;
            best = subset.to_vec();
        }
    }
    Ok(SelectionResult {
        method: SelectionMethod::Acas,
        indices: best,
        score: best_score,
    })
}

/// Maximizes, over all `C(n_r, n_s)` subsets, the minimum squared Euclidean
/// distance `‖G_S(s_1 − s_2)‖²` between distinct transmission vectors.
///
/// Transmission vectors are the `n_s · M` one-hot vectors scaled by a
/// constellation symbol, so the minimum splits into same-antenna pairs
/// (`‖g_t‖² |s_a − s_b|²`) and cross-antenna pairs
/// (`‖g_t s_a − g_t' s_b‖²`); both families are covered.
pub fn select_edas(
    g: &ChannelMatrix,
    n_s: usize,
    constellation: &Constellation,
) -> Result<SelectionResult, SelectionError> {
    let n_r = g.n_antennas();
    if n_s == 0 || n_s > n_r {
        return Err(SelectionError::Dimension { n_r, n_s });
    }
    let tables = DistanceTables::new(g, constellation);

    if n_s == 1 {
        // No subset scan needed: maximize the single-antenna distance.
        let (best, score) = (0..n_r)
            .map(|l| (l, tables.same_antenna(l)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("at least one antenna");
        return Ok(SelectionResult {
            method: SelectionMethod::Edas,
            indices: vec![best],
            score,
        });
    }

    let mut it = enumerate_subsets(n_r, n_s)?;
    let mut best_score = f64::NEG_INFINITY;
    let mut best: Vec<usize> = Vec::new();
    while it.advance() {
        let subset = it.current();
        let d = tables.min_distance(subset, best_score);
        if d > best_score {
            best_score = d;
            best = subset.to_vec();
        }
    }
    Ok(SelectionResult {
        method: SelectionMethod::Edas,
        indices: best,
        score: best_score,
    })
}

/// Minimum squared distance between distinct transmission hypotheses for an
/// already-selected channel (the inner objective of the EDAS rule).
pub fn min_euclidean_distance(g_s: &ChannelMatrix, constellation: &Constellation) -> f64 {
    let tables = DistanceTables::new(g_s, constellation);
    let all: Vec<usize> = (0..g_s.n_antennas()).collect();
    tables.min_distance(&all, f64::NEG_INFINITY)
}

/// Per-channel lookup tables for the EDAS objective: column norms, pairwise
/// inner products, and the per-antenna-pair minimum over symbol pairs.
struct DistanceTables {
    n_r: usize,
    norm_sq: Vec<f64>,
    min_symbol_dist_sq: f64,
    /// `cross[i * n_r + j]`: min over ordered symbol pairs of the distance
    /// between a hypothesis on antenna `i` and one on antenna `j`.
    cross: Vec<f64>,
}

impl DistanceTables {
    fn new(g: &ChannelMatrix, constellation: &Constellation) -> Self {
        let n_r = g.n_antennas();
        let norm_sq: Vec<f64> = (0..n_r).map(|l| g.col_norm_sq(l)).collect();
        let points = constellation.points();
        let mut cross = vec![f64::INFINITY; n_r * n_r];
        for i in 0..n_r {
            for j in i + 1..n_r {
                let inner = inner_product(g.column(i), g.column(j));
                let mut min = f64::INFINITY;
                for sa in points {
                    for sb in points {
                        let d = sa.norm_sqr() * norm_sq[i] + sb.norm_sqr() * norm_sq[j]
                            - 2.0 * (sa.conj() * sb * inner).re;
                        min = min.min(d);
                    }
                }
                cross[i * n_r + j] = min;
                cross[j * n_r + i] = min;
            }
        }
        Self {
            n_r,
            norm_sq,
            min_symbol_dist_sq: constellation.min_distance_sq(),
            cross,
        }
    }

    fn same_antenna(&self, l: usize) -> f64 {
        self.norm_sq[l] * self.min_symbol_dist_sq
    }

    /// Min distance over all hypothesis pairs of `subset`; may return early
    /// once the running minimum cannot beat `floor`.
    fn min_distance(&self, subset: &[usize], floor: f64) -> f64 {
        let mut min = f64::INFINITY;
        for (a, &i) in subset.iter().enumerate() {
            min = min.min(self.same_antenna(i));
            for &j in &subset[a + 1..] {
                min = min.min(self.cross[i * self.n_r + j]);
            }
            if min <= floor {
                return min;
            }
        }
        min
    }
}

fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k as u128 {
        result = result * (n as u128 - k as u128 + i) / i;
    }
    result
}

/// Lexicographic enumeration of all `k`-element subsets of `{0, …, n-1}`.
#[derive(Debug, Clone)]
pub struct SubsetIterator {
    n: usize,
    indices: Vec<usize>,
    fresh: bool,
    exhausted: bool,
}

/// Subset iterator with the default cap of [`DEFAULT_SUBSET_CAP`] subsets.
pub fn enumerate_subsets(n: usize, k: usize) -> Result<SubsetIterator, SelectionError> {
    enumerate_subsets_capped(n, k, DEFAULT_SUBSET_CAP)
}

pub fn enumerate_subsets_capped(
    n: usize,
    k: usize,
    cap: u64,
) -> Result<SubsetIterator, SelectionError> {
    if k == 0 || k > n || n > MAX_ANTENNAS {
        return Err(SelectionError::Dimension { n_r: n, n_s: k });
    }
    let count = binomial(n as u64, k as u64);
    if count > cap as u128 {
        return Err(SelectionError::TooLarge { n, k, count, cap });
    }
    Ok(SubsetIterator {
        n,
        indices: (0..k).collect(),
        fresh: true,
        exhausted: false,
    })
}

impl SubsetIterator {
    /// Total number of subsets this iterator yields.
    pub fn count_total(&self) -> u128 {
        binomial(self.n as u64, self.indices.len() as u64)
    }

    /// Steps to the next subset; returns `false` once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        if self.fresh {
            self.fresh = false;
            return true;
        }
        let k = self.indices.len();
        // Rightmost index that can still move up.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.indices[i] < self.n - k + i {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                return true;
            }
        }
        self.exhausted = true;
        false
    }

    /// The subset the iterator currently points at (valid after a
    /// successful [`advance`](Self::advance)).
    pub fn current(&self) -> &[usize] {
        &self.indices
    }
}

impl Iterator for SubsetIterator {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().then(|| self.indices.clone())
    }
}
