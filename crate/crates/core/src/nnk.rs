//! Non-negative kernel regression neighborhoods.
//!
//! For a query `i` with candidate set `S`, the neighborhood weights solve
//!
//! ```text
//! minimize    1/2 θᵀ K_SS θ − K_Siᵀ θ
//! subject to  θ ≥ 0
//! ```
//!
//! with an active-set (Lawson–Hanson style) method. Candidates whose weight is
//! at or below `weight_threshold` are dropped; the survivors form `N(x_i)`.
//!
//! For the Gaussian kernel the support has a geometric reading: a retained
//! neighbor `j` removes every candidate lying beyond the hyperplane through
//! `x_j` normal to `x_j − x_i`. [`kri_admits`] is that pairwise test written in
//! kernel values.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::PointsView;
use crate::error::{Error, Result};
use crate::kernel::{kernel_from_sq_dist, select_sigma, squared_distance, KernelConfig};
use crate::knn::knn_search;

pub const DEFAULT_WEIGHT_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_MAX_ITER_FACTOR: usize = 10;

/// Entering-variable tolerance on the negative gradient.
const GRADIENT_TOL: f64 = 1e-12;
/// Relative pivot size below which a candidate is treated as linearly dependent.
const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnkConfig {
    pub weight_threshold: f64,
    /// Iteration cap is `max_iter_factor * |candidates|`.
    pub max_iter_factor: usize,
}

impl Default for NnkConfig {
    fn default() -> Self {
        Self { weight_threshold: DEFAULT_WEIGHT_THRESHOLD, max_iter_factor: DEFAULT_MAX_ITER_FACTOR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub k: usize,
    pub kernel: KernelConfig,
    pub nnk: NnkConfig,
}

impl GraphConfig {
    pub fn new(k: usize, kernel: KernelConfig) -> Self {
        Self { k, kernel, nnk: NnkConfig::default() }
    }
}

/// Kernel values for a query `i` and two candidates `j`, `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KriInstance {
    pub k_ij: f64,
    pub k_ik: f64,
    pub k_jk: f64,
}

impl KriInstance {
    pub fn new(k_ij: f64, k_ik: f64, k_jk: f64) -> Self {
        Self { k_ij, k_ik, k_jk }
    }

    /// The same triple seen from `k`'s side.
    pub fn swapped(&self) -> Self {
        Self { k_ij: self.k_ik, k_ik: self.k_ij, k_jk: self.k_jk }
    }

    fn validate(&self) -> Result<()> {
        for v in [self.k_ij, self.k_ik, self.k_jk] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidInput(format!("kernel value {v} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// True when candidate `k` survives `j` for query `i`: `K_ij / K_ik < 1 / K_jk`.
///
/// `false` means `k` lies beyond the hyperplane created by `j`. Checking both
/// `inst` and `inst.swapped()` gives the full two-sided interval.
pub fn kri_admits(inst: &KriInstance) -> Result<bool> {
    inst.validate()?;
    Ok(inst.k_ij * inst.k_jk < inst.k_ik)
}

/// Exact non-negative solution for two candidates `[θ_j, θ_k]`.
pub fn solve_two_candidate(inst: &KriInstance) -> [f64; 2] {
    let KriInstance { k_ij, k_ik, k_jk } = *inst;
    // Gradient conditions for each single-support solution.
    let k_enters = k_ik - k_jk * k_ij;
    let j_enters = k_ij - k_jk * k_ik;
    if k_enters <= 0.0 {
        return [k_ij.max(0.0), 0.0];
    }
    if j_enters <= 0.0 {
        return [0.0, k_ik.max(0.0)];
    }
    let det = 1.0 - k_jk * k_jk;
    [j_enters / det, k_enters / det]
}

/// Solves `min 1/2 θᵀPθ − qᵀθ, θ ≥ 0` for a symmetric positive semi-definite `P`
/// stored row-major as `m × m`.
pub fn solve_nonnegative_qp(gram: &[f64], target: &[f64], max_iter: usize) -> Result<Vec<f64>> {
    let m = target.len();
    if gram.len() != m * m {
        return Err(Error::DimensionMismatch { expected: m * m, got: gram.len() });
    }
    let mut theta = vec![0.0; m];
    let mut passive = vec![false; m];
    let mut excluded = vec![false; m];
    let mut iterations = 0usize;

    loop {
        let grad: Vec<f64> =
            (0..m).map(|r| target[r] - (0..m).map(|c| gram[r * m + c] * theta[c]).sum::<f64>()).collect();
        let entering = (0..m)
            .filter(|&r| !passive[r] && !excluded[r] && grad[r] > GRADIENT_TOL)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]).then(b.cmp(&a)));
        let Some(entering) = entering else { break };
        passive[entering] = true;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NonConvergence { iterations: max_iter });
            }
            let set: Vec<usize> = (0..m).filter(|&r| passive[r]).collect();
            let Some(z) = solve_subsystem(gram, m, target, &set) else {
                // A principal submatrix of a factorizable set is factorizable,
                // so only the entering column can be responsible.
                passive[entering] = false;
                excluded[entering] = true;
                break;
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&r, &v) in set.iter().zip(&z) {
                    theta[r] = v;
                }
                break;
            }
            // Step toward z until the first passive weight hits zero.
            let mut alpha = f64::INFINITY;
            let mut blocking = set[0];
            for (&r, &v) in set.iter().zip(&z) {
                if v <= 0.0 {
                    let step = theta[r] / (theta[r] - v);
                    if step < alpha {
                        alpha = step;
                        blocking = r;
                    }
                }
            }
            for (&r, &v) in set.iter().zip(&z) {
                theta[r] += alpha * (v - theta[r]);
                if r == blocking || theta[r] <= 0.0 {
                    theta[r] = 0.0;
                    passive[r] = false;
                }
            }
        }
    }
    Ok(theta)
}

/// Cholesky solve of `gram[set, set] z = target[set]`; `None` on a vanishing pivot.
fn solve_subsystem(gram: &[f64], m: usize, target: &[f64], set: &[usize]) -> Option<Vec<f64>> {
    let p = set.len();
    let mut l = vec![0.0; p * p];
    for a in 0..p {
        for b in 0..=a {
            let mut s = gram[set[a] * m + set[b]];
            for c in 0..b {
                s -= l[a * p + c] * l[b * p + c];
            }
            if a == b {
                let diag = gram[set[a] * m + set[a]];
                if s <= PIVOT_TOL * diag.max(f64::MIN_POSITIVE) {
                    return None;
                }
                l[a * p + a] = s.sqrt();
            } else {
                l[a * p + b] = s / l[b * p + b];
            }
        }
    }
    let mut y = vec![0.0; p];
    for a in 0..p {
        let mut s = target[set[a]];
        for c in 0..a {
            s -= l[a * p + c] * y[c];
        }
        y[a] = s / l[a * p + a];
    }
    for a in (0..p).rev() {
        let mut s = y[a];
        for c in a + 1..p {
            s -= l[c * p + a] * y[c];
        }
        y[a] = s / l[a * p + a];
    }
    Some(y)
}

/// One row of an NNK graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnkNeighborhood {
    pub query_index: usize,
    /// Ascending node ids.
    pub neighbor_indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl NnkNeighborhood {
    pub fn len(&self) -> usize {
        self.neighbor_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbor_indices.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.neighbor_indices.binary_search(&node).is_ok()
    }

    pub fn weight_of(&self, node: usize) -> Option<f64> {
        self.neighbor_indices.binary_search(&node).ok().map(|p| self.weights[p])
    }
}

/// Unpruned solver output over the de-duplicated candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    /// Ascending ids after collapsing coincident candidates.
    pub candidates: Vec<usize>,
    pub theta: Vec<f64>,
}

fn kernel_row(points: &PointsView<'_>, a: usize, b: usize, sigma: f64) -> f64 {
    kernel_from_sq_dist(squared_distance(points.row(a), points.row(b)), sigma)
}

/// Collapses candidates whose mutual kernel value is exactly 1 onto the lowest id.
fn collapse_candidates(points: &PointsView<'_>, query: usize, candidates: &[usize], sigma: f64) -> Vec<usize> {
    let mut ids: Vec<usize> = candidates.iter().copied().filter(|&c| c != query).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut kept: Vec<usize> = Vec::with_capacity(ids.len());
    for c in ids {
        if !kept.iter().any(|&r| kernel_row(points, r, c, sigma) == 1.0) {
            kept.push(c);
        }
    }
    kept
}

pub fn nnk_solve_raw(
    points: &PointsView<'_>,
    query_index: usize,
    candidates: &[usize],
    sigma: f64,
    config: &NnkConfig,
) -> Result<RawSolution> {
    let n = points.len();
    if query_index >= n {
        return Err(Error::InvalidInput(format!("query {query_index} out of range for {n} points")));
    }
    if let Some(&bad) = candidates.iter().find(|&&c| c >= n) {
        return Err(Error::InvalidInput(format!("candidate {bad} out of range for {n} points")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let cands = collapse_candidates(points, query_index, candidates, sigma);
    if cands.is_empty() {
        return Err(Error::InvalidInput("empty candidate set".into()));
    }
    let m = cands.len();
    let mut gram = vec![0.0; m * m];
    for a in 0..m {
        gram[a * m + a] = 1.0;
        for b in 0..a {
            let v = kernel_row(points, cands[a], cands[b], sigma);
            gram[a * m + b] = v;
            gram[b * m + a] = v;
        }
    }
    let target: Vec<f64> = cands.iter().map(|&c| kernel_row(points, query_index, c, sigma)).collect();
    let theta = solve_nonnegative_qp(&gram, &target, config.max_iter_factor.max(1) * m)?;
    Ok(RawSolution { candidates: cands, theta })
}

/// NNK neighborhood of `query_index` over `candidates`.
pub fn nnk_solve(
    points: &PointsView<'_>,
    query_index: usize,
    candidates: &[usize],
    sigma: f64,
    config: &NnkConfig,
) -> Result<NnkNeighborhood> {
    let raw = nnk_solve_raw(points, query_index, candidates, sigma, config)?;
    let (neighbor_indices, weights) = raw
        .candidates
        .iter()
        .zip(&raw.theta)
        .filter(|(_, &w)| w > config.weight_threshold)
        .map(|(&c, &w)| (c, w))
        .unzip();
    Ok(NnkNeighborhood { query_index, neighbor_indices, weights })
}

/// Sparse directed weighted graph; row `i` holds the NNK weights of node `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnkGraph {
    rows: Vec<NnkNeighborhood>,
}

impl NnkGraph {
    /// Validates ids, ordering and weights of each row.
    pub fn from_rows(rows: Vec<NnkNeighborhood>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.query_index != i {
                return Err(Error::MalformedGraph(format!("row {i} has query index {}", row.query_index)));
            }
            if row.neighbor_indices.len() != row.weights.len() {
                return Err(Error::MalformedGraph(format!("row {i}: ids and weights differ in length")));
            }
            if !row.neighbor_indices.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::MalformedGraph(format!("row {i}: neighbor ids not strictly ascending")));
            }
            if row.neighbor_indices.iter().any(|&j| j >= n || j == i) {
                return Err(Error::MalformedGraph(format!("row {i}: neighbor id out of range or self loop")));
            }
            if row.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(Error::MalformedGraph(format!("row {i}: non-positive weight")));
            }
        }
        Ok(Self { rows })
    }

    pub fn empty(n_nodes: usize) -> Self {
        Self {
            rows: (0..n_nodes)
                .map(|i| NnkNeighborhood { query_index: i, neighbor_indices: vec![], weights: vec![] })
                .collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &NnkNeighborhood {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[NnkNeighborhood] {
        &self.rows
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.rows[i].neighbor_indices
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.len()).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.n_edges() as f64 / self.rows.len() as f64
    }

    /// `(query, neighbor, weight)` sorted by `(query, neighbor)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .flat_map(|r| r.neighbor_indices.iter().zip(&r.weights).map(move |(&j, &w)| (r.query_index, j, w)))
    }
}

/// Solves every row with a caller-supplied candidate set, in parallel.
///
/// Rows are independent; the result does not depend on scheduling, and the
/// reported error is the one with the lowest node id.
pub fn build_graph_with<F>(points: &PointsView<'_>, sigma: f64, config: &NnkConfig, candidates: F) -> Result<NnkGraph>
where
    F: Fn(usize) -> Result<Vec<usize>> + Sync,
{
    let rows: Vec<Result<NnkNeighborhood>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let cands = candidates(i)?;
            nnk_solve(points, i, &cands, sigma, config)
        })
        .collect();
    let rows =
        rows.into_iter().enumerate().map(|(i, r)| r.map_err(|e| Error::at_node(i, e))).collect::<Result<Vec<_>>>()?;
    NnkGraph::from_rows(rows)
}

/// KNN-initialized NNK graph. The bandwidth is resolved from `points` itself.
pub fn build_graph(points: &PointsView<'_>, config: &GraphConfig) -> Result<NnkGraph> {
    let n = points.len();
    if config.k == 0 || n < config.k + 1 {
        return Err(Error::TooFewPoints { k: config.k, n });
    }
    let sigma = select_sigma(points, config.k, &config.kernel)?;
    debug!("building NNK graph: n={n} k={} sigma={sigma}", config.k);
    build_graph_with(points, sigma, &config.nnk, |i| Ok(knn_search(points, i, config.k)?.indices))
}

/// Why a candidate did not make it into the neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    /// A single retained neighbor eliminates it.
    EliminatedBy(usize),
    /// Positive weight at or below the threshold.
    BelowThreshold,
    /// Zero weight with no single retained eliminator.
    Joint,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KriAudit {
    pub retained_pairs: usize,
    /// Retained pairs failing the two-sided interval.
    pub retained_pair_violations: Vec<(usize, usize)>,
    pub pruned: Vec<(usize, PruneReason)>,
}

/// Cross-checks a solved neighborhood against the pairwise elimination test.
pub fn kri_audit(
    points: &PointsView<'_>,
    query_index: usize,
    candidates: &[usize],
    sigma: f64,
    config: &NnkConfig,
) -> Result<KriAudit> {
    let raw = nnk_solve_raw(points, query_index, candidates, sigma, config)?;
    let k_q = |c: usize| kernel_row(points, query_index, c, sigma);
    let retained: Vec<usize> =
        raw.candidates.iter().zip(&raw.theta).filter(|(_, &w)| w > config.weight_threshold).map(|(&c, _)| c).collect();
    let mut audit = KriAudit::default();
    for (a, &j) in retained.iter().enumerate() {
        for &k in &retained[a + 1..] {
            audit.retained_pairs += 1;
            let inst = KriInstance::new(k_q(j), k_q(k), kernel_row(points, j, k, sigma));
            if !(kri_admits(&inst)? && kri_admits(&inst.swapped())?) {
                audit.retained_pair_violations.push((j, k));
            }
        }
    }
    for (&k, &w) in raw.candidates.iter().zip(&raw.theta) {
        if w > config.weight_threshold {
            continue;
        }
        let reason = if w > 0.0 {
            PruneReason::BelowThreshold
        } else {
            let mut found = None;
            for &j in &retained {
                let inst = KriInstance::new(k_q(j), k_q(k), kernel_row(points, j, k, sigma));
                if !kri_admits(&inst)? {
                    found = Some(j);
                    break;
                }
            }
            found.map_or(PruneReason::Joint, PruneReason::EliminatedBy)
        };
        audit.pruned.push((k, reason));
    }
    Ok(audit)
}
