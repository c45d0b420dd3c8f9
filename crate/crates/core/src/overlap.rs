//! Channel redundancy measures over a bundle of channel graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::channels::ChannelGraphBundle;
use crate::error::{Error, Result};
use crate::nnk::NnkGraph;

/// How `cw_overlap` averages: per-point ratio first, then the mean over points.
pub const OVERLAP_AVERAGING: &str = "mean_of_per_point_ratios";

/// Size of the intersection of two ascending id lists.
pub(crate) fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub first: usize,
    pub second: usize,
    pub count: usize,
}

/// `|N(x_{i_a}) ∩ N(x_{i_b})|` for every unordered channel pair `a < b`.
pub fn pairwise_intersections(bundle: &ChannelGraphBundle, query_index: usize) -> Result<Vec<PairCount>> {
    if query_index >= bundle.n_nodes() {
        return Err(Error::InvalidInput(format!("query {query_index} out of range")));
    }
    let c = bundle.n_channels();
    let mut out = Vec::with_capacity(c * c.saturating_sub(1) / 2);
    for a in 0..c {
        let na = bundle.per_channel[a].neighbors(query_index);
        for b in a + 1..c {
            let nb = bundle.per_channel[b].neighbors(query_index);
            out.push(PairCount { first: a, second: b, count: sorted_intersection_len(na, nb) });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapScalars {
    /// Mean over points of (sum of pairwise intersections) / (mean channel neighborhood size).
    pub cw_overlap: f64,
    /// Same, with the pair sum divided by the number of channel pairs.
    pub cw_overlap_pair_normalized: f64,
    /// Per-point ratio; `None` where every channel neighborhood is empty.
    pub per_point_overlap: Vec<Option<f64>>,
    pub excluded_points: usize,
}

pub fn cw_overlap(bundle: &ChannelGraphBundle) -> Result<OverlapScalars> {
    let c = bundle.n_channels();
    if c < 2 {
        return Err(Error::InvalidInput(format!("overlap needs at least 2 channels, got {c}")));
    }
    let pairs = (c * (c - 1) / 2) as f64;
    let n = bundle.n_nodes();
    let mut per_point = Vec::with_capacity(n);
    let (mut sum, mut used) = (0.0, 0usize);
    for i in 0..n {
        let raw: usize = pairwise_intersections(bundle, i)?.iter().map(|p| p.count).sum();
        let avg = bundle.per_channel.iter().map(|g| g.neighbors(i).len()).sum::<usize>() as f64 / c as f64;
        if avg == 0.0 {
            per_point.push(None);
            continue;
        }
        let ratio = raw as f64 / avg;
        per_point.push(Some(ratio));
        sum += ratio;
        used += 1;
    }
    let cw = if used == 0 { 0.0 } else { sum / used as f64 };
    Ok(OverlapScalars {
        cw_overlap: cw,
        cw_overlap_pair_normalized: cw / pairs,
        per_point_overlap: per_point,
        excluded_points: n - used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatrix {
    /// Summed intersections over summed mean neighborhood size; zero diagonal.
    pub normalized: Vec<Vec<f64>>,
    /// Summed intersection counts; zero diagonal.
    pub raw: Vec<Vec<u64>>,
}

pub fn pair_matrix(bundle: &ChannelGraphBundle) -> Result<PairMatrix> {
    let c = bundle.n_channels();
    if c < 2 {
        return Err(Error::InvalidInput(format!("pair matrix needs at least 2 channels, got {c}")));
    }
    let n = bundle.n_nodes();
    let mut raw = vec![vec![0u64; c]; c];
    let mut sizes = vec![0u64; c];
    for (ch, g) in bundle.per_channel.iter().enumerate() {
        sizes[ch] = g.n_edges() as u64;
    }
    for i in 0..n {
        for p in pairwise_intersections(bundle, i)? {
            raw[p.first][p.second] += p.count as u64;
        }
    }
    let mut normalized = vec![vec![0.0; c]; c];
    for a in 0..c {
        for b in a + 1..c {
            raw[b][a] = raw[a][b];
            let denom = 0.5 * (sizes[a] + sizes[b]) as f64;
            let v = if denom > 0.0 { raw[a][b] as f64 / denom } else { 0.0 };
            normalized[a][b] = v;
            normalized[b][a] = v;
        }
    }
    Ok(PairMatrix { normalized, raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl CountStats {
    pub fn of(counts: &[usize]) -> Self {
        if counts.is_empty() {
            return Self { mean: 0.0, median: 0.0, stddev: 0.0 };
        }
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / n;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
        } else {
            sorted[mid] as f64
        };
        Self { mean, median, stddev: var.sqrt() }
    }
}

/// Neighbor-count statistics. Smaller counts read as lower intrinsic dimension;
/// these are proxies, not calibrated estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdProxy {
    pub per_channel: Vec<CountStats>,
    pub aggregate: CountStats,
}

pub fn id_proxy(bundle: &ChannelGraphBundle, aggregate: &NnkGraph) -> Result<IdProxy> {
    if aggregate.n_nodes() != bundle.n_nodes() && bundle.n_channels() > 0 {
        return Err(Error::InvalidInput("aggregate graph and bundle differ in node count".into()));
    }
    Ok(IdProxy {
        per_channel: bundle.per_channel.iter().map(|g| CountStats::of(&g.degrees())).collect(),
        aggregate: CountStats::of(&aggregate.degrees()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborEntry {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelListing {
    pub channel: String,
    /// Heaviest first.
    pub neighbors: Vec<NeighborEntry>,
}

pub fn neighbor_listing(
    bundle: &ChannelGraphBundle,
    query_index: usize,
    channels: &[&str],
) -> Result<Vec<ChannelListing>> {
    if channels.is_empty() {
        return Err(Error::InvalidInput("no channels requested".into()));
    }
    if query_index >= bundle.n_nodes() {
        return Err(Error::InvalidInput(format!("query {query_index} out of range")));
    }
    channels
        .iter()
        .map(|&name| {
            let row = bundle.graph(name)?.row(query_index);
            let mut neighbors: Vec<NeighborEntry> = row
                .neighbor_indices
                .iter()
                .zip(&row.weights)
                .map(|(&index, &weight)| NeighborEntry { index, weight })
                .collect();
            neighbors.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.index.cmp(&b.index)));
            Ok(ChannelListing { channel: name.to_string(), neighbors })
        })
        .collect()
}

/// Union over channel pairs of `N(x_{i_a}) ∩ N(x_{i_b})`.
pub fn pairwise_intersection_union(bundle: &ChannelGraphBundle, query_index: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let c = bundle.n_channels();
    for a in 0..c {
        let na = bundle.per_channel[a].neighbors(query_index);
        for b in a + 1..c {
            let nb = bundle.per_channel[b].neighbors(query_index);
            out.extend(na.iter().filter(|j| nb.binary_search(j).is_ok()));
        }
    }
    out
}

/// Queries where the union of pairwise channel intersections is larger than
/// the aggregate neighborhood. Empty for a union-initialized aggregate graph.
pub fn lower_bound_violations(bundle: &ChannelGraphBundle, aggregate: &NnkGraph) -> Vec<usize> {
    (0..bundle.n_nodes())
        .filter(|&i| pairwise_intersection_union(bundle, i).len() > aggregate.neighbors(i).len())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub layer_name: String,
    pub channel_names: Vec<String>,
    pub k: usize,
    pub sigma: f64,
    pub averaging: String,
    pub cw_overlap: f64,
    pub cw_overlap_pair_normalized: f64,
    pub excluded_points: usize,
    pub pair_matrix: Vec<Vec<f64>>,
    pub pair_counts: Vec<Vec<u64>>,
    pub mean_nnk_count_per_channel: Vec<f64>,
    pub mean_aggregate_nnk_count: Option<f64>,
    pub id_proxy: Option<IdProxy>,
    pub lower_bound_violations: Option<usize>,
    pub per_point_overlap: Vec<Option<f64>>,
}

pub fn overlap_report(
    layer_name: &str,
    bundle: &ChannelGraphBundle,
    aggregate: Option<&NnkGraph>,
) -> Result<OverlapReport> {
    let scalars = cw_overlap(bundle)?;
    let matrix = pair_matrix(bundle)?;
    let proxy = aggregate.map(|a| id_proxy(bundle, a)).transpose()?;
    Ok(OverlapReport {
        layer_name: layer_name.to_string(),
        channel_names: bundle.channel_names.clone(),
        k: bundle.k_used,
        sigma: bundle.sigma_used,
        averaging: OVERLAP_AVERAGING.to_string(),
        cw_overlap: scalars.cw_overlap,
        cw_overlap_pair_normalized: scalars.cw_overlap_pair_normalized,
        excluded_points: scalars.excluded_points,
        pair_matrix: matrix.normalized,
        pair_counts: matrix.raw,
        mean_nnk_count_per_channel: bundle.per_channel.iter().map(|g| g.mean_degree()).collect(),
        mean_aggregate_nnk_count: aggregate.map(|a| a.mean_degree()),
        id_proxy: proxy,
        lower_bound_violations: aggregate.map(|a| lower_bound_violations(bundle, a).len()),
        per_point_overlap: scalars.per_point_overlap,
    })
}
