//! Channel layouts, feature sets, and channel-wise graph construction.

use std::collections::HashSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Source;
use crate::kernel::select_sigma;
use crate::knn::{knn_search, knn_union};
use crate::nnk::{build_graph_with, GraphConfig, NnkGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub dim: usize,
}

/// Ordered channel names and widths; channel `c` occupies a contiguous column range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelLayout {
    channels: Vec<ChannelSpec>,
    offsets: Vec<usize>,
}

impl ChannelLayout {
    pub fn new(channels: Vec<(String, usize)>) -> Result<Self> {
        Self::from_specs(channels.into_iter().map(|(name, dim)| ChannelSpec { name, dim }).collect())
    }

    pub fn from_specs(channels: Vec<ChannelSpec>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidInput("channel layout is empty".into()));
        }
        let mut seen = HashSet::new();
        let mut offsets = Vec::with_capacity(channels.len());
        let mut off = 0;
        for ch in &channels {
            if ch.dim == 0 {
                return Err(Error::InvalidInput(format!("channel `{}` has zero width", ch.name)));
            }
            if !seen.insert(ch.name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate channel name `{}`", ch.name)));
            }
            offsets.push(off);
            off += ch.dim;
        }
        Ok(Self { channels, offsets })
    }

    /// `count` equally wide channels named `c0`, `c1`, ...
    pub fn uniform(count: usize, dim: usize) -> Result<Self> {
        Self::new((0..count).map(|c| (format!("c{c}"), dim)).collect())
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.channels.iter().map(|c| c.dim).sum()
    }

    pub fn specs(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.name.as_str())
    }

    pub fn range(&self, c: usize) -> Range<usize> {
        self.offsets[c]..self.offsets[c] + self.channels[c].dim
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.len()).map(|c| self.range(c))
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.channels.iter().position(|c| c.name == name).ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }
}

/// Read-only rows of a column window of a row-major matrix.
#[derive(Debug, Clone, Copy)]
pub struct PointsView<'a> {
    data: &'a [f64],
    stride: usize,
    offset: usize,
    dim: usize,
    n: usize,
}

impl<'a> PointsView<'a> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        let start = i * self.stride + self.offset;
        &self.data[start..start + self.dim]
    }
}

/// `N × D` feature matrix of one layer with its channel layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    layout: ChannelLayout,
    pub layer_name: String,
    pub labels: Option<Vec<i64>>,
    pub provenance: Source,
}

impl FeatureSet {
    pub fn new(
        data: Vec<f64>,
        n: usize,
        dim: usize,
        layout: ChannelLayout,
        layer_name: impl Into<String>,
    ) -> Result<Self> {
        if data.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: data.len() });
        }
        if layout.total_dim() != dim {
            return Err(Error::LayoutMismatch { layout_dim: layout.total_dim(), feature_dim: dim });
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 points, got {n}")));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: p / dim, col: p % dim });
        }
        Ok(Self { data, n, dim, layout, layer_name: layer_name.into(), labels: None, provenance: Source::default() })
    }

    pub fn single_channel(data: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        Self::new(data, n, dim, ChannelLayout::new(vec![("c0".into(), dim)])?, "layer")
    }

    pub fn with_provenance(mut self, provenance: Source) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &ChannelLayout {
        &self.layout
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// The aggregate space: all columns.
    pub fn view(&self) -> PointsView<'_> {
        PointsView { data: &self.data, stride: self.dim, offset: 0, dim: self.dim, n: self.n }
    }

    pub fn channel_view(&self, c: usize) -> PointsView<'_> {
        let r = self.layout.range(c);
        PointsView { data: &self.data, stride: self.dim, offset: r.start, dim: r.len(), n: self.n }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelView<'a> {
    pub name: &'a str,
    pub points: PointsView<'a>,
}

/// One read-only view per channel, in layout order.
pub fn split_channels(features: &FeatureSet) -> Result<Vec<ChannelView<'_>>> {
    let layout = features.layout();
    if layout.total_dim() != features.dim() {
        return Err(Error::LayoutMismatch { layout_dim: layout.total_dim(), feature_dim: features.dim() });
    }
    Ok(layout
        .specs()
        .iter()
        .enumerate()
        .map(|(c, spec)| ChannelView { name: &spec.name, points: features.channel_view(c) })
        .collect())
}

/// Per-channel NNK graphs of one layer, all built with the same `K` and bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGraphBundle {
    pub channel_names: Vec<String>,
    pub per_channel: Vec<NnkGraph>,
    pub sigma_used: f64,
    pub k_used: usize,
}

impl ChannelGraphBundle {
    pub fn new(channel_names: Vec<String>, per_channel: Vec<NnkGraph>, sigma_used: f64, k_used: usize) -> Result<Self> {
        if channel_names.len() != per_channel.len() {
            return Err(Error::InvalidInput("channel names and graphs differ in count".into()));
        }
        if let Some(first) = per_channel.first() {
            if per_channel.iter().any(|g| g.n_nodes() != first.n_nodes()) {
                return Err(Error::InvalidInput("channel graphs differ in node count".into()));
            }
        }
        Ok(Self { channel_names, per_channel, sigma_used, k_used })
    }

    pub fn n_channels(&self) -> usize {
        self.per_channel.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.per_channel.first().map_or(0, |g| g.n_nodes())
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channel_names.iter().position(|c| c == name).ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn graph(&self, name: &str) -> Result<&NnkGraph> {
        Ok(&self.per_channel[self.channel_index(name)?])
    }
}

/// Resolves the layer bandwidth on the aggregate features.
pub fn layer_sigma(features: &FeatureSet, config: &GraphConfig) -> Result<f64> {
    let n = features.n_points();
    if config.k == 0 || n < config.k + 1 {
        return Err(Error::TooFewPoints { k: config.k, n });
    }
    select_sigma(&features.view(), config.k, &config.kernel)
}

/// One NNK graph per channel, sharing the layer bandwidth.
pub fn build_cw_graphs(features: &FeatureSet, config: &GraphConfig) -> Result<ChannelGraphBundle> {
    let sigma = layer_sigma(features, config)?;
    build_cw_graphs_with_sigma(features, config, sigma)
}

pub fn build_cw_graphs_with_sigma(
    features: &FeatureSet,
    config: &GraphConfig,
    sigma: f64,
) -> Result<ChannelGraphBundle> {
    let views = split_channels(features)?;
    let k = config.k;
    let graphs: Vec<Result<NnkGraph>> = views
        .par_iter()
        .map(|v| {
            let points = v.points;
            build_graph_with(&points, sigma, &config.nnk, |i| Ok(knn_search(&points, i, k)?.indices))
                .map_err(|e| Error::at_channel(v.name, e))
        })
        .collect();
    let per_channel = graphs.into_iter().collect::<Result<Vec<_>>>()?;
    ChannelGraphBundle::new(views.iter().map(|v| v.name.to_string()).collect(), per_channel, sigma, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Union of the per-channel KNN sets.
    #[default]
    UnionOfChannelKnn,
    /// Plain KNN in the aggregate space.
    AggregateKnn,
}

/// Aggregate-space initialization set `S(x_i)`, ascending ids.
pub fn aggregate_candidates(features: &FeatureSet, query: usize, init: InitMode, k: usize) -> Result<Vec<usize>> {
    match init {
        InitMode::AggregateKnn => {
            let mut ids = knn_search(&features.view(), query, k)?.indices;
            ids.sort_unstable();
            Ok(ids)
        }
        InitMode::UnionOfChannelKnn => {
            let per_channel = (0..features.layout().len())
                .map(|c| knn_search(&features.channel_view(c), query, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(knn_union(&per_channel)?.into_iter().collect())
        }
    }
}

/// NNK graph over the full feature vectors.
pub fn build_aggregate_graph(features: &FeatureSet, init: InitMode, config: &GraphConfig) -> Result<NnkGraph> {
    let sigma = layer_sigma(features, config)?;
    build_aggregate_graph_with_sigma(features, init, config, sigma)
}

pub fn build_aggregate_graph_with_sigma(
    features: &FeatureSet,
    init: InitMode,
    config: &GraphConfig,
    sigma: f64,
) -> Result<NnkGraph> {
    let points = features.view();
    build_graph_with(&points, sigma, &config.nnk, |i| aggregate_candidates(features, i, init, config.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelConfig;
    use crate::nnk::build_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(seed: u64, n: usize, layout: ChannelLayout) -> FeatureSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = layout.total_dim();
        let data = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FeatureSet::new(data, n, d, layout, "test").unwrap()
    }

    #[test]
    fn split_two_channels() {
        let layout = ChannelLayout::new(vec![("a".into(), 2), ("b".into(), 2)]).unwrap();
        let fs = FeatureSet::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 2, 4, layout, "l").unwrap();
        let views = split_channels(&fs).unwrap();
        assert_eq!(views[0].name, "a");
        assert_eq!(views[0].points.row(0), &[1.0, 2.0]);
        assert_eq!(views[1].points.row(0), &[3.0, 4.0]);
        assert_eq!(views[1].points.row(1), &[7.0, 8.0]);
    }

    #[test]
    fn single_channel_view_is_full_matrix() {
        let fs = FeatureSet::single_channel(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, 3).unwrap();
        let views = split_channels(&fs).unwrap();
        assert_eq!(views.len(), 1);
        for i in 0..2 {
            assert_eq!(views[0].points.row(i), fs.row(i));
        }
    }

    #[test]
    fn layout_short_of_width_is_rejected() {
        let layout = ChannelLayout::new(vec![("a".into(), 2), ("b".into(), 1)]).unwrap();
        let r = FeatureSet::new(vec![0.0; 8], 2, 4, layout, "l");
        assert!(matches!(r, Err(Error::LayoutMismatch { layout_dim: 3, feature_dim: 4 })));
    }

    #[test]
    fn layout_rejects_duplicates_and_zero_width() {
        assert!(ChannelLayout::new(vec![("a".into(), 2), ("a".into(), 1)]).is_err());
        assert!(ChannelLayout::new(vec![("a".into(), 0)]).is_err());
        assert!(ChannelLayout::new(vec![]).is_err());
    }

    #[test]
    fn single_channel_bundle_equals_aggregate_graph() {
        let fs = random_set(5, 40, ChannelLayout::uniform(1, 3).unwrap());
        let cfg = GraphConfig::new(8, KernelConfig::default());
        let bundle = build_cw_graphs(&fs, &cfg).unwrap();
        let agg_union = build_aggregate_graph(&fs, InitMode::UnionOfChannelKnn, &cfg).unwrap();
        let agg_knn = build_aggregate_graph(&fs, InitMode::AggregateKnn, &cfg).unwrap();
        assert_eq!(bundle.per_channel[0], agg_union);
        assert_eq!(agg_union, agg_knn);
    }

    #[test]
    fn duplicated_channel_gives_identical_graphs() {
        let base = random_set(6, 60, ChannelLayout::uniform(1, 3).unwrap());
        let mut data = Vec::new();
        for i in 0..60 {
            data.extend_from_slice(base.row(i));
            data.extend_from_slice(base.row(i));
        }
        let fs = FeatureSet::new(data, 60, 6, ChannelLayout::uniform(2, 3).unwrap(), "dup").unwrap();
        let bundle = build_cw_graphs(&fs, &GraphConfig::new(10, KernelConfig::default())).unwrap();
        assert_eq!(bundle.per_channel[0], bundle.per_channel[1]);
    }

    #[test]
    fn channel_graphs_match_standalone_builds() {
        let fs = random_set(7, 100, ChannelLayout::uniform(2, 4).unwrap());
        let cfg = GraphConfig::new(12, KernelConfig::default());
        let bundle = build_cw_graphs(&fs, &cfg).unwrap();
        for c in 0..2 {
            let mut sub = Vec::new();
            for i in 0..100 {
                sub.extend_from_slice(&fs.row(i)[c * 4..c * 4 + 4]);
            }
            let standalone = FeatureSet::single_channel(sub, 100, 4).unwrap();
            let fixed = GraphConfig::new(12, KernelConfig::fixed(bundle.sigma_used));
            let g = build_graph(&standalone.view(), &fixed).unwrap();
            assert_eq!(g, bundle.per_channel[c]);
        }
    }

    #[test]
    fn union_candidates_cover_each_channel_knn() {
        let fs = random_set(8, 50, ChannelLayout::uniform(3, 2).unwrap());
        for i in 0..50 {
            let s = aggregate_candidates(&fs, i, InitMode::UnionOfChannelKnn, 6).unwrap();
            for c in 0..3 {
                for j in knn_search(&fs.channel_view(c), i, 6).unwrap().indices {
                    assert!(s.binary_search(&j).is_ok());
                }
            }
        }
    }

    #[test]
    fn bundle_lookup_by_name() {
        let fs = random_set(9, 20, ChannelLayout::new(vec![("x".into(), 2), ("y".into(), 2)]).unwrap());
        let bundle = build_cw_graphs(&fs, &GraphConfig::new(4, KernelConfig::default())).unwrap();
        assert!(bundle.graph("y").is_ok());
        assert!(matches!(bundle.graph("z"), Err(Error::UnknownChannel(_))));
    }
}
