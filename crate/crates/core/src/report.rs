//! Cross-layer and cross-model summaries of overlap reports.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlap::OverlapReport;

/// Tag used for layers whose model tag is unknown.
pub const UNTAGGED: &str = "untagged";

/// One analyzed layer with the model it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerEntry {
    pub tag: Option<String>,
    pub layer_index: Option<usize>,
    pub report: OverlapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tag: String,
    pub layer_index: usize,
    pub layer_name: String,
    pub n_channels: usize,
    pub cw_overlap: f64,
    pub cw_overlap_pair_normalized: f64,
    /// Mean over channels of the mean per-channel neighbor count.
    pub mean_nnk_count: f64,
    pub mean_aggregate_nnk_count: Option<f64>,
}

/// Flattens reports into a depth series per model tag.
///
/// Entries keep their given order; a missing layer index becomes the position
/// of the entry among those sharing its tag. Channel counts may differ by layer.
pub fn layer_sweep(entries: &[LayerEntry]) -> Result<Vec<SweepRow>> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("layer sweep needs at least one report".into()));
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::with_capacity(entries.len());
    for e in entries {
        let tag = match &e.tag {
            Some(t) => t.clone(),
            None => {
                log::warn!("layer {} has no model tag; filed under {UNTAGGED}", e.report.layer_name);
                UNTAGGED.to_string()
            }
        };
        let position = seen.entry(tag.clone()).or_insert(0);
        let layer_index = e.layer_index.unwrap_or(*position);
        *position += 1;
        let counts = &e.report.mean_nnk_count_per_channel;
        let mean_nnk_count = if counts.is_empty() { 0.0 } else { counts.iter().sum::<f64>() / counts.len() as f64 };
        rows.push(SweepRow {
            tag,
            layer_index,
            layer_name: e.report.layer_name.clone(),
            n_channels: e.report.channel_names.len(),
            cw_overlap: e.report.cw_overlap,
            cw_overlap_pair_normalized: e.report.cw_overlap_pair_normalized,
            mean_nnk_count,
            mean_aggregate_nnk_count: e.report.mean_aggregate_nnk_count,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(e, path))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(e, path))?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn csv_io(e: csv::Error, path: &Path) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStats {
    pub n: usize,
    /// `None` when either series has zero variance.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub tags: Vec<String>,
    pub overlaps: Vec<f64>,
    pub test_errors: Vec<f64>,
}

/// Pearson and Spearman correlation between overlap and test error, matched by model tag.
///
/// Pairs follow the order of `overlaps`; tags absent from either side are dropped.
pub fn correlation(overlaps: &[(String, f64)], test_errors: &[(String, f64)]) -> Result<CorrelationStats> {
    let errors: HashMap<&str, f64> = unique_tags(test_errors)?;
    unique_tags(overlaps)?;
    let (mut tags, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for (tag, x) in overlaps {
        if let Some(&y) = errors.get(tag.as_str()) {
            tags.push(tag.clone());
            xs.push(*x);
            ys.push(y);
        }
    }
    if tags.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "correlation needs at least 3 matched model tags, got {}",
            tags.len()
        )));
    }
    if let Some(v) = xs.iter().chain(&ys).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value {v} in correlation input")));
    }
    Ok(CorrelationStats {
        n: tags.len(),
        pearson: pearson(&xs, &ys),
        spearman: spearman(&xs, &ys),
        tags,
        overlaps: xs,
        test_errors: ys,
    })
}

fn unique_tags(pairs: &[(String, f64)]) -> Result<HashMap<&str, f64>> {
    let mut seen = BTreeSet::new();
    for (t, _) in pairs {
        if !seen.insert(t.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate model tag {t}")));
        }
    }
    Ok(pairs.iter().map(|(t, v)| (t.as_str(), *v)).collect())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::OVERLAP_AVERAGING;

    fn report(name: &str, overlap: f64) -> OverlapReport {
        OverlapReport {
            layer_name: name.into(),
            channel_names: vec!["c0".into(), "c1".into()],
            k: 10,
            sigma: 1.5,
            averaging: OVERLAP_AVERAGING.into(),
            cw_overlap: overlap,
            cw_overlap_pair_normalized: overlap,
            excluded_points: 0,
            pair_matrix: vec![vec![0.0; 2]; 2],
            pair_counts: vec![vec![0; 2]; 2],
            mean_nnk_count_per_channel: vec![3.0, 4.0],
            mean_aggregate_nnk_count: None,
            id_proxy: None,
            lower_bound_violations: None,
            per_point_overlap: Vec::new(),
        }
    }

    fn tagged(v: &[f64]) -> Vec<(String, f64)> {
        v.iter().enumerate().map(|(i, x)| (format!("m{i}"), *x)).collect()
    }

    #[test]
    fn single_layer_single_row() {
        let rows =
            layer_sweep(&[LayerEntry { tag: Some("d0.1".into()), layer_index: None, report: report("conv1", 0.3) }])
                .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].layer_index, 0);
        assert_eq!(rows[0].mean_nnk_count, 3.5);
        assert!(layer_sweep(&[]).is_err());
    }

    #[test]
    fn identical_layers_identical_rows() {
        let e = LayerEntry { tag: Some("m".into()), layer_index: Some(2), report: report("conv", 0.25) };
        let rows = layer_sweep(&[e.clone(), e]).unwrap();
        assert_eq!(rows[0], rows[1]);
    }

    #[test]
    fn untagged_layers_are_grouped() {
        let entries: Vec<LayerEntry> = (0..3)
            .map(|l| LayerEntry { tag: None, layer_index: None, report: report(&format!("l{l}"), 0.1) })
            .collect();
        let rows = layer_sweep(&entries).unwrap();
        assert!(rows.iter().all(|r| r.tag == UNTAGGED));
        assert_eq!(rows.iter().map(|r| r.layer_index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn anti_monotone_spearman() {
        let s = correlation(&tagged(&[1.0, 2.0, 3.0]), &tagged(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(s.spearman, Some(-1.0));
        assert_eq!(s.pearson, Some(-1.0));
        assert_eq!(s.n, 3);
    }

    #[test]
    fn constant_series_is_undefined() {
        let s = correlation(&tagged(&[0.5, 0.5, 0.5, 0.5]), &tagged(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(s.pearson, None);
        assert_eq!(s.spearman, None);
    }

    #[test]
    fn too_few_matches() {
        let o = tagged(&[1.0, 2.0, 3.0]);
        let e = vec![("m0".to_string(), 1.0), ("m1".to_string(), 2.0), ("other".to_string(), 3.0)];
        assert!(matches!(correlation(&o, &e), Err(Error::InvalidInput(_))));
        let dup = vec![("m0".to_string(), 1.0), ("m0".to_string(), 2.0)];
        assert!(correlation(&dup, &o).is_err());
    }

    #[test]
    fn ties_share_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let mut rows =
            layer_sweep(&[LayerEntry { tag: Some("a".into()), layer_index: None, report: report("x", 0.1 + 0.2) }])
                .unwrap();
        rows[0].mean_aggregate_nnk_count = Some(1.0 / 3.0);
        write_sweep_csv(&rows, &path).unwrap();
        assert_eq!(read_sweep_csv(&path).unwrap(), rows);
    }
}
