//! Feature dumps, manifests and graph files.
//!
//! Feature tensor (`.cwnk`), little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CWNK"
//! 4       2     version (1)
//! 6       2     dtype (1 = f32, 2 = f64)
//! 8       4     n_points
//! 12      4     dim
//! 16      ...   n_points * dim values, row-major
//! ```
//!
//! Graph (`.nnkg`), little-endian:
//!
//! ```text
//! 0       4     magic "CWNG"
//! 4       2     version (1)
//! 6       2     reserved (0)
//! 8       4     n_nodes
//! 12      4     n_triplets
//! 16      ...   n_triplets * (query u32, neighbor u32, weight f64), sorted by (query, neighbor)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelLayout, ChannelSpec, FeatureSet};
use crate::error::{Error, Result};
use crate::nnk::{NnkGraph, NnkNeighborhood};

pub const FEATURE_MAGIC: &[u8; 4] = b"CWNK";
pub const GRAPH_MAGIC: &[u8; 4] = b"CWNG";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;
const TRIPLET_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u16 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    pub fn from_code(code: u16) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            other => Err(Error::UnsupportedDtype(other)),
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Free-form provenance; the typed fields are the ones the reports read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Source {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_index: Option<usize>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub layer_name: String,
    pub n_points: usize,
    pub dtype: Dtype,
    pub channels: Vec<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
    #[serde(default)]
    pub source: Source,
}

impl Manifest {
    pub fn for_features(features: &FeatureSet, dtype: Dtype) -> Self {
        Self {
            layer_name: features.layer_name.clone(),
            n_points: features.n_points(),
            dtype,
            channels: features.layout().specs().to_vec(),
            labels: features.labels.clone(),
            source: features.provenance.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.channels.iter().map(|c| c.dim).sum()
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline; key order follows field order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_file(path)?)?)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    read_json(path)
}

pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    write_json(path, manifest)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Loads a tensor (binary, or CSV when the extension is `.csv`) and validates it
/// against its manifest. Values are promoted to f64.
pub fn load_features(tensor_path: &Path, manifest_path: &Path) -> Result<FeatureSet> {
    let manifest = load_manifest(manifest_path)?;
    let (data, n, dim) = if is_csv(tensor_path) {
        read_csv_matrix(tensor_path)?
    } else {
        let (data, n, dim, dtype) = decode_tensor(tensor_path, &read_file(tensor_path)?)?;
        if dtype != manifest.dtype {
            return Err(Error::ManifestMismatch(format!(
                "manifest dtype {:?}, file dtype {:?}",
                manifest.dtype, dtype
            )));
        }
        (data, n, dim)
    };
    features_from_parts(data, n, dim, manifest)
}

fn features_from_parts(data: Vec<f64>, n: usize, dim: usize, manifest: Manifest) -> Result<FeatureSet> {
    if manifest.n_points != n {
        return Err(Error::ManifestMismatch(format!("manifest n_points {}, file has {n}", manifest.n_points)));
    }
    let layout = ChannelLayout::from_specs(manifest.channels)?;
    if layout.total_dim() != dim {
        return Err(Error::LayoutMismatch { layout_dim: layout.total_dim(), feature_dim: dim });
    }
    if let Some(labels) = &manifest.labels {
        if labels.len() != n {
            return Err(Error::ManifestMismatch(format!("{} labels for {n} points", labels.len())));
        }
    }
    let mut fs = FeatureSet::new(data, n, dim, layout, manifest.layer_name)?;
    fs.labels = manifest.labels;
    Ok(fs.with_provenance(manifest.source))
}

fn decode_tensor(path: &Path, bytes: &[u8]) -> Result<(Vec<f64>, usize, usize, Dtype)> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != FEATURE_MAGIC {
            return Err(Error::BadMagic(path.to_path_buf()));
        }
        return Err(Error::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    if &bytes[..4] != FEATURE_MAGIC {
        return Err(Error::BadMagic(path.to_path_buf()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = Dtype::from_code(u16::from_le_bytes([bytes[6], bytes[7]]))?;
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = n
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(dtype.width()))
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::InvalidInput("tensor size overflows".into()))?;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes { expected, found: bytes.len() });
    }
    let payload = &bytes[HEADER_LEN..];
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect(),
        Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
    };
    if let Some(p) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: p / dim.max(1), col: p % dim.max(1) });
    }
    Ok((data, n, dim, dtype))
}

pub fn encode_tensor(data: &[f64], n: usize, dim: usize, dtype: Dtype) -> Result<Vec<u8>> {
    if data.len() != n * dim {
        return Err(Error::DimensionMismatch { expected: n * dim, got: data.len() });
    }
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidInput("too many points".into()))?;
    let d32 = u32::try_from(dim).map_err(|_| Error::InvalidInput("dimension too large".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + data.len() * dtype.width());
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dtype.code().to_le_bytes());
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&d32.to_le_bytes());
    for &v in data {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    Ok(out)
}

/// Writes the tensor (binary or CSV by extension) and its manifest.
pub fn write_features(features: &FeatureSet, tensor_path: &Path, manifest_path: &Path, dtype: Dtype) -> Result<()> {
    if is_csv(tensor_path) {
        write_csv_matrix(features, tensor_path)?;
    } else {
        let bytes = encode_tensor(features.data(), features.n_points(), features.dim(), dtype)?;
        write_file(tensor_path, &bytes)?;
    }
    save_manifest(&Manifest::for_features(features, dtype), manifest_path)
}

fn write_csv_matrix(features: &FeatureSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = Vec::with_capacity(features.dim());
    for spec in features.layout().specs() {
        for d in 0..spec.dim {
            header.push(format!("{}_{d}", spec.name));
        }
    }
    w.write_record(&header)?;
    for i in 0..features.n_points() {
        w.write_record(features.row(i).iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_file(path, &bytes)
}

fn read_csv_matrix(path: &Path) -> Result<(Vec<f64>, usize, usize)> {
    let bytes = read_file(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let dim = r.headers()?.len();
    let mut data = Vec::new();
    let mut n = 0;
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: rec.len() });
        }
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("row {row}, column {col}: cannot parse `{field}`")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            data.push(v);
        }
        n += 1;
    }
    Ok((data, n, dim))
}

pub fn encode_graph(graph: &NnkGraph) -> Result<Vec<u8>> {
    let n32 = u32::try_from(graph.n_nodes()).map_err(|_| Error::InvalidInput("too many nodes".into()))?;
    let t32 = u32::try_from(graph.n_edges()).map_err(|_| Error::InvalidInput("too many edges".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + graph.n_edges() * TRIPLET_LEN);
    out.extend_from_slice(GRAPH_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&t32.to_le_bytes());
    for (q, j, w) in graph.triplets() {
        out.extend_from_slice(&(q as u32).to_le_bytes());
        out.extend_from_slice(&(j as u32).to_le_bytes());
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_graph(bytes: &[u8]) -> Result<NnkGraph> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedGraph(format!("header needs {HEADER_LEN} bytes, found {}", bytes.len())));
    }
    if &bytes[..4] != GRAPH_MAGIC {
        return Err(Error::MalformedGraph("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let t = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + t * TRIPLET_LEN;
    if bytes.len() != expected {
        return Err(Error::MalformedGraph(format!(
            "expected {expected} bytes for {t} triplets, found {}",
            bytes.len()
        )));
    }
    let mut rows: Vec<NnkNeighborhood> =
        (0..n).map(|i| NnkNeighborhood { query_index: i, neighbor_indices: vec![], weights: vec![] }).collect();
    let mut prev: Option<(usize, usize)> = None;
    for rec in bytes[HEADER_LEN..].chunks_exact(TRIPLET_LEN) {
        let q = u32::from_le_bytes(rec[0..4].try_into().unwrap()) as usize;
        let j = u32::from_le_bytes(rec[4..8].try_into().unwrap()) as usize;
        let w = f64::from_le_bytes(rec[8..16].try_into().unwrap());
        if prev.is_some_and(|p| p >= (q, j)) {
            return Err(Error::MalformedGraph(format!("triplet ({q}, {j}) out of order")));
        }
        if q >= n || j >= n {
            return Err(Error::MalformedGraph(format!("triplet ({q}, {j}) out of range for {n} nodes")));
        }
        prev = Some((q, j));
        rows[q].neighbor_indices.push(j);
        rows[q].weights.push(w);
    }
    NnkGraph::from_rows(rows)
}

pub fn save_graph(graph: &NnkGraph, path: &Path) -> Result<()> {
    write_file(path, &encode_graph(graph)?)
}

pub fn load_graph(path: &Path) -> Result<NnkGraph> {
    decode_graph(&read_file(path)?)
}
