//! Command-line entry point.
//!
//! Errors go to stderr as one JSON object `{"error": code, "message": text}`.
//! Exit status is 0 on success, 2 for usage errors and missing files, and 1
//! for failures during computation (including failed theorem checks).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channels::{
    build_aggregate_graph_with_sigma, build_cw_graphs_with_sigma, layer_sigma, ChannelGraphBundle, FeatureSet, InitMode,
};
use crate::error::{Error, Result};
use crate::io::{load_features, load_graph, load_manifest, read_json, save_graph, write_json, Source};
use crate::kernel::{KernelConfig, SigmaMode};
use crate::nnk::{GraphConfig, NnkConfig, DEFAULT_WEIGHT_THRESHOLD};
use crate::overlap::{neighbor_listing, overlap_report, OverlapReport};
use crate::report::{correlation, layer_sweep, read_sweep_csv, write_sweep_csv, LayerEntry, SweepRow};
use crate::synthetic::random_channel_set;
use crate::theorems::{
    search_lemma1_witnesses, verify_corollary1, verify_theorem1, verify_theorem2, TheoremId, TheoremReport,
};

pub const DEFAULT_K: usize = 50;
pub const GRAPH_INDEX: &str = "graphs.json";
pub const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug, Parser)]
#[command(name = "cwnnk", version, about = "Channel-wise NNK graphs and channel overlap analysis")]
#[command(subcommand_required = true, arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// KNN initialization size
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Fixed kernel bandwidth (implies --sigma-mode fixed)
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub sigma_mode: Option<SigmaModeArg>,
    /// Multiplier on the adaptive bandwidth
    #[arg(long, global = true)]
    pub scale_factor: Option<f64>,
    /// Weights at or below this are dropped
    #[arg(long, global = true)]
    pub weight_threshold: Option<f64>,
    #[arg(long, env = "CWNNK_THREADS", global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// JSON file with defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaModeArg {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Union,
    Aggregate,
}

impl From<InitArg> for InitMode {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Union => InitMode::UnionOfChannelKnn,
            InitArg::Aggregate => InitMode::AggregateKnn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    T1,
    C1,
    T2,
    L1,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build per-channel and aggregate NNK graphs for one layer
    Build {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "union")]
        init: InitArg,
        /// Skip the aggregate graph
        #[arg(long)]
        no_aggregate: bool,
    },
    /// Overlap report from a directory written by `build`
    Overlap {
        #[arg(long)]
        graphs: PathBuf,
    },
    /// Randomized theorem checks
    Verify {
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        /// Sampled trials (t2, l1) or synthetic feature sets (t1, c1)
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check t1/c1 on this feature file instead of synthetic sets
        #[arg(long, requires = "manifest")]
        features: Option<PathBuf>,
        #[arg(long, requires = "features")]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        channels: usize,
        #[arg(long, default_value_t = 4)]
        channel_dim: usize,
        /// Aggregate initialization for c1
        #[arg(long, value_enum, default_value = "union")]
        init: InitArg,
    },
    /// Overlap depth series over a directory of layer dumps
    Sweep {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "union")]
        init: InitArg,
    },
    /// Correlate last-layer overlap with test error across models
    Correlate {
        /// sweep.csv written by `sweep`
        #[arg(long)]
        sweep: PathBuf,
        /// Directory of layer manifests carrying test_error
        #[arg(long)]
        manifests: PathBuf,
    },
    /// Weighted channel neighbors of one node
    Neighbors {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        query: usize,
        /// Comma-separated channel names (default: all)
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,
    },
}

/// Values accepted in a `--config` file. Flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub sigma: Option<f64>,
    pub sigma_mode: Option<SigmaMode>,
    pub scale_factor: Option<f64>,
    pub weight_threshold: Option<f64>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub graph: GraphConfig,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
}

fn flag_sigma_mode(mode: Option<SigmaModeArg>, sigma: Option<f64>) -> Option<SigmaMode> {
    match mode {
        Some(SigmaModeArg::Fixed) => Some(SigmaMode::Fixed),
        Some(SigmaModeArg::Adaptive) => Some(SigmaMode::AdaptiveMeanKnnDist),
        None => sigma.map(|_| SigmaMode::Fixed),
    }
}

/// Merges flags over the config file over defaults.
pub fn resolve_settings(flags: &GlobalArgs, file: &FileConfig) -> Result<Settings> {
    let sigma_mode = flag_sigma_mode(flags.sigma_mode, flags.sigma)
        .or(file.sigma_mode)
        .or(file.sigma.map(|_| SigmaMode::Fixed))
        .unwrap_or(SigmaMode::AdaptiveMeanKnnDist);
    let sigma = flags.sigma.or(file.sigma);
    let kernel = match sigma_mode {
        SigmaMode::Fixed => {
            let s = sigma.ok_or_else(|| Error::Usage("--sigma-mode fixed needs --sigma".into()))?;
            KernelConfig::fixed(s)
        }
        SigmaMode::AdaptiveMeanKnnDist => {
            KernelConfig::adaptive(flags.scale_factor.or(file.scale_factor).unwrap_or(1.0))
        }
    };
    kernel.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let k = flags.k.or(file.k).unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(Error::Usage("--k must be positive".into()));
    }
    let weight_threshold = flags.weight_threshold.or(file.weight_threshold).unwrap_or(DEFAULT_WEIGHT_THRESHOLD);
    if !(weight_threshold.is_finite() && weight_threshold >= 0.0) {
        return Err(Error::Usage(format!("weight threshold must be finite and non-negative, got {weight_threshold}")));
    }
    let threads = flags.threads.or(file.threads);
    if threads == Some(0) {
        return Err(Error::Usage("--threads must be positive".into()));
    }
    let mut graph = GraphConfig::new(k, kernel);
    graph.nnk = NnkConfig { weight_threshold, ..graph.nnk };
    Ok(Settings {
        graph,
        threads,
        output_dir: flags.output_dir.clone().or_else(|| file.output_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
    })
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.code(), "message": e.to_string() }));
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.global.config {
        Some(p) => read_json::<FileConfig>(p).map_err(|e| match e {
            Error::Json(j) => Error::Usage(format!("{}: {j}", p.display())),
            other => other,
        })?,
        None => FileConfig::default(),
    };
    let settings = resolve_settings(&cli.global, &file)?;
    match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(|| dispatch(&cli.command, &settings)),
        None => dispatch(&cli.command, &settings),
    }
}

fn dispatch(command: &Command, s: &Settings) -> Result<()> {
    std::fs::create_dir_all(&s.output_dir).map_err(|e| Error::io(&s.output_dir, e))?;
    match command {
        Command::Build { features, manifest, init, no_aggregate } => {
            let fs = load_features(features, manifest)?;
            build_layer(&fs, (*init).into(), !no_aggregate, &s.graph, &s.output_dir)?;
            Ok(())
        }
        Command::Overlap { graphs } => {
            let (index, bundle) = load_bundle(graphs)?;
            let aggregate = index.aggregate.as_ref().map(|f| load_graph(&graphs.join(f))).transpose()?;
            let report = overlap_report(&index.layer_name, &bundle, aggregate.as_ref())?;
            emit(&s.output_dir.join("overlap_report.json"), &report)
        }
        Command::Verify { theorem, trials, seed, features, manifest, points, channels, channel_dim, init } => {
            let report = match theorem {
                TheoremArg::T2 => verify_theorem2(trials.unwrap_or(10_000), *seed)?,
                TheoremArg::L1 => search_lemma1_witnesses(trials.unwrap_or(10_000), *seed)?,
                TheoremArg::T1 | TheoremArg::C1 => {
                    let check = |fs: &FeatureSet| match theorem {
                        TheoremArg::T1 => verify_theorem1(fs, &s.graph),
                        _ => verify_corollary1(fs, &s.graph, (*init).into()),
                    };
                    let id = if *theorem == TheoremArg::T1 { TheoremId::T1 } else { TheoremId::C1 };
                    match (features, manifest) {
                        (Some(f), Some(m)) => check(&load_features(f, m)?)?,
                        _ => {
                            let mut merged = TheoremReport::empty(id);
                            for set in 0..trials.unwrap_or(1) {
                                let fs = random_channel_set(
                                    *points,
                                    *channels,
                                    *channel_dim,
                                    seed.wrapping_add(set as u64),
                                )?;
                                merged.absorb(set, check(&fs)?);
                            }
                            merged
                        }
                    }
                }
            };
            let name = format!("theorem_{}.json", format!("{:?}", report.theorem_id).to_lowercase());
            emit(&s.output_dir.join(name), &report)?;
            if report.passed {
                Ok(())
            } else {
                Err(Error::VerificationFailed {
                    theorem: format!("{:?}", report.theorem_id),
                    violations: report.violations,
                })
            }
        }
        Command::Sweep { dir, init } => sweep(dir, (*init).into(), s),
        Command::Correlate { sweep, manifests } => correlate(sweep, manifests, &s.output_dir),
        Command::Neighbors { graphs, query, channels } => {
            let (_, bundle) = load_bundle(graphs)?;
            if *query >= bundle.n_nodes() {
                return Err(Error::Usage(format!("query {query} out of range for {} nodes", bundle.n_nodes())));
            }
            let names: Vec<&str> = if channels.is_empty() {
                bundle.channel_names.iter().map(String::as_str).collect()
            } else {
                channels.iter().map(String::as_str).collect()
            };
            let listing = neighbor_listing(&bundle, *query, &names)?;
            emit(&s.output_dir.join(format!("neighbors_{query}.json")), &listing)
        }
    }
}

/// Writes `value` as JSON to `path` and echoes it on stdout.
fn emit<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)?;
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub name: String,
    pub file: String,
}

/// Contents of `graphs.json`: what `build` wrote and with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphIndex {
    pub layer_name: String,
    pub n_nodes: usize,
    pub k: usize,
    pub sigma: f64,
    pub init: InitMode,
    pub weight_threshold: f64,
    pub channels: Vec<GraphFile>,
    pub aggregate: Option<String>,
    pub source: Source,
}

pub struct BuiltLayer {
    pub index: GraphIndex,
    pub bundle: ChannelGraphBundle,
    pub aggregate: Option<crate::nnk::NnkGraph>,
}

/// Builds and saves the graphs of one layer under `out`.
pub fn build_layer(
    fs: &FeatureSet,
    init: InitMode,
    with_aggregate: bool,
    cfg: &GraphConfig,
    out: &Path,
) -> Result<BuiltLayer> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let sigma = layer_sigma(fs, cfg)?;
    let bundle = build_cw_graphs_with_sigma(fs, cfg, sigma)?;
    let mut channels = Vec::with_capacity(bundle.n_channels());
    for (c, (name, g)) in bundle.channel_names.iter().zip(&bundle.per_channel).enumerate() {
        let file = format!("channel_{c:03}.cwng");
        save_graph(g, &out.join(&file))?;
        channels.push(GraphFile { name: name.clone(), file });
    }
    let aggregate = if with_aggregate { Some(build_aggregate_graph_with_sigma(fs, init, cfg, sigma)?) } else { None };
    if let Some(g) = &aggregate {
        save_graph(g, &out.join("aggregate.cwng"))?;
    }
    let index = GraphIndex {
        layer_name: fs.layer_name.clone(),
        n_nodes: fs.n_points(),
        k: cfg.k,
        sigma,
        init,
        weight_threshold: cfg.nnk.weight_threshold,
        channels,
        aggregate: aggregate.as_ref().map(|_| "aggregate.cwng".to_string()),
        source: fs.provenance.clone(),
    };
    write_json(&out.join(GRAPH_INDEX), &index)?;
    Ok(BuiltLayer { index, bundle, aggregate })
}

pub fn load_bundle(dir: &Path) -> Result<(GraphIndex, ChannelGraphBundle)> {
    let index: GraphIndex = read_json(&dir.join(GRAPH_INDEX))?;
    let graphs = index.channels.iter().map(|g| load_graph(&dir.join(&g.file))).collect::<Result<Vec<_>>>()?;
    let names = index.channels.iter().map(|g| g.name.clone()).collect();
    let bundle = ChannelGraphBundle::new(names, graphs, index.sigma, index.k)?;
    Ok((index, bundle))
}

/// Model tag used to group layers: the model id, else the dropout rate.
pub fn model_tag(source: &Source) -> Option<String> {
    source.model_id.clone().or_else(|| source.dropout_rate.map(|r| format!("dropout_{r}")))
}

/// `(stem, manifest path)` for every `<stem>.manifest.json` in `dir`, sorted by stem.
pub fn find_manifests(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(stem) = name.strip_suffix(MANIFEST_SUFFIX) {
            found.push((stem.to_string(), path.clone()));
        }
    }
    found.sort();
    Ok(found)
}

fn tensor_for(dir: &Path, stem: &str) -> Result<PathBuf> {
    ["cwnk", "csv"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::io(dir.join(format!("{stem}.cwnk")), std::io::ErrorKind::NotFound.into()))
}

fn sweep(dir: &Path, init: InitMode, s: &Settings) -> Result<()> {
    let manifests = find_manifests(dir)?;
    if manifests.is_empty() {
        return Err(Error::Usage(format!("no *{MANIFEST_SUFFIX} files in {}", dir.display())));
    }
    let mut layers: Vec<(Option<String>, Option<usize>, String, OverlapReport)> = Vec::new();
    for (stem, manifest) in &manifests {
        let fs = load_features(&tensor_for(dir, stem)?, manifest)?;
        let built = build_layer(&fs, init, true, &s.graph, &s.output_dir.join("graphs").join(stem))?;
        let report = overlap_report(&fs.layer_name, &built.bundle, built.aggregate.as_ref())?;
        write_json(&s.output_dir.join("reports").join(format!("{stem}.overlap.json")), &report)?;
        layers.push((model_tag(&fs.provenance), fs.provenance.layer_index, stem.clone(), report));
    }
    layers.sort_by(|a, b| (&a.0, a.1, &a.2).cmp(&(&b.0, b.1, &b.2)));
    let entries: Vec<LayerEntry> =
        layers.into_iter().map(|(tag, layer_index, _, report)| LayerEntry { tag, layer_index, report }).collect();
    let rows = layer_sweep(&entries)?;
    write_sweep_csv(&rows, &s.output_dir.join("sweep.csv"))?;
    write_json(&s.output_dir.join("sweep.json"), &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOutput {
    pub cw_overlap: crate::report::CorrelationStats,
    pub cw_overlap_pair_normalized: crate::report::CorrelationStats,
}

fn correlate(sweep_csv: &Path, manifest_dir: &Path, out: &Path) -> Result<()> {
    let rows = read_sweep_csv(sweep_csv)?;
    let mut last: BTreeMap<String, SweepRow> = BTreeMap::new();
    for r in rows {
        match last.get(&r.tag) {
            Some(prev) if prev.layer_index >= r.layer_index => {}
            _ => {
                last.insert(r.tag.clone(), r);
            }
        }
    }
    let mut errors: BTreeMap<String, f64> = BTreeMap::new();
    for (_, path) in find_manifests(manifest_dir)? {
        let m = load_manifest(&path)?;
        let (Some(tag), Some(err)) = (model_tag(&m.source), m.source.test_error) else { continue };
        match errors.get(&tag) {
            Some(&prev) if prev != err => {
                return Err(Error::ManifestMismatch(format!("model {tag} has test errors {prev} and {err}")));
            }
            _ => {
                errors.insert(tag, err);
            }
        }
    }
    let errors: Vec<(String, f64)> = errors.into_iter().collect();
    let raw: Vec<(String, f64)> = last.values().map(|r| (r.tag.clone(), r.cw_overlap)).collect();
    let norm: Vec<(String, f64)> = last.values().map(|r| (r.tag.clone(), r.cw_overlap_pair_normalized)).collect();
    let output = CorrelationOutput {
        cw_overlap: correlation(&raw, &errors)?,
        cw_overlap_pair_normalized: correlation(&norm, &errors)?,
    };
    emit(&out.join("correlation.json"), &output)
}
