//! Randomized checks of how channel neighborhoods carry over to the aggregate space.
//!
//! * T1 / C1: a node that is an NNK neighbor in two channels, and belongs to the
//!   aggregate initialization set, is an NNK neighbor in the aggregate.
//! * T2: a node removed by the same neighbor in both channels stays removed in
//!   the aggregate.
//! * L1: a node removed by a neighbor in only one channel may or may not survive
//!   in the aggregate; with `a = 1/K_{j1,k1}`, `a + γ = K_{i1,j1}/K_{i1,k1}`,
//!   `b = K_{i2,j2}/K_{i2,k2}` and `b + ε = 1/K_{j2,k2}` it survives iff `aε > bγ`.
//!
//! Randomized harnesses draw each trial from its own ChaCha stream, so results
//! depend only on `(seed, trials)` and not on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    aggregate_candidates, build_aggregate_graph_with_sigma, build_cw_graphs_with_sigma, layer_sigma, ChannelLayout,
    FeatureSet, InitMode,
};
use crate::error::{Error, Result};
use crate::kernel::gaussian_kernel;
use crate::nnk::{kri_admits, nnk_solve, nnk_solve_raw, solve_two_candidate, GraphConfig, KriInstance, NnkConfig};

/// Attempts per trial before a sampler gives up.
pub const MAX_SAMPLING_ATTEMPTS: usize = 10_000;
/// Witnesses of each kind kept verbatim in a report.
pub const WITNESSES_KEPT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    C1,
    T2,
    L1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Query node, or trial index for the sampled harnesses.
    pub query: usize,
    pub channel_pair: Option<[String; 2]>,
    pub neighbor: usize,
    /// Feature-set index when reports from several sets are merged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Witness {
    pub trial: usize,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// `aε > bγ`.
    pub predicted_admitted: bool,
    /// `θ_k > 0` in the aggregate two-candidate problem.
    pub qp_admitted: bool,
    pub theta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerTally {
    pub sampler: String,
    pub instances: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub instances_checked: usize,
    pub violations: usize,
    pub violation_details: Vec<Violation>,
    /// Failures whose precondition was not met; not counted as violations.
    pub near_misses: Vec<Violation>,
    pub samplers: Vec<SamplerTally>,
    pub admitted_witnesses: usize,
    pub rejected_witnesses: usize,
    pub witnesses: Vec<Lemma1Witness>,
    /// Cases where the iterative solver disagreed with the closed form.
    pub solver_disagreements: usize,
    pub passed: bool,
}

impl TheoremReport {
    fn new(theorem_id: TheoremId) -> Self {
        Self {
            theorem_id,
            instances_checked: 0,
            violations: 0,
            violation_details: Vec::new(),
            near_misses: Vec::new(),
            samplers: Vec::new(),
            admitted_witnesses: 0,
            rejected_witnesses: 0,
            witnesses: Vec::new(),
            solver_disagreements: 0,
            passed: false,
        }
    }
}

impl TheoremReport {
    /// Folds the report of feature set `set` into `self`.
    pub fn absorb(&mut self, set: usize, other: TheoremReport) {
        let tag = |mut v: Violation| {
            v.set = Some(set);
            v
        };
        self.instances_checked += other.instances_checked;
        self.violations += other.violations;
        self.violation_details.extend(other.violation_details.into_iter().map(tag));
        self.near_misses.extend(other.near_misses.into_iter().map(tag));
        self.solver_disagreements += other.solver_disagreements;
        self.passed = self.violations == 0;
    }

    /// Empty report for merging per-set results.
    pub fn empty(theorem_id: TheoremId) -> Self {
        let mut r = Self::new(theorem_id);
        r.passed = true;
        r
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn require_channels(features: &FeatureSet) -> Result<()> {
    if features.layout().len() < 2 {
        return Err(Error::InvalidInput(format!(
            "channel intersections need at least 2 channels, got {}",
            features.layout().len()
        )));
    }
    Ok(())
}

fn pair_names(features: &FeatureSet, a: usize, b: usize) -> Option<[String; 2]> {
    let s = features.layout().specs();
    Some([s[a].name.clone(), s[b].name.clone()])
}

/// Every `j ∈ N(x_{i_a}) ∩ N(x_{i_b})` must be in `N(x_i)` for the union-initialized aggregate.
pub fn verify_theorem1(features: &FeatureSet, config: &GraphConfig) -> Result<TheoremReport> {
    require_channels(features)?;
    let sigma = layer_sigma(features, config)?;
    let bundle = build_cw_graphs_with_sigma(features, config, sigma)?;
    let aggregate = build_aggregate_graph_with_sigma(features, InitMode::UnionOfChannelKnn, config, sigma)?;
    let mut report = TheoremReport::new(TheoremId::T1);
    let c = bundle.n_channels();
    for i in 0..features.n_points() {
        let init = aggregate_candidates(features, i, InitMode::UnionOfChannelKnn, config.k)?;
        let agg = aggregate.row(i);
        for a in 0..c {
            let na = bundle.per_channel[a].neighbors(i);
            for b in a + 1..c {
                let nb = bundle.per_channel[b].neighbors(i);
                for &j in na.iter().filter(|j| nb.binary_search(j).is_ok()) {
                    if init.binary_search(&j).is_err() {
                        continue;
                    }
                    report.instances_checked += 1;
                    if !agg.contains(j) {
                        report.violations += 1;
                        report.violation_details.push(Violation {
                            query: i,
                            channel_pair: pair_names(features, a, b),
                            neighbor: j,
                            set: None,
                        });
                    }
                }
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Set inclusion `N(x_{i_a}) ∩ N(x_{i_b}) ⊆ N(x_i)` per query and channel pair.
///
/// Under [`InitMode::AggregateKnn`] the precondition is not guaranteed, so
/// failures are listed as near misses instead of violations.
pub fn verify_corollary1(features: &FeatureSet, config: &GraphConfig, init: InitMode) -> Result<TheoremReport> {
    require_channels(features)?;
    let sigma = layer_sigma(features, config)?;
    let bundle = build_cw_graphs_with_sigma(features, config, sigma)?;
    let aggregate = build_aggregate_graph_with_sigma(features, init, config, sigma)?;
    let mut report = TheoremReport::new(TheoremId::C1);
    let c = bundle.n_channels();
    for i in 0..features.n_points() {
        let agg = aggregate.row(i);
        for a in 0..c {
            let na = bundle.per_channel[a].neighbors(i);
            for b in a + 1..c {
                let nb = bundle.per_channel[b].neighbors(i);
                report.instances_checked += 1;
                let entries: Vec<Violation> = na
                    .iter()
                    .copied()
                    .filter(|j| nb.binary_search(j).is_ok() && !agg.contains(*j))
                    .map(|j| Violation { query: i, channel_pair: pair_names(features, a, b), neighbor: j, set: None })
                    .collect();
                if entries.is_empty() {
                    continue;
                }
                match init {
                    InitMode::UnionOfChannelKnn => {
                        report.violations += 1;
                        report.violation_details.extend(entries);
                    }
                    InitMode::AggregateKnn => report.near_misses.extend(entries),
                }
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Gaussian-realizable draw check: the 3 × 3 kernel matrix over `(i, j, k)` is positive definite.
fn kernel_triple_is_pd(k_ij: f64, k_ik: f64, k_jk: f64) -> bool {
    let det = 1.0 + 2.0 * k_ij * k_ik * k_jk - k_ij * k_ij - k_ik * k_ik - k_jk * k_jk;
    det > 0.0 && k_ij < 1.0 && k_ik < 1.0 && k_jk < 1.0
}

/// One channel's kernel values with `k` eliminated by `j`: `1/K_jk < K_ij/K_ik`.
fn sample_eliminated_triple(rng: &mut ChaCha8Rng) -> Result<KriInstance> {
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let k_jk = rng.gen_range(0.05..0.999);
        let k_ik = rng.gen_range(1e-3..k_jk);
        let ratio = rng.gen_range(1.0 / k_jk..1.0 / k_ik);
        let k_ij = k_ik * ratio;
        let inst = KriInstance::new(k_ij, k_ik, k_jk);
        if kernel_triple_is_pd(k_ij, k_ik, k_jk) && !kri_admits(&inst)? && solve_two_candidate(&inst)[0] > 0.0 {
            return Ok(inst);
        }
    }
    Err(Error::SamplingExhausted(MAX_SAMPLING_ATTEMPTS))
}

fn product(a: &KriInstance, b: &KriInstance) -> KriInstance {
    KriInstance::new(a.k_ij * b.k_ij, a.k_ik * b.k_ik, a.k_jk * b.k_jk)
}

/// Kernel-level sampler: draws kernel values directly.
pub fn theorem2_kernel_trial(seed: u64, trial: usize) -> Result<bool> {
    let mut rng = trial_rng(seed, trial);
    let c1 = sample_eliminated_triple(&mut rng)?;
    let c2 = sample_eliminated_triple(&mut rng)?;
    let theta = solve_two_candidate(&product(&c1, &c2));
    Ok(theta[1] == 0.0)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

fn kernel_instance(i: &[f64], j: &[f64], k: &[f64], sigma: f64) -> Result<KriInstance> {
    Ok(KriInstance::new(gaussian_kernel(i, j, sigma)?, gaussian_kernel(i, k, sigma)?, gaussian_kernel(j, k, sigma)?))
}

/// Rows `i, j, k, ...` with two channels of `dim` columns each.
fn two_channel_points(ch1: &[&[f64]], ch2: &[&[f64]], dim: usize) -> Result<FeatureSet> {
    let n = ch1.len();
    let mut data = Vec::with_capacity(n * 2 * dim);
    for (a, b) in ch1.iter().zip(ch2) {
        data.extend_from_slice(a);
        data.extend_from_slice(b);
    }
    FeatureSet::new(data, n, 2 * dim, ChannelLayout::uniform(2, dim)?, "trial")
}

const EMBED_DIM: usize = 2;
const EMBED_HALF_WIDTH: f64 = 1.0;

/// Draws `(i, j, k)` in one channel with `k` eliminated by `j`.
fn sample_eliminated_points(rng: &mut ChaCha8Rng, sigma: f64) -> Result<[Vec<f64>; 3]> {
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let pts = [
            random_point(rng, EMBED_DIM, EMBED_HALF_WIDTH),
            random_point(rng, EMBED_DIM, EMBED_HALF_WIDTH),
            random_point(rng, EMBED_DIM, EMBED_HALF_WIDTH),
        ];
        let inst = kernel_instance(&pts[0], &pts[1], &pts[2], sigma)?;
        if inst.k_jk < 1.0 && !kri_admits(&inst)? {
            return Ok(pts);
        }
    }
    Err(Error::SamplingExhausted(MAX_SAMPLING_ATTEMPTS))
}

/// Point-embedded sampler: the aggregate check runs the iterative solver on
/// actual points.
pub fn theorem2_embedded_trial(seed: u64, trial: usize) -> Result<bool> {
    let mut rng = trial_rng(seed, trial);
    let sigma = rng.gen_range(0.5..2.0);
    let [i1, j1, k1] = sample_eliminated_points(&mut rng, sigma)?;
    let [i2, j2, k2] = sample_eliminated_points(&mut rng, sigma)?;
    let fs = two_channel_points(&[&i1, &j1, &k1], &[&i2, &j2, &k2], EMBED_DIM)?;
    let cfg = NnkConfig::default();
    let agg = nnk_solve(&fs.view(), 0, &[1, 2], sigma, &cfg)?;
    let closed = solve_two_candidate(&kernel_instance(fs.row(0), fs.row(1), fs.row(2), sigma)?);
    Ok(!agg.contains(2) && closed[1] == 0.0)
}

type TrialFn = fn(u64, usize) -> Result<bool>;

fn run_trials<F>(num_trials: usize, trial: F) -> Result<Vec<bool>>
where
    F: Fn(usize) -> Result<bool> + Sync,
{
    let out: Vec<Result<bool>> = (0..num_trials).into_par_iter().map(&trial).collect();
    out.into_iter().collect()
}

/// Runs both samplers for `num_trials` trials each.
pub fn verify_theorem2(num_trials: usize, rng_seed: u64) -> Result<TheoremReport> {
    if num_trials == 0 {
        return Err(Error::InvalidInput("num_trials must be at least 1".into()));
    }
    let mut report = TheoremReport::new(TheoremId::T2);
    let samplers: [(&str, TrialFn); 2] =
        [("kernel_level", theorem2_kernel_trial), ("point_embedded", theorem2_embedded_trial)];
    for (name, f) in samplers {
        let outcomes = run_trials(num_trials, |t| f(rng_seed, t))?;
        let mut tally = SamplerTally { sampler: name.to_string(), instances: num_trials, violations: 0 };
        for (t, ok) in outcomes.into_iter().enumerate() {
            if !ok {
                tally.violations += 1;
                report.violation_details.push(Violation { query: t, channel_pair: None, neighbor: 2, set: None });
            }
        }
        report.instances_checked += tally.instances;
        report.violations += tally.violations;
        report.samplers.push(tally);
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Samples one L1 configuration and evaluates the aggregate outcome.
///
/// Rows are `i, j, k, q`. In channel 1, `j` eliminates `k`. In channel 2, `j`
/// does not eliminate `k`, but `q` does. `k` must be absent from both channel
/// neighborhoods computed over `{j, k, q}`.
pub fn lemma1_trial(seed: u64, trial: usize) -> Result<(Lemma1Witness, bool)> {
    let mut rng = trial_rng(seed, trial);
    let sigma = 1.0;
    let cfg = NnkConfig::default();
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let [i1, j1, k1] = sample_eliminated_points(&mut rng, sigma)?;
        let q1 = random_point(&mut rng, EMBED_DIM, EMBED_HALF_WIDTH);
        let pts2: Vec<Vec<f64>> = (0..4).map(|_| random_point(&mut rng, EMBED_DIM, EMBED_HALF_WIDTH)).collect();
        let (i2, j2, k2, q2) = (&pts2[0], &pts2[1], &pts2[2], &pts2[3]);
        let c1 = kernel_instance(&i1, &j1, &k1, sigma)?;
        let c2 = kernel_instance(i2, j2, k2, sigma)?;
        let by_q = kernel_instance(i2, q2, k2, sigma)?;
        if c2.k_jk >= 1.0 || by_q.k_jk >= 1.0 || !kri_admits(&c2)? || kri_admits(&by_q)? {
            continue;
        }
        let fs = two_channel_points(&[&i1, &j1, &k1, &q1], &[i2, j2, k2, q2], EMBED_DIM)?;
        let ch1 = nnk_solve(&fs.channel_view(0), 0, &[1, 2, 3], sigma, &cfg)?;
        let ch2 = nnk_solve(&fs.channel_view(1), 0, &[1, 2, 3], sigma, &cfg)?;
        if ch1.contains(2) || ch2.contains(2) {
            continue;
        }
        let a = 1.0 / c1.k_jk;
        let gamma = c1.k_ij / c1.k_ik - a;
        let b = c2.k_ij / c2.k_ik;
        let epsilon = 1.0 / c2.k_jk - b;
        let agg = kernel_instance(fs.row(0), fs.row(1), fs.row(2), sigma)?;
        let theta = solve_two_candidate(&agg);
        let raw = nnk_solve_raw(&fs.view(), 0, &[1, 2], sigma, &cfg)?;
        let iterative_admitted = raw.theta[1] > 0.0;
        let witness = Lemma1Witness {
            trial,
            a,
            b,
            gamma,
            epsilon,
            predicted_admitted: a * epsilon > b * gamma,
            qp_admitted: theta[1] > 0.0,
            theta_k: theta[1],
        };
        return Ok((witness, iterative_admitted == witness.qp_admitted));
    }
    Err(Error::SamplingExhausted(MAX_SAMPLING_ATTEMPTS))
}

/// Searches for L1 configurations of both outcomes. A search that finds only one
/// outcome yields a report with `passed = false`, not an error.
pub fn search_lemma1_witnesses(num_trials: usize, rng_seed: u64) -> Result<TheoremReport> {
    if num_trials == 0 {
        return Err(Error::InvalidInput("num_trials must be at least 1".into()));
    }
    let outcomes: Vec<Result<(Lemma1Witness, bool)>> =
        (0..num_trials).into_par_iter().map(|t| lemma1_trial(rng_seed, t)).collect();
    let mut report = TheoremReport::new(TheoremId::L1);
    let (mut kept_admitted, mut kept_rejected) = (0, 0);
    for outcome in outcomes {
        let (w, solver_agrees) = outcome?;
        report.instances_checked += 1;
        if !solver_agrees {
            report.solver_disagreements += 1;
        }
        if w.predicted_admitted != w.qp_admitted {
            report.violations += 1;
            report.violation_details.push(Violation { query: w.trial, channel_pair: None, neighbor: 2, set: None });
        }
        let kept = if w.qp_admitted {
            report.admitted_witnesses += 1;
            &mut kept_admitted
        } else {
            report.rejected_witnesses += 1;
            &mut kept_rejected
        };
        if *kept < WITNESSES_KEPT {
            *kept += 1;
            report.witnesses.push(w);
        }
    }
    report.passed = report.violations == 0 && report.admitted_witnesses > 0 && report.rejected_witnesses > 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelConfig;
    use crate::synthetic::random_channel_set;

    // Builds channel instances from (a, γ) and (b, ε) and checks the aggregate outcome.
    fn lemma_outcome(a: f64, b: f64, gamma: f64, epsilon: f64) -> bool {
        let ch1 = KriInstance::new(0.1 * (a + gamma), 0.1, 1.0 / a);
        let ch2 = KriInstance::new(0.1 * b, 0.1, 1.0 / (b + epsilon));
        assert!(!kri_admits(&ch1).unwrap());
        assert!(kri_admits(&ch2).unwrap());
        kri_admits(&product(&ch1, &ch2)).unwrap()
    }

    #[test]
    fn lemma_inequality_examples() {
        assert!(lemma_outcome(1.1, 2.0, 0.1, 0.5));
        assert!(!lemma_outcome(1.1, 2.0, 0.5, 0.1));
    }

    #[test]
    fn theorem1_report_matches_recount() {
        let fs = random_channel_set(80, 2, 4, 0).unwrap();
        let cfg = GraphConfig::new(10, KernelConfig::default());
        let r = verify_theorem1(&fs, &cfg).unwrap();
        assert!(r.instances_checked > 0);
        assert_eq!(r.violations, r.violation_details.len());
        assert_eq!(r.passed, r.violations == 0);
        let sigma = layer_sigma(&fs, &cfg).unwrap();
        let bundle = build_cw_graphs_with_sigma(&fs, &cfg, sigma).unwrap();
        let agg = build_aggregate_graph_with_sigma(&fs, InitMode::UnionOfChannelKnn, &cfg, sigma).unwrap();
        for v in &r.violation_details {
            assert!(bundle.per_channel[0].neighbors(v.query).contains(&v.neighbor));
            assert!(bundle.per_channel[1].neighbors(v.query).contains(&v.neighbor));
            assert!(!agg.row(v.query).contains(v.neighbor));
        }
    }

    // The full QP can drop a node that survives every pairwise test: here node 28
    // is kept in both channels of query 76, sits in the union candidate set, and
    // still gets exactly zero weight once all aggregate candidates compete.
    #[test]
    fn joint_elimination_in_aggregate() {
        let fs = random_channel_set(80, 2, 4, 0).unwrap();
        let cfg = GraphConfig::new(10, KernelConfig::default());
        let r = verify_theorem1(&fs, &cfg).unwrap();
        assert!(r.violation_details.iter().any(|v| v.query == 76 && v.neighbor == 28));
        let sigma = layer_sigma(&fs, &cfg).unwrap();
        let cands = aggregate_candidates(&fs, 76, InitMode::UnionOfChannelKnn, 10).unwrap();
        let raw = nnk_solve_raw(&fs.view(), 76, &cands, sigma, &NnkConfig::default()).unwrap();
        let p = raw.candidates.iter().position(|&x| x == 28).unwrap();
        assert_eq!(raw.theta[p], 0.0);
    }

    #[test]
    fn single_nearest_neighbor_carries_over() {
        for seed in 0..5 {
            let fs = random_channel_set(60, 2, 3, seed).unwrap();
            let r = verify_theorem1(&fs, &GraphConfig::new(1, KernelConfig::default())).unwrap();
            assert!(r.passed);
        }
    }

    #[test]
    fn identical_channels_square_the_kernel() {
        let base = random_channel_set(50, 1, 3, 9).unwrap();
        let mut data = Vec::new();
        for i in 0..50 {
            data.extend_from_slice(base.row(i));
            data.extend_from_slice(base.row(i));
        }
        let fs = FeatureSet::new(data, 50, 6, ChannelLayout::uniform(2, 3).unwrap(), "dup").unwrap();
        let cfg = GraphConfig::new(8, KernelConfig::default());
        let sigma = layer_sigma(&fs, &cfg).unwrap();
        let bundle = build_cw_graphs_with_sigma(&fs, &cfg, sigma).unwrap();
        let agg = build_aggregate_graph_with_sigma(&fs, InitMode::UnionOfChannelKnn, &cfg, sigma).unwrap();
        let halved =
            crate::nnk::build_graph(&base.view(), &GraphConfig::new(8, KernelConfig::fixed(sigma / 2f64.sqrt())))
                .unwrap();
        for i in 0..50 {
            assert_eq!(bundle.per_channel[0].neighbors(i), bundle.per_channel[1].neighbors(i));
            assert_eq!(agg.neighbors(i), halved.neighbors(i));
            for (a, b) in agg.row(i).weights.iter().zip(&halved.row(i).weights) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn corollary_requires_two_channels() {
        let fs = random_channel_set(20, 1, 3, 1).unwrap();
        let cfg = GraphConfig::new(5, KernelConfig::default());
        assert!(verify_corollary1(&fs, &cfg, InitMode::UnionOfChannelKnn).is_err());
        assert!(verify_theorem1(&fs, &cfg).is_err());
    }

    #[test]
    fn corollary_aggregate_init_counts_no_violations() {
        let fs = random_channel_set(60, 4, 2, 3).unwrap();
        let r = verify_corollary1(&fs, &GraphConfig::new(6, KernelConfig::default()), InitMode::AggregateKnn).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn theorem2_small_run() {
        let r = verify_theorem2(200, 42).unwrap();
        assert_eq!(r.instances_checked, 400);
        assert_eq!(r.violations, 0);
        assert!(r.passed);
    }

    #[test]
    fn lemma1_small_run_is_reproducible() {
        let a = search_lemma1_witnesses(300, 7).unwrap();
        let b = search_lemma1_witnesses(300, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(verify_theorem2(0, 1).is_err());
        assert!(search_lemma1_witnesses(0, 1).is_err());
    }
}
