//! Exact brute-force K-nearest-neighbor search.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::channels::PointsView;
use crate::error::{Error, Result};
use crate::kernel::squared_distance;

/// Initialization set for one query: the `K` closest other points, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborCandidates {
    pub query_index: usize,
    pub indices: Vec<usize>,
    /// Squared Euclidean distances, aligned with `indices`.
    pub distances: Vec<f64>,
}

/// The `k` nearest points to `query_index`, self excluded.
///
/// Equal distances are ordered by ascending node id, so the result for `k` is
/// always a prefix of the result for `k + 1`.
pub fn knn_search(points: &PointsView<'_>, query_index: usize, k: usize) -> Result<NeighborCandidates> {
    let n = points.len();
    if query_index >= n {
        return Err(Error::InvalidInput(format!("query {query_index} out of range for {n} points")));
    }
    if k == 0 {
        return Err(Error::InvalidInput("K must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::TooFewPoints { k, n });
    }
    let q = points.row(query_index);
    let mut all: Vec<(f64, usize)> =
        (0..n).filter(|&j| j != query_index).map(|j| (squared_distance(q, points.row(j)), j)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, cmp);
        all.truncate(k);
    }
    all.sort_unstable_by(cmp);
    let (distances, indices) = all.into_iter().unzip();
    Ok(NeighborCandidates { query_index, indices, distances })
}

/// Union of per-channel candidate sets, in ascending id order.
pub fn knn_union(candidates_per_channel: &[NeighborCandidates]) -> Result<BTreeSet<usize>> {
    let Some(first) = candidates_per_channel.first() else {
        return Ok(BTreeSet::new());
    };
    let q = first.query_index;
    if let Some(bad) = candidates_per_channel.iter().find(|c| c.query_index != q) {
        return Err(Error::InvalidInput(format!(
            "candidate lists disagree on query index ({q} vs {})",
            bad.query_index
        )));
    }
    Ok(candidates_per_channel.iter().flat_map(|c| c.indices.iter().copied()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::FeatureSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> FeatureSet {
        FeatureSet::single_channel(xs.to_vec(), xs.len(), 1).unwrap()
    }

    #[test]
    fn nearest_on_a_line() {
        let fs = line(&[0.0, 1.0, 2.0, 10.0]);
        let c = knn_search(&fs.view(), 0, 2).unwrap();
        assert_eq!(c.indices, vec![1, 2]);
        assert_eq!(c.distances, vec![1.0, 4.0]);
    }

    #[test]
    fn k_equal_n_minus_one_returns_everything_else() {
        let fs = line(&[0.0, 1.0, 2.0, 10.0]);
        let c = knn_search(&fs.view(), 2, 3).unwrap();
        let mut idx = c.indices.clone();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 3]);
        assert!(matches!(knn_search(&fs.view(), 2, 4), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn ties_break_by_id() {
        let fs = line(&[0.0, -1.0, 1.0, 1.0, -1.0]);
        let c = knn_search(&fs.view(), 0, 4).unwrap();
        assert_eq!(c.indices, vec![1, 2, 3, 4]);
    }

    #[test]
    fn matches_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, d) = (50, 8);
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fs = FeatureSet::single_channel(data.clone(), n, d).unwrap();
        for q in 0..n {
            let mut oracle: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != q)
                .map(|j| {
                    let s: f64 = (0..d).map(|c| (data[q * d + c] - data[j * d + c]).powi(2)).sum();
                    (s, j)
                })
                .collect();
            oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            for k in [1, 7, 20, 49] {
                let c = knn_search(&fs.view(), q, k).unwrap();
                let want: Vec<usize> = oracle[..k].iter().map(|p| p.1).collect();
                assert_eq!(c.indices, want);
                assert!(!c.indices.contains(&q));
                assert!(c.distances.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn union_cases() {
        let mk =
            |q, idx: Vec<usize>| NeighborCandidates { query_index: q, distances: vec![0.0; idx.len()], indices: idx };
        let u = knn_union(&[mk(0, vec![1, 2, 3]), mk(0, vec![3, 4, 5])]).unwrap();
        assert_eq!(u.into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        let u = knn_union(&[mk(0, vec![4, 2]), mk(0, vec![2, 4])]).unwrap();
        assert_eq!(u.len(), 2);
        let u = knn_union(&[mk(0, vec![1, 2]), mk(0, vec![3, 4]), mk(0, vec![5, 6])]).unwrap();
        assert_eq!(u.len(), 6);
        assert!(knn_union(&[mk(0, vec![1]), mk(1, vec![2])]).is_err());
    }
}
