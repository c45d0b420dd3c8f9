//! Independent reference implementations used by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian kernel written out directly.
pub fn kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Gram matrix over `cands` and kernel values against `query`.
pub fn gram_and_target(points: &[Vec<f64>], query: usize, cands: &[usize], sigma: f64) -> (DMatrix<f64>, DVector<f64>) {
    let m = cands.len();
    let gram = DMatrix::from_fn(m, m, |a, b| kernel(&points[cands[a]], &points[cands[b]], sigma));
    let target = DVector::from_fn(m, |a, _| kernel(&points[query], &points[cands[a]], sigma));
    (gram, target)
}

fn objective(gram: &DMatrix<f64>, target: &DVector<f64>, theta: &DVector<f64>) -> f64 {
    0.5 * theta.dot(&(gram * theta)) - target.dot(theta)
}

/// Exhaustive active-set enumeration for `min 1/2 θᵀGθ − tᵀθ, θ ≥ 0`.
///
/// Tries every support, solves the equality system on it, keeps the KKT-feasible
/// candidates and returns the one with the smallest objective.
pub fn enumerate_active_sets(gram: &DMatrix<f64>, target: &DVector<f64>) -> DVector<f64> {
    let m = target.len();
    assert!(m <= 16, "enumeration is exponential");
    let mut best = DVector::zeros(m);
    let mut best_obj = 0.0;
    for mask in 1u32..(1 << m) {
        let support: Vec<usize> = (0..m).filter(|&a| mask & (1 << a) != 0).collect();
        let s = support.len();
        let sub = DMatrix::from_fn(s, s, |a, b| gram[(support[a], support[b])]);
        let rhs = DVector::from_fn(s, |a, _| target[support[a]]);
        let Some(sol) = sub.lu().solve(&rhs) else { continue };
        if sol.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let mut theta = DVector::zeros(m);
        for (a, &idx) in support.iter().enumerate() {
            theta[idx] = sol[a];
        }
        let grad = gram * &theta - target;
        if (0..m).any(|c| mask & (1 << c) == 0 && grad[c] < -1e-10) {
            continue;
        }
        let obj = objective(gram, target, &theta);
        if obj < best_obj {
            best_obj = obj;
            best = theta;
        }
    }
    best
}

/// The four cases of the two-candidate problem, decided by objective value.
pub fn two_by_two_cases(k_ij: f64, k_ik: f64, k_jk: f64) -> [f64; 2] {
    let obj = |a: f64, b: f64| 0.5 * (a * a + 2.0 * k_jk * a * b + b * b) - k_ij * a - k_ik * b;
    let mut options = vec![[0.0, 0.0], [k_ij, 0.0], [0.0, k_ik]];
    let det = 1.0 - k_jk * k_jk;
    if det > 0.0 {
        let a = (k_ij - k_jk * k_ik) / det;
        let b = (k_ik - k_jk * k_ij) / det;
        if a > 0.0 && b > 0.0 {
            options.push([a, b]);
        }
    }
    options.into_iter().min_by(|x, y| obj(x[0], x[1]).total_cmp(&obj(y[0], y[1]))).unwrap()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
