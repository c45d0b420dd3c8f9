//! Seeded synthetic data sets: random channelized features and low-dimensional
//! manifolds embedded in a higher-dimensional ambient space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::{ChannelLayout, FeatureSet};
use crate::error::Result;

/// `n` standard-normal points split into `channels` channels of `dim_per_channel` columns.
pub fn random_channel_set(n: usize, channels: usize, dim_per_channel: usize, seed: u64) -> Result<FeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = channels * dim_per_channel;
    let data = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    FeatureSet::new(data, n, d, ChannelLayout::uniform(channels, dim_per_channel)?, format!("random_{seed}"))
}

/// `count` orthonormal vectors in `R^ambient` (Gram–Schmidt on Gaussian draws).
fn orthonormal_frame(rng: &mut ChaCha8Rng, count: usize, ambient: usize) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(count);
    while frame.len() < count {
        let mut v: Vec<f64> = (0..ambient).map(|_| rng.sample(StandardNormal)).collect();
        for u in &frame {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            frame.push(v);
        }
    }
    frame
}

fn embed(latent: &[Vec<f64>], frame: &[Vec<f64>], ambient: usize, name: &str) -> Result<FeatureSet> {
    let n = latent.len();
    let mut data = vec![0.0; n * ambient];
    for (i, z) in latent.iter().enumerate() {
        for (coef, axis) in z.iter().zip(frame) {
            for (d, a) in axis.iter().enumerate() {
                data[i * ambient + d] += coef * a;
            }
        }
    }
    FeatureSet::new(data, n, ambient, ChannelLayout::uniform(1, ambient)?, name)
}

/// Points spread uniformly along a segment of length 10.
pub fn line_manifold(n: usize, ambient: usize, seed: u64) -> Result<FeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = orthonormal_frame(&mut rng, 1, ambient);
    let latent: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..10.0)]).collect();
    embed(&latent, &frame, ambient, "line")
}

/// Points uniform on a flat 10 × 10 square.
pub fn plane_manifold(n: usize, ambient: usize, seed: u64) -> Result<FeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = orthonormal_frame(&mut rng, 2, ambient);
    let latent: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]).collect();
    embed(&latent, &frame, ambient, "plane")
}

/// A rolled-up 2-D sheet: `(s cos s, t, s sin s)` placed in a random 3-D subspace.
pub fn swiss_roll(n: usize, ambient: usize, seed: u64) -> Result<FeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = orthonormal_frame(&mut rng, 3, ambient);
    let latent: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let s = rng.gen_range(1.5 * std::f64::consts::PI..4.5 * std::f64::consts::PI);
            let t = rng.gen_range(0.0..20.0);
            vec![s * s.cos(), t, s * s.sin()]
        })
        .collect();
    embed(&latent, &frame, ambient, "swiss_roll")
}

/// Isotropic Gaussian in a random `intrinsic`-dimensional subspace.
pub fn gaussian_blob(n: usize, ambient: usize, intrinsic: usize, seed: u64) -> Result<FeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = orthonormal_frame(&mut rng, intrinsic, ambient);
    let latent: Vec<Vec<f64>> = (0..n).map(|_| (0..intrinsic).map(|_| rng.sample(StandardNormal)).collect()).collect();
    embed(&latent, &frame, ambient, "blob")
}
