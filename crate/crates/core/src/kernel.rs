//! Gaussian kernel evaluation and bandwidth selection.
//!
//! One bandwidth is resolved per layer, on the aggregate features, and reused
//! for every channel of that layer. With a shared bandwidth the aggregate kernel
//! factors exactly into the product of the channel kernels.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelLayout, PointsView};
use crate::error::{Error, Result};
use crate::knn::knn_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    Fixed,
    AdaptiveMeanKnnDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub sigma: f64,
    pub sigma_mode: SigmaMode,
    pub scale_factor: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { sigma: 1.0, sigma_mode: SigmaMode::AdaptiveMeanKnnDist, scale_factor: 1.0 }
    }
}

impl KernelConfig {
    pub fn fixed(sigma: f64) -> Self {
        Self { sigma, sigma_mode: SigmaMode::Fixed, scale_factor: 1.0 }
    }

    pub fn adaptive(scale_factor: f64) -> Self {
        Self { sigma: 1.0, sigma_mode: SigmaMode::AdaptiveMeanKnnDist, scale_factor }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.scale_factor.is_finite() && self.scale_factor > 0.0) {
            return Err(Error::InvalidInput(format!("scale_factor must be positive, got {}", self.scale_factor)));
        }
        Ok(())
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Kernel value from a squared distance.
#[inline]
pub fn kernel_from_sq_dist(sq_dist: f64, sigma: f64) -> f64 {
    (-sq_dist / (2.0 * sigma * sigma)).exp()
}

/// `exp(-||x_i - x_j||^2 / (2 sigma^2))`.
pub fn gaussian_kernel(x_i: &[f64], x_j: &[f64], sigma: f64) -> Result<f64> {
    if x_i.len() != x_j.len() {
        return Err(Error::DimensionMismatch { expected: x_i.len(), got: x_j.len() });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    check_finite(x_i)?;
    check_finite(x_j)?;
    Ok(kernel_from_sq_dist(squared_distance(x_i, x_j), sigma))
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(col) => Err(Error::NonFinite { row: 0, col }),
        None => Ok(()),
    }
}

/// Checks that the aggregate kernel equals the product of per-channel kernels.
///
/// `sigmas` holds either a single shared bandwidth or one per channel; differing
/// per-channel values are rejected since the identity only holds for a shared one.
pub fn kernel_product_identity_check(x_i: &[f64], x_j: &[f64], layout: &ChannelLayout, sigmas: &[f64]) -> Result<bool> {
    if x_i.len() != layout.total_dim() {
        return Err(Error::LayoutMismatch { layout_dim: layout.total_dim(), feature_dim: x_i.len() });
    }
    if x_j.len() != layout.total_dim() {
        return Err(Error::LayoutMismatch { layout_dim: layout.total_dim(), feature_dim: x_j.len() });
    }
    let sigma = match sigmas {
        [] => return Err(Error::InvalidInput("no bandwidth given".into())),
        [s] => *s,
        [first, rest @ ..] => {
            if sigmas.len() != layout.len() {
                return Err(Error::DimensionMismatch { expected: layout.len(), got: sigmas.len() });
            }
            if rest.iter().any(|s| s != first) {
                return Err(Error::SigmaMismatch);
            }
            *first
        }
    };
    let aggregate = gaussian_kernel(x_i, x_j, sigma)?;
    let mut product = 1.0;
    for range in layout.ranges() {
        product *= gaussian_kernel(&x_i[range.clone()], &x_j[range], sigma)?;
    }
    let scale = aggregate.abs().max(product.abs());
    if scale == 0.0 {
        return Ok(true);
    }
    Ok((aggregate - product).abs() <= 1e-12 * scale)
}

/// Resolves the bandwidth for a layer.
///
/// Adaptive mode averages, over all points, the mean Euclidean distance to the
/// point's `k` nearest neighbors, then multiplies by `scale_factor`.
pub fn select_sigma(points: &PointsView<'_>, k: usize, config: &KernelConfig) -> Result<f64> {
    config.validate()?;
    match config.sigma_mode {
        SigmaMode::Fixed => Ok(config.sigma),
        SigmaMode::AdaptiveMeanKnnDist => {
            let n = points.len();
            if k == 0 {
                return Err(Error::InvalidInput("K must be at least 1".into()));
            }
            if n < k + 1 {
                return Err(Error::TooFewPoints { k, n });
            }
            let mut total = 0.0;
            for i in 0..n {
                let cand = knn_search(points, i, k)?;
                let mean: f64 = cand.distances.iter().map(|d| d.sqrt()).sum::<f64>() / k as f64;
                total += mean;
            }
            let sigma = config.scale_factor * total / n as f64;
            if sigma.is_nan() || sigma <= 0.0 || sigma.is_infinite() {
                return Err(Error::ZeroBandwidth);
            }
            Ok(sigma)
        }
    }
}
