//! Channel-wise non-negative kernel regression (CW-NNK) graphs.
//!
//! Builds one NNK graph per channel of a layer's features, measures how much
//! the channel neighborhoods overlap, and checks the aggregation properties that
//! relate channel neighborhoods to the neighborhood in the concatenated space.

pub mod channels;
pub mod cli;
pub mod error;
pub mod io;
pub mod kernel;
pub mod knn;
pub mod nnk;
pub mod overlap;
pub mod report;
pub mod synthetic;
pub mod theorems;

pub use channels::{ChannelGraphBundle, ChannelLayout, FeatureSet, InitMode, PointsView};
pub use error::{Error, Result};
pub use kernel::{KernelConfig, SigmaMode};
pub use nnk::{GraphConfig, NnkConfig, NnkGraph, NnkNeighborhood};
