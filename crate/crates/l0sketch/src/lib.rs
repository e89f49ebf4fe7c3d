//! Distinct sampling and distinct counting over point streams that contain
//! near-duplicates.
//!
//! Points within distance `alpha` of each other are treated as one element
//! (a group). The crate provides:
//!
//! - [`IwSampler`]: an infinite-window sampler returning each group with
//!   equal probability, in O(log m) words;
//! - [`FixedRateInstance`]: sliding-window group tracking at one fixed cell
//!   sample rate, the building block of the hierarchical sampler;
//! - [`SwSampler`]: a sliding-window sampler (sequence- or time-based)
//!   composing one fixed-rate instance per rate 2^-l with split/merge
//!   rebalancing, in O(log w log m) words;
//! - [`F0IwEstimator`] / [`F0SwEstimator`]: distinct-count estimation built
//!   on the samplers;
//! - [`datagen`]: reproducible noisy-stream generators with ground truth.
//!
//! All randomness is seeded and deterministic: equal configurations replay
//! identically.

mod error;
mod f0;
mod grid;
mod hash;
mod iw;
mod params;
mod point;
mod sw;
mod sw_fixed;

pub mod datagen;

pub use error::{Error, SwError};
pub use f0::{F0IwConfig, F0IwEstimator, F0SwConfig, F0SwEstimator};
pub use grid::{CellId, Grid};
pub use hash::HashSampler;
pub use iw::{IwConfig, IwSampler, IwStats};
pub use params::GridMode;
pub use point::{Point, Window};
pub use sw::{InsertOutcome, SwConfig, SwSampler, SwStats};
pub use sw_fixed::{FixedRateInstance, ObserveOutcome};
