//! Shape-restricted inference for streaming motion in stellar kinematic
//! samples: monotone cosine-model fitting, permutation tests, SSE-difference
//! and bootstrap confidence sets, threshold and split-point estimation, and
//! Monte Carlo calibration of the nonstandard limit distributions.
//!
//! All randomness flows through counter-based substreams derived from a
//! master seed (ChaCha8 keyed by a stable hash of seed, stage tag, and
//! replicate index), so every result is reproducible and independent of
//! evaluation order.

pub mod asymp;
pub mod changepoint;
pub mod cosine;
pub mod error;
pub mod intervals;
pub mod io;
pub mod isotonic;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod smooth;
pub mod step;
pub mod streaming;

pub use error::{Error, Result};
pub use model::{KinematicSample, StarRecord};
pub use step::StepFunction;
