//! Desk-scale simulator of a hybrid quantum-classical video classification
//! pipeline.
//!
//! A video is reduced to a `2^q`-amplitude quantum register in three stages:
//! consecutive frames are amplitude-encoded and converted to difference
//! states by a post-selected ancilla transform, per-class average difference
//! videos are measured `2^q` times to obtain a weighted distribution of the
//! most important pixels, and any video is then reduced by reading it only at
//! those pixels. Classification compares the reduced test register against
//! each class's training register by finite-shot inner product estimation and
//! takes the argmax.
//!
//! Every quantum step has an exact classical oracle (`exact_mode` on
//! [`primitives::ShotPlan`]) so the sampled estimators can be validated
//! against analytic values.
//!
//! Module map:
//! - [`statevec`]: real-amplitude statevectors, amplitude encoding, exact
//!   inner products
//! - [`primitives`]: shot sampling, the difference transform, inner product
//!   estimation
//! - [`qram`]: simulated QRAM holding difference frames and class averages
//! - [`reduction`]: pixel distributions and reduced registers
//! - [`classifier`]: end-to-end training and classification
//! - [`videodata`]: video tensors, the QVID file format, preprocessing, and
//!   the synthetic gesture generator
//! - [`harness`]: experiment sweeps, CSV/SVG reports

pub mod classifier;
pub mod error;
pub mod harness;
pub mod primitives;
pub mod qram;
pub mod reduction;
pub mod seeds;
pub mod statevec;
pub mod videodata;

mod wire;

pub use error::{Error, Result};
pub use statevec::{RawVector, Statevector};
