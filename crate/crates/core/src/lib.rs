//! Topological classification of 2-D gaze trajectories.
//!
//! The pipeline runs in five stages:
//!
//! * [`ingest`] loads labeled trajectories from CSV manifests, splits them
//!   deterministically and generates synthetic classes for offline testing.
//! * [`embed`] downsamples a trajectory and builds the raw planar cloud plus
//!   the per-coordinate delay embeddings.
//! * [`persistence`] computes Vietoris–Rips persistence diagrams in
//!   dimensions 0 and 1, with a naive reduction kept as a verification oracle.
//! * [`features`] turns the six diagrams of a trajectory into a 72-slot
//!   persistence-statistics vector.
//! * [`forest`] is a bagged Gini decision-tree ensemble.
//!
//! [`report`] and [`pipeline`] glue these together and write artifacts.

pub mod embed;
pub mod error;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod io;
pub mod persistence;
pub mod pipeline;
pub mod report;
pub mod seed;

pub use error::{Error, Result};

/// Number of emotion-quadrant classes.
pub const NUM_CLASSES: usize = 4;
