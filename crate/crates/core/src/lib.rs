//! Learning the real discriminant locus of parameterized polynomial systems.
//!
//! The pipeline solves a family `f(x; p) = 0` once at a generic complex
//! parameter, labels real parameter points by their number of real
//! solutions, samples densely around the discriminant along random lines,
//! trains classifiers on the labels, and reuses the labeled points as a seed
//! bank for a cheap real-only homotopy.

pub mod classify;
pub mod discriminant;
pub mod error;
pub mod io;
pub mod numcore;
pub mod polysys;
pub mod region;
pub mod realpath;
pub mod rng;
pub mod sampler;
pub mod solver;
pub mod tracker;

pub use error::{Error, Result};
