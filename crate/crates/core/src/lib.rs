//! Dual and tight Gabor window design by convex optimization.
//!
//! The set of dual windows of a Gabor frame is the solution set of the
//! Wexler-Raz equations, an affine subspace. This crate designs alternative
//! dual windows as minimizers of convex concentration and smoothness priors
//! over that set (intersected with a support constraint), using a parallel
//! proximal algorithm, and provides the truncation baseline, a heuristic
//! tight-window variant, window quality metrics, and experiment presets.

pub mod error;
pub mod signal;
pub mod gabor;
pub mod metrics;
pub mod prox;
pub mod constraint;

pub use error::{GabError, Result};
