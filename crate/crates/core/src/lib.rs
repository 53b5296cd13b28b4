//! Sliced optimal transport toolkit.
//!
//! The crate is organized around weighted empirical measures ([`WeightedCloud`])
//! and finite sets of projection directions ([`SliceSet`]). On top of those it
//! provides:
//!
//! - exact one-dimensional Wasserstein distances and couplings, plus an exact
//!   assignment-based W2 used for evaluation ([`measures`]);
//! - slicing distributions on the sphere, subspace machinery and random
//!   rotations ([`slicing`]);
//! - the slice-reweighting family of sliced distances: classical SW,
//!   reciprocal subspace-aligned weighting, energy-based SW, Max-SW and
//!   random-path SW ([`variants`]);
//! - the effective subspace scaling factor, exact and empirical ([`essf`]);
//! - analytic sliced gradients and gradient flows ([`flow`]);
//! - synthetic datasets and CSV ingestion ([`datasets`]);
//! - palette-based color transfer ([`color`]).

pub mod assignment;
pub mod color;
pub mod datasets;
mod error;
pub mod essf;
pub mod flow;
pub mod gamma;
pub mod measures;
pub mod rng;
pub mod slicing;
pub mod table;
pub mod variants;
pub mod vmf;

pub use error::{Error, Result};
pub use measures::{OneDimCoupling, WeightedCloud};
pub use slicing::{SliceDistribution, SliceSet, Subspace};
pub use variants::{SwEstimate, WeightingScheme};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
