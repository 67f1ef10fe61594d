//! Learning, diagnostics, and evaluation for low-rank nonsymmetric
//! determinantal point processes (NDPPs).
//!
//! A DPP over a catalog of `M` items assigns every subset `J` the probability
//! `det(L_J) / det(L + I)`, where `L_J` is the principal submatrix of the
//! kernel `L` indexed by `J`. Symmetric PSD kernels can only encode repulsion
//! between items; this crate parameterizes `L` as
//!
//! ```text
//! L = V·Vᵀ + (B·Cᵀ − C·Bᵀ)
//! ```
//!
//! a PSD part plus a skew-symmetric perturbation, which keeps every principal
//! minor nonnegative while admitting attractive (positively correlated) item
//! pairs. The crate provides:
//!
//! - [`kernel`] — kernel assembly and the determinantal quantities (subset
//!   probabilities, marginal kernels, conditional kernels, pair correlations)
//! - [`analysis`] — brute-force matrix-class verification (P₀/P matrices,
//!   sign patterns, symmetric/skew decomposition, irreducibility)
//! - [`likelihood`] — the regularized log-likelihood objective and its
//!   analytic gradients
//! - [`trainer`] — full-batch Adam fitting with validation-based stopping
//! - [`fisher`] — population log-likelihood derivatives, the Fisher
//!   information quadratic form, and nullspace degeneracy probes
//! - [`synthetic`] — deterministic basket generators with disjoint item
//!   groups and popularity-weighted sampling
//! - [`dataset`] — basket file ingestion, splitting, and item statistics
//! - [`eval`] — next-item prediction (MPR), subset-discrimination AUC,
//!   bootstrap confidence intervals, and correlation-structure summaries

pub mod analysis;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fisher;
pub mod kernel;
pub mod likelihood;
pub mod linalg;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};
