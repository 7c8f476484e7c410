//! similab: a numerical laboratory for stochastic self-similarity.
//!
//! The crate simulates stochastic reaction-diffusion and Burgers-type
//! equations in similarity variables, reduces them to Hermite-spectral mode
//! systems, derives one-mode slow models with noise-induced drift
//! corrections, and verifies the statistics of self-similar decay:
//! spectral gaps, stationary mode variances, anomalous drift exponents,
//! moving-origin compensation, and eddy-diffusive spreading.
//!
//! Organization:
//!
//! * [`hermite`]: weighted Hermite eigenbasis, Gauss quadrature, projections.
//! * [`noise`]: reproducible Wiener increments, memory processes, spectral
//!   space-time noise synthesis.
//! * [`frames`]: maps between physical fields and similarity fields, with
//!   fixed, moving, or pseudo-time frames.
//! * [`galerkin`]: cubic interaction tensors and stochastic mode systems.
//! * [`slow_manifold`]: near-identity mode transformations, one-mode slow
//!   models, residual order verification.
//! * [`pde_sim`]: finite-difference solvers in similarity and physical
//!   variables, integral-transform contraction diagnostics.
//! * [`origin_tracking`]: stochastic origin paths, pseudo-time paths, and
//!   exactly compensated mode systems.
//! * [`mixing`]: the two-pipe exchange model and its stochastic similarity
//!   frame, used to measure eddy-diffusive spreading.
//! * [`cli`]: experiment configs, deterministic runners, result bundles.
//!
//! Supporting utilities live in [`stats`] (accumulators and rate fits) and
//! [`interp`] (monotone cubic resampling).
//!
//! Every stochastic routine takes an explicit seed and is bit-reproducible
//! across runs and thread counts.

pub mod cli;
pub mod error;
pub mod frames;
pub mod galerkin;
pub mod hermite;
pub mod interp;
pub mod mixing;
pub mod noise;
pub mod origin_tracking;
pub mod pde_sim;
pub mod slow_manifold;
pub mod stats;

pub use error::{Error, Result};
