//! Numerical laboratory for the 2D stochastic vortex model under moderate
//! interaction.
//!
//! The crate simulates N particles driven by a mollified Biot–Savart drift,
//! individual Brownian noise and one shared (environmental) Brownian motion,
//! solves the limiting vorticity equation pseudo-spectrally, attaches the
//! common noise to the limit by a random shift, and measures relative entropy,
//! Fisher information, L¹ and Kantorovich–Rubinstein distances between the
//! mollified empirical measure and the limit along each path.
//!
//! Module map:
//! - [`kernels`]: Biot–Savart kernel, its bounded antiderivative, and the
//!   tabulated mollified interaction `K * V^N`.
//! - [`mollifier`]: the exponential mollifier and its `N`-dependent scaling.
//! - [`particles`]: Euler–Maruyama stepping with common noise, exit times.
//! - [`fields`]: uniform grids, mollified empirical density, gradients, shifts.
//! - [`pde`]: pseudo-spectral vorticity solver and the common-noise shift.
//! - [`infometrics`]: entropy-type functionals and inequality checkers.
//! - [`harness`]: paired particle/limit runs and N-sweeps.
//! - [`config`], [`io`], [`cli`]: experiment files, binary formats, CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fields;
pub mod geom;
pub mod harness;
pub mod infometrics;
pub mod io;
pub mod kernels;
pub mod mollifier;
pub mod particles;
pub mod pde;
pub mod spectral;

pub use error::{Error, Result};
pub use geom::{Mat2, Vec2};

/// Spatial dimension. Everything in this crate is two-dimensional.
pub const DIM: usize = 2;
