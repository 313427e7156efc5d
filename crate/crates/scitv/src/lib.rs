//! Reconstruction of high-speed video from single coded snapshots.
//!
//! A snapshot compressive camera modulates `B` consecutive frames with
//! per-frame masks and sums them onto one sensor exposure. This crate
//! recovers the frame stack from such a measurement by total-variation
//! regularized optimization. It provides:
//!
//! * the structured sensing operator and its closed-form projection and
//!   quadratic-update steps ([`sensing`]);
//! * three TV norms and seven TV denoisers ([`tv`]);
//! * four outer solvers — FISTA, TwIST, GAP and ADMM — each composable
//!   with any denoiser ([`solve`]);
//! * mask/scene simulation, a binary tensor format, PSNR, and a grid
//!   benchmark runner with CSV reports ([`sim`], [`io`], [`metrics`],
//!   [`bench`]).
//!
//! The `scitv` binary exposes the `simulate`, `reconstruct`, `bench` and
//! `denoise` subcommands on top of these pieces.

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod sensing;
pub mod sim;
pub mod solve;
pub mod tensor;
pub mod tv;

pub use error::{Error, Result};
pub use sensing::{MaskCube, Measurement, SensingOperator};
pub use solve::{reconstruct, Framework, IterationTrace, SolveConfig};
pub use tensor::{Frame, VideoCube};
pub use tv::{denoise, tv_norm, DenoiseConfig, InnerSolver, TvNorm, TvVariant};
