//! A noise-free variational quantum solver for ordinary differential
//! equations based on Lagrange polynomial encoding.
//!
//! The crate provides:
//!
//! - a dense statevector simulator with exact weighted-Z expectations
//!   ([`sim`]),
//! - circuit builders for the Chebyshev feature map, the extended and
//!   simplified Lagrange feature maps, and the variational ansätze
//!   ([`circuit`]),
//! - exact circuit differentiation by the parameter-shift rule and by
//!   Hadamard-test derivative circuits, with the chain rule assembling
//!   df/dx and d²f/dx² ([`diff`]),
//! - function readout and the weighted physics-informed loss with floating
//!   boundary handling and regularization ([`readout`]),
//! - Adam training with an evolving two-part node schedule ([`training`]),
//! - the damped-mass-spring and Poisson problem definitions with
//!   closed-form reference solutions ([`problems`]),
//! - closed-form circuit/gate budgets for three solver families
//!   ([`complexity`]),
//! - the Chebyshev-encoded comparison solver ([`baselines`]), and
//! - configuration, experiment orchestration and CSV report emission
//!   ([`config`], [`report`], [`verify`]).
//!
//! See the `examples/` directory for one runnable example per capability;
//! the thin `vqode` binary exposes `run`, `verify` and `budget` subcommands.

pub mod baselines;
pub mod circuit;
pub mod complexity;
pub mod config;
pub mod diff;
pub mod error;
pub mod evaluate;
pub mod problems;
pub mod readout;
pub mod report;
pub mod sim;
pub mod training;
pub mod verify;

pub use error::VqodeError;
