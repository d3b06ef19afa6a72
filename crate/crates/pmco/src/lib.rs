//! Paracontracting multiagent coordination optimization (pMCO) and a
//! verification toolkit for its switched-system convergence theory.
//!
//! The crate has two halves:
//!
//! * an optimizer: a swarm of agents exchanging state over a dynamic
//!   directed graph, with a paracontracting matrix shaping every velocity
//!   update ([`optimizer`]), and
//! * a verifier: builders for the switched-system matrices that encode one
//!   optimizer iteration as a linear map, plus numerical checks of every
//!   closed-form rank, kernel, semisimplicity, and spectrum claim about
//!   them ([`switched`], [`semistability`], [`linalg`]).
//!
//! The `examples/` directory shows one runnable program per capability;
//! the `pmco` binary exposes `optimize`, `verify`, and `analyze`
//! subcommands over JSON configs.

pub mod cli;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod optimizer;
pub mod rngkey;
pub mod semistability;
pub mod switched;
pub mod tol;

pub use error::{Error, Result};
pub use tol::ToleranceConfig;
