//! Simulation and numerical analysis of the random multigraph process with a
//! forbidden degree `k`: vertices that reach degree `k` lose every incident
//! edge.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: labeled multigraphs, event streams, seeded randomness.
//! * [`process`]: exact simulation of `G^k_{n,t}`, the transform `Phi`, components.
//! * [`analytic`]: closed forms for the lower-bound graph and the configuration model.
//! * [`local`]: the local limit `T^k_t`, propagation paths, survival estimates.
//! * [`branching`]: discretised offspring kernel, extinction fixed point, spectral radius.
//! * [`harness`]: experiment configuration, persisted runs, and the verification battery.

pub mod analytic;
pub mod branching;
pub mod error;
pub mod graph;
pub mod harness;
pub mod local;
pub mod oracle;
pub mod process;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Edge, EventStream, LabeledMultigraph};
pub use process::ForbiddenDegree;
pub use rng::RngStream;
