//! Simulation and verification of oracle pathfinding on regular sunflower graphs.
//!
//! The graph is reachable only through metered adjacency-list oracles. The
//! quantum algorithm is simulated exactly inside the mn-dimensional subspace
//! spanned by uniform layer states, where the adjacency matrix acts as the
//! block-tridiagonal effective Hamiltonian.

// `!(x > 0.0)` is the idiom used to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod expansion;
pub mod filtering;
pub mod graph;
pub mod hamiltonian;
pub mod params;
pub mod qsim;
pub mod spectral;
pub mod stats;

pub use params::{validate_params, GraphParams, ParamError, RawParams, Violation};
