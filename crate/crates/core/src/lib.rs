//! General threshold diffusion on social networks.
//!
//! Each node `v` has an activation function `f_v` of its active neighbors and
//! a threshold `θ_v` uniform on `(0, 1]`; it becomes active once
//! `f_v(active) >= θ_v`. The crate evaluates the expected weight of the final
//! active set exactly (small networks) or by Monte Carlo, checks the
//! structural properties that make that influence submodular, and selects
//! seed sets greedily.
//!
//! Start with the examples:
//!
//! ```bash
//! cargo run --example exact_influence
//! cargo run --release --example greedy
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod cli;
pub mod coupling;
pub mod diffusion;
pub mod error;
pub mod generate;
pub mod influence;
pub mod maximize;
pub mod network;
pub mod rng;
pub mod set;

pub use error::{Error, Result};
pub use set::{NodeId, NodeSet};
