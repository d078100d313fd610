//! Locating vulnerable functions in Solidity contracts with multi-relational
//! nested contract graphs and an edge-enhanced graph network.
//!
//! The pipeline runs source → [`frontend::NormalizedAst`] →
//! [`graph::Mrng`] (one multi-relational graph per function, linked by call
//! edges) → [`model`] (per-function vulnerability probabilities). The
//! [`harness`] module holds dataset handling, training and evaluation.

pub mod frontend;
pub mod graph;
pub mod harness;
pub mod model;
pub mod tensor;
