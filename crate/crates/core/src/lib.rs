//! Homogenization of Hamilton-Jacobi equations on periodic networks.

pub mod action;
pub mod cli;
pub mod cell;
pub mod crystal;
pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod homogenize;
pub mod mather;
pub mod netgen;
pub mod network;
pub mod numerics;
pub mod profile;

pub use error::{Error, Result};
pub use network::Network;
