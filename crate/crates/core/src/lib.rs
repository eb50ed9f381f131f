//! Exact computations with characteristic-p (phi, Gamma)-modules attached to
//! two-dimensional mod p Galois representations, the Borel action on
//! psi-compatible sequences, and the Hecke operator on compact inductions.

pub mod error;
pub mod ffield;
pub mod padic;
pub mod series;
pub mod modules;
pub mod yring;
pub mod linalg;
pub mod borel;
pub mod config;
pub mod report;
pub mod induction;
pub mod suites;

pub use error::{Error, Result};
