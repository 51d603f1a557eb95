//! Total-weight-choosability certificates.
//!
//! A certificate is an index function on the vertices and edges of a graph
//! together with a prime modulus under which the permanent of the assembled
//! difference matrix does not vanish. Such a certificate guarantees that
//! every list assignment with `|L(z)| = eta(z) + 1` admits a proper total
//! weighting; the [`solver`] module finds one.

pub mod algebra;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
