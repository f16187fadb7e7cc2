//! Exact combinatorics of permutation diagrams: inversion graphs, rook
//! placements, Bruhat intervals, restricted fillings and matrix counts over
//! prime fields.

pub mod bruhat;
pub mod diagram;
pub mod error;
pub mod fillings;
pub mod invgraph;
pub mod matcount;
pub mod perm;
pub mod poly;

pub use error::{Error, Result};
pub use perm::{parse, Permutation};
pub use poly::IntPolynomial;
