//! Weighted singular vectors in the plane, made computable.
//!
//! The crate covers weighted best approximations, lattices along the diagonal
//! flow `a_t h(x) Z^3`, the rational-vertex self-affine tree whose limit set
//! consists of singular vectors, counting oracles for boxes and lattices, and
//! the dimension calculus used to read off `2 - 1/(1 + w1)`.

pub mod approx;
pub mod arith;
pub mod counting;
pub mod dimension;
pub mod error;
pub mod flow;
pub mod geom;
pub mod lattice;
pub mod report;
pub mod tree;
pub mod weight;

pub use error::{Error, Result};
pub use lattice::{Box3, IntTriple, LatticeRep, Shift};
pub use weight::Weight;
