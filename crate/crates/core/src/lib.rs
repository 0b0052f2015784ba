//! Numerical laboratory for finite-dimensional C*-dynamical systems.
//!
//! The crate models unital completely positive maps on matrix algebras,
//! classifies them within the hierarchy unique ergodicity / ergodicity /
//! weak mixing / strict weak mixing, and carries the commutative rotation,
//! free-shift and weighted-average models used to probe that hierarchy.

pub mod algebra;
pub mod channels;
pub mod corpus;
pub mod ergodic;
pub mod error;
pub mod free_shift;
pub mod rotation;
pub mod weighted;

pub use algebra::{Functional, SquareMatrix, State, C64};
pub use channels::{KrausChannel, TransferMatrix};
pub use error::{LabError, Result};
