//! Computational tools around the word problem, Dehn presentations,
//! rational homeomorphisms of Cantor space and trees of atoms.

pub mod error;
pub mod atoms_tree;
pub mod cayley;
pub mod kuznetsov;
pub mod piecewise;
pub mod presentation;
pub mod transducer;

pub use error::{Error, Result};
