//! Construction and certification of dense lattices from mu-sequences.
//!
//! A mu-sequence `1 = s_0, s_1, s_2, ...` of positive integers has the property
//! that every kernel lattice `{z in Z^{n+1} : sum s_k z_k = 0}` has minimum at
//! least `mu`. This crate builds such sequences greedily (or inside prescribed
//! intervals), certifies lattice minima with an independent LLL + enumeration
//! oracle, and evaluates the density bounds attached to them.

pub mod approx;
pub mod arith;
pub mod commands;
pub mod construct;
pub mod density;
pub mod enumerate;
pub mod error;
pub mod lattice;
pub mod real;
pub mod reduce;
pub mod sequence;

pub use arith::{Integer, Rational};
pub use error::{Error, Result};
pub use lattice::{DensityReport, GramMatrix, KernelLattice};
pub use real::HighReal;
pub use sequence::MuSequence;

