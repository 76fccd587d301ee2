//! Transfer systems on the subgroup lattice of `C_{p^n q^m}` and their
//! realization by indexing sets of `Z/N`.

pub mod arith;
pub mod error;
pub mod indexing;
pub mod lattice;
pub mod oracle;
pub mod parse;
pub mod realizer;
pub mod tightpair;
pub mod transfer;

pub use error::{Error, Result};
pub use indexing::{IndexingSet, ResidueSet};
pub use lattice::{CyclicOrder, Subgroup};
pub use realizer::{
    chain_realize, classify_square, realize, realize_with, BezoutChoice, OffsetPolicy,
    RealizeOptions, SquareCase,
};
pub use transfer::{enumerate_all, TransferSystem, Violation};
