//! Relativized Howard-Bachmann ordinal notations over a parameter
//! well-ordering, together with the deduction-chain proof-search tree,
//! Kleene-Brouwer linearization, omega-model extraction and the ordinal
//! bound calculus of the associated infinitary system.
//!
//! The crate is organized around the ordering parameter: [`wellorder`]
//! supplies the parameter ordering, [`term`] and [`order`] implement the
//! notation system and its total comparison, [`arith`] the ordinal
//! arithmetic and fundamental functions, [`logic`] the second-order
//! formula machinery, [`deduction`] the proof-search tree, and [`bounds`]
//! the bound transforms of the cut-elimination bookkeeping.

pub mod arith;
pub mod bounds;
pub mod cli;
pub mod deduction;
pub mod logic;
pub mod order;
pub mod selftest;
pub mod term;
pub mod wellorder;

pub use order::compare;
pub use term::{OrdinalTerm, Principal, RawTerm};
pub use wellorder::WellOrdering;
