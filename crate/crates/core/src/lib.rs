//! Minion-based consistency hierarchies for fixed-template constraint
//! satisfaction problems.
//!
//! The crate provides relational structures and their tensor powers, an
//! exact tensor algebra over several semirings, concrete minions with their
//! free structures, exact LP and integer solvers, a PSD feasibility solver,
//! and the consistency algorithms built on top of them (bounded width,
//! Sherali-Adams, affine integer programming, BLP+AIP, SDP and
//! sum-of-squares), together with corpus generation and cross-checking.

pub mod budget;
pub mod corpus;
pub mod crosscheck;
pub mod error;
pub mod exact;
pub mod free;
pub mod hierarchy;
pub mod homomorphism;
pub mod minion;
pub mod psd;
pub mod rational;
pub mod structure;
pub mod templates;
pub mod tensor;
pub mod verdict;

pub use budget::Budget;
pub use error::{Error, Result};
pub use structure::{Atom, Relation, Signature, Structure};
