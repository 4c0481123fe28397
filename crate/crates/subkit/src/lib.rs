//! subkit: slanted Heyting and co-Heyting algebras over finite distributive
//! lattices.
//!
//! The crate models normative systems as subordination relations on finite
//! distributive lattices, derives the slanted implication / co-implication
//! operators they induce, translates axioms written with those operators
//! into first-order conditions on the relation (and back, for conditions of
//! the Kracht shape), and certifies every claimed equivalence by brute-force
//! evaluation over a corpus of finite models.

pub mod analytic;
pub mod cli;
pub mod correspond;
pub mod kracht;
pub mod lattice;
pub mod subord;
pub mod syntax;
pub mod trace;
pub mod verify;

pub use lattice::{downset_lattice, downset_lattice_capped, ElemId, Lattice, LatticeEmbedding, Poset};
pub use subord::{closure, validate_subordination, Model, SlantedAlgebra, SubordinationRelation};
