//! Collapse-lattice qualia simulator.
//!
//! A quantum register on a spacetime lattice undergoes localized collapses;
//! past-cone-conditioned local density matrices give a mass-density field;
//! predicate rules attach at most one quale to each point; same-slice qualia
//! within a grouping radius form consciousnesses; and a weight functional
//! `A(D)` of the qualia distribution reweights the quantum law,
//! `P_true(D) = C * P_q(D) * A(D)`.

mod error;
pub mod exact;
pub mod evolution;
pub mod exec;
pub mod grouping;
pub mod lattice;
pub mod predicate;
pub mod pipeline;
pub mod qualia;
pub mod sampler;
pub mod substrate;
pub mod validation;
pub mod weights;

pub use error::Error;
