//! Consistency of relations annotated over positive commutative monoids:
//! transportation solvers, witness-producing joins, hypergraph acyclicity,
//! local-to-global consistency deciders, and covers/lifts up to the free
//! commutative monoid.

pub mod consistency;
pub mod covers;
pub mod error;
pub mod fixtures;
pub mod hypergraph;
pub mod joins;
pub mod krelation;
pub mod literal;
pub mod monoid;
pub mod transport;

pub use error::{Error, Result};
