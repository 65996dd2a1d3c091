//! Exact algebra for Gromov-Witten invariants of projective 3-folds under a
//! standard flop and a small extremal transition.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is exact: curve
//! classes are integer vectors, coefficients are arbitrary precision
//! rationals, and generating series are kept in a closed form made of a
//! Laurent polynomial plus geometric tails.
//!
//! * [`lattice`]: curve-class lattices, pairings, lattice maps, minimal lifts.
//! * [`chow`]: graded quotient rings given by monomial rewrite rules.
//! * [`novikov`]: closed-form elements of the Novikov ring.
//! * [`degeneration`]: admissible graphs and triples, the sets of triples of
//!   blow-up and conifold degenerations, and the numerical degeneration sum.
//! * [`transform`]: flop and extremal-transition transformations of GW
//!   tables and 3-point functions.
//! * [`local_p1`]: a worked local-P¹ geometry wiring all of the above.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chow;
pub mod degeneration;
pub mod error;
pub mod lattice;
pub mod local_p1;
pub mod novikov;
pub mod rational;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{CurveClass, CurveClassLattice, LatticeMap};
pub use rational::Rational;
