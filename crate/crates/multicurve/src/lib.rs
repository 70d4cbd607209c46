//! Statistics of random multicurves on closed hyperbolic surfaces of genus `g`.
//!
//! A multicurve is a formal sum of disjoint simple closed curves; its topological
//! type is a stable graph (the dual graph of the complementary pieces) together
//! with one positive integer multiplicity per edge. This crate computes, exactly
//! where possible:
//!
//! * ψ-class correlators and Kontsevich volume polynomials ([`intersection`]),
//! * the census of stable graphs of a given genus with automorphism counts
//!   ([`graphs`]),
//! * Mirzakhani-type frequencies of topological types and the total masses
//!   `b_{g,m}` ([`measure`]),
//! * exact and asymptotic moments of the normalized length spectrum of a random
//!   multicurve, together with the Poisson–Dirichlet / GEM limit laws
//!   ([`moments`], [`asymptotics`]),
//! * reproducible samplers for everything above ([`sampling`]).
//!
//! The `mcl` binary exposes these as subcommands; see the crate README.

pub mod asymptotics;
pub mod cli;
pub mod exact;
pub mod graphs;
pub mod intersection;
pub mod measure;
pub mod moments;
pub mod sampling;
pub mod selftest;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
