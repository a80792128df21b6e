//! Intersections of random linear and affine subspaces of R^n.
//!
//! The library evaluates the closed-form densities, hit probabilities,
//! moments and constants governing the distance from the origin to the
//! intersection of a uniform random q-dimensional linear subspace with an
//! invariant random affine flat (ball-restricted or sphere-tangent), provides
//! seedable samplers for all the underlying distributions, and ships a Monte
//! Carlo harness that checks every closed form against simulation.

pub mod densities;
pub mod error;
mod linalg;
mod quad;
pub mod sampling;
pub mod specfun;
pub mod suite;
pub mod subspaces;
pub mod validation;

pub use error::{Error, Result};
pub use specfun::CaseTriple;
