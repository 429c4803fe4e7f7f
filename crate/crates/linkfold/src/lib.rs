//! Deformation of self-avoiding polygonal linkages and configurations by
//! gradient flows of Lyapunov-Reeb functions.
//!
//! The library covers four moduli spaces of planar linkages — open arms and
//! closed cycles, each with fixed or free edge lengths — and provides:
//!
//! - a planar geometry kernel ([`geom`]): simplicity and orientation
//!   predicates, polygon triangulation with Lawson edges, triangle-area
//!   calculus, and the inscribed-polygon solver;
//! - coordinate charts for the four spaces ([`chart`]), including the cycle
//!   closure constraint and validity checks;
//! - the scalar fields driving the deformations ([`energy`]): strain energy,
//!   enclosed area, the non-convexity weight, base functions on the straight
//!   and cocircular strata, and their Lyapunov-Reeb composites;
//! - time integration of the negative-gradient, constraint-projected, and
//!   bump-modified flows ([`flow`]);
//! - the renormalization refolding algorithm connecting two states by a
//!   pulled-back chart geodesic ([`refold`]);
//! - seeded sampling of random valid states ([`sample`]) and a runtime
//!   property suite ([`verify`]).

pub mod chart;
pub mod energy;
mod error;
pub mod flow;
pub mod geom;
pub mod numeric;
pub mod refold;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
