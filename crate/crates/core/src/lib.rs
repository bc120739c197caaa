//! Random polytopes spanned by uniform points on the boundary of smooth
//! convex bodies: exact d-dimensional hulls, face statistics, combinatorial
//! types of `(d+2)`-vertex polytopes, stabilization radii, and reproducible
//! Monte Carlo experiments.

pub mod body;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hull;
pub mod rng;
pub mod stabilization;

pub use error::{Error, Result};
