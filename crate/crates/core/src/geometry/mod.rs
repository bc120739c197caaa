//! Points, hyperplanes, and exact orientation predicates.

mod hyperplane;
mod point;
pub(crate) mod predicates;

pub use hyperplane::{facet_hyperplane, side_of, Hyperplane, OrientedFacet, SideClass, UNIT_TOL};
pub(crate) use hyperplane::oriented_plane;
#[cfg(test)]
pub(crate) use hyperplane::span_normal;
pub use point::{dist, dot, norm, Point};
pub(crate) use point::check_dims;
pub use predicates::{affine_rank, orientation, orientation_exact, orientation_filtered};
