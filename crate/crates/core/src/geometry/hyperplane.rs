use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::point::{check_dims, dot, norm};
use crate::geometry::predicates::{last_row_cofactors, orientation};

pub const UNIT_TOL: f64 = 1e-12;

/// `H(u, t) = {x : <x, u> = t}` with a unit normal `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let n = norm(&normal);
        if !(n >= 1.0 - UNIT_TOL && n <= 1.0 + UNIT_TOL) {
            return Err(Error::invalid(format!("hyperplane normal has norm {n}")));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// Signed float distance `<x, u> - t`; for reporting only.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SideClass {
    Beyond,
    On,
    Beneath,
}

/// Affine normal of the span of `d` points in `R^d` (unnormalized, float).
pub(crate) fn span_normal<P: AsRef<[f64]>>(points: &[P]) -> Vec<f64> {
    let d = points.len();
    let base = points[0].as_ref();
    let mut rows = Vec::with_capacity(d * (d - 1));
    for p in &points[1..] {
        rows.extend(p.as_ref().iter().zip(base).map(|(a, b)| a - b));
    }
    last_row_cofactors(&rows, d).0
}

/// Unit hyperplane through `points` whose positive side is the one where the
/// difference-form determinant has sign `outward_sign`.
pub(crate) fn oriented_plane<P: AsRef<[f64]>>(points: &[P], outward_sign: i8) -> Hyperplane {
    let mut n = span_normal(points);
    let len = norm(&n);
    let s = outward_sign as f64 / len;
    for v in &mut n {
        *v *= s;
    }
    let offset = dot(&n, points[0].as_ref());
    Hyperplane { normal: n, offset }
}

/// A facet hyperplane that remembers its defining points, so side tests can
/// be answered exactly instead of through the float normal.
#[derive(Debug, Clone)]
pub struct OrientedFacet {
    points: Vec<Vec<f64>>,
    /// Orientation sign of `points ++ [x]` for `x` beneath the facet.
    inside_sign: i8,
    plane: Hyperplane,
}

impl OrientedFacet {
    pub fn new<P: AsRef<[f64]>>(facet_points: &[P], interior_reference: &[f64]) -> Result<Self> {
        let d = interior_reference.len();
        if facet_points.len() != d {
            return Err(Error::invalid(format!(
                "a facet in dimension {d} needs {d} points, got {}",
                facet_points.len()
            )));
        }
        check_dims(facet_points, d)?;
        let mut all: Vec<Vec<f64>> = facet_points.iter().map(|p| p.as_ref().to_vec()).collect();
        all.push(interior_reference.to_vec());
        let s = orientation(&all)?;
        if s == 0 {
            return Err(Error::general_position(
                (0..=d).collect(),
                "facet points and reference are affinely dependent",
            ));
        }
        all.pop();
        // Difference-form determinant sign = (-1)^d * orientation sign.
        let parity = if d % 2 == 0 { 1 } else { -1 };
        let plane = oriented_plane(&all, -s * parity);
        Ok(OrientedFacet {
            points: all,
            inside_sign: s,
            plane,
        })
    }

    pub fn plane(&self) -> &Hyperplane {
        &self.plane
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn side_of(&self, x: &[f64]) -> Result<SideClass> {
        side_of(self, x)
    }
}

/// Hyperplane through `facet_points`, oriented so that `interior_reference`
/// lies strictly beneath it.
pub fn facet_hyperplane<P: AsRef<[f64]>>(
    facet_points: &[P],
    interior_reference: &[f64],
) -> Result<Hyperplane> {
    Ok(OrientedFacet::new(facet_points, interior_reference)?.plane)
}

/// Exact beyond/on/beneath classification of `x` against a facet.
pub fn side_of(facet: &OrientedFacet, x: &[f64]) -> Result<SideClass> {
    let d = facet.points.len();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let mut all: Vec<&[f64]> = facet.points.iter().map(|p| p.as_slice()).collect();
    all.push(x);
    let s = orientation(&all)?;
    Ok(if s == 0 {
        SideClass::On
    } else if s == facet.inside_sign {
        SideClass::Beneath
    } else {
        SideClass::Beyond
    })
}
