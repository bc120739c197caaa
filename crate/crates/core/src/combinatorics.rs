//! Combinatorial types of `d`-polytopes with `d+2` vertices.
//!
//! Such a polytope is `[S, x]` for a `d`-simplex `S` and a point `x ∉ S`.
//! Its type is fixed by `j = bey(x, S)`, the number of facets of `S` that `x`
//! lies beyond; `j` and `d - j` give the same type, so labels are folded to
//! `j ≤ ⌊d/2⌋`. The face numbers are
//!
//! ```text
//! f_k(T_j^d) = C(d+2, d-k+1) - C(j+1, d-k+1) - C(d-j+1, d-k+1),   k = 1..d-1
//! ```
//!
//! with `C(a, b) = 0` for `a < b`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, orientation, Point};
use crate::hull::{binomial, incremental_hull};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeLabel {
    d: usize,
    j: usize,
}

impl TypeLabel {
    /// Label for `bey = j` in dimension `d`, folded to `min(j, d - j)`.
    pub fn new(d: usize, j: usize) -> Result<Self> {
        if d < 2 || j == 0 || j >= d {
            return Err(Error::invalid(format!("no combinatorial type T_{j}^{d}")));
        }
        Ok(TypeLabel { d, j: j.min(d - j) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// `(f_0, …, f_{d-1})` of the type.
    pub fn f_vector(&self) -> Vec<u64> {
        let mut f = vec![self.d as u64 + 2];
        f.extend((1..self.d).map(|k| type_f_count(self.d, self.j, k).expect("valid label")));
        f
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{}^{}", self.j, self.d)
    }
}

/// Number of `k`-faces of a polytope of type `T_j^d`.
pub fn type_f_count(d: usize, j: usize, k: usize) -> Result<u64> {
    if d < 2 || j < 1 || j > d / 2 {
        return Err(Error::invalid(format!("type index j={j} out of range 1..={} for d={d}", d / 2)));
    }
    if k < 1 || k > d - 1 {
        return Err(Error::invalid(format!("face dimension k={k} out of range 1..={}", d - 1)));
    }
    let (d, j, k) = (d as u64, j as u64, k as u64);
    let b = d - k + 1;
    Ok(binomial(d + 2, b) - binomial(j + 1, b) - binomial(d - j + 1, b))
}

fn check_simplex<P: AsRef<[f64]>>(simplex: &[P]) -> Result<usize> {
    let d = simplex
        .len()
        .checked_sub(1)
        .filter(|&d| d >= 2)
        .ok_or_else(|| Error::invalid("a simplex needs d+1 ≥ 3 points"))?;
    check_dims(simplex, d)?;
    if orientation(simplex)? == 0 {
        return Err(Error::general_position((0..=d).collect(), "simplex is degenerate"));
    }
    Ok(d)
}

/// Per-facet classification of `x` against the simplex: `Some(true)` beyond,
/// `Some(false)` beneath, `None` on the facet span. Facet `i` omits vertex `i`.
fn facet_sides<P: AsRef<[f64]>>(x: &[f64], simplex: &[P]) -> Result<Vec<Option<bool>>> {
    let d = check_simplex(simplex)?;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    (0..=d)
        .map(|i| {
            let mut pts: Vec<&[f64]> = (0..=d).filter(|&v| v != i).map(|v| simplex[v].as_ref()).collect();
            pts.push(simplex[i].as_ref());
            let inside = orientation(&pts)?;
            pts.pop();
            pts.push(x);
            let s = orientation(&pts)?;
            Ok(if s == 0 { None } else { Some(s != inside) })
        })
        .collect()
}

/// `bey(x, S)`: facets of the simplex `S` that `x` lies strictly beyond.
pub fn beyond_count<P: AsRef<[f64]>>(x: &[f64], simplex: &[P]) -> Result<usize> {
    Ok(facet_sides(x, simplex)?.into_iter().filter(|s| *s == Some(true)).count())
}

/// Which open region `S(j) = {x ∉ S : bey(x, S) = j}` contains `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionQuery {
    /// `Some(j)` for `j` in `1..d`; `None` inside `S` or on a facet span.
    pub region: Option<usize>,
    /// `x` lies exactly on the span of some facet of `S`.
    pub boundary: bool,
}

pub fn region_of<P: AsRef<[f64]>>(x: &[f64], simplex: &[P]) -> Result<RegionQuery> {
    let sides = facet_sides(x, simplex)?;
    let d = sides.len() - 1;
    if sides.iter().any(|s| s.is_none()) {
        return Ok(RegionQuery { region: None, boundary: true });
    }
    let bey = sides.iter().filter(|s| **s == Some(true)).count();
    if bey >= d {
        return Err(Error::general_position(vec![], format!("beyond all {bey} facets of a simplex")));
    }
    Ok(RegionQuery {
        region: (bey > 0).then_some(bey),
        boundary: false,
    })
}

/// Result of classifying `d+2` points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub label: TypeLabel,
    /// Index of the point used as the apex `x`.
    pub apex: usize,
    /// Unfolded `bey(x, S)`.
    pub beyond: usize,
}

/// Combinatorial type of the convex hull of exactly `d+2` points.
///
/// The last point is the apex and the others the simplex; if they are
/// affinely dependent the apex moves to the previous index, and so on.
pub fn classify_d_plus_2(points: &[Point]) -> Result<Classification> {
    let Some(d) = points.len().checked_sub(2).filter(|&d| d >= 2) else {
        return Err(Error::invalid(format!("need d+2 points with d ≥ 2, got {}", points.len())));
    };
    let hull = incremental_hull(points, d)?;
    if hull.hull_vertices().len() != d + 2 {
        return Err(Error::general_position(
            (0..d + 2).filter(|i| !hull.hull_vertices().contains(i)).collect(),
            "not every point is a vertex of the hull",
        ));
    }
    for apex in (0..d + 2).rev() {
        let simplex: Vec<&[f64]> = (0..d + 2).filter(|&i| i != apex).map(|i| points[i].coords.as_slice()).collect();
        if orientation(&simplex)? == 0 {
            continue;
        }
        let q = region_of(&points[apex].coords, &simplex)?;
        if q.boundary {
            return Err(Error::general_position(vec![apex], "apex lies on a facet span of the simplex"));
        }
        let Some(bey) = q.region else {
            return Err(Error::general_position(vec![apex], "apex lies inside the simplex"));
        };
        return Ok(Classification {
            label: TypeLabel::new(d, bey)?,
            apex,
            beyond: bey,
        });
    }
    Err(Error::general_position((0..d + 2).collect(), "no affinely independent d+1 subset"))
}

/// A random `d+2`-point configuration in convex position: a Gaussian simplex
/// and a Gaussian apex redrawn until it lies outside the simplex.
pub fn random_configuration(d: usize, rng: &mut Stream) -> Vec<Point> {
    loop {
        let pts: Vec<Point> = (0..d + 2)
            .map(|i| Point {
                coords: (0..d).map(|_| rng.gaussian()).collect(),
                index: Some(i),
            })
            .collect();
        let simplex: Vec<&[f64]> = pts[..=d].iter().map(|p| p.coords.as_slice()).collect();
        let ok = matches!(region_of(&pts[d + 1].coords, &simplex), Ok(RegionQuery { region: Some(_), boundary: false }));
        // The apex must not swallow a simplex vertex either.
        if ok && incremental_hull(&pts, d).is_ok_and(|h| h.hull_vertices().len() == d + 2) {
            return pts;
        }
    }
}
