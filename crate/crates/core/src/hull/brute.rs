use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{orientation, oriented_plane, Point};
use crate::hull::{combinations, Facet, HullComplex};

/// Soft limit on the input size of the subset-enumeration hull.
pub const BRUTE_FORCE_SOFT_LIMIT: usize = 25;

/// Convex hull by testing every `d`-subset as a facet candidate.
///
/// A subset is a facet iff all remaining points lie strictly on one side of
/// its span. Any zero orientation is a general-position error. Intended as a
/// test oracle for `n ≤ 25`.
pub fn brute_force_hull(points: &[Point], d: usize) -> Result<HullComplex> {
    super::validate_input(points, d)?;
    let n = points.len();
    let mut found: Vec<(Vec<usize>, i8)> = Vec::new();
    for subset in combinations(n, d) {
        let mut side = 0i8;
        let mut is_facet = true;
        for q in 0..n {
            if subset.contains(&q) {
                continue;
            }
            let mut pts: Vec<&[f64]> = subset.iter().map(|&v| points[v].coords.as_slice()).collect();
            pts.push(&points[q].coords);
            let s = orientation(&pts)?;
            if s == 0 {
                let mut idx = subset.clone();
                idx.push(q);
                return Err(Error::general_position(idx, "d+1 points on a common hyperplane"));
            }
            if side == 0 {
                side = s;
            } else if s != side {
                is_facet = false;
                break;
            }
        }
        if is_facet {
            found.push((subset, side));
        }
    }

    found.sort();
    let mut ridges: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    let mut neighbors = vec![vec![usize::MAX; d]; found.len()];
    for (fi, (verts, _)) in found.iter().enumerate() {
        for slot in 0..d {
            let key: Vec<usize> = verts.iter().enumerate().filter(|&(k, _)| k != slot).map(|(_, &v)| v).collect();
            if let Some((g, gslot)) = ridges.remove(&key) {
                neighbors[fi][slot] = g;
                neighbors[g][gslot] = fi;
            } else {
                ridges.insert(key, (fi, slot));
            }
        }
    }
    if !ridges.is_empty() {
        return Err(Error::general_position(
            ridges.into_keys().next().unwrap_or_default(),
            "ridge without a partner facet",
        ));
    }

    let parity: i8 = if d % 2 == 0 { 1 } else { -1 };
    let facets = found
        .into_iter()
        .zip(neighbors)
        .map(|((verts, inside), nbrs)| {
            let pts: Vec<&[f64]> = verts.iter().map(|&v| points[v].coords.as_slice()).collect();
            Facet {
                plane: oriented_plane(&pts, -inside * parity),
                vertices: verts,
                neighbors: nbrs,
            }
        })
        .collect();
    Ok(HullComplex::assemble(d, points.to_vec(), facets))
}
