//! Convex hulls in general dimension, face enumeration, and f-vector
//! identities.

mod brute;
mod incremental;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, Hyperplane, Point};

pub use brute::{brute_force_hull, BRUTE_FORCE_SOFT_LIMIT};
pub use incremental::incremental_hull;
pub(crate) use incremental::facet_vertices;

/// A simplicial facet: sorted vertex indices, outward plane, and the facet
/// across the ridge opposite each vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub plane: Hyperplane,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct HullComplex {
    dimension: usize,
    points: Vec<Point>,
    hull_vertices: Vec<usize>,
    facets: Vec<Facet>,
}

/// Face counts `(f_0, …, f_{d-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FVector {
    pub counts: Vec<u64>,
}

impl FVector {
    pub fn new(counts: Vec<u64>) -> Self {
        FVector { counts }
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }
}

impl std::ops::Index<usize> for FVector {
    type Output = u64;
    fn index(&self, k: usize) -> &u64 {
        &self.counts[k]
    }
}

impl std::fmt::Display for FVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn validate_input(points: &[Point], d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {d}")));
    }
    if points.len() < d + 1 {
        return Err(Error::invalid(format!(
            "need at least {} points in dimension {d}, got {}",
            d + 1,
            points.len()
        )));
    }
    check_dims(points, d)?;
    for (i, p) in points.iter().enumerate() {
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(Some(i)));
        }
    }
    Ok(())
}

/// f-vector of the hull of `coords.len() / d` points stored row-major,
/// without materializing a [`HullComplex`].
pub fn f_vector_of_points(coords: &[f64], d: usize) -> Result<FVector> {
    if d < 2 || coords.len() % d != 0 {
        return Err(Error::invalid(format!(
            "{} coordinates do not form points in dimension {d}",
            coords.len()
        )));
    }
    let n = coords.len() / d;
    if n < d + 1 {
        return Err(Error::invalid(format!("need at least {} points in dimension {d}, got {n}", d + 1)));
    }
    if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite(Some(i / d)));
    }
    let facets = facet_vertices(coords, n, d)?;
    let counts = match flat_face_counts(n, d, &facets) {
        Some(c) => c,
        None => {
            let points = coords.chunks(d).map(|c| Point::new(c.to_vec())).collect::<Result<Vec<_>>>()?;
            return Ok(f_vector(&incremental_hull(&points, d)?));
        }
    };
    Ok(FVector { counts })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

impl HullComplex {
    pub(crate) fn assemble(dimension: usize, points: Vec<Point>, facets: Vec<Facet>) -> Self {
        let mut on_hull = vec![false; points.len()];
        for f in &facets {
            for &v in &f.vertices {
                on_hull[v] = true;
            }
        }
        HullComplex {
            dimension,
            hull_vertices: (0..points.len()).filter(|&i| on_hull[i]).collect(),
            points,
            facets,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i].coords
    }

    /// Indices of hull vertices, ascending.
    pub fn hull_vertices(&self) -> &[usize] {
        &self.hull_vertices
    }

    /// Facets sorted lexicographically by vertex indices.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_set(&self) -> BTreeSet<Vec<usize>> {
        self.facets.iter().map(|f| f.vertices.clone()).collect()
    }

    /// Facets incident to each input point (empty for interior points).
    pub fn vertex_facets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.points.len()];
        for (fi, f) in self.facets.iter().enumerate() {
            for &v in &f.vertices {
                out[v].push(fi);
            }
        }
        out
    }

    /// Checks simpliciality, neighbor symmetry, and that every ridge lies in
    /// exactly two facets.
    pub fn check_pseudo_manifold(&self) -> Result<()> {
        let d = self.dimension;
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for (fi, f) in self.facets.iter().enumerate() {
            if f.vertices.len() != d || f.neighbors.len() != d {
                return Err(Error::invalid(format!("facet {fi} is not a simplex")));
            }
            if f.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("facet {fi} vertices not strictly increasing")));
            }
            for slot in 0..d {
                let ridge: Vec<usize> =
                    f.vertices.iter().enumerate().filter(|&(k, _)| k != slot).map(|(_, &v)| v).collect();
                let g = f.neighbors[slot];
                let other = self
                    .facets
                    .get(g)
                    .ok_or_else(|| Error::invalid(format!("facet {fi} has a dangling neighbor")))?;
                let back = other.neighbors.iter().position(|&x| x == fi);
                let shares = back.is_some_and(|b| {
                    let r: Vec<usize> =
                        other.vertices.iter().enumerate().filter(|&(k, _)| k != b).map(|(_, &v)| v).collect();
                    r == ridge
                });
                if !shares {
                    return Err(Error::invalid(format!("facets {fi} and {g} disagree on their ridge")));
                }
                *ridges.entry(ridge).or_default() += 1;
            }
        }
        if let Some((r, c)) = ridges.iter().find(|(_, &c)| c != 2) {
            return Err(Error::invalid(format!("ridge {r:?} lies in {c} facets")));
        }
        Ok(())
    }

    /// Text dump, one line per facet: `facet v_1 … v_d nx_1 … nx_d t`.
    pub fn facet_dump(&self) -> String {
        let mut out = String::new();
        for f in &self.facets {
            out.push_str("facet");
            for v in &f.vertices {
                let _ = write!(out, " {v}");
            }
            for x in &f.plane.normal {
                let _ = write!(out, " {x:e}");
            }
            let _ = writeln!(out, " {:e}", f.plane.offset);
        }
        out
    }
}

/// Number of index bits needed for values below `n`.
fn index_bits(n: usize) -> u32 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1)
}

/// Sorted packed keys of all `(k+1)`-subsets of facet vertex sets, or `None`
/// when the keys do not fit in 64 bits.
fn packed_faces(h: &HullComplex, k: usize) -> Option<Vec<u64>> {
    let bits = index_bits(h.points.len());
    if (k as u32 + 1) * bits > 64 {
        return None;
    }
    let d = h.dimension;
    let subsets: Vec<Vec<usize>> = combinations(d, k + 1).collect();
    let mut keys = Vec::with_capacity(h.facets.len() * subsets.len());
    for f in &h.facets {
        for s in &subsets {
            let mut key = 0u64;
            for &slot in s {
                key = (key << bits) | f.vertices[slot] as u64;
            }
            keys.push(key);
        }
    }
    keys.sort_unstable();
    keys.dedup();
    Some(keys)
}

fn check_face_dim(h: &HullComplex, k: usize) -> Result<()> {
    if k >= h.dimension {
        return Err(Error::invalid(format!(
            "face dimension {k} out of range 0..{}",
            h.dimension
        )));
    }
    Ok(())
}

/// All `k`-faces of a simplicial hull as sorted vertex tuples.
pub fn enumerate_k_faces(h: &HullComplex, k: usize) -> Result<BTreeSet<Vec<usize>>> {
    check_face_dim(h, k)?;
    let d = h.dimension;
    let subsets: Vec<Vec<usize>> = combinations(d, k + 1).collect();
    let mut out = BTreeSet::new();
    for f in &h.facets {
        for s in &subsets {
            out.insert(s.iter().map(|&slot| f.vertices[slot]).collect());
        }
    }
    Ok(out)
}

/// Number of `k`-faces.
pub fn count_k_faces(h: &HullComplex, k: usize) -> Result<u64> {
    check_face_dim(h, k)?;
    if k == h.dimension - 1 {
        return Ok(h.facets.len() as u64);
    }
    match packed_faces(h, k) {
        Some(keys) => Ok(keys.len() as u64),
        None => Ok(enumerate_k_faces(h, k)?.len() as u64),
    }
}

pub fn f_vector(h: &HullComplex) -> FVector {
    let d = h.dimension;
    let flat: Vec<usize> = h.facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
    let counts = match flat_face_counts(h.points.len(), d, &flat) {
        Some(c) => c,
        None => (0..d).map(|k| count_k_faces(h, k).expect("k in range")).collect(),
    };
    FVector { counts }
}

/// Face counts of a simplicial complex given as a flat list of sorted facet
/// vertex tuples over points `0..n`. Every face is counted once, at its
/// smallest vertex, by deduplicating within that vertex's star. `None` when
/// packed keys would not fit in 64 bits.
pub(crate) fn flat_face_counts(n: usize, d: usize, facets: &[usize]) -> Option<Vec<u64>> {
    let bits = index_bits(n);
    if d < 2 || (d as u32 - 1) * bits > 64 {
        return None;
    }
    let nf = facets.len() / d;
    // Star of each vertex in compressed-row form.
    let mut start = vec![0usize; n + 1];
    for &v in facets {
        start[v + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut star = vec![0usize; facets.len()];
    for f in 0..nf {
        for &v in &facets[f * d..(f + 1) * d] {
            star[fill[v]] = f;
            fill[v] += 1;
        }
    }
    // subsets[len][k]: k-subsets of 0..len.
    let subsets: Vec<Vec<Vec<Vec<usize>>>> = (0..d)
        .map(|len| (0..=len).map(|k| combinations(len, k).collect()).collect())
        .collect();
    let mut counts = vec![0u64; d];
    counts[0] = (0..n).filter(|&v| start[v + 1] > start[v]).count() as u64;
    counts[d - 1] = nf as u64;
    let mut local: Vec<u64> = Vec::new();
    for v in 0..n {
        let fs = &star[start[v]..start[v + 1]];
        if fs.is_empty() {
            continue;
        }
        for (k, count) in counts.iter_mut().enumerate().take(d - 1).skip(1) {
            local.clear();
            for &fi in fs {
                let vs = &facets[fi * d..(fi + 1) * d];
                let above = &vs[vs.partition_point(|&u| u <= v)..];
                if above.len() < k {
                    continue;
                }
                for s in &subsets[above.len()][k] {
                    let mut key = 0u64;
                    for &slot in s {
                        key = (key << bits) | above[slot] as u64;
                    }
                    local.push(key);
                }
            }
            local.sort_unstable();
            local.dedup();
            *count += local.len() as u64;
        }
    }
    Some(counts)
}

/// `Σ (-1)^i f_i = 1 - (-1)^d`.
pub fn euler_check(f: &FVector, d: usize) -> bool {
    if f.dim() != d {
        return false;
    }
    let alt: i128 = f
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 0 { c as i128 } else { -(c as i128) })
        .sum();
    let rhs = if d % 2 == 0 { 0 } else { 2 };
    alt == rhs
}

/// `Σ_{i=k}^{d-1} (-1)^i C(i+1, k+1) f_i = (-1)^{d-1} f_k` for every `k`.
pub fn dehn_sommerville_check(f: &FVector, d: usize) -> bool {
    if f.dim() != d {
        return false;
    }
    (0..d).all(|k| {
        let lhs: i128 = (k..d)
            .map(|i| {
                let t = binomial(i as u64 + 1, k as u64 + 1) as i128 * f.counts[i] as i128;
                if i % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum();
        let rhs = if (d - 1) % 2 == 0 { f.counts[k] as i128 } else { -(f.counts[k] as i128) };
        lhs == rhs
    })
}
