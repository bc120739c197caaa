//! Local score functions and the radius of stabilization.
//!
//! The score of a hull vertex `x` for face dimension `k` is the number of
//! `k`-faces containing `x`, divided by `k + 1`; scores sum to `f_k`.
//!
//! The radius of stabilization at `x` is the smallest `R` such that every
//! solid cap `K ∩ {z : <z, u_F> ≥ t_F}` cut off by a facet `F ∋ x` lies in
//! the ball `B(x, R)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBodyModel;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, norm};
use crate::hull::{combinations, incremental_hull, HullComplex};
use crate::rng::{derive_seed, Stream};

/// Per-vertex scores `ξ_k = count / divisor` with `divisor = k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub k: usize,
    pub divisor: u64,
    /// `(vertex index, number of k-faces containing it)`, ascending by vertex.
    pub counts: Vec<(usize, u64)>,
}

impl ScoreTable {
    /// Score of `vertex` as a reduced fraction, or `None` if it is not a hull vertex.
    pub fn value(&self, vertex: usize) -> Option<(u64, u64)> {
        let i = self.counts.binary_search_by_key(&vertex, |&(v, _)| v).ok()?;
        Some(reduce(self.counts[i].1, self.divisor))
    }

    /// `Σ_i ξ_k(X_i)` as a reduced fraction.
    pub fn total(&self) -> (u64, u64) {
        reduce(self.counts.iter().map(|&(_, c)| c).sum(), self.divisor)
    }

    /// Exact check of `Σ_i ξ_k(X_i) = f_k`.
    pub fn sums_to(&self, f_k: u64) -> bool {
        self.counts.iter().map(|&(_, c)| c as u128).sum::<u128>() == self.divisor as u128 * f_k as u128
    }
}

fn reduce(num: u64, den: u64) -> (u64, u64) {
    let (mut a, mut b) = (num, den);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if a == 0 {
        (0, 1)
    } else {
        (num / a, den / a)
    }
}

/// Number of distinct `k`-faces containing `v`, from the facets in its star.
pub(crate) fn incident_faces(d: usize, k: usize, v: usize, star: &[&[usize]], scratch: &mut Vec<Vec<usize>>) -> u64 {
    if k == 0 {
        return u64::from(!star.is_empty());
    }
    if k == d - 1 {
        return star.len() as u64;
    }
    scratch.clear();
    for vs in star {
        let others: Vec<usize> = vs.iter().copied().filter(|&u| u != v).collect();
        for s in combinations(others.len(), k) {
            scratch.push(s.iter().map(|&i| others[i]).collect());
        }
    }
    scratch.sort_unstable();
    scratch.dedup();
    scratch.len() as u64
}

/// Scores of every hull vertex for face dimension `k`.
pub fn scores(h: &HullComplex, k: usize) -> Result<ScoreTable> {
    let d = h.dimension();
    if k >= d {
        return Err(Error::invalid(format!("face dimension {k} out of range 0..{d}")));
    }
    let star = h.vertex_facets();
    let mut scratch = Vec::new();
    let counts = h
        .hull_vertices()
        .iter()
        .map(|&v| {
            let fs: Vec<&[usize]> = star[v].iter().map(|&f| h.facets()[f].vertices.as_slice()).collect();
            (v, incident_faces(d, k, v, &fs, &mut scratch))
        })
        .collect();
    Ok(ScoreTable {
        k,
        divisor: k as u64 + 1,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRecord {
    pub index: usize,
    pub radius: f64,
    /// Vertices of the facet whose cap attains the radius.
    pub facet: Vec<usize>,
    pub body: ConvexBodyModel,
}

/// Absolute tolerance of the ellipsoid cap maximization.
pub const ASCENT_TOL: f64 = 1e-6;

/// Radius of stabilization of hull vertex `x_index`.
pub fn stabilization_radius(body: &ConvexBodyModel, x_index: usize, h: &HullComplex) -> Result<StabilizationRecord> {
    if body.dim() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: h.dimension(),
        });
    }
    if h.hull_vertices().binary_search(&x_index).is_err() {
        return Err(Error::invalid(format!("point {x_index} is not a hull vertex")));
    }
    let x = h.point(x_index);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for f in h.facets().iter().filter(|f| f.vertices.contains(&x_index)) {
        let r = cap_radius(body, x, &f.plane.normal, f.plane.offset);
        if r > best.0 {
            best = (r, f.vertices.clone());
        }
    }
    Ok(StabilizationRecord {
        index: x_index,
        radius: best.0,
        facet: best.1,
        body: body.clone(),
    })
}

/// `max { ‖z - x‖ : z ∈ K, <z, u> ≥ t }` for a boundary point `x` on the
/// hyperplane `<z, u> = t`.
pub fn cap_radius(body: &ConvexBodyModel, x: &[f64], u: &[f64], t: f64) -> f64 {
    match body {
        ConvexBodyModel::Ball { center, radius } => ball_cap_radius(center, *radius, x, u, t),
        ConvexBodyModel::Ellipsoid { semi_axes } => ellipsoid_cap_radius(semi_axes, x, u, t),
    }
}

/// Ball: the unconstrained maximizer is the antipode `2c - x`. When it is
/// cut off, the maximum sits on the sphere `{‖z - c‖ = ρ, <z, u> = t}`, whose
/// center is `c + (t - <c, u>) u` and radius `s = sqrt(ρ² - (t - <c, u>)²)`;
/// `x` lies on it, so the farthest point is its antipode on that sphere at
/// distance `2s`.
fn ball_cap_radius(c: &[f64], rho: f64, x: &[f64], u: &[f64], t: f64) -> f64 {
    let antipode_side: f64 = c.iter().zip(x).zip(u).map(|((ci, xi), ui)| (2.0 * ci - xi) * ui).sum();
    if antipode_side >= t {
        return 2.0 * rho;
    }
    let h = t - dot(c, u);
    2.0 * (rho * rho - h * h).max(0.0).sqrt()
}

/// Ellipsoid `z = A w` with `‖w‖ = 1`: the constraint becomes the spherical
/// cap `<w, v> ≥ τ` with `v = Au/‖Au‖`, `τ = t/‖Au‖`, and `‖Aw - x‖²` is
/// maximized by projected gradient ascent from `2d + 1` starts (`v` and the
/// cap projections of `±e_i`).
fn ellipsoid_cap_radius(a: &[f64], x: &[f64], u: &[f64], t: f64) -> f64 {
    let d = a.len();
    let au: Vec<f64> = a.iter().zip(u).map(|(ai, ui)| ai * ui).collect();
    let len = norm(&au);
    let v: Vec<f64> = au.iter().map(|c| c / len).collect();
    let tau = (t / len).clamp(-1.0, 1.0);
    let cap = SphericalCap { v: &v, tau };
    let value = |w: &[f64]| -> f64 { w.iter().zip(a).zip(x).map(|((wi, ai), xi)| (ai * wi - xi).powi(2)).sum() };

    let mut starts = vec![v.clone()];
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            starts.push(cap.project(&e));
        }
    }
    let scale = a.iter().cloned().fold(0.0, f64::max);
    let mut best = 0.0f64;
    for mut w in starts {
        let mut g = value(&w);
        let mut step = 1.0 / (scale * scale);
        let mut grad = vec![0.0; d];
        let mut trial = vec![0.0; d];
        for _ in 0..10_000 {
            for i in 0..d {
                grad[i] = 2.0 * a[i] * (a[i] * w[i] - x[i]);
            }
            for i in 0..d {
                trial[i] = w[i] + step * grad[i];
            }
            let next = cap.project(&trial);
            let gn = value(&next);
            if gn > g {
                let moved = dist(&next, &w);
                w = next;
                let gain = gn.sqrt() - g.sqrt();
                g = gn;
                step *= 1.5;
                if gain < 0.01 * ASCENT_TOL && moved < ASCENT_TOL {
                    break;
                }
            } else {
                step *= 0.5;
                if step * norm(&grad) < 1e-3 * ASCENT_TOL / scale {
                    break;
                }
            }
        }
        best = best.max(g);
    }
    best.sqrt()
}

struct SphericalCap<'a> {
    v: &'a [f64],
    tau: f64,
}

impl SphericalCap<'_> {
    /// Nearest point of the cap `{‖w‖ = 1, <w, v> ≥ τ}` to the ray through `y`.
    fn project(&self, y: &[f64]) -> Vec<f64> {
        let n = norm(y);
        let w: Vec<f64> = if n > 0.0 { y.iter().map(|c| c / n).collect() } else { self.v.to_vec() };
        let along = dot(&w, self.v);
        if along >= self.tau {
            return w;
        }
        let mut perp: Vec<f64> = w.iter().zip(self.v).map(|(wi, vi)| wi - along * vi).collect();
        let pn = norm(&perp);
        if pn < 1e-300 {
            // y is antiparallel to v: any boundary direction is nearest.
            let j = (0..self.v.len()).min_by(|&i, &k| self.v[i].abs().total_cmp(&self.v[k].abs())).unwrap();
            perp = self.v.iter().map(|vi| -self.v[j] * vi).collect();
            perp[j] += 1.0;
            let pn = norm(&perp);
            perp.iter_mut().for_each(|c| *c /= pn);
        } else {
            perp.iter_mut().for_each(|c| *c /= pn);
        }
        let s = (1.0 - self.tau * self.tau).max(0.0).sqrt();
        self.v.iter().zip(&perp).map(|(vi, pi)| self.tau * vi + s * pi).collect()
    }
}

/// Empirical survival function of `R` on a radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub n: usize,
    pub d: usize,
    pub replications: usize,
    /// One radius per replication, in replication order.
    pub radii: Vec<f64>,
    pub rows: Vec<TailRow>,
    pub fit: TailFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub r: f64,
    pub survival: f64,
    pub stderr: f64,
}

/// Least-squares line `ln P(R ≥ r) ≈ intercept + slope · r^{d-1} n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Number of grid points chosen when no grid is given.
pub const AUTO_GRID_POINTS: usize = 24;

/// Samples `n` boundary points per replication, takes a uniformly random
/// hull vertex, and records its radius of stabilization. Replication `i`
/// uses the stream `derive_seed(master_seed, 0, i)`.
///
/// Without an explicit grid, radii are spaced evenly in `r^{d-1}` between
/// the empirical median and the `1 - 5/M` quantile, which spans the fit
/// window `P ∈ [10/M, 0.5]`.
pub fn radius_tail_experiment(
    body: &ConvexBodyModel,
    n: usize,
    r_grid: Option<&[f64]>,
    replications: usize,
    master_seed: u64,
) -> Result<TailTable> {
    let d = body.dim();
    if n < d + 1 {
        return Err(Error::invalid(format!("need n ≥ {}, got {n}", d + 1)));
    }
    if replications < 100 {
        return Err(Error::invalid(format!("need at least 100 replications, got {replications}")));
    }
    let radii = (0..replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = Stream::new(derive_seed(master_seed, 0, i as u64));
            let pts = body.sample_points(&mut rng, n);
            let h = incremental_hull(&pts, d)?;
            let verts = h.hull_vertices();
            let x = verts[rng.below(verts.len() as u64) as usize];
            Ok(stabilization_radius(body, x, &h)?.radius)
        })
        .collect::<Result<Vec<f64>>>()?;

    let grid = match r_grid {
        Some(g) if !g.is_empty() => g.to_vec(),
        Some(_) => return Err(Error::invalid("empty radius grid")),
        None => auto_grid(&radii, d),
    };
    let m = replications as f64;
    let rows: Vec<TailRow> = grid
        .iter()
        .map(|&r| {
            let p = radii.iter().filter(|&&x| x >= r).count() as f64 / m;
            TailRow {
                r,
                survival: p,
                stderr: (p * (1.0 - p) / m).sqrt(),
            }
        })
        .collect();
    let fit = fit_tail(&rows, d, n, replications)?;
    Ok(TailTable {
        n,
        d,
        replications,
        radii,
        rows,
        fit,
    })
}

fn auto_grid(radii: &[f64], d: usize) -> Vec<f64> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let q = |p: f64| sorted[((p * m as f64) as usize).min(m - 1)];
    let e = (d - 1) as f64;
    let (lo, hi) = (q(0.5).powf(e), q(1.0 - 5.0 / m as f64).powf(e));
    (0..AUTO_GRID_POINTS)
        .map(|j| (lo + (hi - lo) * j as f64 / (AUTO_GRID_POINTS - 1) as f64).powf(1.0 / e))
        .collect()
}

fn fit_tail(rows: &[TailRow], d: usize, n: usize, m: usize) -> Result<TailFit> {
    let lo = 10.0 / m as f64;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.survival >= lo && row.survival <= 0.5)
        .map(|row| (row.r.powi(d as i32 - 1) * n as f64, row.survival.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} grid points have survival in [{lo}, 0.5]; need at least 2",
            pts.len()
        )));
    }
    let (slope, intercept, r_squared) = least_squares(&pts);
    Ok(TailFit {
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a, r²)`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub q: u32,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub k: usize,
    pub replications: usize,
    pub rows: Vec<MomentRow>,
    /// Orders `q` whose moment at the largest `n` exceeds twice the moment
    /// at the smallest `n`.
    pub flagged: Vec<u32>,
}

/// Empirical `E ξ_k(X_1, X_n)^q` for each `n` and `q`. Cell `j` replication
/// `i` uses the stream `derive_seed(master_seed, j, i)`.
pub fn moment_experiment(
    body: &ConvexBodyModel,
    k: usize,
    q_list: &[u32],
    n_grid: &[usize],
    replications: usize,
    master_seed: u64,
) -> Result<MomentTable> {
    let d = body.dim();
    if k >= d {
        return Err(Error::invalid(format!("face dimension {k} out of range 0..{d}")));
    }
    if let Some(q) = q_list.iter().find(|q| ![1, 2, 4].contains(*q)) {
        return Err(Error::invalid(format!("moment order {q} not in {{1, 2, 4}}")));
    }
    if replications < 500 {
        return Err(Error::invalid(format!("need at least 500 replications, got {replications}")));
    }
    if n_grid.is_empty() || n_grid.iter().any(|&n| n < d + 1) {
        return Err(Error::invalid(format!("every n must be at least {}", d + 1)));
    }
    let mut rows = Vec::new();
    for (j, &n) in n_grid.iter().enumerate() {
        let xs = (0..replications)
            .into_par_iter()
            .map(|i| {
                let mut rng = Stream::new(derive_seed(master_seed, j as u64, i as u64));
                let pts = body.sample_points(&mut rng, n);
                let h = incremental_hull(&pts, d)?;
                Ok(first_point_score(&h, k))
            })
            .collect::<Result<Vec<f64>>>()?;
        for &q in q_list {
            let vals: Vec<f64> = xs.iter().map(|x| x.powi(q as i32)).collect();
            let m = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
            rows.push(MomentRow {
                n,
                q,
                mean,
                stderr: (var / m).sqrt(),
            });
        }
    }
    let (first, last) = (n_grid[0], n_grid[n_grid.len() - 1]);
    let flagged = q_list
        .iter()
        .copied()
        .filter(|&q| {
            let at = |n: usize| rows.iter().find(|r| r.n == n && r.q == q).map(|r| r.mean).unwrap_or(0.0);
            at(last) > 2.0 * at(first)
        })
        .collect();
    Ok(MomentTable {
        k,
        replications,
        rows,
        flagged,
    })
}

/// `ξ_k(X_1, X_n)`: score of point 0 (zero if it is not a vertex).
fn first_point_score(h: &HullComplex, k: usize) -> f64 {
    let d = h.dimension();
    let fs: Vec<&[usize]> = h
        .facets()
        .iter()
        .filter(|f| f.vertices.contains(&0))
        .map(|f| f.vertices.as_slice())
        .collect();
    incident_faces(d, k, 0, &fs, &mut Vec::new()) as f64 / (k + 1) as f64
}
