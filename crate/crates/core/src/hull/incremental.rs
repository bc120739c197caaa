//! Beneath-beyond insertion with conflict lists.
//!
//! Every unprocessed point outside the current hull is attached to one facet
//! it lies beyond. Inserting a point walks the facet graph from that facet to
//! collect the visible region, replaces it by a cone over the horizon, and
//! redistributes the orphaned conflict points over the new facets.

use crate::error::{Error, Result};
use crate::geometry::predicates::{error_factor, filtered_linear_sign, last_row_cofactors_into};
use crate::geometry::{affine_rank, orientation_exact, orientation_filtered, Hyperplane, Point};
use crate::hull::{Facet, HullComplex};

const NONE: usize = usize::MAX;
/// Hash slot whose key has already been paired.
const TAKEN: usize = usize::MAX - 1;

/// Cells live in flat slabs indexed by cell id; dead ids are recycled.
struct Builder<'a> {
    d: usize,
    coords: &'a [f64],
    factor: f64,
    verts: Vec<usize>,
    nbrs: Vec<usize>,
    /// Last-row cofactors, then their absolute-value permanents (`2d` per cell).
    cof: Vec<f64>,
    /// Sign of the difference-form determinant for points beneath the cell.
    inside: Vec<i8>,
    alive: Vec<bool>,
    stamp: Vec<u32>,
    visible: Vec<bool>,
    /// Head of each cell's conflict list, threaded through `next`.
    head: Vec<usize>,
    next: Vec<usize>,
    conflict: Vec<usize>,
    free: Vec<usize>,
    round: u32,
    // Scratch reused across insertions.
    y: Vec<f64>,
    rows: Vec<f64>,
    det_tab: Vec<f64>,
    perm_tab: Vec<f64>,
    vis_list: Vec<usize>,
    horizon: Vec<(usize, usize, usize)>,
    new_cells: Vec<usize>,
    keys: Vec<usize>,
    entries: Vec<(usize, usize)>,
    order: Vec<usize>,
    orphans: Vec<(usize, usize)>,
    hstart: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn new(coords: &'a [f64], n: usize, d: usize) -> Self {
        let cap = 8 * d * n.max(8);
        Builder {
            d,
            coords,
            factor: error_factor(d),
            verts: Vec::with_capacity(cap),
            nbrs: Vec::with_capacity(cap),
            cof: Vec::with_capacity(2 * cap),
            inside: Vec::new(),
            alive: Vec::new(),
            stamp: Vec::new(),
            visible: Vec::new(),
            head: Vec::new(),
            next: vec![NONE; n],
            conflict: vec![NONE; n],
            free: Vec::new(),
            round: 0,
            y: vec![0.0; d],
            rows: vec![0.0; d * (d - 1)],
            det_tab: vec![0.0; 1 << d],
            perm_tab: vec![0.0; 1 << d],
            vis_list: Vec::new(),
            horizon: Vec::new(),
            new_cells: Vec::new(),
            keys: Vec::new(),
            entries: Vec::new(),
            order: Vec::new(),
            orphans: Vec::new(),
            hstart: Vec::new(),
        }
    }

    #[inline]
    fn point(&self, i: usize) -> &'a [f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    fn cell_verts(&self, c: usize) -> &[usize] {
        &self.verts[c * self.d..(c + 1) * self.d]
    }

    /// Sign of the difference-form determinant of `verts ++ [x]`.
    fn det_sign(&mut self, cell: usize, x: usize) -> i8 {
        let d = self.d;
        let v0 = self.point(self.verts[cell * d]);
        let p = self.point(x);
        for j in 0..d {
            self.y[j] = p[j] - v0[j];
        }
        let cof = &self.cof[2 * d * cell..2 * d * (cell + 1)];
        if let Some(s) = filtered_linear_sign(&self.y, &cof[..d], &cof[d..], self.factor) {
            return s;
        }
        let mut pts: Vec<&[f64]> = self.cell_verts(cell).iter().map(|&v| self.point(v)).collect();
        pts.push(p);
        let s = orientation_exact(&pts);
        if d % 2 == 0 {
            s
        } else {
            -s
        }
    }

    /// `Some(true)` beyond, `Some(false)` beneath, `None` on the span.
    #[inline]
    fn beyond(&mut self, cell: usize, x: usize) -> Option<bool> {
        match self.det_sign(cell, x) {
            0 => None,
            s => Some(s != self.inside[cell]),
        }
    }

    fn span_error(&self, cell: usize, x: usize, reason: &str) -> Error {
        let mut idx = self.cell_verts(cell).to_vec();
        idx.push(x);
        Error::general_position(idx, reason)
    }

    fn alloc(&mut self) -> usize {
        let d = self.d;
        if let Some(id) = self.free.pop() {
            self.nbrs[id * d..(id + 1) * d].fill(NONE);
            self.alive[id] = true;
            self.stamp[id] = 0;
            self.visible[id] = false;
            self.head[id] = NONE;
            return id;
        }
        let id = self.inside.len();
        self.verts.resize((id + 1) * d, 0);
        self.nbrs.resize((id + 1) * d, NONE);
        self.cof.resize((id + 1) * 2 * d, 0.0);
        self.inside.push(0);
        self.alive.push(true);
        self.stamp.push(0);
        self.visible.push(false);
        self.head.push(NONE);
        id
    }

    /// New cell on the sorted vertex list already written to `verts[id]`.
    fn finish_cell(&mut self, id: usize, inside_ref: usize) -> Result<()> {
        let d = self.d;
        let base = self.verts[id * d];
        let v0 = self.point(base);
        for r in 1..d {
            let v = self.point(self.verts[id * d + r]);
            for j in 0..d {
                self.rows[(r - 1) * d + j] = v[j] - v0[j];
            }
        }
        last_row_cofactors_into(
            &self.rows,
            d,
            &mut self.cof[2 * d * id..2 * d * (id + 1)],
            &mut self.det_tab,
            &mut self.perm_tab,
        );
        let s = self.det_sign(id, inside_ref);
        if s == 0 {
            return Err(self.span_error(id, inside_ref, "vertex lies on the span of a facet"));
        }
        self.inside[id] = s;
        Ok(())
    }

    fn push_conflict(&mut self, c: usize, p: usize) {
        self.next[p] = self.head[c];
        self.head[c] = p;
        self.conflict[p] = c;
    }

    /// Assigns `p` to the first candidate cell it lies beyond.
    fn assign(&mut self, p: usize, candidates: &[usize]) -> Result<()> {
        for &c in candidates {
            match self.beyond(c, p) {
                Some(true) => {
                    self.push_conflict(c, p);
                    return Ok(());
                }
                Some(false) => {}
                None => return Err(self.span_error(c, p, "point lies on the span of a facet")),
            }
        }
        self.conflict[p] = NONE;
        Ok(())
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let d = self.d;
        self.round += 1;
        let round = self.round;
        let start = self.conflict[p];

        let mut vis_list = std::mem::take(&mut self.vis_list);
        let mut horizon = std::mem::take(&mut self.horizon);
        vis_list.clear();
        horizon.clear();
        vis_list.push(start);
        self.stamp[start] = round;
        self.visible[start] = true;
        let mut at = 0;
        self.hstart.clear();
        while at < vis_list.len() {
            let f = vis_list[at];
            at += 1;
            self.hstart.push(horizon.len());
            for i in 0..d {
                let g = self.nbrs[f * d + i];
                if self.stamp[g] != round {
                    self.stamp[g] = round;
                    match self.beyond(g, p) {
                        Some(vis) => self.visible[g] = vis,
                        None => {
                            return Err(self.span_error(g, p, "inserted point lies on the span of a facet"));
                        }
                    }
                    if self.visible[g] {
                        vis_list.push(g);
                    }
                }
                if !self.visible[g] {
                    horizon.push((f, i, g));
                }
            }
        }

        let mut new_cells = std::mem::take(&mut self.new_cells);
        new_cells.clear();
        for &(f, i, g) in &horizon {
            let id = self.alloc();
            // Ridge of f opposite slot i, plus p, kept sorted.
            let mut w = id * d;
            let mut pos = NONE;
            for k in 0..d {
                if k == i {
                    continue;
                }
                let v = self.verts[f * d + k];
                if pos == NONE && p < v {
                    pos = w - id * d;
                    self.verts[w] = p;
                    w += 1;
                }
                self.verts[w] = v;
                w += 1;
            }
            if pos == NONE {
                pos = d - 1;
                self.verts[w] = p;
            }
            // The vertex of g opposite the shared ridge stays strictly beneath.
            let gslot = (0..d).find(|&k| self.nbrs[g * d + k] == f).expect("adjacency is symmetric");
            let apex = self.verts[g * d + gslot];
            self.finish_cell(id, apex)?;
            self.nbrs[id * d + pos] = g;
            self.nbrs[g * d + gslot] = id;
            new_cells.push(id);
        }
        self.link_new_cells(p, &new_cells);

        // Orphans are tagged with the visible cell they came from; the new
        // cells over that cell's horizon ridges are tried first.
        self.hstart.push(horizon.len());
        let mut orphans = std::mem::take(&mut self.orphans);
        orphans.clear();
        for (vi, &f) in vis_list.iter().enumerate() {
            self.alive[f] = false;
            self.visible[f] = false;
            let mut q = self.head[f];
            while q != NONE {
                orphans.push((q, vi));
                q = self.next[q];
            }
            self.head[f] = NONE;
            self.free.push(f);
        }
        self.conflict[p] = NONE;
        let mut result = Ok(());
        for &(q, vi) in &orphans {
            if q == p {
                continue;
            }
            let local = &new_cells[self.hstart[vi]..self.hstart[vi + 1]];
            result = self.assign(q, local);
            if result.is_ok() && self.conflict[q] == NONE {
                result = self.assign(q, &new_cells);
            }
            if result.is_err() {
                break;
            }
        }
        self.vis_list = vis_list;
        self.horizon = horizon;
        self.new_cells = new_cells;
        self.orphans = orphans;
        result
    }

    /// Pairs new cells across ridges through `p`: every `(d-2)`-vertex key
    /// occurs exactly twice. Open addressing over a reused table.
    fn link_new_cells(&mut self, p: usize, new_cells: &[usize]) {
        let d = self.d;
        let kl = d - 2;
        self.keys.clear();
        self.entries.clear();
        for &id in new_cells {
            for slot in 0..d {
                let vs = &self.verts[id * d..(id + 1) * d];
                if vs[slot] == p {
                    continue;
                }
                for (k, &v) in vs.iter().enumerate() {
                    if k != slot && v != p {
                        self.keys.push(v);
                    }
                }
                self.entries.push((id, slot));
            }
        }
        let size = (2 * self.entries.len()).next_power_of_two().max(4);
        let mask = size - 1;
        self.order.clear();
        self.order.resize(size, NONE);
        for e in 0..self.entries.len() {
            let key = &self.keys[e * kl..(e + 1) * kl];
            let mut h = 0u64;
            for &v in key {
                h = crate::rng::mix64(h ^ v as u64);
            }
            let mut i = h as usize & mask;
            loop {
                let other = self.order[i];
                if other == NONE {
                    self.order[i] = e;
                    break;
                }
                if other != TAKEN && self.keys[other * kl..(other + 1) * kl] == *key {
                    self.order[i] = TAKEN;
                    let (a, sa) = self.entries[other];
                    let (b, sb) = self.entries[e];
                    self.nbrs[a * d + sa] = b;
                    self.nbrs[b * d + sb] = a;
                    break;
                }
                i = (i + 1) & mask;
            }
        }
        debug_assert!(
            self.order.iter().all(|&o| o == NONE || o == TAKEN),
            "horizon ridges must pair up"
        );
    }
}

fn check_distinct(coords: &[f64], n: usize, d: usize) -> Result<()> {
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| &coords[i * d..(i + 1) * d];
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        // -0.0 and 0.0 compare unequal under total_cmp; use numeric equality.
        if key(w[0]) == key(w[1]) {
            return Err(Error::general_position(vec![w[0].min(w[1]), w[0].max(w[1])], "duplicate points"));
        }
    }
    Ok(())
}

/// First `d+1` affinely independent points in index order.
fn initial_simplex(coords: &[f64], n: usize, d: usize) -> Result<Vec<usize>> {
    let pt = |i: usize| &coords[i * d..(i + 1) * d];
    let first: Vec<&[f64]> = (0..=d).map(pt).collect();
    if orientation_filtered(&first).is_some_and(|s| s != 0) {
        return Ok((0..=d).collect());
    }
    let mut chosen: Vec<usize> = vec![0];
    for i in 1..n {
        let mut trial: Vec<&[f64]> = chosen.iter().map(|&c| pt(c)).collect();
        trial.push(pt(i));
        if affine_rank(&trial) == chosen.len() as isize {
            chosen.push(i);
            if chosen.len() == d + 1 {
                return Ok(chosen);
            }
        }
    }
    Err(Error::general_position(chosen, "all points are affinely dependent"))
}

/// Convex hull of `points` in `R^d` by beneath-beyond insertion in index order.
pub fn incremental_hull(points: &[Point], d: usize) -> Result<HullComplex> {
    super::validate_input(points, d)?;
    let n = points.len();
    let mut coords = Vec::with_capacity(n * d);
    for p in points {
        coords.extend_from_slice(&p.coords);
    }
    let facets = build(&coords, n, d)?;
    Ok(HullComplex::assemble(d, points.to_vec(), facets))
}

fn run(coords: &[f64], n: usize, d: usize) -> Result<Builder<'_>> {
    check_distinct(coords, n, d)?;
    let simplex = initial_simplex(coords, n, d)?;
    let mut b = Builder::new(coords, n, d);

    // Cell k omits simplex vertex k; neighbors across each ridge are the
    // cells omitting the other vertex.
    for k in 0..=d {
        let id = b.alloc();
        let mut w = id * d;
        for (i, &v) in simplex.iter().enumerate() {
            if i != k {
                b.verts[w] = v;
                w += 1;
            }
        }
        b.finish_cell(id, simplex[k])?;
    }
    for k in 0..=d {
        let others = (0..=d).filter(|&i| i != k);
        for (slot, omit) in others.enumerate() {
            b.nbrs[k * d + slot] = omit;
        }
    }

    let initial: Vec<usize> = (0..=d).collect();
    let in_simplex = |i: usize| simplex.contains(&i);
    for p in 0..n {
        if !in_simplex(p) {
            b.assign(p, &initial)?;
        }
    }

    for p in 0..n {
        if b.conflict[p] != NONE {
            b.insert(p)?;
        }
    }
    Ok(b)
}

/// Sorted vertex tuples of all facets, flattened, in no particular order.
pub(crate) fn facet_vertices(coords: &[f64], n: usize, d: usize) -> Result<Vec<usize>> {
    let b = run(coords, n, d)?;
    let mut out = Vec::with_capacity(b.inside.len() * d);
    for c in 0..b.inside.len() {
        if b.alive[c] {
            out.extend_from_slice(b.cell_verts(c));
        }
    }
    Ok(out)
}

/// Facets from flat coordinates, sorted by vertex tuple, with neighbors and
/// outward planes.
pub(crate) fn build(coords: &[f64], n: usize, d: usize) -> Result<Vec<Facet>> {
    let b = run(coords, n, d)?;
    let cells = b.inside.len();
    let mut remap = vec![NONE; cells];
    let mut alive: Vec<usize> = (0..cells).filter(|&c| b.alive[c]).collect();
    alive.sort_unstable_by(|&a, &c| b.cell_verts(a).cmp(b.cell_verts(c)));
    for (new, &old) in alive.iter().enumerate() {
        remap[old] = new;
    }
    let facets = alive
        .iter()
        .map(|&c| {
            // Outward normal: the cofactor vector, pointing away from `inside`.
            let cof = &b.cof[2 * d * c..2 * d * c + d];
            let len = cof.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = -(b.inside[c] as f64) / len;
            let normal: Vec<f64> = cof.iter().map(|v| v * s).collect();
            let offset = crate::geometry::dot(&normal, b.point(b.verts[c * d]));
            Facet {
                vertices: b.cell_verts(c).to_vec(),
                plane: Hyperplane { normal, offset },
                neighbors: b.nbrs[c * d..(c + 1) * d].iter().map(|&g| remap[g]).collect(),
            }
        })
        .collect();
    Ok(facets)
}
