//! Orientation predicate with a certified floating-point filter and an exact
//! big-integer fallback.
//!
//! The orientation of `d+1` points `p_0, …, p_d` in `R^d` is the sign of
//!
//! ```text
//! | p_0  1 |
//! | ...    |
//! | p_d  1 |
//! ```
//!
//! which equals `(-1)^d · sign det[p_1 - p_0; …; p_d - p_0]`. The filter
//! evaluates the difference determinant by Laplace expansion (dynamic
//! programming over column subsets) together with the permanent of the
//! absolute values. With `K = 2d + d(d-1)/2` rounding steps per product
//! term, the computed value differs from the exact one by at most
//! `γ_K · perm`, which `K · ε · perm` dominates. Inside that band the sign is
//! recomputed exactly with Bareiss elimination over integers obtained by
//! scaling every binary float to a common exponent.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::point::check_dims;

/// Values below this permanent may have lost accuracy to underflow.
const PERM_FLOOR: f64 = 1e-200;

#[inline]
pub(crate) fn error_factor(d: usize) -> f64 {
    let k = 2 * d + d * (d.saturating_sub(1)) / 2;
    k as f64 * f64::EPSILON
}

/// Minor table of the top `m` rows of a row-major `m × d` matrix.
///
/// `det[mask]` is the determinant of rows `0..popcount(mask)` restricted to
/// the columns in `mask`; `perm[mask]` is the matching permanent of absolute
/// values. Only masks with `popcount ≤ m` are filled.
pub(crate) fn minor_table(rows: &[f64], m: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let size = 1usize << d;
    let mut det = vec![0.0; size];
    let mut perm = vec![0.0; size];
    minor_table_into(rows, m, d, &mut det, &mut perm);
    (det, perm)
}

/// [`minor_table`] into caller-provided buffers of length `2^d`.
pub(crate) fn minor_table_into(rows: &[f64], m: usize, d: usize, det: &mut [f64], perm: &mut [f64]) {
    match d {
        2 => minor_kernel::<2>(rows, m, det, perm),
        3 => minor_kernel::<3>(rows, m, det, perm),
        4 => minor_kernel::<4>(rows, m, det, perm),
        5 => minor_kernel::<5>(rows, m, det, perm),
        6 => minor_kernel::<6>(rows, m, det, perm),
        _ => minor_dyn(rows, m, d, det, perm),
    }
}

// Fixed-width copy of `minor_dyn` so small dimensions get unrolled loops.
#[inline(always)]
fn minor_kernel<const D: usize>(rows: &[f64], m: usize, det: &mut [f64], perm: &mut [f64]) {
    let det = &mut det[..1 << D];
    let perm = &mut perm[..1 << D];
    let rows = &rows[..m * D];
    det[0] = 1.0;
    perm[0] = 1.0;
    for mask in 1..(1usize << D) {
        let r = mask.count_ones() as usize;
        if r > m {
            continue;
        }
        let row = &rows[(r - 1) * D..r * D];
        let mut acc = 0.0;
        let mut pacc = 0.0;
        let mut sign = if (r - 1) % 2 == 1 { -1.0 } else { 1.0 };
        for j in 0..D {
            if mask & (1 << j) != 0 {
                let sub = mask ^ (1 << j);
                acc += sign * row[j] * det[sub];
                pacc += row[j].abs() * perm[sub];
                sign = -sign;
            }
        }
        det[mask] = acc;
        perm[mask] = pacc;
    }
}

fn minor_dyn(rows: &[f64], m: usize, d: usize, det: &mut [f64], perm: &mut [f64]) {
    let size = 1usize << d;
    det[0] = 1.0;
    perm[0] = 1.0;
    for mask in 1..size {
        let r = mask.count_ones() as usize;
        if r > m {
            continue;
        }
        let row = &rows[(r - 1) * d..r * d];
        let mut acc = 0.0;
        let mut pacc = 0.0;
        let mut odd = (r - 1) % 2 == 1;
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let sub = mask ^ (1 << j);
            let term = row[j] * det[sub];
            if odd {
                acc -= term;
            } else {
                acc += term;
            }
            pacc += row[j].abs() * perm[sub];
            odd = !odd;
        }
        det[mask] = acc;
        perm[mask] = pacc;
    }
}

/// Writes last-row cofactors into `out[..d]` and their permanents into
/// `out[d..2d]`, using `det`/`perm` (length `2^d`) as scratch.
pub(crate) fn last_row_cofactors_into(rows: &[f64], d: usize, out: &mut [f64], det: &mut [f64], perm: &mut [f64]) {
    match d {
        3 => return cofactors3(rows, out),
        4 => return cofactors4(rows, out),
        _ => {}
    }
    minor_table_into(rows, d - 1, d, det, perm);
    let full = (1usize << d) - 1;
    for j in 0..d {
        let sub = full ^ (1 << j);
        out[j] = if (d - 1 + j) % 2 == 0 { det[sub] } else { -det[sub] };
        out[d + j] = perm[sub];
    }
}

// Unrolled forms of the minor-table expansion for d = 3 and d = 4, with
// the same operation order so results agree bit for bit.

#[inline]
fn minor2(a: &[f64], b: &[f64], i: usize, j: usize) -> (f64, f64) {
    (a[i] * b[j] - a[j] * b[i], (a[i] * b[j]).abs() + (a[j] * b[i]).abs())
}

fn cofactors3(rows: &[f64], out: &mut [f64]) {
    let (a, b) = (&rows[0..3], &rows[3..6]);
    let (m12, p12) = minor2(a, b, 1, 2);
    let (m02, p02) = minor2(a, b, 0, 2);
    let (m01, p01) = minor2(a, b, 0, 1);
    out[0] = m12;
    out[1] = -m02;
    out[2] = m01;
    out[3] = p12;
    out[4] = p02;
    out[5] = p01;
}

fn cofactors4(rows: &[f64], out: &mut [f64]) {
    let (a, b, c) = (&rows[0..4], &rows[4..8], &rows[8..12]);
    let mut m = [[(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            m[i][j] = minor2(a, b, i, j);
        }
    }
    let tri = |i: usize, j: usize, k: usize| {
        let det = c[i] * m[j][k].0 - c[j] * m[i][k].0 + c[k] * m[i][j].0;
        let perm = c[i].abs() * m[j][k].1 + c[j].abs() * m[i][k].1 + c[k].abs() * m[i][j].1;
        (det, perm)
    };
    let (d123, p123) = tri(1, 2, 3);
    let (d023, p023) = tri(0, 2, 3);
    let (d013, p013) = tri(0, 1, 3);
    let (d012, p012) = tri(0, 1, 2);
    out[0] = -d123;
    out[1] = d023;
    out[2] = -d013;
    out[3] = d012;
    out[4] = p123;
    out[5] = p023;
    out[6] = p013;
    out[7] = p012;
}

/// Cofactors of the last row of a `d × d` matrix whose first `d-1` rows are
/// given: `det = Σ_j y_j · cof[j]`. Returns `(cof, perm)` where `perm[j]`
/// bounds the magnitude of the products feeding `cof[j]`.
pub(crate) fn last_row_cofactors(rows: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let size = 1usize << d;
    let (mut det, mut perm) = (vec![0.0; size], vec![0.0; size]);
    let mut out = vec![0.0; 2 * d];
    last_row_cofactors_into(rows, d, &mut out, &mut det, &mut perm);
    let cperm = out.split_off(d);
    (out, cperm)
}

/// Sign of `Σ y_j cof_j` if the float filter can certify it.
#[inline]
pub(crate) fn filtered_linear_sign(y: &[f64], cof: &[f64], perm: &[f64], factor: f64) -> Option<i8> {
    let mut val = 0.0;
    let mut mag = 0.0;
    for j in 0..y.len() {
        val += y[j] * cof[j];
        mag += y[j].abs() * perm[j];
    }
    let bound = factor * mag;
    if mag < PERM_FLOOR || !bound.is_finite() {
        return None;
    }
    if val > bound {
        Some(1)
    } else if val < -bound {
        Some(-1)
    } else {
        None
    }
}

/// Float-filter orientation. `None` means the filter could not certify the sign.
pub fn orientation_filtered<P: AsRef<[f64]>>(points: &[P]) -> Option<i8> {
    let d = points.len().checked_sub(1)?;
    if d == 0 {
        return Some(1);
    }
    let base = points[0].as_ref();
    let mut rows = Vec::with_capacity(d * d);
    for p in &points[1..] {
        rows.extend(p.as_ref().iter().zip(base).map(|(a, b)| a - b));
    }
    let (det, perm) = minor_table(&rows, d, d);
    let full = (1usize << d) - 1;
    let (v, p) = (det[full], perm[full]);
    let bound = error_factor(d) * p;
    if p < PERM_FLOOR || !bound.is_finite() {
        return None;
    }
    let s = if v > bound {
        1
    } else if v < -bound {
        -1
    } else {
        return None;
    };
    Some(if d % 2 == 0 { s } else { -s })
}

/// Splits a finite float into `(mantissa, exponent)` with `x = mantissa · 2^exponent`.
fn decompose(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_bits - 1075)
    };
    (if neg { -m } else { m }, e)
}

/// Converts a matrix of floats to integers sharing one power-of-two scale.
pub(crate) fn scale_to_integers(values: &[f64]) -> Vec<BigInt> {
    let parts: Vec<(i64, i32)> = values.iter().map(|&v| decompose(v)).collect();
    let emin = parts
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    parts
        .into_iter()
        .map(|(m, e)| {
            if m == 0 {
                BigInt::zero()
            } else {
                BigInt::from(m) << ((e - emin) as usize)
            }
        })
        .collect()
}

/// Sign of the determinant of a square integer matrix (Bareiss elimination).
pub(crate) fn bareiss_sign(mut a: Vec<BigInt>, n: usize) -> i8 {
    let mut sign = 1i8;
    let mut prev = BigInt::from(1);
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let last = &a[n * n - 1];
    if last.is_zero() {
        0
    } else if last.is_positive() {
        sign
    } else {
        -sign
    }
}

/// Exact orientation sign over the homogeneous `(d+1) × (d+1)` matrix.
pub fn orientation_exact<P: AsRef<[f64]>>(points: &[P]) -> i8 {
    let n = points.len();
    let mut vals = Vec::with_capacity(n * n);
    for p in points {
        vals.extend_from_slice(p.as_ref());
        vals.push(1.0);
    }
    bareiss_sign(scale_to_integers(&vals), n)
}

/// Exact sign of the orientation determinant of `d+1` points in `R^d`.
///
/// Returns `+1`, `0`, or `-1`; zero is reported for affinely dependent
/// points and never perturbed.
pub fn orientation<P: AsRef<[f64]>>(points: &[P]) -> Result<i8> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("orientation needs at least one point"));
    }
    let d = n - 1;
    check_dims(points, d)?;
    if points.iter().any(|p| p.as_ref().iter().any(|c| !c.is_finite())) {
        return Err(Error::NonFinite(None));
    }
    Ok(orientation_filtered(points).unwrap_or_else(|| orientation_exact(points)))
}

/// Exact affine dimension of a point set (`-1` for the empty set).
pub fn affine_rank<P: AsRef<[f64]>>(points: &[P]) -> isize {
    let m = points.len();
    if m == 0 {
        return -1;
    }
    let d = points[0].as_ref().len();
    let cols = d + 1;
    let mut vals = Vec::with_capacity(m * cols);
    for p in points {
        vals.extend_from_slice(p.as_ref());
        vals.push(1.0);
    }
    let mut a = scale_to_integers(&vals);
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(piv) = (rank..m).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        for j in 0..cols {
            a.swap(rank * cols + j, piv * cols + j);
        }
        for i in rank + 1..m {
            if a[i * cols + c].is_zero() {
                continue;
            }
            let f = a[i * cols + c].clone();
            let p = a[rank * cols + c].clone();
            for j in c..cols {
                let v = &a[i * cols + j] * &p - &a[rank * cols + j] * &f;
                a[i * cols + j] = v;
            }
        }
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank as isize - 1
}
