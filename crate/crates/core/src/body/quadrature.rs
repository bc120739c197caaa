//! Deterministic quadrature rules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_m`).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of order `m`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, m: usize) -> f64 {
    let (xs, ws) = gauss_legendre(m);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `∫_{S^{d-1}} f dσ` in hyperspherical coordinates: Gauss–Legendre in each
/// polar angle and the trapezoid rule in the azimuth, `m` nodes per angle.
pub fn sphere_integral<F: Fn(&[f64]) -> f64>(d: usize, m: usize, f: F) -> f64 {
    assert!(d >= 2);
    let (gx, gw) = gauss_legendre(m);
    // Polar angles on [0, π].
    let polar: Vec<(f64, f64)> = gx.iter().zip(&gw).map(|(x, w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w)).collect();
    let az_n = 2 * m;
    let az: Vec<f64> = (0..az_n).map(|i| 2.0 * PI * i as f64 / az_n as f64).collect();
    let az_w = 2.0 * PI / az_n as f64;

    let levels = d - 2;
    let mut idx = vec![0usize; levels];
    let mut u = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        let mut sprod = 1.0;
        for (l, &i) in idx.iter().enumerate() {
            let (phi, w) = polar[i];
            let (s, c) = phi.sin_cos();
            u[l] = sprod * c;
            weight *= w * s.powi((levels - l) as i32);
            sprod *= s;
        }
        let mut inner = 0.0;
        for &theta in &az {
            let (s, c) = theta.sin_cos();
            u[d - 2] = sprod * c;
            u[d - 1] = sprod * s;
            inner += f(&u);
        }
        total += weight * inner * az_w;

        let mut l = levels;
        loop {
            if l == 0 {
                return total;
            }
            l -= 1;
            idx[l] += 1;
            if idx[l] < m {
                break;
            }
            idx[l] = 0;
        }
    }
}
