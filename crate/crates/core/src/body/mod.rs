//! Smooth convex bodies with positive curvature: balls and axis-aligned
//! ellipsoids.
//!
//! Each body provides its support function, boundary normals, a boundary
//! membership residual, a sampler uniform with respect to surface measure, and
//! Blaschke rolling radii. Caps `C(y, h) = ∂K ∩ {x : <x, u_y> ≥ h_K(u_y) - h}`
//! and metric boundary balls are measured exactly on balls and by Monte Carlo
//! on ellipsoids.

mod packing;
pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{dist, dot, norm, Point, UNIT_TOL};
use crate::rng::Stream;

pub use packing::{pack_disjoint_caps, CapPacking};

/// Tolerance on the defining-equation residual for boundary membership.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Surface area of the unit sphere `S^{m}` in `R^{m+1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    let k = (m + 1) as f64;
    2.0 * PI.powf(k / 2.0) / gamma(k / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexBodyModel {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
}

/// A value with a Monte Carlo standard error (zero for deterministic values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeRadii {
    pub r_in: f64,
    pub r_out: f64,
}

/// Non-solid cap `∂K ∩ H^+(u_y, h_K(u_y) - h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: Vec<f64>,
    pub normal: Vec<f64>,
    pub height: f64,
    pub threshold: f64,
}

/// Monte Carlo budget for ellipsoid area estimates.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

impl ConvexBodyModel {
    pub fn unit_ball(d: usize) -> Self {
        ConvexBodyModel::Ball {
            center: vec![0.0; d],
            radius: 1.0,
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let b = ConvexBodyModel::Ball { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        let b = ConvexBodyModel::Ellipsoid { semi_axes };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBodyModel::Ball { center, radius } => {
                if center.len() < 2 {
                    return Err(Error::invalid("ball dimension must be at least 2"));
                }
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("ball needs a finite center and positive radius"));
                }
            }
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                if semi_axes.len() < 2 {
                    return Err(Error::invalid("ellipsoid dimension must be at least 2"));
                }
                if semi_axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return Err(Error::invalid("ellipsoid semi-axes must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBodyModel::Ball { center, .. } => center.len(),
            ConvexBodyModel::Ellipsoid { semi_axes } => semi_axes.len(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexBodyModel::Ball { radius, .. } => 2.0 * radius,
            ConvexBodyModel::Ellipsoid { semi_axes } => 2.0 * semi_axes.iter().cloned().fold(0.0, f64::max),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `h_K(u) = sup_{x ∈ K} <x, u>` for a unit vector `u`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        let n = norm(u);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("support direction has norm {n}")));
        }
        Ok(self.support_unchecked(u))
    }

    pub(crate) fn support_unchecked(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBodyModel::Ball { center, radius } => dot(center, u) + radius,
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                semi_axes.iter().zip(u).map(|(a, v)| a * a * v * v).sum::<f64>().sqrt()
            }
        }
    }

    /// Residual of the defining equation: `‖x-c‖²/R² - 1` or `Σ x_i²/a_i² - 1`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBodyModel::Ball { center, radius } => {
                let r = dist(x, center);
                r * r / (radius * radius) - 1.0
            }
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                x.iter().zip(semi_axes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>() - 1.0
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.residual(x) <= 0.0
    }

    fn check_boundary(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        let r = self.residual(x);
        if !(r.abs() <= BOUNDARY_TOL) {
            return Err(Error::NotOnBoundary { residual: r });
        }
        Ok(())
    }

    /// Outward unit normal at a boundary point.
    pub fn boundary_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_boundary(x)?;
        Ok(self.normal_unchecked(x))
    }

    pub(crate) fn normal_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = match self {
            ConvexBodyModel::Ball { center, .. } => x.iter().zip(center).map(|(a, c)| a - c).collect(),
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                x.iter().zip(semi_axes).map(|(v, a)| v / (a * a)).collect()
            }
        };
        let n = norm(&g);
        g.into_iter().map(|v| v / n).collect()
    }

    /// A point uniform with respect to surface measure on `∂K`.
    pub fn sample_surface(&self, rng: &mut Stream) -> Point {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        Point {
            coords: out,
            index: None,
        }
    }

    /// Writes one boundary sample into `out`.
    ///
    /// Ellipsoids push a uniform sphere direction `u` through `u ↦ A u`, whose
    /// surface Jacobian is `det(A) ‖A⁻¹u‖`; accepting with probability
    /// `min_i a_i · ‖A⁻¹u‖ ≤ 1` makes the image uniform.
    pub fn sample_into(&self, rng: &mut Stream, out: &mut [f64]) {
        let d = self.dim();
        match self {
            ConvexBodyModel::Ball { center, radius } => {
                let u = rng.unit_vector(d);
                for i in 0..d {
                    out[i] = center[i] + radius * u[i];
                }
            }
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                let amin = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
                loop {
                    let u = rng.unit_vector(d);
                    let w = u.iter().zip(semi_axes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>().sqrt();
                    if rng.uniform() < amin * w {
                        for i in 0..d {
                            out[i] = semi_axes[i] * u[i];
                        }
                        return;
                    }
                }
            }
        }
    }

    /// `n` boundary samples as a flat row-major coordinate vector.
    pub fn sample_flat(&self, rng: &mut Stream, n: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; n * d];
        for chunk in out.chunks_mut(d) {
            self.sample_into(rng, chunk);
        }
        out
    }

    pub fn sample_points(&self, rng: &mut Stream, n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let mut p = self.sample_surface(rng);
                p.index = Some(i);
                p
            })
            .collect()
    }

    /// `(r_in, r_out)`: balls of these radii roll freely inside `K` and
    /// contain `K` when tangent at any boundary point.
    pub fn blaschke_radii(&self) -> BlaschkeRadii {
        match self {
            ConvexBodyModel::Ball { radius, .. } => BlaschkeRadii {
                r_in: *radius,
                r_out: *radius,
            },
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                let amax = semi_axes.iter().cloned().fold(0.0, f64::max);
                let amin = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
                BlaschkeRadii {
                    r_in: amin * amin / amax,
                    r_out: amax * amax / amin,
                }
            }
        }
    }

    /// Total boundary measure `H^{d-1}(∂K)`.
    ///
    /// Ellipsoids integrate `det(A) ‖A⁻¹u‖` over the unit sphere with a
    /// tensor Gauss–Legendre rule.
    pub fn surface_area(&self) -> f64 {
        let d = self.dim();
        match self {
            ConvexBodyModel::Ball { radius, .. } => unit_sphere_area(d - 1) * radius.powi(d as i32 - 1),
            ConvexBodyModel::Ellipsoid { semi_axes } => {
                let det: f64 = semi_axes.iter().product();
                let budget = 2_000_000f64;
                let m = (budget.powf(1.0 / (d - 1) as f64).floor() as usize).clamp(8, 200);
                det * quadrature::sphere_integral(d, m, |u| {
                    u.iter().zip(semi_axes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>().sqrt()
                })
            }
        }
    }

    pub fn cap(&self, center: &[f64], height: f64) -> Result<Cap> {
        if !(height > 0.0) {
            return Err(Error::invalid(format!("cap height must be positive, got {height}")));
        }
        let normal = self.boundary_normal(center)?;
        let threshold = self.support_unchecked(&normal) - height;
        Ok(Cap {
            center: center.to_vec(),
            normal,
            height,
            threshold,
        })
    }

    pub fn cap_contains(&self, cap: &Cap, x: &[f64]) -> Result<bool> {
        self.check_boundary(x)?;
        Ok(dot(x, &cap.normal) >= cap.threshold)
    }

    /// Surface area of a cap. Exact quadrature on balls; Monte Carlo hit
    /// fraction times total area on ellipsoids.
    pub fn cap_area(&self, cap: &Cap, rng: &mut Stream, samples: usize) -> Result<Estimate> {
        if !(cap.height > 0.0) {
            return Err(Error::invalid("cap height must be positive"));
        }
        match self {
            ConvexBodyModel::Ball { radius, .. } => Ok(Estimate::exact(ball_cap_area(self.dim(), *radius, cap.height))),
            ConvexBodyModel::Ellipsoid { .. } => {
                Ok(self.hit_fraction(rng, samples, |x| dot(x, &cap.normal) >= cap.threshold))
            }
        }
    }

    /// `H^{d-1}(B(x, r) ∩ ∂K)`.
    pub fn boundary_ball_area(&self, x: &[f64], r: f64, rng: &mut Stream, samples: usize) -> Result<Estimate> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        self.check_boundary(x)?;
        match self {
            ConvexBodyModel::Ball { radius, .. } => {
                let d = self.dim();
                if r >= 2.0 * radius {
                    return Ok(Estimate::exact(self.surface_area()));
                }
                Ok(Estimate::exact(ball_cap_area(d, *radius, r * r / (2.0 * radius))))
            }
            ConvexBodyModel::Ellipsoid { .. } => {
                if r >= self.diameter() {
                    return Ok(Estimate::exact(self.surface_area()));
                }
                Ok(self.hit_fraction(rng, samples, |y| dist(x, y) <= r))
            }
        }
    }

    fn hit_fraction<F: Fn(&[f64]) -> bool>(&self, rng: &mut Stream, samples: usize, pred: F) -> Estimate {
        let d = self.dim();
        let mut buf = vec![0.0; d];
        let mut hits = 0usize;
        for _ in 0..samples {
            self.sample_into(rng, &mut buf);
            if pred(&buf) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let total = self.surface_area();
        Estimate {
            value: p * total,
            stderr: total * (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }
}

/// Spherical cap area `|S^{d-2}| R^{d-1} ∫_0^θ sin^{d-2} φ dφ` with
/// `cos θ = 1 - h/R`, by composite Gauss–Legendre quadrature.
pub fn ball_cap_area(d: usize, radius: f64, h: f64) -> f64 {
    if h >= 2.0 * radius {
        return unit_sphere_area(d - 1) * radius.powi(d as i32 - 1);
    }
    let theta = (1.0 - h / radius).clamp(-1.0, 1.0).acos();
    let integral = quadrature::integrate(|phi| phi.sin().powi(d as i32 - 2), 0.0, theta, 16, 20);
    unit_sphere_area(d - 2) * radius.powi(d as i32 - 1) * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta_reg;

    #[test]
    fn support_examples() {
        let b = ConvexBodyModel::unit_ball(3);
        assert_eq!(b.support(&[0.0, 0.6, 0.8]).unwrap(), 1.0);
        let e = ConvexBodyModel::ellipsoid(vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(e.support(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 2.0);
        let s = 0.5f64.sqrt();
        let v = e.support(&[s, s, 0.0, 0.0]).unwrap();
        // Oracle: maximize <x,u> over the surface on a dense angle grid.
        let mut best = f64::MIN;
        for i in 0..=200_000 {
            let t = 2.0 * PI * i as f64 / 200_000.0;
            best = best.max(s * 2.0 * t.cos() + s * t.sin());
        }
        assert!((v - best).abs() < 1e-9);
        assert!((v - 2.5f64.sqrt()).abs() < 1e-15);
        assert!(e.support(&[1.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn normal_examples() {
        let b = ConvexBodyModel::unit_ball(3);
        assert_eq!(b.boundary_normal(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let e = ConvexBodyModel::ellipsoid(vec![2.0, 1.0]).unwrap();
        assert_eq!(e.boundary_normal(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let x = [2f64.sqrt(), 0.5f64.sqrt()];
        let n = e.boundary_normal(&x).unwrap();
        // Finite-difference gradient of Σ x_i²/a_i².
        let f = |p: &[f64]| p[0] * p[0] / 4.0 + p[1] * p[1];
        let hstep = 1e-6;
        let gx = (f(&[x[0] + hstep, x[1]]) - f(&[x[0] - hstep, x[1]])) / (2.0 * hstep);
        let gy = (f(&[x[0], x[1] + hstep]) - f(&[x[0], x[1] - hstep])) / (2.0 * hstep);
        let gn = (gx * gx + gy * gy).sqrt();
        assert!((n[0] - gx / gn).abs() < 1e-8 && (n[1] - gy / gn).abs() < 1e-8);
        assert!((n[0] - 0.4472135955).abs() < 1e-9 && (n[1] - 0.894427191).abs() < 1e-9);
        assert!(matches!(e.boundary_normal(&[1.0, 0.0]), Err(Error::NotOnBoundary { .. })));
    }

    #[test]
    fn ball_samples_lie_on_sphere() {
        let b = ConvexBodyModel::ball(vec![1.0, -2.0, 0.5], 3.0).unwrap();
        let mut rng = Stream::new(1);
        for _ in 0..1000 {
            let p = b.sample_surface(&mut rng);
            assert!((dist(&p.coords, &[1.0, -2.0, 0.5]) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_and_arc() {
        let b = ConvexBodyModel::unit_ball(3);
        let mut rng = Stream::new(0);
        let cap = b.cap(&[0.0, 0.0, 1.0], 1.0).unwrap();
        let a = b.cap_area(&cap, &mut rng, 0).unwrap();
        assert!((a.value - 2.0 * PI).abs() < 1e-12 && a.stderr == 0.0);
        let c = ConvexBodyModel::unit_ball(2);
        let cap = c.cap(&[1.0, 0.0], 0.5).unwrap();
        let a = c.cap_area(&cap, &mut rng, 0).unwrap();
        assert!((a.value - 2.0 * PI / 3.0).abs() < 1e-12);
        let cap = b.cap(&[1.0, 0.0, 0.0], 2.0).unwrap();
        assert!((b.cap_area(&cap, &mut rng, 0).unwrap().value - 4.0 * PI).abs() < 1e-12);
        assert!(b.cap(&[1.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn ball_cap_matches_incomplete_beta() {
        // Oracle: A(h) = |S^{d-1}| R^{d-1} I_{s}((d-1)/2, 1/2) / 2, s = (2Rh - h²)/R², h ≤ R.
        for d in 2..=7 {
            for &(r, h) in &[(1.0, 0.1), (2.0, 0.7), (1.0, 1.0), (0.5, 0.01)] {
                let s = (2.0 * r * h - h * h) / (r * r);
                let oracle = 0.5 * unit_sphere_area(d - 1) * f64::powi(r, d as i32 - 1) * beta_reg((d as f64 - 1.0) / 2.0, 0.5, s);
                let got = ball_cap_area(d, r, h);
                assert!((got - oracle).abs() <= 1e-10 * oracle, "d={d} r={r} h={h}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn cap_membership() {
        let b = ConvexBodyModel::unit_ball(3);
        let cap = b.cap(&[0.0, 0.0, 1.0], 1.0).unwrap();
        assert!(b.cap_contains(&cap, &[0.0, 0.0, 1.0]).unwrap());
        let s = (1.0f64 - 0.04).sqrt();
        assert!(b.cap_contains(&cap, &[s, 0.0, 0.2]).unwrap());
        assert!(!b.cap_contains(&cap, &[s, 0.0, -0.2]).unwrap());
        let full = b.cap(&[0.0, 0.0, 1.0], 2.0).unwrap();
        assert!(b.cap_contains(&full, &[0.0, 0.0, -1.0]).unwrap());
    }

    #[test]
    fn boundary_ball_examples() {
        let b = ConvexBodyModel::unit_ball(3);
        let mut rng = Stream::new(0);
        let a = b.boundary_ball_area(&[0.0, 0.0, 1.0], 1.0, &mut rng, 0).unwrap();
        assert!((a.value - PI).abs() < 1e-12);
        let a = b.boundary_ball_area(&[0.0, 0.0, 1.0], 5.0, &mut rng, 0).unwrap();
        assert!((a.value - 4.0 * PI).abs() < 1e-12);
        assert!(b.boundary_ball_area(&[0.0, 0.0, 1.0], 0.0, &mut rng, 0).is_err());
    }

    #[test]
    fn blaschke_examples() {
        assert_eq!(ConvexBodyModel::unit_ball(3).blaschke_radii(), BlaschkeRadii { r_in: 1.0, r_out: 1.0 });
        let b = ConvexBodyModel::ball(vec![0.0; 4], 3.0).unwrap();
        assert_eq!(b.blaschke_radii(), BlaschkeRadii { r_in: 3.0, r_out: 3.0 });
        let e = ConvexBodyModel::ellipsoid(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(e.blaschke_radii(), BlaschkeRadii { r_in: 0.5, r_out: 4.0 });
    }

    #[test]
    fn ellipsoid_radii_from_curvature() {
        // Principal radii of curvature at axis endpoints via the second
        // fundamental form of the graph x_1 = a_1 sqrt(1 - Σ_{i>1} x_i²/a_i²).
        let a = [2.0, 1.0, 1.0];
        let hstep = 1e-4;
        let g = |y: f64| a[0] * (1.0 - y * y / (a[1] * a[1])).sqrt();
        let second = (g(hstep) - 2.0 * g(0.0) + g(-hstep)) / (hstep * hstep);
        let r_at_long_end = 1.0 / second.abs();
        // At (0, a_2, 0) along x_1: x_2 = a_2 sqrt(1 - x_1²/a_1²).
        let g2 = |y: f64| a[1] * (1.0 - y * y / (a[0] * a[0])).sqrt();
        let second2 = (g2(hstep) - 2.0 * g2(0.0) + g2(-hstep)) / (hstep * hstep);
        let r_at_short_end = 1.0 / second2.abs();
        let radii = ConvexBodyModel::ellipsoid(a.to_vec()).unwrap().blaschke_radii();
        assert!((r_at_long_end - radii.r_in).abs() < 1e-5);
        assert!((r_at_short_end - radii.r_out).abs() < 1e-4);
    }

    #[test]
    fn ellipsoid_area_matches_known_values() {
        // Prolate spheroid a=2, b=c=1: 2π b² (1 + a/(b e) asin e), e = sqrt(1 - b²/a²).
        let e = (1.0f64 - 0.25).sqrt();
        let expect = 2.0 * PI * (1.0 + 2.0 / e * e.asin());
        let got = ConvexBodyModel::ellipsoid(vec![2.0, 1.0, 1.0]).unwrap().surface_area();
        assert!((got - expect).abs() < 1e-9 * expect, "{got} vs {expect}");
        // Circle as a degenerate-free check in d = 2, and the unit 4-sphere.
        let c = ConvexBodyModel::ellipsoid(vec![1.0, 1.0]).unwrap().surface_area();
        assert!((c - 2.0 * PI).abs() < 1e-12);
        let s = ConvexBodyModel::ellipsoid(vec![1.0; 4]).unwrap().surface_area();
        assert!((s - 2.0 * PI * PI).abs() < 1e-10);
    }
}
