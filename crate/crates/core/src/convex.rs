//! Static geometry of smooth strictly convex bodies given by their support
//! function on a [`SphereGrid`].

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sphere::{axpy, scale, CoordDerivatives, ScalarField, SphereGrid, Sym2, Vec3};

/// Relative convexity threshold: `λ₁ > CONVEXITY_EPS · max λ_{n-1}`.
pub const CONVEXITY_EPS: f64 = 1e-8;

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// `G(λ) = (Πλᵢ)^{p/(n-1)}` with `n − 1 = λ.len()`.
pub fn speed_g(lambdas: &[f64], p: f64) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::Domain("speed_g needs at least one eigenvalue".into()));
    }
    if let Some(bad) = lambdas.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::Domain(format!("speed_g outside the positive cone: lambda = {bad}")));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("speed_g needs p > 0, got {p}")));
    }
    let product: f64 = lambdas.iter().product();
    Ok(product.powf(p / lambdas.len() as f64))
}

/// Radii-of-curvature matrix `𝔯ᵢⱼ = ∇̄ᵢ∇̄ⱼs + s ḡᵢⱼ` with its ḡ-eigenvalues.
#[derive(Clone, Debug)]
pub struct RadiiField {
    rank: usize,
    matrix: Vec<Sym2>,
    // eigenvalues, ascending, `rank` per node
    lambdas: Vec<f64>,
    det: Vec<f64>,
}

impl RadiiField {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.det.len()
    }

    pub fn is_empty(&self) -> bool {
        self.det.is_empty()
    }

    /// `𝔯` in the coordinate frame.
    pub fn matrix(&self) -> &[Sym2] {
        &self.matrix
    }

    pub fn eigenvalues(&self, k: usize) -> &[f64] {
        &self.lambdas[k * self.rank..(k + 1) * self.rank]
    }

    pub fn lambda_min(&self, k: usize) -> f64 {
        self.lambdas[k * self.rank]
    }

    pub fn lambda_max(&self, k: usize) -> f64 {
        self.lambdas[k * self.rank + self.rank - 1]
    }

    /// `S_{n-1} = det_ḡ 𝔯` per node.
    pub fn s_det(&self) -> &[f64] {
        &self.det
    }

    pub fn gauss_curvature(&self, k: usize) -> f64 {
        1.0 / self.det[k]
    }

    pub fn principal_curvatures(&self, k: usize) -> Vec<f64> {
        self.eigenvalues(k).iter().map(|l| 1.0 / l).collect()
    }

    pub fn mean_curvature(&self, k: usize) -> f64 {
        self.eigenvalues(k).iter().map(|l| 1.0 / l).sum()
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_lambda(&self) -> f64 {
        (0..self.len()).map(|k| self.lambda_min(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_lambda(&self) -> f64 {
        (0..self.len()).map(|k| self.lambda_max(k)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fails with [`Error::NonConvex`] at the worst node unless
    /// `λ₁ > CONVEXITY_EPS · max λ_{n-1}` everywhere.
    pub fn check_strict_convexity(&self) -> Result<()> {
        let threshold = CONVEXITY_EPS * self.max_lambda().max(0.0);
        let (node, lambda_min) = (0..self.len())
            .map(|k| (k, self.lambda_min(k)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if !(lambda_min > threshold) || !(threshold > 0.0) {
            return Err(Error::NonConvex {
                node,
                lambda_min,
                threshold,
            });
        }
        Ok(())
    }
}

/// Builds the radii field from samples and their precomputed derivatives
/// without checking convexity.
pub fn radii_from(grid: &SphereGrid, values: &[f64], d: &CoordDerivatives) -> RadiiField {
    let hess = grid.hessian_from(d);
    let rank = grid.ambient_dim() - 1;
    let mut matrix = Vec::with_capacity(hess.len());
    let mut lambdas = Vec::with_capacity(hess.len() * rank);
    let mut det = Vec::with_capacity(hess.len());
    for (k, h) in hess.iter().enumerate() {
        let s = values[k];
        if rank == 1 {
            let r = Sym2 {
                tt: h.tt + s,
                tp: 0.0,
                pp: 0.0,
            };
            lambdas.push(r.tt);
            det.push(r.tt);
            matrix.push(r);
        } else {
            let st = grid.sin_theta(k);
            let r = Sym2 {
                tt: h.tt + s,
                tp: h.tp,
                pp: h.pp + s * st * st,
            };
            // orthonormal-frame components
            let a = r.tt;
            let b = r.tp / st;
            let c = r.pp / (st * st);
            let mean = 0.5 * (a + c);
            let dev = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            lambdas.push(mean - dev);
            lambdas.push(mean + dev);
            det.push(a * c - b * b);
            matrix.push(r);
        }
    }
    RadiiField {
        rank,
        matrix,
        lambdas,
        det,
    }
}

/// `𝔯ᵢⱼ = ∇̄ᵢ∇̄ⱼ s + s ḡᵢⱼ`, failing if the body is not strictly convex.
pub fn radii_matrix(s: &ScalarField) -> Result<RadiiField> {
    let radii = radii_from(s.grid(), s.values(), &s.derivatives());
    radii.check_strict_convexity()?;
    Ok(radii)
}

/// A smooth strictly convex body containing the origin, with eagerly
/// computed caches.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    support: ScalarField,
    radii: RadiiField,
    gradient: Vec<Vec3>,
    grad_normsq: Vec<f64>,
    volume: f64,
    s_min: f64,
    s_max: f64,
    width_minus: f64,
    width_plus: f64,
    centroid: Vec3,
}

impl ConvexBody {
    pub fn new(support: ScalarField) -> Result<Self> {
        let d = support.derivatives();
        Self::with_derivatives(support, &d)
    }

    pub(crate) fn with_derivatives(support: ScalarField, d: &CoordDerivatives) -> Result<Self> {
        if let Some(k) = support.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "support function must be positive (origin interior); s = {} at node {k}",
                support.values()[k]
            )));
        }
        let grid = support.grid().clone();
        let radii = radii_from(&grid, support.values(), d);
        radii.check_strict_convexity()?;
        let gradient = grid.lifted_gradient_from(d);
        let grad_normsq = grid.gradient_normsq_from(d);
        let n = grid.ambient_dim();
        let s = support.values();
        let sv: Vec<f64> = s.iter().zip(radii.s_det()).map(|(a, b)| a * b).collect();
        let volume = grid.integrate(&sv) / n as f64;

        let mut width_minus = f64::INFINITY;
        let mut width_plus = f64::NEG_INFINITY;
        for k in 0..grid.len() {
            let w = s[k] + s[grid.antipode(k)];
            width_minus = width_minus.min(w);
            width_plus = width_plus.max(w);
        }

        let mut moment = [0.0; 3];
        for (k, z) in grid.nodes().iter().enumerate() {
            let x = axpy(s[k], z, &gradient[k]);
            let wk = grid.weights()[k] * sv[k];
            moment = axpy(wk, &x, &moment);
        }
        let centroid = scale(1.0 / ((n as f64 + 1.0) * volume), &moment);

        Ok(ConvexBody {
            s_min: support.min(),
            s_max: support.max(),
            support,
            radii,
            gradient,
            grad_normsq,
            volume,
            width_minus,
            width_plus,
            centroid,
        })
    }

    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        Self::new(ScalarField::from_fn(grid, f)?)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.support.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().ambient_dim()
    }

    pub fn support(&self) -> &ScalarField {
        &self.support
    }

    pub fn radii(&self) -> &RadiiField {
        &self.radii
    }

    /// `∇̄s` lifted to R^n per node.
    pub fn gradient(&self) -> &[Vec3] {
        &self.gradient
    }

    /// `|∇̄s|²` per node.
    pub fn gradient_normsq(&self) -> &[f64] {
        &self.grad_normsq
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// `(ω₋, ω₊)`: extrema of `s(z) + s(−z)`.
    pub fn widths(&self) -> (f64, f64) {
        (self.width_minus, self.width_plus)
    }

    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    /// Boundary points `x = s z + ∇̄s`, the inverse Gauss map at each node.
    pub fn boundary_points(&self) -> Vec<Vec3> {
        let s = self.support.values();
        self.grid()
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, z)| axpy(s[k], z, &self.gradient[k]))
            .collect()
    }

    /// `aK` for `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(self.support.map(|v| a * v)?)
    }

    /// `K + v`, whose support is `s + ⟨v, z⟩`.
    pub fn translated(&self, v: &Vec3) -> Result<Self> {
        let values = self
            .support
            .values()
            .iter()
            .zip(self.grid().nodes())
            .map(|(s, z)| s + crate::sphere::dot(v, z))
            .collect();
        Self::new(ScalarField::new(self.grid().clone(), values)?)
    }
}

pub fn boundary_points(body: &ConvexBody) -> Vec<Vec3> {
    body.boundary_points()
}

pub fn volume(body: &ConvexBody) -> f64 {
    body.volume()
}

/// `(ω₋, ω₊, centroid)`.
pub fn widths_and_centroid(body: &ConvexBody) -> (f64, f64, Vec3) {
    let (lo, hi) = body.widths();
    (lo, hi, body.centroid())
}

/// Support function of an origin-centered ellipsoid with semi-axes `axes`.
pub fn ellipsoid_support(axes: &[f64], z: &Vec3) -> f64 {
    axes.iter()
        .zip(z)
        .map(|(a, zi)| a * a * zi * zi)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{build_grid, dot, norm};

    fn circle(n: usize) -> Arc<SphereGrid> {
        build_grid(2, &[n]).unwrap()
    }

    #[test]
    fn ball_radii_are_exact() {
        for (g, r) in [(circle(64), 1.7), (build_grid(3, &[16, 32]).unwrap(), 0.6)] {
            let n = g.ambient_dim();
            let body = ConvexBody::from_fn(g.clone(), |_| r).unwrap();
            for k in 0..g.len() {
                for l in body.radii().eigenvalues(k) {
                    assert!((l - r).abs() < 1e-10 * r);
                }
                let s = body.radii().s_det()[k];
                assert!((s - r.powi(n as i32 - 1)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn translated_ball_keeps_curvature() {
        let v = [0.2, -0.1, 0.15];
        let g = build_grid(3, &[32, 64]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| 1.0 + dot(&v, z)).unwrap();
        let err = body
            .radii()
            .s_det()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");

        let c = circle(128);
        let v2 = [0.3, 0.2, 0.0];
        let body = ConvexBody::from_fn(c, |z| 2.0 + dot(&v2, z)).unwrap();
        for s in body.radii().s_det() {
            assert!((s - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ellipse_radius_of_curvature_matches_parametric_curve() {
        // Parametric oracle: (a cos u, b sin u) has radius of curvature
        // (a² sin²u + b² cos²u)^{3/2} / (ab) at normal angle θ with
        // tan θ = (a/b) tan u.
        let (a, b) = (1.0, 2.0);
        let g = circle(256);
        let body = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&[a, b], z)).unwrap();
        for (k, c) in g.coords().iter().enumerate() {
            let theta = c[0];
            let u = (b * theta.sin()).atan2(a * theta.cos());
            let rho = (a * a * u.sin().powi(2) + b * b * u.cos().powi(2)).powf(1.5) / (a * b);
            assert!((body.radii().lambda_min(k) - rho).abs() < 1e-9, "node {k}");
        }
        assert!((body.radii().lambda_min(0) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn non_convex_support_is_rejected() {
        let g = circle(64);
        let s = ScalarField::from_fn(g, |z| {
            let t = z[1].atan2(z[0]);
            1.0 + 0.2 * (3.0 * t).cos()
        })
        .unwrap();
        match radii_matrix(&s) {
            Err(Error::NonConvex { lambda_min, .. }) => assert!(lambda_min < 0.0),
            other => panic!("expected NonConvex, got {other:?}"),
        }
        let negative = ScalarField::constant(circle(32), -1.0).unwrap();
        assert!(ConvexBody::new(negative).is_err());
    }

    #[test]
    fn speed_g_values_and_domain() {
        assert_eq!(speed_g(&[1.0, 1.0], 0.7).unwrap(), 1.0);
        assert!((speed_g(&[2.0, 8.0], 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(speed_g(&[1.0, 0.0], 0.5).is_err());
        assert!(speed_g(&[1.0, -2.0], 0.5).is_err());
        assert!(speed_g(&[1.0], 0.0).is_err());
    }

    #[test]
    fn boundary_points_of_balls() {
        let g = circle(64);
        let v = [0.25, -0.4, 0.0];
        let body = ConvexBody::from_fn(g.clone(), |z| 1.5 + dot(&v, z)).unwrap();
        for (z, x) in g.nodes().iter().zip(body.boundary_points()) {
            let expect = axpy(1.5, z, &v);
            assert!(norm(&[x[0] - expect[0], x[1] - expect[1], 0.0]) < 1e-12);
        }
        for (k, x) in body.boundary_points().iter().enumerate() {
            let s = body.support().values()[k];
            assert!((dot(x, x) - (s * s + body.gradient_normsq()[k])).abs() <= 1e-10);
        }
    }

    #[test]
    fn volumes_of_reference_bodies() {
        let ball2 = ConvexBody::from_fn(circle(64), |_| 1.3).unwrap();
        assert!((ball2.volume() - PI * 1.3 * 1.3).abs() < 1e-10);
        let ball3 = ConvexBody::from_fn(build_grid(3, &[64, 128]).unwrap(), |_| 0.8).unwrap();
        assert!((ball3.volume() - 4.0 / 3.0 * PI * 0.512).abs() < 1e-6);
        let ellipse = ConvexBody::from_fn(circle(256), |z| ellipsoid_support(&[1.0, 2.0], z)).unwrap();
        assert!((ellipse.volume() - 2.0 * PI).abs() < 1e-10);
        let ell3 = ConvexBody::from_fn(build_grid(3, &[64, 128]).unwrap(), |z| {
            ellipsoid_support(&[1.0, 1.2, 1.5], z)
        })
        .unwrap();
        assert!((ell3.volume() / (4.0 / 3.0 * PI * 1.8) - 1.0).abs() < 1e-3);
        let scaled = ellipse.scaled(1.7).unwrap();
        assert!((scaled.volume() - 1.7f64.powi(2) * ellipse.volume()).abs() < 1e-12 * scaled.volume());
    }

    #[test]
    fn widths_and_centroids() {
        let g = circle(128);
        let ball = ConvexBody::from_fn(g.clone(), |_| 0.9).unwrap();
        let (lo, hi, b) = widths_and_centroid(&ball);
        assert!((lo - 1.8).abs() < 1e-14 && (hi - 1.8).abs() < 1e-14);
        assert!(norm(&b) < 1e-14);

        let v = [0.3, 0.1, 0.0];
        let tb = ball.translated(&v).unwrap();
        let (lo, hi, b) = widths_and_centroid(&tb);
        assert!((lo - 1.8).abs() < 1e-12 && (hi - 1.8).abs() < 1e-12);
        assert!((b[0] - 0.3).abs() < 1e-8 && (b[1] - 0.1).abs() < 1e-8);

        let ellipse = ConvexBody::from_fn(g, |z| ellipsoid_support(&[1.0, 2.0], z)).unwrap();
        let (lo, hi, b) = widths_and_centroid(&ellipse);
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
        assert!(norm(&b) < 1e-12);

        let g3 = build_grid(3, &[32, 64]).unwrap();
        let v3 = [0.1, -0.2, 0.3];
        let tb3 = ConvexBody::from_fn(g3, |z| 1.0 + dot(&v3, z)).unwrap();
        let b3 = tb3.centroid();
        for c in 0..3 {
            assert!((b3[c] - v3[c]).abs() < 1e-4);
        }
    }

    #[test]
    fn mean_curvature_and_product_identity() {
        let g = build_grid(3, &[32, 64]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&[1.0, 1.2, 1.5], z)).unwrap();
        let r = body.radii();
        for k in 0..g.len() {
            let l = r.eigenvalues(k);
            assert!(l[0] <= l[1]);
            assert!((r.s_det()[k] - l[0] * l[1]).abs() <= 1e-10 * r.s_det()[k]);
            assert!((r.mean_curvature(k) - (1.0 / l[0] + 1.0 / l[1])).abs() < 1e-12);
        }
    }
}
