//! Polar duality: radial functions, the polar body `K°`, and the
//! Kaltenbach curvature identity between `K` and `K°`.
//!
//! The radial function is sampled by inverting the direction map
//! `z ↦ x(z)/|x(z)|` of the boundary points `x = s z + ∇̄s`. On S¹ the
//! boundary directions are strictly increasing in angle and `r` is
//! reconstructed by quintic Hermite interpolation: the slope
//! `r'(α) = r tan(α − θ)` comes from the normal and `r''` from the curvature. On S² the inverse is found by
//! Newton iteration on the interpolated boundary-point field.

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::{dot, norm, normalize, scale, ScalarField, SphereGrid, Vec3};

use std::f64::consts::PI;

/// Tolerance on `⟨x, x°⟩ = 1` before the Kaltenbach product is trusted.
pub const PAIRING_TOL: f64 = 1e-6;

/// Radial function `r` of the body on the body's own grid: `r(u) u ∈ ∂K`.
pub fn support_to_radial(body: &ConvexBody) -> Result<ScalarField> {
    let grid = body.grid().clone();
    let points = body.boundary_points();
    let values = match grid.ambient_dim() {
        2 => radial_circle(&grid, &points, body)?,
        _ => radial_sphere(&grid, &points)?,
    };
    ScalarField::new(grid, values)
}

fn radial_circle(grid: &SphereGrid, points: &[Vec3], body: &ConvexBody) -> Result<Vec<f64>> {
    let n = grid.len();
    let mut alpha: Vec<f64> = Vec::with_capacity(n + 1);
    let mut radius = Vec::with_capacity(n + 1);
    let mut slope = Vec::with_capacity(n + 1);
    let mut second = Vec::with_capacity(n + 1);
    for (k, x) in points.iter().enumerate() {
        let a = x[1].atan2(x[0]);
        let a = match alpha.last() {
            None => a,
            Some(&prev) => {
                let step = (a - prev).rem_euclid(2.0 * PI);
                if !(step > 0.0 && step < PI) {
                    return Err(Error::InterpolationFailure(format!(
                        "boundary directions are not increasing at node {k}"
                    )));
                }
                prev + step
            }
        };
        let r = norm(x);
        let theta = grid.coords()[k][0];
        let dr = r * (a - theta).tan();
        // polar-curve curvature κ = (r² + 2r'² − r r'')/(r² + r'²)^{3/2}
        let kappa = 1.0 / body.radii().lambda_min(k);
        let q = r * r + dr * dr;
        alpha.push(a);
        radius.push(r);
        slope.push(dr);
        second.push((r * r + 2.0 * dr * dr - kappa * q * q.sqrt()) / r);
    }
    let span = alpha[n - 1] - alpha[0];
    if !(span < 2.0 * PI) {
        return Err(Error::InterpolationFailure(
            "boundary directions wind more than once".into(),
        ));
    }
    alpha.push(alpha[0] + 2.0 * PI);
    radius.push(radius[0]);
    slope.push(slope[0]);
    second.push(second[0]);

    let values = grid
        .coords()
        .iter()
        .map(|c| {
            let t = alpha[0] + (c[0] - alpha[0]).rem_euclid(2.0 * PI);
            let k = match alpha[..n].binary_search_by(|a| a.total_cmp(&t)) {
                Ok(k) => k,
                Err(k) => k - 1,
            };
            hermite5(
                alpha[k],
                alpha[k + 1],
                [radius[k], slope[k], second[k]],
                [radius[k + 1], slope[k + 1], second[k + 1]],
                t,
            )
        })
        .collect();
    Ok(values)
}

/// Quintic Hermite interpolant through `(f, f', f'')` at both ends.
fn hermite5(x0: f64, x1: f64, left: [f64; 3], right: [f64; 3], x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h01 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h02 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h10 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h12 = 0.5 * (t3 - 2.0 * t4 + t5);
    left[0] * h00
        + h * left[1] * h01
        + h * h * left[2] * h02
        + right[0] * h10
        + h * right[1] * h11
        + h * h * right[2] * h12
}

/// Orthonormal pair spanning the tangent plane at unit `z`.
fn tangent_basis(z: &Vec3) -> (Vec3, Vec3) {
    let helper = if z[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&helper, z);
    let e1 = normalize(&[helper[0] - d * z[0], helper[1] - d * z[1], helper[2] - d * z[2]]);
    let e2 = [
        z[1] * e1[2] - z[2] * e1[1],
        z[2] * e1[0] - z[0] * e1[2],
        z[0] * e1[1] - z[1] * e1[0],
    ];
    (e1, e2)
}

fn radial_sphere(grid: &SphereGrid, points: &[Vec3]) -> Result<Vec<f64>> {
    let comps: [Vec<f64>; 3] = [
        points.iter().map(|x| x[0]).collect(),
        points.iter().map(|x| x[1]).collect(),
        points.iter().map(|x| x[2]).collect(),
    ];
    let eval = |z: &Vec3| -> Vec3 {
        let mut x = [0.0; 3];
        for (k, w) in grid.stencil(z) {
            x[0] += w * comps[0][k];
            x[1] += w * comps[1][k];
            x[2] += w * comps[2][k];
        }
        x
    };
    let direction = |z: &Vec3| normalize(&eval(z));

    let mut out = Vec::with_capacity(grid.len());
    for (k, target) in grid.nodes().iter().enumerate() {
        let (t1, t2) = tangent_basis(target);
        let residual = |u: &Vec3| [dot(u, &t1), dot(u, &t2)];
        let mut z = *target;
        let mut converged = false;
        for _ in 0..50 {
            let u = direction(&z);
            let res = residual(&u);
            if dot(&u, target) > 0.0 && res[0].hypot(res[1]) < 1e-14 {
                converged = true;
                break;
            }
            let (f1, f2) = tangent_basis(&z);
            let delta = 1e-6;
            let column = |f: &Vec3| {
                let plus = residual(&direction(&normalize(&[
                    z[0] + delta * f[0],
                    z[1] + delta * f[1],
                    z[2] + delta * f[2],
                ])));
                let minus = residual(&direction(&normalize(&[
                    z[0] - delta * f[0],
                    z[1] - delta * f[1],
                    z[2] - delta * f[2],
                ])));
                [(plus[0] - minus[0]) / (2.0 * delta), (plus[1] - minus[1]) / (2.0 * delta)]
            };
            let (c1, c2) = (column(&f1), column(&f2));
            let det = c1[0] * c2[1] - c2[0] * c1[1];
            if !(det.abs() > 1e-14) {
                break;
            }
            let a1 = (-res[0] * c2[1] + c2[0] * res[1]) / det;
            let a2 = (-c1[0] * res[1] + c1[1] * res[0]) / det;
            let len = a1.hypot(a2);
            let damp = if len > 0.5 { 0.5 / len } else { 1.0 };
            z = normalize(&[
                z[0] + damp * (a1 * f1[0] + a2 * f2[0]),
                z[1] + damp * (a1 * f1[1] + a2 * f2[1]),
                z[2] + damp * (a1 * f1[2] + a2 * f2[2]),
            ]);
            if len < 1e-15 {
                converged = true;
                break;
            }
        }
        let x = eval(&z);
        let u = normalize(&x);
        let res = residual(&u);
        if !converged && res[0].hypot(res[1]) > 1e-10 {
            return Err(Error::InterpolationFailure(format!(
                "direction inversion did not converge at node {k} (residual {:e})",
                res[0].hypot(res[1])
            )));
        }
        out.push(dot(&x, target));
    }
    Ok(out)
}

/// `K° = {y : ⟨x, y⟩ ≤ 1 ∀x ∈ K}`, with support `1/r_K`.
pub fn polar_dual(body: &ConvexBody) -> Result<ConvexBody> {
    let r = support_to_radial(body)?;
    ConvexBody::new(r.map(|v| 1.0 / v)?)
}

/// Result of the Kaltenbach identity check.
#[derive(Clone, Copy, Debug)]
pub struct KaltenbachReport {
    /// `max |(𝒦/s^{n+1})(x) · (𝒦°/s°^{n+1})(x°) − 1|` over nodes.
    pub max_defect: f64,
    /// `max |⟨x, x°⟩ − 1|` over nodes.
    pub max_pairing_error: f64,
}

/// Checks `(𝒦/s^{n+1})(x) · (𝒦°/s°^{n+1})(x°) = 1` at every node of `K`,
/// pairing `x(z)` with the point of `∂K°` whose normal is `x/|x|`.
pub fn kaltenbach_check(body: &ConvexBody) -> Result<KaltenbachReport> {
    let dual = polar_dual(body)?;
    kaltenbach_with_dual(body, &dual)
}

pub fn kaltenbach_with_dual(body: &ConvexBody, dual: &ConvexBody) -> Result<KaltenbachReport> {
    let n = body.dim() as i32;
    let dgrid = dual.grid();
    let ds = dual.support().values();
    let dual_ratio: Vec<f64> = ds
        .iter()
        .zip(dual.radii().s_det())
        .map(|(s, sd)| 1.0 / (sd * s.powi(n + 1)))
        .collect();
    let dual_points = dual.boundary_points();

    let s = body.support().values();
    let mut max_defect: f64 = 0.0;
    let mut max_pairing: f64 = 0.0;
    for (k, x) in body.boundary_points().iter().enumerate() {
        let nu = scale(1.0 / norm(x), x);
        let mut ratio = 0.0;
        let mut x_dual = [0.0; 3];
        for (j, w) in dgrid.stencil(&nu) {
            ratio += w * dual_ratio[j];
            for c in 0..3 {
                x_dual[c] += w * dual_points[j][c];
            }
        }
        let pairing = (dot(x, &x_dual) - 1.0).abs();
        max_pairing = max_pairing.max(pairing);
        if pairing > PAIRING_TOL {
            return Err(Error::Domain(format!(
                "Kaltenbach pairing <x, x°> = 1 violated by {pairing:e} at node {k}"
            )));
        }
        let primal = body.radii().gauss_curvature(k) / s[k].powi(n + 1);
        max_defect = max_defect.max((primal * ratio - 1.0).abs());
    }
    Ok(KaltenbachReport {
        max_defect,
        max_pairing_error: max_pairing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ellipsoid_support;
    use crate::sphere::build_grid;

    #[test]
    fn ball_duals_to_reciprocal_ball() {
        for g in [build_grid(2, &[64]).unwrap(), build_grid(3, &[16, 32]).unwrap()] {
            let body = ConvexBody::from_fn(g, |_| 2.0).unwrap();
            let r = support_to_radial(&body).unwrap();
            assert!(r.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
            let d = polar_dual(&body).unwrap();
            assert!(d.support().values().iter().all(|v| (v - 0.5).abs() < 1e-12));
            let k = kaltenbach_check(&body).unwrap();
            assert!(k.max_defect < 1e-10, "{}", k.max_defect);
        }
    }

    #[test]
    fn ellipse_radial_function() {
        let (a, b) = (1.0, 2.0);
        let g = build_grid(2, &[512]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&[a, b], z)).unwrap();
        let r = support_to_radial(&body).unwrap();
        let err = g
            .coords()
            .iter()
            .zip(r.values())
            .map(|(c, v)| {
                let t = c[0];
                let exact = (t.cos().powi(2) / (a * a) + t.sin().powi(2) / (b * b)).powf(-0.5);
                (v - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn translated_ball_radial_function() {
        // line–sphere intersection oracle
        let v = [0.3, -0.2, 0.0];
        let rr = 1.0;
        let g = build_grid(2, &[256]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| rr + dot(&v, z)).unwrap();
        let r = support_to_radial(&body).unwrap();
        for (u, val) in g.nodes().iter().zip(r.values()) {
            let vu = dot(&v, u);
            let exact = vu + (rr * rr - dot(&v, &v) + vu * vu).sqrt();
            assert!((val - exact).abs() < 1e-7);
        }

        let v3 = [0.1, 0.2, -0.25];
        let g3 = build_grid(3, &[32, 64]).unwrap();
        let body3 = ConvexBody::from_fn(g3.clone(), |z| rr + dot(&v3, z)).unwrap();
        let r3 = support_to_radial(&body3).unwrap();
        for (u, val) in g3.nodes().iter().zip(r3.values()) {
            let vu = dot(&v3, u);
            let exact = vu + (rr * rr - dot(&v3, &v3) + vu * vu).sqrt();
            assert!((val - exact).abs() < 1e-6, "{val} {exact}");
        }
    }

    #[test]
    fn ellipse_dual_is_reciprocal_ellipse() {
        let g = build_grid(2, &[512]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&[1.0, 2.0], z)).unwrap();
        let d = polar_dual(&body).unwrap();
        for (z, v) in g.nodes().iter().zip(d.support().values()) {
            assert!((v - ellipsoid_support(&[1.0, 0.5], z)).abs() < 1e-6);
        }
        let dd = polar_dual(&d).unwrap();
        assert!(dd.support().sup_distance(body.support()) <= 1e-5);
    }

    #[test]
    fn kaltenbach_on_ellipse_and_perturbation() {
        let g = build_grid(2, &[512]).unwrap();
        let body = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&[1.0, 2.0], z)).unwrap();
        let k = kaltenbach_check(&body).unwrap();
        assert!(k.max_defect <= 1e-4, "{}", k.max_defect);
        let pert = ConvexBody::from_fn(g, |z| {
            let t = z[1].atan2(z[0]);
            1.0 + 0.1 * (2.0 * t).cos()
        })
        .unwrap();
        let k = kaltenbach_check(&pert).unwrap();
        assert!(k.max_defect <= 1e-3, "{}", k.max_defect);
    }
}
