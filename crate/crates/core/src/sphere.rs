//! Discretizations of the unit circle S¹ and the unit sphere S².
//!
//! S¹ uses `N` equispaced nodes and discrete-Fourier differentiation. S² uses a
//! shifted latitude-longitude grid, `θ_i = (i+½)π/N_θ`, `φ_j = 2πj/N_φ`, so no
//! node sits on a pole. θ-stencils that reach past a pole read ghost values
//! through the reflection `f(−θ, φ) = f(θ, φ+π)`, which is why `N_φ` must be
//! even. Derivatives on S² are fourth-order central differences.
//!
//! Covariant quantities are expressed in the coordinate frame `(∂θ, ∂φ)` of the
//! round metric `ḡ = diag(1, sin²θ)` (S¹: `ḡ = 1`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Ambient vector. For n = 2 the third component is always zero.
pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &Vec3, y: &Vec3) -> Vec3 {
    [alpha * x[0] + y[0], alpha * x[1] + y[1], alpha * x[2] + y[2]]
}

pub fn scale(alpha: f64, x: &Vec3) -> Vec3 {
    [alpha * x[0], alpha * x[1], alpha * x[2]]
}

pub fn normalize(x: &Vec3) -> Vec3 {
    scale(1.0 / norm(x), x)
}

/// Grid size: `Circle(N)` for S¹, `Sphere { n_theta, n_phi }` for S².
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Circle(usize),
    Sphere { n_theta: usize, n_phi: usize },
}

impl Resolution {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Resolution::Circle(_) => 2,
            Resolution::Sphere { .. } => 3,
        }
    }

    /// The resolution with every dimension doubled.
    pub fn refined(&self) -> Resolution {
        match *self {
            Resolution::Circle(n) => Resolution::Circle(2 * n),
            Resolution::Sphere { n_theta, n_phi } => Resolution::Sphere {
                n_theta: 2 * n_theta,
                n_phi: 2 * n_phi,
            },
        }
    }

    /// Resolution counts as they appear in file headers.
    pub fn counts(&self) -> Vec<usize> {
        match *self {
            Resolution::Circle(n) => vec![n],
            Resolution::Sphere { n_theta, n_phi } => vec![n_theta, n_phi],
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Circle(n) => write!(f, "{n}"),
            Resolution::Sphere { n_theta, n_phi } => write!(f, "{n_theta}x{n_phi}"),
        }
    }
}

/// Symmetric 2-tensor in the coordinate frame. On S¹ only `tt` is used.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub tt: f64,
    pub tp: f64,
    pub pp: f64,
}

/// Partial derivatives of a field in intrinsic coordinates.
#[derive(Clone, Debug)]
pub struct CoordDerivatives {
    pub d_t: Vec<f64>,
    pub d_p: Vec<f64>,
    pub d_tt: Vec<f64>,
    pub d_tp: Vec<f64>,
    pub d_pp: Vec<f64>,
}

/// Immutable grid on S^{n-1}, n ∈ {2, 3}.
pub struct SphereGrid {
    resolution: Resolution,
    nodes: Vec<Vec3>,
    coords: Vec<[f64; 2]>,
    weights: Vec<f64>,
    h_theta: f64,
    h_phi: f64,
    // per-row sin θ and cos θ (S²) or per-node (S¹, unused)
    sin_row: Vec<f64>,
    cos_row: Vec<f64>,
    // largest retained azimuthal wavenumber per row for the polar filter
    filter_cutoff: Vec<usize>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("resolution", &self.resolution)
            .field("h_theta", &self.h_theta)
            .field("h_phi", &self.h_phi)
            .finish()
    }
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.resolution == other.resolution
    }
}

/// Builds a grid on S^{n-1}. `resolution` is `[N]` for n = 2 and
/// `[N_θ, N_φ]` for n = 3.
pub fn build_grid(n: usize, resolution: &[usize]) -> Result<Arc<SphereGrid>> {
    match (n, resolution) {
        (2, &[count]) => SphereGrid::circle(count),
        (3, &[n_theta, n_phi]) => SphereGrid::sphere(n_theta, n_phi),
        (2 | 3, _) => Err(Error::Config(format!(
            "n = {n} expects {} resolution value(s), got {}",
            n - 1,
            resolution.len()
        ))),
        _ => Err(Error::Config(format!(
            "unsupported ambient dimension n = {n} (only 2 and 3)"
        ))),
    }
}

impl SphereGrid {
    pub fn new(resolution: Resolution) -> Result<Arc<Self>> {
        match resolution {
            Resolution::Circle(n) => Self::circle(n),
            Resolution::Sphere { n_theta, n_phi } => Self::sphere(n_theta, n_phi),
        }
    }

    pub fn circle(count: usize) -> Result<Arc<Self>> {
        if count < 16 || !count.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "S1 resolution must be even and at least 16, got {count}"
            )));
        }
        let h = 2.0 * PI / count as f64;
        let coords: Vec<[f64; 2]> = (0..count).map(|k| [k as f64 * h, 0.0]).collect();
        let nodes = coords
            .iter()
            .map(|c| [c[0].cos(), c[0].sin(), 0.0])
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(SphereGrid {
            resolution: Resolution::Circle(count),
            nodes,
            coords,
            weights: vec![h; count],
            h_theta: h,
            h_phi: 0.0,
            sin_row: Vec::new(),
            cos_row: Vec::new(),
            filter_cutoff: Vec::new(),
            fft_forward: planner.plan_fft_forward(count),
            fft_inverse: planner.plan_fft_inverse(count),
        }))
    }

    pub fn sphere(n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        if n_theta < 16 || n_phi < 32 || !n_phi.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "S2 resolution needs N_theta >= 16 and even N_phi >= 32, got {n_theta}x{n_phi}"
            )));
        }
        let h_theta = PI / n_theta as f64;
        let h_phi = 2.0 * PI / n_phi as f64;
        let sin_row: Vec<f64> = (0..n_theta)
            .map(|i| ((i as f64 + 0.5) * h_theta).sin())
            .collect();
        let cos_row: Vec<f64> = (0..n_theta)
            .map(|i| ((i as f64 + 0.5) * h_theta).cos())
            .collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut coords = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * h_theta;
            for j in 0..n_phi {
                let phi = j as f64 * h_phi;
                coords.push([theta, phi]);
                nodes.push([
                    sin_row[i] * phi.cos(),
                    sin_row[i] * phi.sin(),
                    cos_row[i],
                ]);
                weights.push(sin_row[i] * h_theta * h_phi);
            }
        }
        // Midpoint weights rescaled so that Σw = 4π exactly.
        let raw: f64 = weights.iter().sum();
        let norm_factor = 4.0 * PI / raw;
        for w in &mut weights {
            *w *= norm_factor;
        }

        // Keep azimuthal mode m in row i only while its fourth-order
        // difference eigenvalue stays below the largest one at spacing h_min.
        let h_min = h_theta.min(h_phi);
        let symbol = |xi: f64| (30.0 - 32.0 * xi.cos() + 2.0 * (2.0 * xi).cos()) / 12.0;
        let limit = symbol(PI) / (h_min * h_min);
        let filter_cutoff = sin_row
            .iter()
            .map(|&s| {
                let mut cutoff = 0;
                for m in 0..=n_phi / 2 {
                    let eig = symbol(m as f64 * h_phi) / (h_phi * h_phi * s * s);
                    if eig <= 1.1 * limit {
                        cutoff = m;
                    } else {
                        break;
                    }
                }
                cutoff
            })
            .collect();

        let mut planner = FftPlanner::new();
        Ok(Arc::new(SphereGrid {
            resolution: Resolution::Sphere { n_theta, n_phi },
            nodes,
            coords,
            weights,
            h_theta,
            h_phi,
            sin_row,
            cos_row,
            filter_cutoff,
            fft_forward: planner.plan_fft_forward(n_phi),
            fft_inverse: planner.plan_fft_inverse(n_phi),
        }))
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn ambient_dim(&self) -> usize {
        self.resolution.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    /// Intrinsic coordinates `(θ, φ)` per node; `φ = 0` on S¹.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn h_theta(&self) -> f64 {
        self.h_theta
    }

    pub fn h_phi(&self) -> f64 {
        self.h_phi
    }

    /// Spacing entering the explicit time-step bound.
    pub fn h_min(&self) -> f64 {
        match self.resolution {
            Resolution::Circle(_) => self.h_theta,
            Resolution::Sphere { .. } => self.h_theta.min(self.h_phi),
        }
    }

    /// Surface area of S^{n-1}.
    pub fn area(&self) -> f64 {
        match self.resolution {
            Resolution::Circle(_) => 2.0 * PI,
            Resolution::Sphere { .. } => 4.0 * PI,
        }
    }

    /// Index of the node at `-z`.
    pub fn antipode(&self, k: usize) -> usize {
        match self.resolution {
            Resolution::Circle(n) => (k + n / 2) % n,
            Resolution::Sphere { n_theta, n_phi } => {
                let (i, j) = (k / n_phi, k % n_phi);
                (n_theta - 1 - i) * n_phi + (j + n_phi / 2) % n_phi
            }
        }
    }

    /// Orthonormal tangent frame `(e_θ, e_φ)` at node `k`. On S¹, `e_φ = 0`.
    pub fn tangent_frame(&self, k: usize) -> (Vec3, Vec3) {
        let [theta, phi] = self.coords[k];
        match self.resolution {
            Resolution::Circle(_) => ([-theta.sin(), theta.cos(), 0.0], [0.0; 3]),
            Resolution::Sphere { .. } => (
                [
                    theta.cos() * phi.cos(),
                    theta.cos() * phi.sin(),
                    -theta.sin(),
                ],
                [-phi.sin(), phi.cos(), 0.0],
            ),
        }
    }

    /// `sin θ` at node `k` (1 on S¹).
    pub fn sin_theta(&self, k: usize) -> f64 {
        match self.resolution {
            Resolution::Circle(_) => 1.0,
            Resolution::Sphere { n_phi, .. } => self.sin_row[k / n_phi],
        }
    }

    fn cos_theta(&self, k: usize) -> f64 {
        match self.resolution {
            Resolution::Circle(_) => 0.0,
            Resolution::Sphere { n_phi, .. } => self.cos_row[k / n_phi],
        }
    }

    /// Intrinsic coordinates of an arbitrary unit vector.
    pub fn coords_of(&self, z: &Vec3) -> [f64; 2] {
        match self.resolution {
            Resolution::Circle(_) => [z[1].atan2(z[0]).rem_euclid(2.0 * PI), 0.0],
            Resolution::Sphere { .. } => {
                let r = norm(z);
                [
                    (z[2] / r).clamp(-1.0, 1.0).acos(),
                    z[1].atan2(z[0]).rem_euclid(2.0 * PI),
                ]
            }
        }
    }

    /// Quadrature `Σ f·w`, summed in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| f * w)
            .sum()
    }

    /// First and second partial derivatives in intrinsic coordinates.
    pub fn derivatives(&self, values: &[f64]) -> CoordDerivatives {
        assert_eq!(values.len(), self.len(), "field/grid size mismatch");
        match self.resolution {
            Resolution::Circle(n) => {
                let (d_t, d_tt) = self.spectral_derivatives(values, n);
                CoordDerivatives {
                    d_t,
                    d_tt,
                    d_p: vec![0.0; n],
                    d_tp: vec![0.0; n],
                    d_pp: vec![0.0; n],
                }
            }
            Resolution::Sphere { n_theta, n_phi } => {
                let d_p = self.phi_derivative(values, n_theta, n_phi, false);
                let d_pp = self.phi_derivative(values, n_theta, n_phi, true);
                let d_t = self.theta_derivative(values, n_theta, n_phi, false);
                let d_tt = self.theta_derivative(values, n_theta, n_phi, true);
                let d_tp = self.theta_derivative(&d_p, n_theta, n_phi, false);
                CoordDerivatives {
                    d_t,
                    d_p,
                    d_tt,
                    d_tp,
                    d_pp,
                }
            }
        }
    }

    fn spectral_derivatives(&self, values: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut first: Vec<Complex<f64>> =
            values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft_forward.process(&mut first);
        let mut second = first.clone();
        for k in 0..n {
            let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            if 2 * k == n {
                first[k] = Complex::new(0.0, 0.0);
            } else {
                first[k] *= Complex::new(0.0, m);
            }
            second[k] *= -m * m;
        }
        self.fft_inverse.process(&mut first);
        self.fft_inverse.process(&mut second);
        let inv = 1.0 / n as f64;
        (
            first.iter().map(|c| c.re * inv).collect(),
            second.iter().map(|c| c.re * inv).collect(),
        )
    }

    fn phi_derivative(&self, f: &[f64], n_theta: usize, n_phi: usize, second: bool) -> Vec<f64> {
        let h = self.h_phi;
        let mut out = vec![0.0; f.len()];
        for i in 0..n_theta {
            let row = &f[i * n_phi..(i + 1) * n_phi];
            for j in 0..n_phi {
                let at = |o: isize| row[(j as isize + o).rem_euclid(n_phi as isize) as usize];
                out[i * n_phi + j] = if second {
                    (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h)
                } else {
                    (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
                };
            }
        }
        out
    }

    fn theta_derivative(
        &self,
        f: &[f64],
        n_theta: usize,
        n_phi: usize,
        second: bool,
    ) -> Vec<f64> {
        let h = self.h_theta;
        let mut out = vec![0.0; f.len()];
        for i in 0..n_theta {
            for j in 0..n_phi {
                let at = |o: isize| ghost_value(f, n_theta, n_phi, i as isize + o, j as isize);
                out[i * n_phi + j] = if second {
                    (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h)
                } else {
                    (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
                };
            }
        }
        out
    }

    /// Covariant Hessian `∇̄ᵢ∇̄ⱼ f` in the coordinate frame, from precomputed
    /// partial derivatives.
    pub fn hessian_from(&self, d: &CoordDerivatives) -> Vec<Sym2> {
        match self.resolution {
            Resolution::Circle(_) => d
                .d_tt
                .iter()
                .map(|&tt| Sym2 {
                    tt,
                    tp: 0.0,
                    pp: 0.0,
                })
                .collect(),
            Resolution::Sphere { .. } => (0..self.len())
                .map(|k| {
                    let (s, c) = (self.sin_theta(k), self.cos_theta(k));
                    Sym2 {
                        tt: d.d_tt[k],
                        tp: d.d_tp[k] - c / s * d.d_p[k],
                        pp: d.d_pp[k] + s * c * d.d_t[k],
                    }
                })
                .collect(),
        }
    }

    /// `|∇̄f|²_ḡ` from precomputed partial derivatives.
    pub fn gradient_normsq_from(&self, d: &CoordDerivatives) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let s = self.sin_theta(k);
                d.d_t[k] * d.d_t[k] + d.d_p[k] * d.d_p[k] / (s * s)
            })
            .collect()
    }

    /// `∇̄f` lifted to the ambient tangent space at each node.
    pub fn lifted_gradient_from(&self, d: &CoordDerivatives) -> Vec<Vec3> {
        (0..self.len())
            .map(|k| {
                let (e_t, e_p) = self.tangent_frame(k);
                let g_p = d.d_p[k] / self.sin_theta(k);
                [
                    d.d_t[k] * e_t[0] + g_p * e_p[0],
                    d.d_t[k] * e_t[1] + g_p * e_p[1],
                    d.d_t[k] * e_t[2] + g_p * e_p[2],
                ]
            })
            .collect()
    }

    /// Evaluates the grid samples at an arbitrary unit vector by local
    /// six-point Lagrange interpolation (tensor product in `(θ, φ)` on S²,
    /// with the pole reflection for out-of-range rows).
    pub fn interpolate(&self, values: &[f64], z: &Vec3) -> f64 {
        self.stencil(z).iter().map(|&(k, w)| w * values[k]).sum()
    }

    /// Node indices and weights of the interpolation stencil at `z`.
    pub fn stencil(&self, z: &Vec3) -> Vec<(usize, f64)> {
        const OFFSETS: [isize; 6] = [-2, -1, 0, 1, 2, 3];
        let [theta, phi] = self.coords_of(z);
        match self.resolution {
            Resolution::Circle(n) => {
                let u = theta / self.h_theta;
                let base = u.floor();
                let w = lagrange_weights(u - base);
                OFFSETS
                    .iter()
                    .zip(w)
                    .map(|(&o, wk)| ((base as isize + o).rem_euclid(n as isize) as usize, wk))
                    .collect()
            }
            Resolution::Sphere { n_theta, n_phi } => {
                let u = theta / self.h_theta - 0.5;
                let ub = u.floor();
                let wu = lagrange_weights(u - ub);
                let v = phi / self.h_phi;
                let vb = v.floor();
                let wv = lagrange_weights(v - vb);
                let mut out = Vec::with_capacity(36);
                for (a, &oa) in OFFSETS.iter().enumerate() {
                    for (b, &ob) in OFFSETS.iter().enumerate() {
                        let k = ghost_index(n_theta, n_phi, ub as isize + oa, vb as isize + ob);
                        out.push((k, wu[a] * wv[b]));
                    }
                }
                out
            }
        }
    }

    /// Removes azimuthal modes near the poles that would violate the explicit
    /// step bound at spacing `h_min`. No-op on S¹ and on rows that keep every
    /// mode.
    pub fn polar_filter(&self, values: &mut [f64]) {
        let Resolution::Sphere { n_theta, n_phi } = self.resolution else {
            return;
        };
        let mut buf = vec![Complex::new(0.0, 0.0); n_phi];
        for i in 0..n_theta {
            let cutoff = self.filter_cutoff[i];
            if cutoff >= n_phi / 2 {
                continue;
            }
            let row = &mut values[i * n_phi..(i + 1) * n_phi];
            for (b, &v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(v, 0.0);
            }
            self.fft_forward.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let m = if k <= n_phi / 2 { k } else { n_phi - k };
                if m > cutoff {
                    *b = Complex::new(0.0, 0.0);
                }
            }
            self.fft_inverse.process(&mut buf);
            let inv = 1.0 / n_phi as f64;
            for (v, b) in row.iter_mut().zip(&buf) {
                *v = b.re * inv;
            }
        }
    }

    /// Largest azimuthal wavenumber kept by the polar filter in row `i`.
    pub fn filter_cutoff(&self, row: usize) -> Option<usize> {
        self.filter_cutoff.get(row).copied()
    }
}

/// Node index of (row i, column j) with periodic columns and pole
/// reflection for rows outside `0..n_theta`.
fn ghost_index(n_theta: usize, n_phi: usize, i: isize, j: isize) -> usize {
    let nt = n_theta as isize;
    let (row, shift) = if i < 0 {
        (-1 - i, n_phi as isize / 2)
    } else if i >= nt {
        (2 * nt - 1 - i, n_phi as isize / 2)
    } else {
        (i, 0)
    };
    let col = (j + shift).rem_euclid(n_phi as isize);
    row as usize * n_phi + col as usize
}

fn ghost_value(f: &[f64], n_theta: usize, n_phi: usize, i: isize, j: isize) -> f64 {
    f[ghost_index(n_theta, n_phi, i, j)]
}

/// Lagrange basis weights for nodes at offsets -2..=3 evaluated at `t`.
fn lagrange_weights(t: f64) -> [f64; 6] {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let mut w = [1.0; 6];
    for a in 0..6 {
        for b in 0..6 {
            if a != b {
                w[a] *= (t - nodes[b]) / (nodes[a] - nodes[b]);
            }
        }
    }
    w
}

/// Real samples of a function on a grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite field value at node {k}")));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn derivatives(&self) -> CoordDerivatives {
        self.grid.derivatives(&self.values)
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn interpolate(&self, z: &Vec3) -> f64 {
        self.grid.interpolate(&self.values, z)
    }

    /// Sup-norm distance to a field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `∇̄ᵢ∇̄ⱼ f` per node in the coordinate frame.
pub fn covariant_hessian(f: &ScalarField) -> Vec<Sym2> {
    f.grid.hessian_from(&f.derivatives())
}

/// `|∇̄f|²_ḡ` per node.
pub fn covariant_gradient_normsq(f: &ScalarField) -> ScalarField {
    let values = f.grid.gradient_normsq_from(&f.derivatives());
    ScalarField {
        grid: f.grid.clone(),
        values,
    }
}

pub fn integrate(f: &ScalarField) -> f64 {
    f.integrate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_resolutions() {
        assert!(build_grid(4, &[32]).is_err());
        assert!(build_grid(2, &[8]).is_err());
        assert!(build_grid(2, &[17]).is_err());
        assert!(build_grid(3, &[16, 31]).is_err());
        assert!(build_grid(3, &[8, 32]).is_err());
        assert!(build_grid(3, &[64]).is_err());
    }

    #[test]
    fn circle_nodes_are_uniform() {
        let g = build_grid(2, &[16]).unwrap();
        for (k, c) in g.coords().iter().enumerate() {
            assert_eq!(c[0], k as f64 * PI / 8.0);
            assert_eq!(g.weights()[k], PI / 8.0);
        }
        assert!((g.coords()[4][0] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn nodes_are_unit_and_weights_sum_to_area() {
        for g in [build_grid(2, &[64]).unwrap(), build_grid(3, &[32, 64]).unwrap()] {
            for z in g.nodes() {
                assert!((norm(z) - 1.0).abs() <= 1e-14);
            }
            let total: f64 = g.weights().iter().sum();
            assert!((total - g.area()).abs() <= 1e-12 * g.area());
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn sphere_quadrature_converges_second_order() {
        let err = |nt: usize| {
            let g = build_grid(3, &[nt, 2 * nt]).unwrap();
            let f = ScalarField::from_fn(g, |z| z[2] * z[2]).unwrap();
            (f.integrate() - 4.0 * PI / 3.0).abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e2 < e1 / 3.5, "{e1} {e2}");
    }

    #[test]
    fn antipodes_are_negated_nodes() {
        for g in [build_grid(2, &[32]).unwrap(), build_grid(3, &[16, 32]).unwrap()] {
            for k in 0..g.len() {
                let a = g.antipode(k);
                let (z, w) = (g.nodes()[k], g.nodes()[a]);
                for c in 0..3 {
                    assert!((z[c] + w[c]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn constant_field_has_zero_hessian() {
        for g in [build_grid(2, &[64]).unwrap(), build_grid(3, &[16, 32]).unwrap()] {
            let f = ScalarField::constant(g, 2.5).unwrap();
            for h in covariant_hessian(&f) {
                assert!(h.tt.abs() < 1e-10 && h.tp.abs() < 1e-10 && h.pp.abs() < 1e-10);
            }
            assert!(covariant_gradient_normsq(&f).max() < 1e-20);
        }
    }

    #[test]
    fn spectral_hessian_of_cosine() {
        let g = build_grid(2, &[256]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |z| z[0]).unwrap();
        let h = covariant_hessian(&f);
        let err = g
            .coords()
            .iter()
            .zip(&h)
            .map(|(c, h)| (h.tt + c[0].cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn circle_gradient_of_sine() {
        let g = build_grid(2, &[128]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |z| z[1]).unwrap();
        let gn = covariant_gradient_normsq(&f);
        for (c, v) in g.coords().iter().zip(gn.values()) {
            assert!((v - c[0].cos().powi(2)).abs() < 1e-12);
        }
    }

    fn linear_hessian_error(nt: usize) -> f64 {
        // f = z3 = cos θ: ∇̄²f = −f ḡ
        let g = build_grid(3, &[nt, 2 * nt]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |z| z[2]).unwrap();
        let h = covariant_hessian(&f);
        let mut err: f64 = 0.0;
        for (k, hk) in h.iter().enumerate() {
            let fz = g.nodes()[k][2];
            let s = g.sin_theta(k);
            err = err
                .max((hk.tt + fz).abs())
                .max(hk.tp.abs())
                .max((hk.pp + fz * s * s).abs());
            assert!(!hk.tp.is_nan());
        }
        err
    }

    #[test]
    fn sphere_hessian_of_linear_function() {
        let (e1, e2) = (linear_hessian_error(16), linear_hessian_error(32));
        assert!(e1 < 1e-3, "{e1}");
        assert!(e2 <= e1 / 3.5, "{e1} {e2}");
    }

    fn tilted_hessian_error(nt: usize) -> f64 {
        // f = ⟨v, z⟩ for a generic unit v exercises every Hessian entry.
        let v = normalize(&[0.3, -0.5, 0.8]);
        let g = build_grid(3, &[nt, 2 * nt]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |z| dot(&v, z)).unwrap();
        let h = covariant_hessian(&f);
        let gn = covariant_gradient_normsq(&f);
        let mut err: f64 = 0.0;
        for (k, hk) in h.iter().enumerate() {
            let fz = dot(&v, &g.nodes()[k]);
            let s = g.sin_theta(k);
            err = err
                .max((hk.tt + fz).abs())
                .max(hk.tp.abs())
                .max((hk.pp + fz * s * s).abs())
                .max((gn.values()[k] - (1.0 - fz * fz)).abs());
        }
        err
    }

    #[test]
    fn sphere_derivatives_converge() {
        let (e1, e2) = (tilted_hessian_error(16), tilted_hessian_error(32));
        assert!(e2 <= e1 / 3.5, "{e1} {e2}");
    }

    #[test]
    fn quadrature_of_odd_functions_vanishes() {
        for g in [build_grid(2, &[64]).unwrap(), build_grid(3, &[32, 64]).unwrap()] {
            let f = ScalarField::from_fn(g.clone(), |z| z[0] + z[2] * z[2] * z[2] - 0.5 * z[1]).unwrap();
            assert!(f.integrate().abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolation_is_high_order() {
        let g = build_grid(3, &[32, 64]).unwrap();
        let f = |z: &Vec3| (1.0 + 0.3 * z[0] + 0.2 * z[1] * z[2]).exp();
        let field = ScalarField::from_fn(g.clone(), f).unwrap();
        for z in [
            normalize(&[0.1, 0.2, 0.97]),
            normalize(&[-0.7, 0.3, -0.2]),
            normalize(&[0.01, -0.02, -1.0]),
        ] {
            assert!((field.interpolate(&z) - f(&z)).abs() < 1e-6);
        }
        let c = build_grid(2, &[64]).unwrap();
        let cf = ScalarField::from_fn(c, |z| (z[0] * 0.5).exp()).unwrap();
        let z = [0.3f64.cos(), 0.3f64.sin(), 0.0];
        assert!((cf.interpolate(&z) - (0.5 * 0.3f64.cos()).exp()).abs() < 1e-7);
    }

    #[test]
    fn polar_filter_keeps_smooth_low_modes() {
        let g = build_grid(3, &[32, 64]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |z| 1.0 + z[0] - 0.4 * z[1] + z[2]).unwrap();
        let mut filtered = f.values().to_vec();
        g.polar_filter(&mut filtered);
        for (a, b) in filtered.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(g.filter_cutoff(0).unwrap() < 32);
        assert_eq!(g.filter_cutoff(16).unwrap(), 32);
    }
}
